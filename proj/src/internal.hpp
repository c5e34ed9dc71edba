#pragma once

#include <functional>
#include <optional>

#include "qfc2/forms.hpp"

namespace qfc2::detail {

constexpr size_t kSearchBudget = 60000;

/// Bounded search for x != 0 with Q(x) = 0 and accept(x), in enumeration order.
std::optional<Vec> search_isotropic(const QuadraticForm& Q, int height, const std::function<bool(const Vec&)>& accept,
                                    size_t budget = kSearchBudget);

QuadraticForm lift_form(const QuadraticForm& q, Field f);

/// Columns spanning {u in span W : phi(u) = 0 for each functional phi (given in W-coordinates)}.
Matrix complement_of(const Matrix& W, const std::vector<Vec>& functionals);

}  // namespace qfc2::detail
