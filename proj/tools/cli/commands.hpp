#pragma once

// Subcommands, sessions and scripts. Every command yields a JSON report and an exit code:
// 0 decisive, 1 parse or usage error, 2 unsupported shape, 3 Unknown in a required check.

#include <string>
#include <vector>

#include "grammar.hpp"
#include "json.hpp"

namespace qfc2::cli {

using Json = nlohmann::ordered_json;

inline constexpr int kSchema = 1;

enum Exit : int { exit_ok = 0, exit_usage = 1, exit_unsupported = 2, exit_unknown = 3 };

struct Session {
  Field field = gf(1);
  int height = 2;
  uint64_t seed = 1;
  Bindings bindings;
};

struct Outcome {
  Json report;
  int exit_code = exit_ok;
  std::string help;  // set for --help
};

/// args[0] is the subcommand; global flags may appear before or after it.
Outcome run_command(const Session& session, const std::vector<std::string>& args);

/// One statement or command per line; '#' starts a comment. Statements:
///   field SPEC | height N | seed N | scalar|form|quat|alg NAME = TEXT
Outcome run_script(const std::string& text, const std::string& name, Session session = {});

/// Shell-like word splitting with double quotes.
std::vector<std::string> split_words(const std::string& line);

struct IdentityCase {
  int id = 0;
  Vec operands;
  Verdict<IdentityResult> result;
  std::string error;  // precondition failures
};
/// count instances cycling through the identities in ids; operands of identity 5 are isotropic by construction.
std::vector<IdentityCase> identity_suite(Field f, size_t count, const std::vector<int>& ids, int height, uint64_t seed);

/// key: value lines for terminal output.
std::string render_text(const Json& j);

}  // namespace qfc2::cli
