#include "commands.hpp"

#include <algorithm>
#include <regex>
#include <sstream>

#include "CLI11.hpp"

namespace qfc2::cli {

namespace {

Json vec_json(const Vec& v) {
  Json a = Json::array();
  for (const Value& x : v) a.push_back(x.to_string());
  return a;
}

Json matrix_json(const Matrix& M) {
  Json a = Json::array();
  for (size_t i = 0; i < M.rows(); ++i) a.push_back(vec_json(M.row(i)));
  return a;
}

Json class_json(const ArtinSchreierClass& c) { return Json{{"class", c.reduced().to_string()}, {"trivial", c.is_trivial()}}; }

template <class W, class Fn>
Json verdict_json(const Verdict<W>& v, Fn&& witness) {
  Json j;
  j["verdict"] = to_string(v.kind);
  if (v.is_no()) j["certificate"] = to_string(v.cert);
  if (v.is_unknown()) j["height"] = v.height;
  if (v.witness) j["witness"] = witness(*v.witness);
  if (!v.detail.empty()) j["detail"] = v.detail;
  return j;
}

std::string error_kind(Error::Kind k) {
  switch (k) {
    case Error::Kind::division_by_zero: return "DivisionByZero";
    case Error::Kind::field_mismatch: return "FieldMismatch";
    case Error::Kind::precondition_failed: return "PreconditionFailed";
    case Error::Kind::degenerate_input: return "Degenerate";
    case Error::Kind::not_nonsingular: return "NotNonsingular";
    case Error::Kind::unsupported: return "Unsupported";
    case Error::Kind::parse_error: return "ParseError";
    case Error::Kind::criteria_disagree: return "CriteriaDisagree";
  }
  return "Error";
}

/// Report of an exception, with its exit code.
std::pair<Json, int> error_report() {
  try {
    throw;
  } catch (const ParseError& e) {
    return {Json{{"kind", "ParseError"}, {"line", e.line()}, {"column", e.column()}, {"message", e.message()}},
            exit_usage};
  } catch (const Error& e) {
    return {Json{{"kind", error_kind(e.kind())}, {"message", e.what()}},
            e.kind() == Error::Kind::unsupported ? exit_unsupported : exit_usage};
  } catch (const CLI::ParseError& e) {
    return {Json{{"kind", "UsageError"}, {"message", e.what()}}, exit_usage};
  } catch (const std::exception& e) {
    return {Json{{"kind", "InternalError"}, {"message", e.what()}}, exit_usage};
  }
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

struct Options {
  std::string field;
  int height = -1;
  int64_t seed = -1;
  bool json = false;
  std::string golden;
  std::vector<std::string> args;
  std::string arg1, arg2;
  std::string form, conic, x, against, checks, iso, ids;
  bool roundtrip = false;
  size_t count = 100;
};

/// State of one command run.
struct Ctx {
  Field f;
  int h;
  uint64_t seed;
  const Bindings& b;
  Json r;
  bool unknown = false;

  void require(VerdictKind k) {
    if (k == VerdictKind::unknown) unknown = true;
  }
};

Json iso_witness(const IsometryWitness& w) { return Json{{"T", matrix_json(w.T)}, {"verified", w.verify()}}; }

const std::string& one_arg(const Options& o, const std::string& what) {
  if (o.args.size() != 1) throw CLI::ValidationError(what, "expected exactly one argument");
  return o.args[0];
}

std::string form_text(const Options& o) {
  if (!o.form.empty()) {
    if (!o.args.empty()) throw CLI::ValidationError("--form", "form given twice");
    return o.form;
  }
  return one_arg(o, "form");
}

// ---- subcommands

void cmd_analyze(Ctx& c, const Options& o) {
  const QuadraticForm q = parse_form(c.f, form_text(o), c.b);
  const Analysis an = analyze(q);
  c.r["form"] = q.to_string();
  c.r["dim"] = q.dim();
  c.r["radical_dim"] = an.radical_dim;
  c.r["classification"] = to_string(an.classification);
  const NormalForm nf = block_normalize(q);
  c.r["normal_form"] = nf.form.to_string();
  c.r["normal_form_verified"] = nf.witness.verify();
  if (an.classification == Classification::nonsingular) c.r["arf"] = class_json(arf(q));
  const auto iso = isotropic_vector(q, c.h);
  c.r["isotropic"] = verdict_json(iso, [&](const Vec& v) {
    return Json{{"vector", vec_json(v)}, {"verified", !is_zero(v) && q(v).is_zero()}};
  });
  c.require(iso.kind);
}

void cmd_witt(Ctx& c, const Options& o) {
  const QuadraticForm q = parse_form(c.f, form_text(o), c.b);
  const WittDecomposition W = witt_decompose(q, c.h);
  c.r["form"] = q.to_string();
  c.r["index"] = W.index;
  c.r["anisotropic_part"] = W.anisotropic_part.to_string();
  c.r["witness_verified"] = W.witness.verify();
  c.r["anisotropic"] = verdict_json(W.residual, [](const Vec& v) { return vec_json(v); });
  if (W.anisotropic_part.dim() > 0) c.require(W.residual.kind);
}

void cmd_isometric(Ctx& c, const Options& o) {
  if (o.args.size() != 2) throw CLI::ValidationError("isometric", "expected two forms");
  const QuadraticForm q1 = parse_form(c.f, o.args[0], c.b), q2 = parse_form(c.f, o.args[1], c.b);
  c.r["forms"] = Json::array({q1.to_string(), q2.to_string()});
  const auto v = is_isometric(q1, q2, c.h);
  c.r["isometric"] = verdict_json(v, iso_witness);
  c.require(v.kind);
}

void cmd_quat(Ctx& c, const Options& o) {
  const Quat H = parse_quat(c.f, one_arg(o, "quat"), c.b);
  c.r["algebra"] = print_quat(H);
  c.r["norm_form"] = H->norm_form().to_string();
  c.r["pure_norm_form"] = H->pure_norm_form().to_string();
  const DivisionReport d = is_division(H, c.h);
  Json dj{{"verdict", to_string(d.kind)}};
  if (d.kind != VerdictKind::unknown) dj["certificate"] = to_string(d.cert);
  if (d.zero_divisor) dj["zero_divisor"] = d.zero_divisor->to_string();
  if (d.idempotent) dj["idempotent"] = d.idempotent->to_string();
  if (d.kind == VerdictKind::unknown) dj["height"] = d.height;
  if (!d.detail.empty()) dj["detail"] = d.detail;
  c.r["division"] = dj;
  c.require(d.kind);
  if (!o.conic.empty()) {
    const Quat Q = parse_quat(c.f, o.conic, c.b);
    c.r["conic"] = print_quat(Q);
    const auto v = split_by_FQ(H, Q, c.h);
    c.r["split_over_FQ"] = verdict_json(v, [](const SplitByFQ& s) {
      Json j{{"split", s.split}};
      if (s.idempotent) j["idempotent"] = s.idempotent->to_string();
      if (s.norm_isometry) j["norm_isometry_verified"] = s.norm_isometry->verify();
      return j;
    });
    c.require(v.kind);
  }
}

void cmd_alg(Ctx& c, const Options& o) {
  const Expr e = parse_algebra(c.f, one_arg(o, "algebra"), c.b);
  const Alg A = materialize(e);
  c.r["algebra"] = e->to_string();
  c.r["dim"] = A->dim();
  c.r["degree"] = A->degree();
  if (A->degree() >= 2) c.r["involution"] = to_string(involution_type(*A));
  std::vector<std::string> checks = split_list(o.checks.empty() ? "isotropy,hyperbolicity" : o.checks);
  if (!o.conic.empty() && std::find(checks.begin(), checks.end(), "contains-q") == checks.end())
    checks.push_back("contains-q");
  auto element = [&](const Vec& v) { return Json{{"element", A->element_to_string(v)}}; };
  for (const std::string& k : checks) {
    if (k == "isotropy") {
      const auto v = isotropy(*A, c.h);
      c.r["isotropy"] = verdict_json(v, element);
      c.require(v.kind);
    } else if (k == "hyperbolicity") {
      const auto v = hyperbolicity(*A, c.h);
      c.r["hyperbolicity"] = verdict_json(v, element);
      c.require(v.kind);
    } else if (k == "contains-q") {
      if (o.conic.empty()) throw CLI::ValidationError("--check", "contains-q needs --conic");
      const Quat Q = parse_quat(c.f, o.conic, c.b);
      c.r["conic"] = print_quat(Q);
      const auto v = contains_Q_canonical(*A, Q, c.h);
      c.r["contains_Q"] = verdict_json(v, [&](const QuaternionPair& pq) {
        return Json{{"p", A->element_to_string(pq.p)},
                    {"q", A->element_to_string(pq.q)},
                    {"verified", check_quaternion_pair(*A, Q->r(), Q->s(), pq)}};
      });
      c.require(v.kind);
    } else {
      throw CLI::ValidationError("--check", "unknown check '" + k + "' for alg");
    }
  }
}

Json pfister3_json(const Pfister3& p) {
  return Json{{"slots", vec_json({p.c1, p.c2, p.c3})}, {"form", p.form.to_string()}, {"hyperbolic", p.hyperbolic}};
}

void cmd_deg4(Ctx& c, const Options& o) {
  const Expr e = parse_algebra(c.f, one_arg(o, "algebra"), c.b);
  const Deg4Symplectic d = o.x.empty() ? Deg4Symplectic(e) : Deg4Symplectic(e, parse_vector(c.f, o.x, c.b));
  const Alg& A = d.algebra();
  c.r["algebra"] = e->to_string();
  c.r["x"] = A->element_to_string(d.x());
  const PfaffianData pf = pfaffian(A);
  Json basis = Json::array();
  for (const Vec& s : pf.symd_basis) basis.push_back(A->element_to_string(s));
  c.r["pfaffian"] = Json{{"symd_basis", basis}, {"nrp", pf.nrp.to_string()}, {"trp", vec_json(pf.trp)}};
  const auto rd = relative_discriminant(d, c.h);
  c.r["relative_discriminant"] = verdict_json(rd, pfister3_json);
  c.require(rd.kind);
  if (!o.against.empty()) {
    const Deg4Symplectic d2(e, parse_vector(c.f, o.against, c.b));
    const auto v = conjugate_test(d, d2, c.h);
    c.r["conjugate"] = verdict_json(v, iso_witness);
    c.require(v.kind);
  }
  if (!o.conic.empty()) {
    const Quat Q = parse_quat(c.f, o.conic, c.b);
    c.r["conic"] = print_quat(Q);
    const auto iso = isotropy(*A, c.h);
    if (iso.is_yes()) {
      c.r["over_FQ"] = Json{{"skipped", "involution is isotropic"}};
      return;
    }
    const auto v = hyperbolic_over_FQ_deg4(d, Q, c.h);
    c.r["over_FQ"] = verdict_json(v, [&](const Deg4Classification& k) {
      Json j{{"case", to_string(k.tag)}, {"anisotropy", k.anisotropy}, {"contains_Q", to_string(k.contains_Q)}};
      if (k.pair) j["pair"] = Json{{"p", A->element_to_string(k.pair->p)}, {"q", A->element_to_string(k.pair->q)}};
      if (k.lambda) j["lambda"] = k.lambda->to_string();
      if (k.j) j["j"] = pfister3_json(*k.j);
      j["algebra_division"] = to_string(k.algebra_division);
      j["tensor_division"] = to_string(k.tensor_division);
      return j;
    });
    c.require(v.kind);
  }
}

void cmd_pair(Ctx& c, const Options& o) {
  const QuadraticPair P = parse_pair(c.f, one_arg(o, "pair"), c.b);
  c.r["pair"] = P.to_string();
  c.r["algebra"] = P.expr()->to_string();
  c.r["degree"] = P.degree();
  std::string list = o.checks.empty() ? (o.conic.empty() ? "disc,hyperbolic" : "disc,hyperbolic,fq-hyperbolic") : o.checks;
  if (!o.iso.empty() && o.checks.empty()) list += ",iso";
  const Algebra& A = *P.algebra();
  for (const std::string& k : split_list(list)) {
    if (k == "disc") {
      c.r["discriminant"] = class_json(pair_discriminant(P));
    } else if (k == "hyperbolic") {
      const auto v = pair_hyperbolic(P, c.h);
      c.r["hyperbolic"] = verdict_json(v, [&](const Vec& e) {
        return Json{{"idempotent", A.element_to_string(e)}, {"verified", check_pair_hyperbolic(P, e)}};
      });
      c.require(v.kind);
    } else if (k == "adjoint") {
      c.r["adjoint_form"] = adjoint_form(P).to_string();
    } else if (k == "fq-hyperbolic") {
      if (o.conic.empty()) throw CLI::ValidationError("--check", "fq-hyperbolic needs --conic");
      const Quat Q = parse_quat(c.f, o.conic, c.b);
      c.r["conic"] = print_quat(Q);
      const auto v = pair_over_FQ(P, Q, c.h);
      c.r["over_FQ"] = verdict_json(v, [&](const PairOverFQ& w) {
        Json j{{"shape", to_string(w.shape)}, {"contains_Q", to_string(w.contains_Q)}, {"hyperbolic_over_F", w.hyperbolic_over_F}};
        if (w.form) {
          j["adjoint_form"] = w.form->to_string();
          j["witt_index"] = w.witt_index;
        }
        if (w.discriminant) j["discriminant"] = class_json(*w.discriminant);
        if (w.multiple) j["multiple_of_nQ"] = w.multiple->witness.verify();
        if (w.idempotent) j["idempotent_verified"] = check_pair_hyperbolic(P, *w.idempotent);
        if (w.H_plus) j["H_plus"] = print_quat(*w.H_plus);
        if (w.H_minus) j["H_minus"] = print_quat(*w.H_minus);
        return j;
      });
      c.require(v.kind);
    } else if (k == "iso") {
      if (o.iso.empty()) throw CLI::ValidationError("--check", "iso needs --iso");
      const QuadraticPair P2 = parse_pair(c.f, o.iso, c.b);
      c.r["other"] = P2.to_string();
      const auto v = pair_isomorphic(P, P2, c.h);
      c.r["isomorphic"] = verdict_json(v, [&](const Matrix& M) { return Json{{"verified", PairMap{P, P2, M}.verify()}}; });
      c.require(v.kind);
    } else {
      throw CLI::ValidationError("--check", "unknown check '" + k + "' for pair");
    }
  }
}

void cmd_clifford(Ctx& c, const Options& o) {
  const QuadraticForm q = parse_form(c.f, form_text(o), c.b);
  const EvenClifford C = even_clifford(q);
  const Algebra& A = *C.algebra;
  const size_t n = q.dim();
  c.r["form"] = q.to_string();
  c.r["algebra_dim"] = A.dim();
  c.r["basis"] = A.labels();
  const auto center = center_basis(A);
  c.r["center_dim"] = center.size();
  if (n % 2 == 0) {
    // z^2 = a z + b: the center is F[X]/(X^2 + X + b/a^2)
    for (const Vec& z : center) {
      if (A.as_scalar(z)) continue;
      const auto ab = solve(Matrix::from_columns(c.f, A.dim(), {z, A.one()}), A.mul(z, z));
      if (ab && !(*ab)[0].is_zero()) c.r["center"] = class_json(as_class((*ab)[1] / ((*ab)[0] * (*ab)[0])));
    }
  } else {
    const auto v = hyperbolicity(A, c.h);
    c.r["hyperbolicity"] = verdict_json(v, [&](const Vec& e) { return Json{{"element", A.element_to_string(e)}}; });
    c.require(v.kind);
  }
  if (o.roundtrip) {
    if (n != 5) throw Error(Error::Kind::precondition_failed, "--dim5-roundtrip needs a 5-dimensional form");
    const RecoveredForm R = recover_form(C);
    c.r["recovered"] = R.form.to_string();
    const auto v = similar(R.form, q, c.h);
    c.r["similar"] = verdict_json(v, [](const Similarity& s) {
      return Json{{"factor", s.factor.to_string()}, {"verified", s.witness.verify()}};
    });
    c.require(v.kind);
    const TensorModel tm = tensor_model(C);
    c.r["tensor_model"] = Json{{"Q1", print_quat(tm.Q1)}, {"Q2", print_quat(tm.Q2)}, {"verified", tm.map.verify()}};
  }
  if (!o.conic.empty()) {
    const Quat Q = parse_quat(c.f, o.conic, c.b);
    c.r["conic"] = print_quat(Q);
    const auto v = embed_Q_from_domination(C, Q->r(), Q->s(), c.h);
    c.r["embedding"] = verdict_json(v, [&](const QFromDomination& d) {
      return Json{{"factor", d.factor.to_string()},
                  {"p", A.element_to_string(d.pair.p)},
                  {"q", A.element_to_string(d.pair.q)},
                  {"verified", check_quaternion_pair(A, Q->r(), Q->s(), d.pair)}};
    });
    c.require(v.kind);
  }
}

void cmd_minimal5(Ctx& c, const Options& o) {
  const QuadraticForm q = parse_form(c.f, form_text(o), c.b);
  if (o.conic.empty()) throw CLI::ValidationError("--conic", "minimal5 needs --conic");
  const Quat Q = parse_quat(c.f, o.conic, c.b);
  c.r["form"] = q.to_string();
  c.r["conic"] = print_quat(Q);
  const auto v = fq_minimal_5(q, Q, c.h);
  c.r["minimal"] = verdict_json(v, [](const Minimal5Report& m) {
    Json j;
    auto part = [](VerdictKind k, const std::string& detail) {
      Json p{{"verdict", to_string(k)}};
      if (!detail.empty()) p["detail"] = detail;
      return p;
    };
    j["isotropic_over_F"] = part(m.isotropic_over_F, m.isotropic_over_F_detail);
    j["isotropic_over_FQ"] = part(m.isotropic_over_FQ, m.isotropic_over_FQ_detail);
    j["dominates_conic"] = part(m.dominates_conic, m.dominates_conic_detail);
    if (m.isotropic_vector) j["isotropic_vector"] = vec_json(*m.isotropic_vector);
    if (m.conic) j["conic_factor"] = m.conic->factor.to_string();
    Json cond;
    cond["a"] = Json{{"lambda", m.lambda ? Json(m.lambda->to_string()) : Json(nullptr)},
                     {"neighbour_check", to_string(m.neighbour_check)}};
    cond["b"] = Json{{"coindex_two", to_string(m.coindex_two)},
                     {"Qp", m.Qp ? Json(print_quat(*m.Qp)) : Json(nullptr)},
                     {"tensor_division", to_string(m.tensor_division)}};
    j["conditions"] = cond;
    if (m.classification) j["case"] = to_string(m.classification->tag);
    j["decided_by"] = m.decided_by;
    return j;
  });
  c.require(v.kind);
}

void cmd_identities(Ctx& c, const Options& o) {
  std::vector<int> ids;
  for (const std::string& s : split_list(o.ids.empty() ? "1,2,3,4,5" : o.ids)) {
    const int id = std::atoi(s.c_str());
    if (id < 1 || id > 5) throw CLI::ValidationError("--ids", "identities are numbered 1 to 5");
    ids.push_back(id);
  }
  const auto cases = identity_suite(c.f, o.count, ids, c.h, c.seed);
  size_t passed = 0, failed = 0, unknown = 0;
  Json per = Json::object();
  for (int id : ids) per[std::to_string(id)] = Json{{"passed", 0}, {"failed", 0}, {"unknown", 0}};
  for (const IdentityCase& k : cases) {
    const char* slot = "failed";
    if (k.error.empty() && k.result.is_yes() && k.result.witness->witness.verify()) {
      slot = "passed";
      ++passed;
    } else if (k.error.empty() && k.result.is_unknown()) {
      slot = "unknown";
      ++unknown;
    } else {
      ++failed;
    }
    Json& e = per[std::to_string(k.id)][slot];
    e = e.get<int>() + 1;
  }
  c.r["count"] = cases.size();
  c.r["passed"] = passed;
  c.r["failed"] = failed;
  c.r["unknown"] = unknown;
  c.r["per_identity"] = per;
  if (failed + unknown > 0) c.unknown = true;
}

}  // namespace

Outcome run_command(const Session& session, const std::vector<std::string>& args) {
  Options o;
  CLI::App app{"Quadratic forms, quaternion algebras and involutions in characteristic 2", "qfc2"};
  app.fallthrough();
  app.require_subcommand(1);
  app.add_option("--field", o.field, "field: gf2, gf4, gf(2^k), gf2(t), gf2(s,t), ...");
  app.add_option("--height", o.height, "search bound");
  app.add_option("--seed", o.seed, "random seed");
  app.add_flag("--json", o.json, "JSON output");
  app.add_option("--golden", o.golden, "run a script and compare with its .json golden file");

  auto sub = [&](const char* name, const char* help) { return app.add_subcommand(name, help); };
  auto* analyze_c = sub("analyze", "classification, normal form, Arf invariant, isotropy");
  analyze_c->add_option("FORM", o.arg1);
  analyze_c->add_option("--form", o.form);
  auto* witt_c = sub("witt", "Witt decomposition");
  witt_c->add_option("FORM", o.arg1);
  witt_c->add_option("--form", o.form);
  auto* iso_c = sub("isometric", "isometry of two forms");
  iso_c->add_option("FORM1", o.arg1)->required();
  iso_c->add_option("FORM2", o.arg2)->required();
  auto* quat_c = sub("quat", "quaternion algebra: division, split over F_Q");
  quat_c->add_option("ALGEBRA", o.arg1);
  quat_c->add_option("--conic", o.conic);
  auto* alg_c = sub("alg", "algebra with involution: isotropy, hyperbolicity, (Q, bar)");
  alg_c->add_option("ALGEBRA", o.arg1);
  alg_c->add_option("--check", o.checks, "isotropy,hyperbolicity,contains-q");
  alg_c->add_option("--conic", o.conic);
  auto* deg4_c = sub("deg4", "degree-4 symplectic involution Int(x) o gamma");
  deg4_c->add_option("ALGEBRA", o.arg1);
  deg4_c->add_option("--x", o.x, "coordinates of x");
  deg4_c->add_option("--against", o.against, "coordinates of a second x for conjugacy");
  deg4_c->add_option("--conic", o.conic);
  auto* pair_c = sub("pair", "quadratic pair");
  pair_c->add_option("PAIR", o.arg1);
  pair_c->add_option("--check", o.checks, "disc,hyperbolic,adjoint,fq-hyperbolic,iso");
  pair_c->add_option("--conic", o.conic);
  pair_c->add_option("--iso", o.iso, "second pair");
  auto* cl_c = sub("clifford", "even Clifford algebra");
  cl_c->add_option("FORM", o.arg1);
  cl_c->add_option("--form", o.form);
  cl_c->add_flag("--dim5-roundtrip", o.roundtrip);
  cl_c->add_option("--conic", o.conic);
  auto* min_c = sub("minimal5", "F_Q-minimality of a 5-dimensional form");
  min_c->add_option("FORM", o.arg1);
  min_c->add_option("--form", o.form);
  min_c->add_option("--conic", o.conic);
  auto* id_c = sub("verify-identities", "random instances of the rewrite identities");
  id_c->add_option("--count", o.count);
  id_c->add_option("--ids", o.ids);

  Outcome out;
  std::string command;
  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
    // single strings: CLI11 would split "[a,b]" for vector options
    for (const std::string* a : {&o.arg1, &o.arg2})
      if (!a->empty()) o.args.push_back(*a);
    for (auto* s : app.get_subcommands()) command = s->get_name();
  } catch (const CLI::CallForHelp&) {
    out.help = app.help();
    for (auto* s : app.get_subcommands()) out.help = s->help();
    return out;
  } catch (...) {
    auto [e, code] = error_report();
    out.report = Json{{"schema", kSchema}, {"error", e}};
    out.exit_code = code;
    return out;
  }

  Session s = session;
  Ctx c{s.field, s.height, s.seed, s.bindings, Json::object()};
  try {
    if (!o.field.empty()) {
      const Field f = parse_field(o.field);
      if (f != s.field) s.bindings = {};
      s.field = f;
    }
    if (o.height >= 0) s.height = o.height;
    if (o.seed >= 0) s.seed = static_cast<uint64_t>(o.seed);
    c.f = s.field;
    c.h = s.height;
    c.seed = s.seed;
    c.r["schema"] = kSchema;
    c.r["command"] = command;
    c.r["field"] = c.f->name();
    c.r["height"] = c.h;
    if (command == "verify-identities") c.r["seed"] = c.seed;
    if (command == "analyze") cmd_analyze(c, o);
    else if (command == "witt") cmd_witt(c, o);
    else if (command == "isometric") cmd_isometric(c, o);
    else if (command == "quat") cmd_quat(c, o);
    else if (command == "alg") cmd_alg(c, o);
    else if (command == "deg4") cmd_deg4(c, o);
    else if (command == "pair") cmd_pair(c, o);
    else if (command == "clifford") cmd_clifford(c, o);
    else if (command == "minimal5") cmd_minimal5(c, o);
    else if (command == "verify-identities") cmd_identities(c, o);
    out.exit_code = c.unknown ? exit_unknown : exit_ok;
  } catch (...) {
    auto [e, code] = error_report();
    c.r["error"] = e;
    out.exit_code = code;
  }
  if (!c.r.contains("schema")) c.r = Json{{"schema", kSchema}, {"command", command}, {"error", c.r["error"]}};
  out.report = std::move(c.r);
  return out;
}

std::vector<std::string> split_words(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false, have = false;
  for (size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (ch == '"') {
      quoted = !quoted;
      have = true;
    } else if (!quoted && std::isspace(static_cast<unsigned char>(ch))) {
      if (have) out.push_back(cur);
      cur.clear();
      have = false;
    } else if (ch == '\\' && i + 1 < line.size() && line[i + 1] == '"') {
      cur += '"';
      ++i;
      have = true;
    } else {
      cur += ch;
      have = true;
    }
  }
  if (quoted) throw ParseError(1, line.size() + 1, "unterminated quote");
  if (have) out.push_back(cur);
  return out;
}

namespace {

std::string trim(const std::string& s) {
  const size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

void bind(Session& s, const std::string& kind, const std::string& rest) {
  const size_t eq = rest.find('=');
  if (eq == std::string::npos) throw ParseError(1, kind.size() + 2, "expected NAME = TEXT");
  const std::string name = trim(rest.substr(0, eq));
  const std::string text = rest.substr(eq + 1);
  const bool ident = !name.empty() && (std::isalpha(static_cast<unsigned char>(name[0])) || name[0] == '_') &&
                     std::all_of(name.begin(), name.end(), [](char ch) { return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_'; });
  if (!ident) throw ParseError(1, kind.size() + 2, "bad name '" + name + "'");
  for (const std::string& v : s.field->variables())
    if (v == name) throw ParseError(1, kind.size() + 2, "'" + name + "' is a variable of the field");
  static const std::vector<std::string> reserved{"w", "F", "H", "box", "gram", "quat", "Ad", "Int"};
  if (std::find(reserved.begin(), reserved.end(), name) != reserved.end())
    throw ParseError(1, kind.size() + 2, "'" + name + "' is reserved");
  Bindings& b = s.bindings;
  b.scalars.erase(name);
  b.forms.erase(name);
  b.quats.erase(name);
  b.algebras.erase(name);
  if (kind == "scalar") b.scalars.emplace(name, parse_scalar(s.field, text, b));
  else if (kind == "form") b.forms.emplace(name, parse_form(s.field, text, b));
  else if (kind == "quat") b.quats.emplace(name, parse_quat(s.field, text, b));
  else b.algebras.emplace(name, parse_algebra(s.field, text, b));
}

}  // namespace

Outcome run_script(const std::string& text, const std::string& name, Session session) {
  Json results = Json::array();
  int worst = exit_ok;
  std::istringstream in(text);
  std::string raw;
  size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    const size_t sp = line.find_first_of(" \t");
    const std::string head = line.substr(0, sp);
    const std::string rest = sp == std::string::npos ? "" : trim(line.substr(sp));
    Json entry{{"line", lineno}, {"input", line}};
    try {
      if (head == "field") {
        session.field = parse_field(rest);
        session.bindings = {};
        continue;
      }
      if (head == "height" || head == "seed") {
        const long long v = std::stoll(rest);
        if (v < 0) throw ParseError(1, head.size() + 2, "expected a nonnegative integer");
        if (head == "height") session.height = static_cast<int>(v);
        else session.seed = static_cast<uint64_t>(v);
        continue;
      }
      // "quat" and "alg" are also subcommands; a binding has NAME '=' next
      static const std::regex binding(R"(^[A-Za-z_]\w*\s*=.*)");
      if ((head == "scalar" || head == "form" || head == "quat" || head == "alg") && std::regex_match(rest, binding)) {
        bind(session, head, rest);
        continue;
      }
      const Outcome o = run_command(session, split_words(line));
      entry["exit"] = o.exit_code;
      entry["report"] = o.report;
      worst = std::max(worst, o.exit_code);
    } catch (...) {
      auto [e, code] = error_report();
      entry["exit"] = code;
      entry["report"] = Json{{"schema", kSchema}, {"error", e}};
      worst = std::max(worst, code);
    }
    results.push_back(std::move(entry));
  }
  Outcome out;
  out.report = Json{{"schema", kSchema}, {"script", name}, {"results", std::move(results)}};
  out.exit_code = worst;
  return out;
}

std::vector<IdentityCase> identity_suite(Field f, size_t count, const std::vector<int>& ids, int height, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<IdentityCase> out;
  out.reserve(count);
  auto rv = [&] { return random_value(f, height, rng); };
  for (size_t i = 0; i < count; ++i) {
    IdentityCase k;
    k.id = ids[i % ids.size()];
    switch (k.id) {
      case 1: k.operands = {rv(), rv(), rv(), rv()}; break;
      case 2: k.operands = {rv(), rv()}; break;
      case 3: k.operands = {random_nonzero(f, height, rng), rv(), rv()}; break;
      case 4: k.operands = {rv(), rv(), rv()}; break;
      default: {
        // c1 = [b1,b2](x,y) makes the input isotropic
        for (;;) {
          const Value b1 = rv(), b2 = rv(), x = random_polynomial(f, 1, rng), y = random_polynomial(f, 1, rng);
          const Value c1 = b1 * x * x + x * y + b2 * y * y;
          if (c1.is_zero()) continue;
          k.operands = {b1, b2, c1};
          break;
        }
      }
    }
    try {
      k.result = apply_identity(k.id, k.operands, height);
    } catch (const Error& e) {
      k.error = e.what();
    }
    out.push_back(std::move(k));
  }
  return out;
}

namespace {

void render(const Json& j, const std::string& prefix, std::string& out) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) render(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out);
    return;
  }
  if (j.is_array() && std::any_of(j.begin(), j.end(), [](const Json& e) { return e.is_structured(); })) {
    for (size_t i = 0; i < j.size(); ++i) render(j[i], prefix + "[" + std::to_string(i) + "]", out);
    return;
  }
  std::string v;
  if (j.is_string()) {
    v = j.get<std::string>();
  } else if (j.is_array()) {
    v = "[";
    for (size_t i = 0; i < j.size(); ++i) v += (i ? ", " : "") + (j[i].is_string() ? j[i].get<std::string>() : j[i].dump());
    v += "]";
  } else {
    v = j.dump();
  }
  out += prefix + ": " + v + "\n";
}

}  // namespace

std::string render_text(const Json& j) {
  std::string out;
  render(j, "", out);
  return out;
}

}  // namespace qfc2::cli
