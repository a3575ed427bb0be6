#include "convaff/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

namespace convaff::cli {

namespace {

using Vec = Vector<double>;
using Mat = Matrix<double>;

// ---------------------------------------------------------------------------
// Strict reading

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw Error(ErrorKind::Schema, path + ": " + what);
}

std::string at(const std::string& path, const std::string& key) { return path + "." + key; }
std::string at(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

void expect_object(const Json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
}

void allow_keys(const Json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  expect_object(j, path);
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* k) { return it.key() == k; }))
      fail(at(path, it.key()), "unknown field");
  }
}

const Json& field(const Json& j, const std::string& path, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) fail(at(path, key), "missing required field");
  return *it;
}

double number(const Json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(path, "expected a finite number");
  return v;
}

std::string text(const Json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

long integer(const Json& j, const std::string& path, long lo) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  const long v = j.get<long>();
  if (v < lo) fail(path, "expected an integer >= " + std::to_string(lo));
  return v;
}

Vec vector_of(const Json& j, const std::string& path, Index expected = -1) {
  if (!j.is_array()) fail(path, "expected an array of numbers");
  if (j.empty()) fail(path, "expected a nonempty array");
  if (expected >= 0 && static_cast<Index>(j.size()) != expected)
    fail(path, "expected " + std::to_string(expected) + " numbers, got " + std::to_string(j.size()));
  Vec v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Index>(i)) = number(j[i], at(path, i));
  return v;
}

// Array of points of equal dimension, returned as columns.
Mat points_of(const Json& j, const std::string& path, Index dim = -1) {
  if (!j.is_array()) fail(path, "expected an array of points");
  if (j.empty()) fail(path, "expected at least one point");
  const Vec first = vector_of(j[0], at(path, std::size_t{0}), dim);
  Mat m(first.size(), static_cast<Index>(j.size()));
  m.col(0) = first;
  for (std::size_t i = 1; i < j.size(); ++i) m.col(static_cast<Index>(i)) = vector_of(j[i], at(path, i), first.size());
  return m;
}

MaxAffineFn<double> max_affine_of(const Json& j, const std::string& path, Index dim = -1) {
  allow_keys(j, path, {"pieces"});
  const std::string pp = at(path, "pieces");
  const Json& pieces = field(j, path, "pieces");
  if (!pieces.is_array() || pieces.empty()) fail(pp, "expected a nonempty array of {a, b}");
  Mat a;
  Vec b(static_cast<Index>(pieces.size()));
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    const std::string ip = at(pp, i);
    allow_keys(pieces[i], ip, {"a", "b"});
    const Vec ai = vector_of(field(pieces[i], ip, "a"), at(ip, "a"), i == 0 ? dim : a.cols());
    if (i == 0) a.resize(static_cast<Index>(pieces.size()), ai.size());
    a.row(static_cast<Index>(i)) = ai.transpose();
    b(static_cast<Index>(i)) = number(field(pieces[i], ip, "b"), at(ip, "b"));
  }
  return {std::move(a), std::move(b)};
}

PolyhedralSublinear<double> sublinear_of(const Json& j, const std::string& path, Index dim = -1) {
  allow_keys(j, path, {"pieces"});
  return PolyhedralSublinear<double>(Mat(points_of(field(j, path, "pieces"), at(path, "pieces"), dim).transpose()));
}

AffineMap<double> affine_of(const Json& j, const std::string& path, Index dim) {
  allow_keys(j, path, {"w", "c"});
  return {vector_of(field(j, path, "w"), at(path, "w"), dim), number(field(j, path, "c"), at(path, "c"))};
}

// {"matrix": rows, "offset": vector}; rows index the output coordinates.
AffineTransform<double> transform_of(const Json& j, const std::string& path, Index in_dim, Index out_dim) {
  allow_keys(j, path, {"matrix", "offset"});
  const Mat rows = points_of(field(j, path, "matrix"), at(path, "matrix"), in_dim);
  if (out_dim >= 0 && rows.cols() != out_dim)
    fail(at(path, "matrix"), "expected " + std::to_string(out_dim) + " rows, got " + std::to_string(rows.cols()));
  return {Mat(rows.transpose()), vector_of(field(j, path, "offset"), at(path, "offset"), rows.cols())};
}

Polytope<double> polytope_of(const Json& j, const std::string& path, Index dim,
                             std::initializer_list<const char*> extra = {}) {
  std::vector<const char*> keys{"vertices"};
  keys.insert(keys.end(), extra.begin(), extra.end());
  expect_object(j, path);
  for (auto it = j.begin(); it != j.end(); ++it)
    if (std::find_if(keys.begin(), keys.end(), [&](const char* k) { return it.key() == k; }) == keys.end())
      fail(at(path, it.key()), "unknown field");
  return {points_of(field(j, path, "vertices"), at(path, "vertices"), dim)};
}

std::variant<AffineMap<double>, MaxAffineFn<double>> convex_k_of(const Json& j, const std::string& path,
                                                                  Index dim) {
  expect_object(j, path);
  if (j.contains("pieces")) return max_affine_of(j, path, dim);
  return affine_of(j, path, dim);
}

void exactly_one(const Json& j, const std::string& path, const char* a, const char* b) {
  if (j.contains(a) == j.contains(b))
    fail(path, std::string("expected exactly one of '") + a + "' and '" + b + "'");
}

Payload payload_of(const std::string& kind, const Json& j) {
  const std::string root = "$";
  auto keys = [&](std::initializer_list<const char*> payload) {
    std::vector<const char*> all{"version", "kind", "seed", "tolerances"};
    all.insert(all.end(), payload.begin(), payload.end());
    for (auto it = j.begin(); it != j.end(); ++it)
      if (std::find_if(all.begin(), all.end(), [&](const char* k) { return it.key() == k; }) == all.end())
        fail(at(root, it.key()), "unknown field");
  };

  if (kind == "eval-gauge") {
    keys({"f", "x", "alpha", "method"});
    GaugeProblem p{max_affine_of(field(j, root, "f"), "$.f"), {}, 0.0, false};
    p.x = vector_of(field(j, root, "x"), "$.x", p.f.dim());
    p.alpha = number(field(j, root, "alpha"), "$.alpha");
    if (j.contains("method")) {
      const std::string m = text(j["method"], "$.method");
      if (m != "closed_form" && m != "bisection") fail("$.method", "expected 'closed_form' or 'bisection'");
      p.bisection = m == "bisection";
    }
    return p;
  }
  if (kind == "solve-mok") {
    keys({"S", "D"});
    PolyhedralSublinear<double> s = sublinear_of(field(j, root, "S"), "$.S");
    Mat d = points_of(field(j, root, "D"), "$.D", s.dim());
    return MokProblem{std::move(s), std::move(d)};
  }
  if (kind == "synth-affine") {
    keys({"f", "B"});
    MaxAffineFn<double> f = max_affine_of(field(j, root, "f"), "$.f");
    const Json& b = field(j, root, "B");
    expect_object(b, "$.B");
    if (b.contains("points")) {
      allow_keys(b, "$.B", {"points", "scores"});
      Mat pts = points_of(b["points"], "$.B.points", f.dim());
      Vec scores = vector_of(field(b, "$.B", "scores"), "$.B.scores", pts.cols());
      return SynthAffineProblem{std::move(f), FiniteScoredSet<double>{std::move(pts), std::move(scores)}};
    }
    allow_keys(b, "$.B", {"vertices", "map", "score"});
    const Polytope<double> c{points_of(field(b, "$.B", "vertices"), "$.B.vertices")};
    const Index q = c.dim();
    AffineTransform<double> map = AffineTransform<double>::identity(q);
    if (b.contains("map")) {
      map = transform_of(b["map"], "$.B.map", q, f.dim());
    } else if (q != f.dim()) {
      fail("$.B.vertices", "without 'map' the vertices must have the dimension of f");
    }
    AffineMap<double> score{Vec::Zero(q), 0.0};
    if (b.contains("score")) score = affine_of(b["score"], "$.B.score", q);
    return SynthAffineProblem{std::move(f), LiftedPolytope<double>{c, map, score}};
  }
  if (kind == "synth-sun") {
    keys({"f", "Z", "C"});
    MaxAffineFn<double> f = max_affine_of(field(j, root, "f"), "$.f");
    exactly_one(j, root, "Z", "C");
    if (j.contains("Z")) {
      Mat z = points_of(j["Z"], "$.Z", f.dim());
      return SunProblem{std::move(f), std::move(z)};
    }
    Polytope<double> c = polytope_of(j["C"], "$.C", f.dim());
    return SunProblem{std::move(f), std::move(c)};
  }
  if (kind == "synth-cahbl") {
    keys({"f", "table", "polytope"});
    MaxAffineFn<double> f = max_affine_of(field(j, root, "f"), "$.f");
    exactly_one(j, root, "table", "polytope");
    if (j.contains("table")) {
      const Json& t = j["table"];
      allow_keys(t, "$.table", {"j", "k"});
      Mat jt = points_of(field(t, "$.table", "j"), "$.table.j", f.dim());
      Vec k = vector_of(field(t, "$.table", "k"), "$.table.k", jt.cols());
      return CahblProblem{std::move(f), CahblTable<double>{std::move(jt), std::move(k)}};
    }
    const Json& t = j["polytope"];
    const Polytope<double> c = polytope_of(t, "$.polytope", -1, {"j", "k"});
    const AffineTransform<double> map = transform_of(field(t, "$.polytope", "j"), "$.polytope.j", c.dim(), f.dim());
    auto k = convex_k_of(field(t, "$.polytope", "k"), "$.polytope.k", c.dim());
    return CahblProblem{std::move(f), CahblPolytope<double>{c, map, std::move(k)}};
  }
  if (kind == "solve-hbl") {
    keys({"spaces", "tables", "k", "polytope"});
    const Json& sp = field(j, root, "spaces");
    if (!sp.is_array() || sp.empty()) fail("$.spaces", "expected a nonempty array of {pieces}");
    std::vector<PolyhedralSublinear<double>> spaces;
    for (std::size_t m = 0; m < sp.size(); ++m) spaces.push_back(sublinear_of(sp[m], at("$.spaces", m)));
    exactly_one(j, root, "tables", "polytope");
    if (j.contains("tables")) {
      const Json& tb = j["tables"];
      if (!tb.is_array() || tb.size() != spaces.size())
        fail("$.tables", "expected one table per space (" + std::to_string(spaces.size()) + ")");
      HblInstance<double> inst;
      inst.spaces = spaces;
      for (std::size_t m = 0; m < tb.size(); ++m) {
        Mat t = points_of(tb[m], at("$.tables", m), spaces[m].dim());
        if (m > 0 && t.cols() != inst.tables.front().cols())
          fail(at("$.tables", m), "expected " + std::to_string(inst.tables.front().cols()) + " points");
        inst.tables.push_back(std::move(t));
      }
      if (j.contains("k")) inst.k = vector_of(j["k"], "$.k", inst.size());
      return HblProblem{std::move(inst)};
    }
    if (j.contains("k")) fail("$.k", "with 'polytope' give k inside the polytope object");
    const Json& t = j["polytope"];
    PolytopeHblInstance<double> inst;
    inst.spaces = spaces;
    inst.domain = polytope_of(t, "$.polytope", -1, {"maps", "k"});
    const Json& maps = field(t, "$.polytope", "maps");
    if (!maps.is_array() || maps.size() != spaces.size())
      fail("$.polytope.maps", "expected one map per space (" + std::to_string(spaces.size()) + ")");
    for (std::size_t m = 0; m < maps.size(); ++m)
      inst.maps.push_back(transform_of(maps[m], at("$.polytope.maps", m), inst.domain.dim(), spaces[m].dim()));
    if (t.contains("k")) inst.k = convex_k_of(t["k"], "$.polytope.k", inst.domain.dim());
    return HblProblem{std::move(inst)};
  }
  if (kind == "verify") {
    keys({"config"});
    VerifyProblem p;
    if (j.contains("config")) {
      try {
        p.config = harness::suite_config_from_json(j["config"]);
      } catch (const Error& e) {
        fail("$.config", e.detail());
      }
    }
    return p;
  }
  if (kind == "gen") {
    keys({"instance", "dims"});
    GenProblem p;
    try {
      p.instance = harness::parse_instance_kind(text(field(j, root, "instance"), "$.instance"));
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::Schema) throw;
      fail("$.instance", "expected one of max_affine, polytope, scored_set, hbl");
    }
    if (j.contains("dims")) {
      const Json& d = j["dims"];
      allow_keys(d, "$.dims", {"d", "p", "v", "size", "n"});
      if (d.contains("d")) p.dims.d = integer(d["d"], "$.dims.d", 1);
      if (d.contains("p")) p.dims.p = integer(d["p"], "$.dims.p", 1);
      if (d.contains("v")) p.dims.v = integer(d["v"], "$.dims.v", 1);
      if (d.contains("size")) p.dims.size = integer(d["size"], "$.dims.size", 1);
      if (d.contains("n")) p.dims.n = integer(d["n"], "$.dims.n", 1);
    }
    return p;
  }
  fail("$.kind", "unknown problem kind '" + kind + "'");
}

// ---------------------------------------------------------------------------
// Certificates

Json checks_json(const SynthCertificate<double>& c, const ToleranceConfig& tol) {
  return {{"dominated", c.dominated(tol)},
          {"tight", c.tight(tol)},
          {"optimality_marker", c.optimality_marker(tol)},
          {"lambda_positive", double(c.lifted.lambda) > tol.lambda_min},
          {"conclusion_holds", c.conclusion_holds(tol)}};
}

Json synth_json(const SynthCertificate<double>& c, const ToleranceConfig& tol) {
  Json out{{"kind", to_string(c.kind)},
           {"A", to_json(c.affine)},
           {"Lambda", to_json(c.lifted.Lambda.w)},
           {"lambda", c.lifted.lambda},
           {"delta", c.delta},
           {"lhs", c.lhs},
           {"rhs", c.rhs},
           {"gap", c.gap},
           {"t_star", c.t_star},
           {"constraint_points", c.constraint_points},
           {"domination",
            {{"samples", c.domination.samples},
             {"worst_deficit", c.domination.worst_deficit},
             {"witness", c.domination.witness}}},
           {"condition", to_json(c.condition)},
           {"checks", checks_json(c, tol)}};
  if (c.support_weights.size() > 0) out["mu"] = to_json(c.support_weights);
  if (c.minimizer.size() > 0) out["minimizer"] = to_json(c.minimizer);
  if (c.kind == CertificateKind::Approximate) out["grid_resolution"] = c.grid_resolution;
  if (c.kind == CertificateKind::Fallback) out["fallback_point"] = to_json(c.fallback_point);
  return out;
}

Json mok_json(const MokCertificate<double>& c) {
  return {{"L", to_json(c.linear.w)},     {"weights", to_json(c.weights)},
          {"inf_D_L", c.value},           {"inf_D_S", c.target},
          {"gap", c.gap},                 {"lp_value", c.lp_value},
          {"midpoint", to_json(c.midpoint)}};
}

Json hbl_json(const HblCertificate<double>& c) {
  Json l = Json::array(), w = Json::array();
  for (const auto& m : c.linear) l.push_back(to_json(m.w));
  for (const auto& m : c.weights) w.push_back(to_json(m));
  Json out{{"kind", to_string(c.kind)}, {"L", l},         {"weights", w},
           {"value", c.value},          {"target", c.target}, {"gap", c.gap},
           {"lp_value", c.lp_value},    {"midpoint", to_json(c.midpoint)}};
  if (c.identity_weight) out["identity_weight"] = *c.identity_weight;
  if (c.kind == CertificateKind::Approximate) out["grid_resolution"] = c.grid_resolution;
  return out;
}

struct Outcome {
  std::string status = "ok";
  int exit_code = kOk;
  std::string message;
  Json certificate = Json::object();
};

void judge_approximate(Outcome& o, bool approximate, const Options& opt) {
  if (approximate && !opt.approximate_ok && o.exit_code == kOk) {
    o.status = "approximate_rejected";
    o.exit_code = kNumericalFailure;
    o.message = "certificate is grid-discretized; pass --approximate-ok to accept it";
  }
}

void judge_synth(Outcome& o, const SynthCertificate<double>& c, const ToleranceConfig& tol,
                 const Options& opt) {
  o.certificate = synth_json(c, tol);
  if (c.kind == CertificateKind::Fallback) {
    o.status = c.dominated(tol) ? "fallback" : "numerical_failure";
    o.exit_code = c.dominated(tol) ? kOk : kNumericalFailure;
    o.message = "infimum below the unbounded sentinel; supporting map returned";
    return;
  }
  if (!c.condition.satisfied()) {
    o.status = "hypothesis_violated";
    o.exit_code = kHypothesisViolated;
    o.message = "the pairwise midpoint condition fails; see certificate.condition";
    return;
  }
  if (!c.conclusion_holds(tol)) {
    o.status = "numerical_failure";
    o.exit_code = kNumericalFailure;
    o.message = "certificate outside tolerances; see certificate.checks";
    return;
  }
  judge_approximate(o, c.kind == CertificateKind::Approximate, opt);
}

void judge_gap(Outcome& o, const MidpointReport& midpoint, double gap, double tol_lp) {
  if (!midpoint.satisfied()) {
    o.status = "hypothesis_violated";
    o.exit_code = kHypothesisViolated;
    o.message = "midpoint condition fails; see certificate.midpoint";
  } else if (std::abs(gap) > tol_lp) {
    o.status = "numerical_failure";
    o.exit_code = kNumericalFailure;
    o.message = "gap above tol_lp although the hypothesis holds";
  }
}

Outcome solve(const ProblemFile& p, const Options& opt) {
  Outcome o;
  const ToleranceConfig& tol = p.tolerances;
  const std::uint64_t seed = opt.seed ? *opt.seed : p.seed.value_or(0);
  std::visit(
      [&](const auto& q) {
        using T = std::decay_t<decltype(q)>;
        if constexpr (std::is_same_v<T, GaugeProblem>) {
          const GaugeValue<double> g =
              q.bisection ? eval_gauge(to_oracle(q.f), q.x, q.alpha, tol) : eval_gauge(q.f, q.x, q.alpha, tol);
          o.certificate = {{"value", g.value},
                           {"branch", to_string(g.branch)},
                           {"residual", g.residual},
                           {"iterations", g.iterations},
                           {"method", q.bisection ? "bisection" : "closed_form"}};
        } else if constexpr (std::is_same_v<T, MokProblem>) {
          const MokCertificate<double> c = solve_mok(q.s, q.points, tol);
          o.certificate = mok_json(c);
          judge_gap(o, c.midpoint, c.gap, tol.tol_lp);
        } else if constexpr (std::is_same_v<T, SynthAffineProblem>) {
          judge_synth(o, synth_affine_from_B<double>(q.f, q.b, tol, seed), tol, opt);
        } else if constexpr (std::is_same_v<T, SunProblem>) {
          std::visit([&](const auto& z) { judge_synth(o, synth_sun(q.f, z, tol, seed), tol, opt); }, q.z);
        } else if constexpr (std::is_same_v<T, CahblProblem>) {
          std::visit([&](const auto& z) { judge_synth(o, synth_cahbl(q.f, z, tol, seed), tol, opt); }, q.z);
        } else if constexpr (std::is_same_v<T, HblProblem>) {
          std::visit(
              [&](const auto& inst) {
                const HblCertificate<double> c = solve_hbl_n(inst, tol);
                o.certificate = hbl_json(c);
                judge_gap(o, c.midpoint, c.gap, c.kind == CertificateKind::Approximate ? tol.tol_gap : tol.tol_lp);
                judge_approximate(o, c.kind == CertificateKind::Approximate, opt);
              },
              q.instance);
        } else if constexpr (std::is_same_v<T, VerifyProblem>) {
          harness::SuiteConfig config = q.config;
          if (opt.seed) config.seed = *opt.seed;
          const harness::SuiteReport r = harness::run_property_suite(config);
          o.certificate = harness::to_json(r);
          if (!r.passed()) {
            o.status = "suite_failed";
            o.exit_code = kNumericalFailure;
            o.message = "at least one property suite failed";
          }
        } else {
          o.certificate = harness::instance_to_json(harness::gen_instance(q.instance, q.dims, seed));
          o.certificate["seed"] = seed;
        }
      },
      p.payload);
  return o;
}

int exit_code_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::Schema:
    case ErrorKind::Config:
    case ErrorKind::DimensionMismatch:
    case ErrorKind::InvalidArgument:
    case ErrorKind::EmptySet:
      return kParseError;
    case ErrorKind::ConditionViolated:
      return kHypothesisViolated;
    default:
      return kNumericalFailure;
  }
}

const char* status_for(int code) {
  switch (code) {
    case kParseError: return "schema_error";
    case kHypothesisViolated: return "hypothesis_violated";
    default: return "numerical_failure";
  }
}

bool needs_problem(const std::string& kind) { return kind != "verify" && kind != "gen"; }

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"eval-gauge", "solve-mok",   "synth-affine", "synth-sun",
                                              "synth-cahbl", "solve-hbl", "verify",       "gen"};
  return names;
}

ProblemFile parse_problem(const std::string& input) {
  Json j;
  try {
    j = Json::parse(input);
  } catch (const Json::parse_error& e) {
    fail("$", std::string("invalid JSON: ") + e.what());
  }
  expect_object(j, "$");
  ProblemFile p;
  const Json& version = field(j, "$", "version");
  if (!version.is_number_integer() || version.get<long>() != 1) fail("$.version", "expected 1");
  p.kind = text(field(j, "$", "kind"), "$.kind");
  if (std::find(command_names().begin(), command_names().end(), p.kind) == command_names().end())
    fail("$.kind", "unknown problem kind '" + p.kind + "'");
  if (j.contains("seed")) {
    const Json& s = j["seed"];
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0))
      fail("$.seed", "expected a nonnegative integer");
    p.seed = s.get<std::uint64_t>();
  }
  if (j.contains("tolerances")) {
    try {
      harness::apply_tolerance_overrides(j["tolerances"], p.tolerances, "$.tolerances");
    } catch (const Error& e) {
      throw Error(ErrorKind::Schema, e.detail());
    }
  }
  p.payload = payload_of(p.kind, j);
  return p;
}

std::string emit_report(const Report& r) {
  return dump_json(Json{{"version", r.version},
                        {"kind", r.kind},
                        {"input_hash", r.input_hash},
                        {"status", r.status},
                        {"exit_code", r.exit_code},
                        {"message", r.message},
                        {"certificate", r.certificate}});
}

Report parse_report(const std::string& input) {
  Json j;
  try {
    j = Json::parse(input);
  } catch (const Json::parse_error& e) {
    fail("$", std::string("invalid JSON: ") + e.what());
  }
  allow_keys(j, "$", {"version", "kind", "input_hash", "status", "exit_code", "message", "certificate"});
  Report r;
  r.version = static_cast<int>(integer(field(j, "$", "version"), "$.version", 1));
  r.kind = text(field(j, "$", "kind"), "$.kind");
  r.input_hash = text(field(j, "$", "input_hash"), "$.input_hash");
  r.status = text(field(j, "$", "status"), "$.status");
  r.exit_code = static_cast<int>(integer(field(j, "$", "exit_code"), "$.exit_code", 0));
  r.message = text(field(j, "$", "message"), "$.message");
  r.certificate = field(j, "$", "certificate");
  expect_object(r.certificate, "$.certificate");
  return r;
}

Report execute(const std::string& kind, const std::string& input, const Options& options) {
  Report r;
  r.kind = kind;
  r.input_hash = "fnv1a64:" + fnv1a_hex(input);
  try {
    const std::string doc =
        input.empty() && !needs_problem(kind) ? (kind == "gen" ? R"({"version":1,"kind":"gen","instance":"max_affine"})"
                                                               : R"({"version":1,"kind":"verify"})")
                                              : input;
    ProblemFile p = parse_problem(doc);
    if (p.kind != kind) fail("$.kind", "expected '" + kind + "' for this subcommand, got '" + p.kind + "'");
    if (options.tol_gap) p.tolerances.tol_gap = *options.tol_gap;
    Outcome o = solve(p, options);
    r.status = o.status;
    r.exit_code = o.exit_code;
    r.message = o.message;
    r.certificate = std::move(o.certificate);
  } catch (const ConditionViolatedError& e) {
    r.status = "hypothesis_violated";
    r.exit_code = kHypothesisViolated;
    r.message = e.what();
    r.certificate = {{"condition", to_json(e.report())}};
  } catch (const Error& e) {
    r.exit_code = exit_code_for(e.kind());
    r.status = status_for(r.exit_code);
    r.message = e.what();
    r.certificate = {{"error", to_string(e.kind())}};
  } catch (const std::exception& e) {
    r.exit_code = kNumericalFailure;
    r.status = status_for(r.exit_code);
    r.message = e.what();
    r.certificate = {{"error", "internal"}};
  }
  return r;
}

int run_command(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
                std::ostream& err) {
  CLI::App app{"Certificates for max-affine convex analysis problems.", "convaff"};
  app.require_subcommand(1, 1);
  Options options;
  std::string input, output;
  std::uint64_t seed = 0;
  double tol_gap = 0;
  static const std::map<std::string, std::string> help{
      {"eval-gauge", "evaluate the gauge S_f(x, alpha)"},
      {"solve-mok", "linear L <= S with inf_D L = inf_D S"},
      {"synth-affine", "affine minorant tight over a scored set B"},
      {"synth-sun", "affine minorant tight over Z or a polytope C"},
      {"synth-cahbl", "affine minorant tight for f o j + k"},
      {"solve-hbl", "linear maps L_m <= S_m over a product of spaces"},
      {"verify", "run the property suites"},
      {"gen", "generate a seeded instance"}};
  for (const auto& name : command_names()) {
    CLI::App* sub = app.add_subcommand(name, help.at(name));
    sub->add_option("--input", input, "problem file (JSON); '-' reads standard input");
    sub->add_option("--output", output, "report file; standard output when absent");
    sub->add_option("--seed", seed, "seed for sampling and generation");
    sub->add_option("--tol-gap", tol_gap, "override tol_gap")->check(CLI::PositiveNumber);
    sub->add_flag("--approximate-ok", options.approximate_ok, "accept grid-discretized certificates");
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kParseError;
  }

  const std::string kind = app.get_subcommands().front()->get_name();
  const CLI::App* sub = app.get_subcommands().front();
  if (sub->count("--input")) options.input = input;
  if (sub->count("--output")) options.output = output;
  if (sub->count("--seed")) options.seed = seed;
  if (sub->count("--tol-gap")) options.tol_gap = tol_gap;

  std::string text;
  if (options.input && *options.input != "-") {
    std::ifstream file(*options.input, std::ios::binary);
    if (!file) {
      err << "convaff: cannot read " << *options.input << "\n";
      return kParseError;
    }
    std::ostringstream buf;
    buf << file.rdbuf();
    text = buf.str();
  } else if (options.input || needs_problem(kind)) {
    std::ostringstream buf;
    buf << in.rdbuf();
    text = buf.str();
  }

  const Report report = execute(kind, text, options);
  const std::string emitted = emit_report(report);
  if (options.output) {
    std::ofstream file(*options.output, std::ios::binary);
    file << emitted;
    if (!file) {
      err << "convaff: cannot write " << *options.output << "\n";
      return kParseError;
    }
  } else {
    out << emitted;
  }
  if (report.exit_code != kOk) err << "convaff " << kind << ": " << report.status << ": " << report.message << "\n";
  return report.exit_code;
}

}  // namespace convaff::cli
