#ifndef CONVAFF_CLI_HPP
#define CONVAFF_CLI_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "convaff/harness.hpp"

namespace convaff::cli {

enum ExitCode : int {
  kOk = 0,
  kHypothesisViolated = 1,
  kNumericalFailure = 2,
  kParseError = 3,
};

const std::vector<std::string>& command_names();

// ---------------------------------------------------------------------------
// Problem files

struct GaugeProblem {
  MaxAffineFn<double> f;
  Vector<double> x;
  double alpha = 0.0;
  bool bisection = false;  // "method": "bisection" runs the oracle path
};

struct MokProblem {
  PolyhedralSublinear<double> s;
  Matrix<double> points;
};

struct SynthAffineProblem {
  MaxAffineFn<double> f;
  ScoredSet<double> b;
};

struct SunProblem {
  MaxAffineFn<double> f;
  std::variant<Matrix<double>, Polytope<double>> z;  // finite Z or polytope C
};

struct CahblProblem {
  MaxAffineFn<double> f;
  std::variant<CahblTable<double>, CahblPolytope<double>> z;
};

struct HblProblem {
  std::variant<HblInstance<double>, PolytopeHblInstance<double>> instance;
};

struct VerifyProblem {
  harness::SuiteConfig config = harness::SuiteConfig::defaults();
};

struct GenProblem {
  harness::InstanceKind instance = harness::InstanceKind::MaxAffine;
  harness::Dims dims;
};

using Payload = std::variant<GaugeProblem, MokProblem, SynthAffineProblem, SunProblem,
                             CahblProblem, HblProblem, VerifyProblem, GenProblem>;

struct ProblemFile {
  int version = 1;
  std::string kind;
  std::optional<std::uint64_t> seed;
  ToleranceConfig tolerances;
  Payload payload = VerifyProblem{};
};

/// Strict JSON reader: unknown fields, wrong types and inconsistent
/// dimensions raise Error(ErrorKind::Schema) whose message starts with the
/// offending path, e.g. "$.f.pieces[1].a".
ProblemFile parse_problem(const std::string& text);

// ---------------------------------------------------------------------------
// Reports

struct Report {
  int version = 1;
  std::string kind;
  std::string input_hash;
  std::string status;
  int exit_code = kOk;
  std::string message;
  Json certificate = Json::object();
};

std::string emit_report(const Report& report);
Report parse_report(const std::string& text);

struct Options {
  std::optional<std::string> input;
  std::optional<std::string> output;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol_gap;
  bool approximate_ok = false;
};

/// Runs `kind` on the problem text; never throws for input or numeric
/// problems, those are encoded in the report's status and exit code.
Report execute(const std::string& kind, const std::string& text, const Options& options);

/// argv without the program name. Reads --input (or `in` when absent and the
/// command needs a problem), writes the report to --output or `out`,
/// diagnostics to `err`. Returns the exit code.
int run_command(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
                std::ostream& err);

}  // namespace convaff::cli

#endif  // CONVAFF_CLI_HPP
