#ifndef CONVAFF_HARNESS_HPP
#define CONVAFF_HARNESS_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "convaff/convaff.hpp"
#include "convaff/json_io.hpp"

namespace convaff::harness {

// ---------------------------------------------------------------------------
// Generators

enum class InstanceKind { MaxAffine, Polytope, ScoredSet, Hbl };

const char* to_string(InstanceKind k);
InstanceKind parse_instance_kind(const std::string& name);  // max_affine, polytope, ...

/// Sizes for gen_instance. `d` is the ambient dimension (per space for hbl),
/// `p` the number of pieces, `v` the vertex count, `size` the number of
/// set members (|B|, |Z|), `n` the number of hbl spaces.
struct Dims {
  Index d = 2;
  Index p = 3;
  Index v = 4;
  Index size = 6;
  Index n = 3;
};

/// Desk-scale caps; gen_instance rejects dims outside [1, cap].
struct Caps {
  Index d = 6;
  Index p = 12;
  Index size = 64;
  Index v = 16;
  Index n = 6;
};

using Instance = std::variant<MaxAffineFn<double>, Polytope<double>, FiniteScoredSet<double>,
                              HblInstance<double>>;

/// Deterministic from seed (SplitMix64), coefficients uniform in [-2, 2].
Instance gen_instance(InstanceKind kind, const Dims& dims, std::uint64_t seed, const Caps& caps = {});

// ---------------------------------------------------------------------------
// Oracles. Neither calls into the gauge, LP or grid code of the library.

/// inf{mu > 0 : mu (F(x/mu) - F(0) - 1) < alpha} by a power-of-two scan from
/// 2^-40 to 2^40 and three decimal refinement levels (final step <= 1e-6
/// relative to the bracket). Throws ScanExhausted when no grid mu is in the
/// set.
double gauge_oracle(const std::function<double(const Vector<double>&)>& f, const Vector<double>& x,
                    double alpha);

/// Minimum of F over the barycentric grid of step `resolution` on the
/// vertices (columns of `vertices`).
double grid_min_oracle(const std::function<double(const Vector<double>&)>& f,
                       const Matrix<double>& vertices, double resolution);

// ---------------------------------------------------------------------------
// Property suites

struct Metric {
  std::string name;
  double worst = 0.0;       // largest value of the measured quantity
  double threshold = 0.0;   // pass iff worst <= threshold
  long samples = 0;
  std::uint64_t witness_seed = 0;  // trial seed realising `worst`
  std::string witness;             // short description of that trial
  bool passed() const { return worst <= threshold; }
};

struct SuiteResult {
  std::string name;
  int criterion = 0;  // acceptance criterion backed by the suite, 0 if none
  long trials = 0;
  std::vector<Metric> metrics;
  double seconds = 0.0;
  bool passed() const;
};

struct SuiteConfig {
  std::uint64_t seed = 0x5EED2024ULL;
  std::vector<std::string> suites;       // empty after construction means: config error
  std::map<std::string, long> trials;    // per-suite trial count overrides
  Caps caps;
  ToleranceConfig tolerances;
  bool include_timing = false;

  static SuiteConfig defaults();  // every suite, default trial counts
};

struct SuiteReport {
  std::uint64_t seed = 0;
  std::vector<SuiteResult> suites;
  bool include_timing = false;
  bool passed() const;
};

const std::vector<std::string>& suite_names();
long default_trials(const std::string& suite);

SuiteResult run_suite(const std::string& name, const SuiteConfig& config);
SuiteReport run_property_suite(const SuiteConfig& config);

Json to_json(const SuiteReport& report);
Json to_json(const SuiteConfig& config);
Json to_json(const ToleranceConfig& tolerances);
/// Overwrites the fields of `t` named in `j`; ErrorKind::Config on unknown
/// fields or wrong types, with `path` prefixed to the message.
void apply_tolerance_overrides(const Json& j, ToleranceConfig& t, const std::string& path);
/// Strict: unknown keys, unknown suite names and non-positive counts or caps
/// raise ErrorKind::Config.
SuiteConfig suite_config_from_json(const Json& j);

Json instance_to_json(const Instance& instance);

}  // namespace convaff::harness

#endif  // CONVAFF_HARNESS_HPP
