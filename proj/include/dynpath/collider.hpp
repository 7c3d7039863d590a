#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "dynpath/data.hpp"

namespace dynpath {

// Ordered linear structural equation model with a survival time whose hazard
// is a linear (additive form) or log-linear (multiplicative form) function
// of the variables. Coefficients are constant in time.
struct SemVariable {
  std::string name;
  double intercept = 0.0;
  std::vector<double> coef;  // on earlier variables; size = variable index
  enum Noise { kGaussian, kShiftedExponential, kCenteredBernoulli } noise = kGaussian;
  double noise_scale = 1.0;
};

enum class HazardForm { kAdditive, kMultiplicative };

struct SemSpec {
  std::vector<SemVariable> variables;
  double hazard_intercept = 0.0;       // beta0 (additive) or lambda0 (multiplicative)
  std::vector<double> hazard_weights;  // one per variable
  HazardForm form = HazardForm::kAdditive;
};

void validate(const SemSpec& spec);

// Draw one realization of the SEM variables into x (resized to n variables).
void draw_sem(const SemSpec& spec, std::vector<double>& x, std::mt19937_64& rng);

// Hazard rate for a covariate vector (constant in time).
double hazard_rate(const SemSpec& spec, const std::vector<double>& x);

// Covariate sample among survivors {T > t}: draws from the SEM, keeps each
// draw with probability exp(-t * hazard). Column-major: sample[j] holds the
// survivor values of variable j. Chunked parallel draws with per-chunk
// streams keep the output deterministic for any thread count. Errors if the
// acceptance fraction falls below 1e-4.
std::vector<std::vector<double>> sample_survivors(const SemSpec& spec, double t,
                                                  std::size_t m_survivors,
                                                  std::uint64_t seed,
                                                  int threads = 1);

struct Assertion {
  std::string name;
  double estimate = 0.0;
  double se = 0.0;
  double threshold = 0.0;
  bool pass = false;
  bool informational = false;  // demonstration output, not gated
};

struct VerifyReport {
  std::string suite;
  std::uint64_t seed = 0;
  std::vector<Assertion> assertions;

  bool all_pass() const;  // ignores informational assertions
  nlohmann::json to_json() const;
};

// Monte-Carlo sizes shared by the suites.
struct ColliderConfig {
  std::size_t m_survivors = 100000;
  std::vector<double> times = {1, 2, 3, 4, 5};
  std::size_t reps = 20;         // replications for the hazard-fit checks
  std::size_t n_per_rep = 4000;  // subjects per replication
  std::size_t permutations = 200;
  std::uint64_t seed = 20240817;
  int threads = 1;

  static ColliderConfig from_json(const nlohmann::json& j);
  static ColliderConfig load(const std::string& path);
};

// Shipped scenario specs (mirroring the structural models the suites check).
SemSpec independence_spec(HazardForm form);
SemSpec stability_spec(HazardForm form, bool skewed_noise = false);
SemSpec collapsibility_spec(HazardForm form);

// Independence preservation under additive-hazard selection: survivor
// correlation and a binned mutual-information permutation test; the
// multiplicative contrast is reported as informational.
VerifyReport verify_independence(const ColliderConfig& cfg);

// Survivor OLS slopes stay at the structural coefficients at every t
// (intercepts excluded); runs the Gaussian and skewed-noise variants plus
// the multiplicative drift demonstration.
VerifyReport verify_coefficient_stability(const ColliderConfig& cfg);

// A survival-only variable U neither shifts the survivor X1-X2 slope nor the
// additive-hazard treatment coefficient; Cox-form contrast is informational.
VerifyReport verify_collapsibility(const ColliderConfig& cfg);

}  // namespace dynpath
