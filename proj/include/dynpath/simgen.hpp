#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "dynpath/data.hpp"
#include "dynpath/spline.hpp"

namespace dynpath {

// Full parameterization of the discrete-time trial generator. Grid step
// delta (years), horizon, the four time-varying coefficient splines, the
// mediator distribution, censoring, and the master seed.
struct SimConfig {
  double delta = 1.0 / 52.0;
  double horizon = 5.0;
  SplineFunction beta0;        // baseline hazard coefficient
  SplineFunction beta_treat;   // treatment-on-hazard
  SplineFunction beta_med;     // mediator-on-hazard
  SplineFunction b21;          // treatment-on-mediator
  double med_baseline_mean = 11.0;
  double med_baseline_sd = 1.5;
  double noise_sd = 0.22360679774997896;  // sqrt(0.05), independent per step
  double treat_prob = 0.5;
  double censor_max = 10.0;    // uniform censoring upper bound
  std::size_t n = 2000;
  std::uint64_t seed = 1;
  // When true, a realized negative hazard is clamped to zero and counted
  // instead of aborting the run.
  bool clamp_negative_hazard = false;

  std::size_t steps() const;

  static SimConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  static SimConfig load(const std::string& path);
};

// Checks grid invariants and that the hazard stays nonnegative on the grid
// for mediator values within +-6 sd of the arm-specific mean.
void validate(const SimConfig& cfg);

struct TrialResult {
  Dataset dataset;
  std::size_t clamped_steps = 0;    // only when clamp_negative_hazard
  std::size_t n_censored_uniform = 0;  // censored by the uniform mechanism
  std::size_t n_events = 0;
};

// Discrete-time generator: one Bernoulli per subject-step with success
// probability clamp(alpha(t_h) * delta, 0, 1), mediator refreshed at every
// grid point, uniform plus administrative censoring. Subjects draw from
// per-subject RNG streams, so output is bitwise identical for any thread
// count. Throws NumericalError on a realized negative hazard unless
// clamp_negative_hazard is set.
TrialResult generate_trial(const SimConfig& cfg, int threads = 1);

// Keeps only mediator measurements at the listed times (1e-9 matching
// tolerance) for subjects still under follow-up at those times.
Dataset snapshot(const Dataset& ds, const std::vector<double>& keep_times);

struct TruthCurves {
  std::vector<double> times;
  std::vector<double> direct;    // integral of beta_treat
  std::vector<double> indirect;  // integral of b21 * beta_med
};

// Composite trapezoid on a 16x refinement of the requested grid.
TruthCurves true_curves(const SimConfig& cfg, const std::vector<double>& grid);

void write_truth_csv(const TruthCurves& tc, const std::string& path);

}  // namespace dynpath
