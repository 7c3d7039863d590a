#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "dynpath/data.hpp"

namespace dynpath {

// Right-continuous step functions over the event-time axis: per-time
// increments dB(t) and their running sums B(t), one series per covariate.
// Cumulative sums are always taken in ascending time order.
struct CumulativeCurve {
  std::vector<double> times;
  std::vector<std::string> labels;
  std::vector<std::vector<double>> increments;  // [label][time]
  std::vector<std::vector<double>> cumulative;  // [label][time]

  std::size_t label_index(const std::string& label) const;
  // Step-function value at t; 0 before the first event time.
  double value_at(const std::string& label, double t) const;
  double value_at(std::size_t label_idx, double t) const;

  void finalize_cumulative();  // increments -> cumulative, ascending order
};

// Covariate selection for the additive hazard fit. The design is always
// (1 [, treatment] [, mediator X2(t-)] [, adjust...]) in that order, labeled
// "baseline", "treatment", "mediator", then the adjustment names.
struct HazardSpec {
  bool include_treatment = true;
  bool include_mediator = false;
  std::vector<std::string> adjust;
};

struct AdditiveFit {
  CumulativeCurve curve;
  std::size_t skipped = 0;             // rank-deficient or risk set too small
  std::size_t dropped_no_mediator = 0; // subject-times without a usable X2(t-)
};

// Aalen's additive hazard estimator: at each event time solves the
// least-squares estimation equations on the at-risk design; skipped times
// contribute zero increments. Throws NoUsableEventTimes when every time is
// skipped.
AdditiveFit fit_additive(const Dataset& ds, const HazardSpec& spec);

// Cumulative regression function at t for one covariate.
double eval_cumulative(const CumulativeCurve& c, const std::string& label, double t);

// CSV export: time, then <label>_dB,<label>_B per covariate.
void write_curve_csv(const CumulativeCurve& c, const std::string& path);

}  // namespace dynpath
