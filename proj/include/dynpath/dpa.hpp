#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dynpath/data.hpp"
#include "dynpath/hazard.hpp"
#include "dynpath/regress.hpp"

namespace dynpath {

// Aligned cumulative effect curves on a shared event-time axis. The total is
// the elementwise sum of the direct and indirect cumulatives, so additivity
// holds exactly at every time.
struct DpaResult {
  std::vector<double> times;
  std::vector<double> direct_inc;
  std::vector<double> indirect_inc;
  std::vector<double> direct;    // cumulative
  std::vector<double> indirect;  // cumulative
  std::vector<double> total;     // direct + indirect, elementwise
  std::vector<double> local_b21; // treatment coefficient of the per-time
                                 // mediator regression (0 at skipped times)
  std::vector<std::uint8_t> skipped;  // per-time flag
  std::size_t n_skipped = 0;
  std::size_t dropped_no_mediator = 0;
};

// An increasing causal pathway treatment -> mediators... -> outcome. Nodes
// are labels in measurement order; the first node must be "treatment", later
// nodes are either "mediator" (the LOCF process) or baseline covariate names
// declared in the node order. The outcome is implicit.
struct PathSpec {
  std::vector<std::string> nodes;

  std::string to_string() const;
};

struct PathCurve {
  PathSpec path;
  std::vector<double> increments;
  std::vector<double> cumulative;
};

struct TotalDecomposition {
  std::vector<double> times;
  std::vector<PathCurve> paths;  // first entry is the direct path {treatment}
  std::size_t n_skipped = 0;
};

// OLS of X2(t-) on (1, X1, adjust...) among the at-risk subjects with a
// usable mediator left limit. full_rank false when the design is deficient.
OlsFit mediator_regression_at(const Dataset& ds, double t,
                              const std::vector<std::string>& adjust);

// Dynamic path analysis for the single-mediator model: at each event time,
// the treatment->mediator regression and the additive hazard solve share one
// risk set; direct increment is the treatment hazard increment, indirect is
// b21_hat times the mediator hazard increment. Times where either regression
// is rank-deficient contribute zero to all curves and are flagged.
DpaResult fit_dpa(const Dataset& ds, const std::vector<std::string>& adjust);

// General path effect: per event time, the product of successive edge
// regression coefficients along the path times the terminal covariate's
// hazard increment. node_order lists all nodes (starting with "treatment")
// entering the hazard model and the edge regressions.
PathCurve path_effect(const Dataset& ds, const PathSpec& path,
                      const std::vector<std::string>& node_order,
                      const std::vector<std::string>& adjust);

// All increasing paths from treatment through subsets of the mediator nodes,
// sharing per-time estimates so the partition sum telescopes exactly.
// node_order = {"treatment", mediators...}; refuses more than 15 mediators.
TotalDecomposition total_decomposition(const Dataset& ds,
                                       const std::vector<std::string>& node_order,
                                       const std::vector<std::string>& adjust);

struct ProportionMediated {
  std::optional<double> value;  // nullopt when |total| is below tolerance
  bool unstable = false;        // |total(t)| < 5% of max |total|
};

ProportionMediated proportion_mediated(const DpaResult& r, double t,
                                       double tol_abs = 1e-8);

// CSV export: time, direct, indirect, total, local_b21, skipped.
void write_dpa_csv(const DpaResult& r, const std::string& path);

}  // namespace dynpath
