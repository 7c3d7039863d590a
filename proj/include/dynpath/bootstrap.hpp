#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dynpath/data.hpp"
#include "dynpath/dpa.hpp"

namespace dynpath {

// Pointwise percentile band for one effect curve on the original fit's
// event-time grid.
struct BandSet {
  std::string curve_name;
  std::vector<double> grid;
  std::vector<double> point;
  std::vector<double> lower;
  std::vector<double> upper;
  int replicates = 0;
  double level = 0.95;
  std::uint64_t seed = 0;
};

struct BootstrapResult {
  BandSet direct;
  BandSet indirect;
  BandSet total;
  std::size_t discarded = 0;  // replicates with no usable event times
};

// Subject-level nonparametric bootstrap: B resamples with replacement, each
// refit with fit_dpa, curves read back onto the original grid by
// right-continuous step interpolation, then pointwise empirical quantiles at
// (1 +- level)/2 using floor/ceil order-statistic indices. Replicate RNG
// streams are derived from the master seed by replicate index, so the output
// is bitwise identical for any thread count. Fails when more than 20% of the
// replicates are discarded.
BootstrapResult bootstrap_bands(const Dataset& ds,
                                const std::vector<std::string>& adjust, int B,
                                double level, std::uint64_t seed, int threads);

// CSV export: time, point, lower, upper, curve_name (all three curves).
void write_bands_csv(const BootstrapResult& r, const std::string& path);

}  // namespace dynpath
