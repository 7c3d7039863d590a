#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "dynpath/simgen.hpp"

namespace dynpath {

// One analysis variant: either all mediator measurements or a snapshot
// restricted to keep_times.
struct Scenario {
  std::string name;
  bool all_measurements = false;
  std::vector<double> keep_times;
};

struct StudyConfig {
  SimConfig sim;
  std::vector<Scenario> scenarios;
  std::size_t reps = 100;
  std::vector<std::string> adjust;  // passed through to fit_dpa

  static StudyConfig from_json(const nlohmann::json& j);
  static StudyConfig load(const std::string& path);
};

struct ScenarioCurves {
  std::string name;
  std::vector<double> grid;
  std::vector<double> mean_direct, mean_indirect, mean_total;
  // per replicate, evaluated on the grid
  std::vector<std::vector<double>> rep_direct, rep_indirect;
};

struct StudyResult {
  std::vector<double> grid;  // simulation grid incl. horizon
  std::vector<ScenarioCurves> scenarios;
  TruthCurves truth;
};

// Runs `reps` replications: per replicate a fresh trial from a rep-derived
// seed, then one fit_dpa per scenario; all curves evaluated on the common
// simulation grid. Replicates run in parallel with deterministic merge.
StudyResult run_study(const StudyConfig& cfg, int threads = 1);

void write_scenario_csv(const ScenarioCurves& sc, const std::string& mean_path,
                        const std::string& reps_path);

}  // namespace dynpath
