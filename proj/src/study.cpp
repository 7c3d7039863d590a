#include "dynpath/study.hpp"

#include <algorithm>
#include <fstream>

#include <nlohmann/json.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "dynpath/dpa.hpp"
#include "dynpath/errors.hpp"
#include "dynpath/rng.hpp"

namespace dynpath {

StudyConfig StudyConfig::from_json(const nlohmann::json& j) {
  StudyConfig cfg;
  cfg.sim = SimConfig::from_json(j.at("sim"));
  cfg.reps = j.value("reps", std::size_t{100});
  if (cfg.reps < 1) throw ValidationError("study: reps must be >= 1");
  cfg.adjust = j.value("adjust", std::vector<std::string>{});
  if (!j.contains("scenarios") || j.at("scenarios").empty()) {
    throw ValidationError("study: no scenarios");
  }
  for (const auto& s : j.at("scenarios")) {
    Scenario sc;
    sc.name = s.at("name").get<std::string>();
    if (s.contains("keep_times")) {
      sc.keep_times = s.at("keep_times").get<std::vector<double>>();
      if (sc.keep_times.empty()) {
        throw ValidationError("study: scenario '" + sc.name + "' has empty keep_times");
      }
      for (double t : sc.keep_times) {
        if (t < 0.0 || t > cfg.sim.horizon) {
          throw ValidationError("study: scenario '" + sc.name +
                                "' keep time outside [0, horizon]");
        }
      }
    } else {
      sc.all_measurements = true;
    }
    cfg.scenarios.push_back(std::move(sc));
  }
  return cfg;
}

StudyConfig StudyConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("study: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("study: JSON parse error: ") + e.what());
  }
  try {
    return from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("study: ") + e.what());
  }
}

namespace {

double step_eval(const std::vector<double>& times, const std::vector<double>& cum,
                 double t) {
  auto it = std::upper_bound(times.begin(), times.end(), t);
  if (it == times.begin()) return 0.0;
  return cum[static_cast<std::size_t>(it - times.begin()) - 1];
}

}  // namespace

StudyResult run_study(const StudyConfig& cfg, int threads) {
  validate(cfg.sim);
  const std::size_t H = cfg.sim.steps();
  StudyResult out;
  out.grid.resize(H + 1);
  for (std::size_t h = 0; h <= H; ++h) {
    out.grid[h] = static_cast<double>(h) * cfg.sim.delta;
  }
  out.truth = true_curves(cfg.sim, out.grid);

  const std::size_t S = cfg.scenarios.size();
  out.scenarios.resize(S);
  for (std::size_t s = 0; s < S; ++s) {
    auto& sc = out.scenarios[s];
    sc.name = cfg.scenarios[s].name;
    sc.grid = out.grid;
    sc.rep_direct.assign(cfg.reps, {});
    sc.rep_indirect.assign(cfg.reps, {});
  }

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(threads)
#endif
  for (std::size_t r = 0; r < cfg.reps; ++r) {
    SimConfig sim = cfg.sim;
    std::uint64_t s = cfg.sim.seed + 0x51a3d7u;
    sim.seed = splitmix64(s) + r;
    const TrialResult trial = generate_trial(sim, 1);
    for (std::size_t sidx = 0; sidx < S; ++sidx) {
      const Scenario& scen = cfg.scenarios[sidx];
      const Dataset ds = scen.all_measurements
                             ? trial.dataset
                             : snapshot(trial.dataset, scen.keep_times);
      const DpaResult fit = fit_dpa(ds, cfg.adjust);
      auto& sc = out.scenarios[sidx];
      sc.rep_direct[r].resize(out.grid.size());
      sc.rep_indirect[r].resize(out.grid.size());
      for (std::size_t k = 0; k < out.grid.size(); ++k) {
        sc.rep_direct[r][k] = step_eval(fit.times, fit.direct, out.grid[k]);
        sc.rep_indirect[r][k] = step_eval(fit.times, fit.indirect, out.grid[k]);
      }
    }
  }

  for (auto& sc : out.scenarios) {
    const std::size_t g = out.grid.size();
    sc.mean_direct.assign(g, 0.0);
    sc.mean_indirect.assign(g, 0.0);
    sc.mean_total.assign(g, 0.0);
    for (std::size_t r = 0; r < cfg.reps; ++r) {
      for (std::size_t k = 0; k < g; ++k) {
        sc.mean_direct[k] += sc.rep_direct[r][k];
        sc.mean_indirect[k] += sc.rep_indirect[r][k];
      }
    }
    for (std::size_t k = 0; k < g; ++k) {
      sc.mean_direct[k] /= static_cast<double>(cfg.reps);
      sc.mean_indirect[k] /= static_cast<double>(cfg.reps);
      sc.mean_total[k] = sc.mean_direct[k] + sc.mean_indirect[k];
    }
  }
  return out;
}

void write_scenario_csv(const ScenarioCurves& sc, const std::string& mean_path,
                        const std::string& reps_path) {
  {
    std::ofstream out(mean_path);
    if (!out) throw ValidationError("study: cannot write " + mean_path);
    out.precision(17);
    out << "time,mean_direct,mean_indirect,mean_total\n";
    for (std::size_t k = 0; k < sc.grid.size(); ++k) {
      out << sc.grid[k] << ',' << sc.mean_direct[k] << ',' << sc.mean_indirect[k]
          << ',' << sc.mean_total[k] << '\n';
    }
  }
  {
    std::ofstream out(reps_path);
    if (!out) throw ValidationError("study: cannot write " + reps_path);
    out.precision(17);
    out << "rep,time,direct,indirect\n";
    for (std::size_t r = 0; r < sc.rep_direct.size(); ++r) {
      for (std::size_t k = 0; k < sc.grid.size(); ++k) {
        out << r << ',' << sc.grid[k] << ',' << sc.rep_direct[r][k] << ','
            << sc.rep_indirect[r][k] << '\n';
      }
    }
  }
}

}  // namespace dynpath
