#include "dynpath/simgen.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "dynpath/errors.hpp"
#include "dynpath/rng.hpp"

namespace dynpath {

std::size_t SimConfig::steps() const {
  return static_cast<std::size_t>(std::llround(horizon / delta));
}

namespace {

SplineFunction spline_from_json(const nlohmann::json& j, const std::string& name) {
  if (!j.contains(name)) throw ValidationError("config: missing spline '" + name + "'");
  const auto& s = j.at(name);
  return SplineFunction(s.at("times").get<std::vector<double>>(),
                        s.at("values").get<std::vector<double>>());
}

nlohmann::json spline_to_json(const SplineFunction& f) {
  return nlohmann::json{{"times", f.knots()}, {"values", f.values()}};
}

}  // namespace

SimConfig SimConfig::from_json(const nlohmann::json& j) {
  SimConfig cfg;
  const auto& grid = j.at("grid");
  cfg.delta = grid.at("delta").get<double>();
  cfg.horizon = grid.at("horizon").get<double>();
  const auto& splines = j.at("splines");
  cfg.beta0 = spline_from_json(splines, "beta0");
  cfg.beta_treat = spline_from_json(splines, "beta_treat");
  cfg.beta_med = spline_from_json(splines, "beta_med");
  cfg.b21 = spline_from_json(splines, "b21");
  const auto& dist = j.at("distributions");
  cfg.med_baseline_mean = dist.at("med_baseline_mean").get<double>();
  cfg.med_baseline_sd = dist.at("med_baseline_sd").get<double>();
  cfg.noise_sd = dist.at("noise_sd").get<double>();
  cfg.treat_prob = dist.at("treat_prob").get<double>();
  cfg.censor_max = j.at("censoring").at("max").get<double>();
  cfg.n = j.at("n").get<std::size_t>();
  cfg.seed = j.at("seed").get<std::uint64_t>();
  cfg.clamp_negative_hazard = j.value("clamp_negative_hazard", false);
  validate(cfg);
  return cfg;
}

nlohmann::json SimConfig::to_json() const {
  return nlohmann::json{
      {"grid", {{"delta", delta}, {"horizon", horizon}}},
      {"splines",
       {{"beta0", spline_to_json(beta0)},
        {"beta_treat", spline_to_json(beta_treat)},
        {"beta_med", spline_to_json(beta_med)},
        {"b21", spline_to_json(b21)}}},
      {"distributions",
       {{"med_baseline_mean", med_baseline_mean},
        {"med_baseline_sd", med_baseline_sd},
        {"noise_sd", noise_sd},
        {"treat_prob", treat_prob}}},
      {"censoring", {{"max", censor_max}}},
      {"n", n},
      {"seed", seed},
      {"clamp_negative_hazard", clamp_negative_hazard}};
}

SimConfig SimConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("config: JSON parse error: ") + e.what());
  }
  try {
    return from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
}

void validate(const SimConfig& cfg) {
  if (!(cfg.delta > 0.0)) throw ValidationError("config: delta must be > 0");
  if (!(cfg.horizon > 0.0)) throw ValidationError("config: horizon must be > 0");
  const double ratio = cfg.horizon / cfg.delta;
  if (std::fabs(ratio - std::llround(ratio)) > 1e-9) {
    throw ValidationError("config: horizon must be a multiple of delta");
  }
  if (!(cfg.treat_prob >= 0.0 && cfg.treat_prob <= 1.0)) {
    throw ValidationError("config: treat_prob must be in [0,1]");
  }
  if (cfg.med_baseline_sd < 0.0 || cfg.noise_sd < 0.0) {
    throw ValidationError("config: standard deviations must be >= 0");
  }
  if (!(cfg.censor_max > 0.0)) throw ValidationError("config: censor_max must be > 0");
  if (cfg.n == 0) throw ValidationError("config: n must be >= 1");

  // Hazard nonnegativity on the grid for mediator values within +-6 sd of
  // the arm-specific mean.
  const double sd = std::sqrt(cfg.med_baseline_sd * cfg.med_baseline_sd +
                              cfg.noise_sd * cfg.noise_sd);
  const std::size_t H = cfg.steps();
  for (std::size_t h = 1; h <= H; ++h) {
    // Candidate event times; the mediator entering the hazard at t is its
    // left limit, sampled one grid step earlier.
    const double t = static_cast<double>(h) * cfg.delta;
    const double t_prev = t - cfg.delta;
    for (double x1 : {0.0, 1.0}) {
      const double mean_med = cfg.med_baseline_mean + cfg.b21(t_prev) * x1;
      for (double dev : {-6.0, 6.0}) {
        const double x2 = mean_med + dev * sd;
        const double alpha = cfg.beta0(t) + cfg.beta_treat(t) * x1 + cfg.beta_med(t) * x2;
        if (alpha < 0.0) {
          throw ValidationError(
              "config: hazard negative at t=" + std::to_string(t) +
              " for arm " + std::to_string(static_cast<int>(x1)) +
              ", mediator " + std::to_string(x2));
        }
      }
    }
  }
}

TrialResult generate_trial(const SimConfig& cfg, int threads) {
  validate(cfg);
  const std::size_t H = cfg.steps();

  TrialResult out;
  out.dataset.subjects.resize(cfg.n);
  std::atomic<std::size_t> clamped{0};
  std::atomic<bool> negative{false};

#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(threads)
#endif
  for (std::size_t i = 0; i < cfg.n; ++i) {
    std::mt19937_64 rng = make_stream(cfg.seed, i);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> std_normal(0.0, 1.0);

    Subject s;
    s.id = "s" + std::to_string(i + 1);
    s.treatment = unif(rng) < cfg.treat_prob ? 1.0 : 0.0;
    const double baseline_med =
        cfg.med_baseline_mean + cfg.med_baseline_sd * std_normal(rng);
    const double censor = cfg.censor_max * unif(rng);

    double event_time = -1.0;
    s.mediator_series.reserve(H);
    for (std::size_t h = 0; h < H; ++h) {
      const double t = static_cast<double>(h) * cfg.delta;
      const double med = baseline_med + cfg.b21(t) * s.treatment +
                         cfg.noise_sd * std_normal(rng);
      s.mediator_series.emplace_back(t, med);
      // Candidate event time is the interval end; the hazard there uses the
      // mediator left limit, i.e. the value just sampled at t.
      const double te = static_cast<double>(h + 1) * cfg.delta;
      double alpha = cfg.beta0(te) + cfg.beta_treat(te) * s.treatment +
                     cfg.beta_med(te) * med;
      if (alpha < 0.0) {
        if (cfg.clamp_negative_hazard) {
          alpha = 0.0;
          clamped.fetch_add(1, std::memory_order_relaxed);
        } else {
          negative.store(true, std::memory_order_relaxed);
          break;
        }
      }
      const double p = std::min(alpha * cfg.delta, 1.0);
      if (unif(rng) < p) {
        // Event within (t_h, t_h + delta], recorded at the interval end.
        event_time = te;
        break;
      }
    }

    double limit = std::min(censor, cfg.horizon);
    if (event_time > 0.0 && event_time <= limit) {
      s.followup = event_time;
      s.event = true;
    } else {
      s.followup = limit;
      s.event = false;
    }
    // Measurements taken strictly before the end of follow-up.
    while (!s.mediator_series.empty() &&
           s.mediator_series.back().first >= s.followup) {
      s.mediator_series.pop_back();
    }
    out.dataset.subjects[i] = std::move(s);
  }

  if (negative.load()) {
    throw NumericalError("generate_trial: realized hazard negative");
  }
  out.clamped_steps = clamped.load();
  for (const auto& s : out.dataset.subjects) {
    if (s.event) {
      ++out.n_events;
    } else if (s.followup < cfg.horizon) {
      ++out.n_censored_uniform;
    }
  }
  return out;
}

Dataset snapshot(const Dataset& ds, const std::vector<double>& keep_times) {
  if (keep_times.empty()) throw ValidationError("snapshot: keep_times is empty");
  if (!std::is_sorted(keep_times.begin(), keep_times.end())) {
    throw ValidationError("snapshot: keep_times must be sorted");
  }
  constexpr double kMatchTol = 1e-9;
  Dataset out;
  out.covariate_names = ds.covariate_names;
  out.subjects.reserve(ds.subjects.size());
  for (const auto& s : ds.subjects) {
    Subject r = s;
    r.mediator_series.clear();
    for (const auto& [mt, mv] : s.mediator_series) {
      const bool kept = std::any_of(
          keep_times.begin(), keep_times.end(),
          [&](double kt) { return std::fabs(kt - mt) <= kMatchTol; });
      if (kept && mt < s.followup) r.mediator_series.emplace_back(mt, mv);
    }
    out.subjects.push_back(std::move(r));
  }
  return out;
}

TruthCurves true_curves(const SimConfig& cfg, const std::vector<double>& grid) {
  constexpr int kRefine = 16;
  TruthCurves tc;
  tc.times = grid;
  tc.direct.resize(grid.size());
  tc.indirect.resize(grid.size());
  double prev_t = 0.0, cum_dir = 0.0, cum_ind = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double t = grid[k];
    const double h = (t - prev_t) / kRefine;
    if (h > 0.0) {
      for (int j = 0; j < kRefine; ++j) {
        const double a = prev_t + j * h;
        const double b = a + h;
        cum_dir += 0.5 * h * (cfg.beta_treat(a) + cfg.beta_treat(b));
        cum_ind += 0.5 * h * (cfg.b21(a) * cfg.beta_med(a) + cfg.b21(b) * cfg.beta_med(b));
      }
    }
    tc.direct[k] = cum_dir;
    tc.indirect[k] = cum_ind;
    prev_t = t;
  }
  return tc;
}

void write_truth_csv(const TruthCurves& tc, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("truth: cannot write " + path);
  out.precision(17);
  out << "time,direct,indirect,total\n";
  for (std::size_t k = 0; k < tc.times.size(); ++k) {
    out << tc.times[k] << ',' << tc.direct[k] << ',' << tc.indirect[k] << ','
        << tc.direct[k] + tc.indirect[k] << '\n';
  }
}

}  // namespace dynpath
