// Acceptance checks for the full pipeline, one numbered criterion per
// function. Each prints PASS/FAIL with the measured quantity; the process
// exits nonzero if any criterion fails. argv[1] is the shipped config
// directory.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "dynpath/bootstrap.hpp"
#include "dynpath/collider.hpp"
#include "dynpath/data.hpp"
#include "dynpath/dpa.hpp"
#include "dynpath/errors.hpp"
#include "dynpath/hazard.hpp"
#include "dynpath/simgen.hpp"
#include "dynpath/study.hpp"

namespace {

using dynpath::Dataset;
using dynpath::Subject;

int g_failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
  std::printf("%s  criterion %d: %s\n", pass ? "PASS" : "FAIL", criterion,
              detail.c_str());
  if (!pass) ++g_failures;
}

int default_threads() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 4;
}

Subject subj(std::string id, double treat,
             std::vector<std::pair<double, double>> med, double fu, bool ev) {
  Subject s;
  s.id = std::move(id);
  s.treatment = treat;
  s.mediator_series = std::move(med);
  s.followup = fu;
  s.event = ev;
  return s;
}

Dataset random_small_dataset(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> size(4, 50);
  std::uniform_real_distribution<double> u(0.1, 3.0);
  std::normal_distribution<double> n01(0.0, 1.0);
  std::bernoulli_distribution ev(0.8);
  Dataset ds;
  const int n = size(rng);
  for (int i = 0; i < n; ++i) {
    const double treat = i % 2;
    ds.subjects.push_back(subj("s" + std::to_string(i), treat,
                               {{0.0, 10.0 - treat + n01(rng)}},
                               std::ceil(u(rng) * 8.0) / 8.0, ev(rng)));
  }
  bool any = false;
  for (const auto& s : ds.subjects) any = any || s.event;
  if (!any) ds.subjects[0].event = true;
  return ds;
}

// Dense Gaussian-elimination OLS used as the independent oracle.
std::vector<double> gauss_ols(const std::vector<std::vector<double>>& x,
                              const std::vector<double>& y) {
  const std::size_t n = x.size(), q = x[0].size();
  std::vector<std::vector<double>> a(q, std::vector<double>(q + 1, 0.0));
  for (std::size_t i = 0; i < q; ++i) {
    for (std::size_t j = 0; j < q; ++j) {
      for (std::size_t r = 0; r < n; ++r) a[i][j] += x[r][i] * x[r][j];
    }
    for (std::size_t r = 0; r < n; ++r) a[i][q] += x[r][i] * y[r];
  }
  for (std::size_t k = 0; k < q; ++k) {
    std::size_t p = k;
    for (std::size_t i = k + 1; i < q; ++i) {
      if (std::fabs(a[i][k]) > std::fabs(a[p][k])) p = i;
    }
    std::swap(a[k], a[p]);
    for (std::size_t i = k + 1; i < q; ++i) {
      const double f = a[i][k] / a[k][k];
      for (std::size_t j = k; j <= q; ++j) a[i][j] -= f * a[k][j];
    }
  }
  std::vector<double> b(q, 0.0);
  for (std::size_t ii = q; ii-- > 0;) {
    double s = a[ii][q];
    for (std::size_t j = ii + 1; j < q; ++j) s -= a[ii][j] * b[j];
    b[ii] = s / a[ii][ii];
  }
  return b;
}

void criterion1_exact_additivity() {
  std::mt19937_64 rng(2024);
  int usable = 0;
  bool exact = true;
  for (int rep = 0; rep < 50; ++rep) {
    Dataset ds = random_small_dataset(rng);
    try {
      auto r = dynpath::fit_dpa(ds, {});
      ++usable;
      for (std::size_t k = 0; k < r.times.size(); ++k) {
        if (r.total[k] != r.direct[k] + r.indirect[k]) exact = false;
      }
    } catch (const dynpath::NoUsableEventTimes&) {
      // tiny datasets may have no usable times; additivity is vacuous there
    }
  }
  report(1, exact && usable >= 30,
         "total == direct + indirect bitwise on " + std::to_string(usable) +
             "/50 random datasets");
}

void criterion2_oracle_equivalence() {
  // Hand-worked 4-subject example against explicit inversion.
  Dataset ds;
  ds.subjects = {subj("a", 0, {{0.0, 10.0}}, 1.0, true),
                 subj("b", 0, {{0.0, 14.0}}, 2.0, true),
                 subj("c", 1, {{0.0, 8.0}}, 3.0, true),
                 subj("d", 1, {{0.0, 12.0}}, 4.0, false)};
  auto r = dynpath::fit_dpa(ds, {});
  std::vector<std::vector<double>> xh = {
      {1, 0, 10}, {1, 0, 14}, {1, 1, 8}, {1, 1, 12}};
  auto bh = gauss_ols(xh, {1, 0, 0, 0});
  std::vector<std::vector<double>> xm = {{1, 0}, {1, 0}, {1, 1}, {1, 1}};
  auto bm = gauss_ols(xm, {10, 14, 8, 12});
  double worst = std::fabs(r.direct_inc[0] - bh[1]);
  worst = std::max(worst, std::fabs(r.local_b21[0] - bm[1]));
  worst = std::max(worst, std::fabs(r.indirect_inc[0] - bm[1] * bh[2]));

  dynpath::HazardSpec hs;
  auto hf = dynpath::fit_additive(ds, hs);
  std::vector<std::vector<double>> xt = {{1, 0}, {1, 0}, {1, 1}, {1, 1}};
  auto bt = gauss_ols(xt, {1, 0, 0, 0});
  worst = std::max(worst, std::fabs(hf.curve.increments[0][0] - bt[0]));
  worst = std::max(worst, std::fabs(hf.curve.increments[1][0] - bt[1]));
  const bool hand_ok = worst < 1e-10;

  // Intercept-only fits against an independently coded Nelson-Aalen.
  std::mt19937_64 rng(77);
  double na_worst = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    Dataset d = random_small_dataset(rng);
    dynpath::HazardSpec spec;
    spec.include_treatment = false;
    try {
      auto fit = dynpath::fit_additive(d, spec);
      double run = 0.0;
      for (std::size_t k = 0; k < fit.curve.times.size(); ++k) {
        const double t = fit.curve.times[k];
        std::size_t at_risk = 0, events = 0;
        for (const auto& s : d.subjects) {
          if (s.followup >= t) ++at_risk;
          if (s.event && s.followup == t) ++events;
        }
        run += static_cast<double>(events) / static_cast<double>(at_risk);
        na_worst =
            std::max(na_worst, std::fabs(fit.curve.cumulative[0][k] - run));
      }
    } catch (const dynpath::NoUsableEventTimes&) {
    }
  }
  const bool na_ok = na_worst < 1e-12;
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "hand-worked max err %.2e (tol 1e-10), Nelson-Aalen max err "
                "%.2e (tol 1e-12)",
                worst, na_worst);
  report(2, hand_ok && na_ok, buf);
}

void criterion3_simulation_study(const std::string& configs) {
  auto cfg = dynpath::StudyConfig::load(configs + "/study.json");
  auto res = dynpath::run_study(cfg, default_threads());

  const dynpath::ScenarioCurves* all = nullptr;
  const dynpath::ScenarioCurves* snap = nullptr;
  for (const auto& sc : res.scenarios) {
    if (sc.name == "all_measurements") all = &sc;
    if (sc.name == "baseline_wk12") snap = &sc;
  }
  if (!all || !snap) {
    report(3, false, "study config must ship all_measurements and baseline_wk12");
    return;
  }

  auto value_at = [&](const std::vector<double>& curve, double t) {
    double v = 0.0;
    for (std::size_t k = 0; k < res.grid.size(); ++k) {
      if (res.grid[k] <= t + 1e-9) v = curve[k];
    }
    return v;
  };
  double worst = 0.0;
  for (double t : {1.0, 2.0, 3.0, 4.0, 5.0}) {
    worst = std::max(worst, std::fabs(value_at(all->mean_direct, t) -
                                      value_at(res.truth.direct, t)));
    worst = std::max(worst, std::fabs(value_at(all->mean_indirect, t) -
                                      value_at(res.truth.indirect, t)));
  }
  const bool close = worst < 0.03;

  // Sign-of-bias reproduction. The sparse-measurement scenario attenuates
  // the indirect curve toward zero, and the missing indirect mass reappears
  // in the direct curve (same signed shift), inflating the direct estimate
  // relative to the truth. Both are asserted in signed form because the
  // cumulative direct truth changes sign over the horizon here, which makes
  // raw magnitude comparisons of the direct curve ill-posed.
  const double all_dir = value_at(all->mean_direct, 5.0);
  const double all_ind = value_at(all->mean_indirect, 5.0);
  const double snap_dir = value_at(snap->mean_direct, 5.0);
  const double snap_ind = value_at(snap->mean_indirect, 5.0);
  const double truth_dir = value_at(res.truth.direct, 5.0);
  const bool indirect_attenuated = std::fabs(snap_ind) < std::fabs(all_ind);
  const double missing_ind = all_ind - snap_ind;  // indirect mass lost
  const double dir_shift = snap_dir - all_dir;
  const bool direct_inflated =
      std::fabs(snap_dir - truth_dir) > std::fabs(all_dir - truth_dir) &&
      dir_shift * missing_ind > 0.0;  // lost mass moves into direct

  char buf[240];
  std::snprintf(buf, sizeof(buf),
                "all-measurement max |mean-truth| %.4f (tol 0.03); snapshot "
                "|ind(5)| %.3f < %.3f; direct shift %.3f absorbs missing "
                "indirect %.3f",
                worst, std::fabs(snap_ind), std::fabs(all_ind), dir_shift,
                missing_ind);
  report(3, close && indirect_attenuated && direct_inflated, buf);
}

void criterion4_collider_suite() {
  dynpath::ColliderConfig cfg;  // spec sizes: m=1e5, t in 1..5
  cfg.threads = default_threads();
  const auto ind = dynpath::verify_independence(cfg);
  const auto stab = dynpath::verify_coefficient_stability(cfg);
  const auto coll = dynpath::verify_collapsibility(cfg);
  std::size_t informational = 0;
  for (const auto* rep : {&ind, &stab, &coll}) {
    for (const auto& a : rep->assertions) {
      if (a.informational) ++informational;
    }
  }
  report(4,
         ind.all_pass() && stab.all_pass() && coll.all_pass() &&
             informational >= 3,
         "independence/stability/collapsibility all pass; " +
             std::to_string(informational) +
             " multiplicative-contrast reports emitted");
}

void criterion5_censoring_calibration(const std::string& configs) {
  auto cfg = dynpath::SimConfig::load(configs + "/sim.json");
  double total = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    dynpath::SimConfig c = cfg;
    c.seed = cfg.seed + 1000 + static_cast<std::uint64_t>(rep);
    auto r = dynpath::generate_trial(c, default_threads());
    total += static_cast<double>(r.n_censored_uniform) /
             static_cast<double>(c.n);
  }
  const double mean = total / 20.0;
  char buf[120];
  std::snprintf(buf, sizeof(buf),
                "mean censoring fraction %.4f (target 0.13 +- 0.02)", mean);
  report(5, std::fabs(mean - 0.13) < 0.02, buf);
}

void criterion6_bootstrap_contract(const std::string& configs) {
  auto cfg = dynpath::SimConfig::load(configs + "/sim.json");
  cfg.n = 800;  // keep the B=200 refits inside the runtime budget
  auto trial = dynpath::generate_trial(cfg, default_threads());

  auto r1 = dynpath::bootstrap_bands(trial.dataset, {}, 200, 0.95, 99, 1);
  auto r2 = dynpath::bootstrap_bands(trial.dataset, {}, 200, 0.95, 99, 2);
  auto r8 = dynpath::bootstrap_bands(trial.dataset, {}, 200, 0.95, 99, 8);
  auto same = [](const dynpath::BandSet& a, const dynpath::BandSet& b) {
    return a.grid == b.grid && a.point == b.point && a.lower == b.lower &&
           a.upper == b.upper;
  };
  const bool deterministic =
      same(r1.direct, r2.direct) && same(r1.direct, r8.direct) &&
      same(r1.indirect, r8.indirect) && same(r1.total, r8.total);

  auto narrow = dynpath::bootstrap_bands(trial.dataset, {}, 200, 0.90, 99,
                                         default_threads());
  auto wide = dynpath::bootstrap_bands(trial.dataset, {}, 200, 0.99, 99,
                                       default_threads());
  bool nested = true;
  auto check_nested = [&](const dynpath::BandSet& inner,
                          const dynpath::BandSet& outer) {
    for (std::size_t k = 0; k < inner.grid.size(); ++k) {
      if (outer.lower[k] > inner.lower[k] || outer.upper[k] < inner.upper[k]) {
        nested = false;
      }
    }
  };
  check_nested(narrow.direct, wide.direct);
  check_nested(narrow.indirect, wide.indirect);
  check_nested(narrow.total, wide.total);
  report(6, deterministic && nested,
         std::string("bands bitwise identical across 1/2/8 threads: ") +
             (deterministic ? "yes" : "no") +
             "; 0.99 bands contain 0.90 bands: " + (nested ? "yes" : "no"));
}

void criterion7_truth_quadrature(const std::string& configs) {
  auto cfg = dynpath::SimConfig::load(configs + "/sim.json");
  std::vector<double> grid;
  for (std::size_t h = 1; h <= cfg.steps(); ++h) {
    grid.push_back(static_cast<double>(h) * cfg.delta);
  }
  auto tc = dynpath::true_curves(cfg, grid);
  const long m = 1000000;
  const double h = 5.0 / static_cast<double>(m);
  double dir = 0.0, ind = 0.0;
  for (long j = 0; j < m; ++j) {
    const double t = (static_cast<double>(j) + 0.5) * h;
    dir += h * cfg.beta_treat(t);
    ind += h * cfg.b21(t) * cfg.beta_med(t);
  }
  const double err = std::max(std::fabs(tc.direct.back() - dir),
                              std::fabs(tc.indirect.back() - ind));
  char buf[100];
  std::snprintf(buf, sizeof(buf), "quadrature error at t=5: %.2e (tol 1e-6)",
                err);
  report(7, err < 1e-6, buf);
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: acceptance <config-dir>\n");
    return 2;
  }
  const std::string configs = argv[1];
  const auto t0 = std::chrono::steady_clock::now();
  try {
    criterion1_exact_additivity();
    criterion2_oracle_equivalence();
    criterion3_simulation_study(configs);
    criterion4_collider_suite();
    criterion5_censoring_calibration(configs);
    criterion6_bootstrap_contract(configs);
    criterion7_truth_quadrature(configs);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "acceptance aborted: %s\n", e.what());
    return 1;
  }
  const double wall = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
  std::printf("\n%d/7 criteria passed (%.1fs)\n", 7 - g_failures, wall);
  return g_failures == 0 ? 0 : 1;
}
