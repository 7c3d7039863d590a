#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <doctest.h>

#include "dynpath/data.hpp"
#include "dynpath/errors.hpp"
#include "dynpath/hazard.hpp"

using dynpath::AdditiveFit;
using dynpath::Dataset;
using dynpath::HazardSpec;
using dynpath::Subject;

namespace {

Subject subj(std::string id, double treat,
             std::vector<std::pair<double, double>> med, double fu, bool ev,
             std::vector<double> baseline = {}) {
  Subject s;
  s.id = std::move(id);
  s.treatment = treat;
  s.baseline = std::move(baseline);
  s.mediator_series = std::move(med);
  s.followup = fu;
  s.event = ev;
  return s;
}

// Independent Nelson-Aalen oracle: d(t)/n(t) summed over event times.
std::vector<std::pair<double, double>> nelson_aalen(const Dataset& ds) {
  auto times = dynpath::event_times(ds);
  std::vector<std::pair<double, double>> out;
  double run = 0.0;
  for (double t : times) {
    std::size_t at_risk = 0, events = 0;
    for (const auto& s : ds.subjects) {
      if (s.followup >= t) ++at_risk;
      if (s.event && s.followup == t) ++events;
    }
    run += static_cast<double>(events) / static_cast<double>(at_risk);
    out.emplace_back(t, run);
  }
  return out;
}

Dataset random_trial(std::uint64_t seed, int n) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.1, 4.0);
  std::normal_distribution<double> n01(0.0, 1.0);
  std::bernoulli_distribution ev(0.7);
  Dataset ds;
  for (int i = 0; i < n; ++i) {
    const double fu = std::ceil(u(rng) * 16.0) / 16.0;
    ds.subjects.push_back(subj("s" + std::to_string(i), i % 2,
                               {{0.0, 10.0 + n01(rng)}}, fu, ev(rng)));
  }
  bool any = false;
  for (const auto& s : ds.subjects) any = any || s.event;
  if (!any) ds.subjects[0].event = true;
  return ds;
}

}  // namespace

TEST_CASE("intercept-only fit reduces to Nelson-Aalen: 1/3 then 5/6") {
  Dataset ds;
  ds.subjects = {subj("a", 0, {}, 1.0, true), subj("b", 0, {}, 2.0, true),
                 subj("c", 0, {}, 2.5, false)};
  HazardSpec spec;
  spec.include_treatment = false;
  auto fit = dynpath::fit_additive(ds, spec);
  REQUIRE(fit.curve.times == std::vector<double>{1.0, 2.0});
  CHECK(fit.curve.cumulative[0][0] == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(fit.curve.cumulative[0][1] == doctest::Approx(5.0 / 6.0).epsilon(1e-14));
}

TEST_CASE("intercept-only fit matches the Nelson-Aalen oracle on random data") {
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    Dataset ds = random_trial(seed, 300);
    HazardSpec spec;
    spec.include_treatment = false;
    auto fit = dynpath::fit_additive(ds, spec);
    auto oracle = nelson_aalen(ds);
    REQUIRE(fit.curve.times.size() == oracle.size());
    for (std::size_t k = 0; k < oracle.size(); ++k) {
      CHECK(fit.curve.times[k] == oracle[k].first);
      CHECK(std::fabs(fit.curve.cumulative[0][k] - oracle[k].second) <= 1e-12);
    }
  }
}

TEST_CASE("two-sample fit equals per-arm Nelson-Aalen difference") {
  Dataset ds = random_trial(17, 400);
  HazardSpec spec;  // intercept + treatment
  auto fit = dynpath::fit_additive(ds, spec);

  Dataset arm0, arm1;
  for (const auto& s : ds.subjects) {
    (s.treatment == 0.0 ? arm0 : arm1).subjects.push_back(s);
  }
  auto na0 = nelson_aalen(arm0);
  auto na1 = nelson_aalen(arm1);
  auto step_at = [](const std::vector<std::pair<double, double>>& na, double t) {
    double v = 0.0;
    for (const auto& [tt, c] : na) {
      if (tt <= t) v = c;
    }
    return v;
  };
  // With a saturated two-group design the OLS solution at each event time is
  // exactly the within-arm event proportion, so the cumulatives coincide with
  // per-arm Nelson-Aalen wherever no time was skipped.
  REQUIRE(fit.skipped == 0);
  for (double t : {0.5, 1.0, 2.0, 3.5}) {
    const double b0 = dynpath::eval_cumulative(fit.curve, "baseline", t);
    const double b1 = dynpath::eval_cumulative(fit.curve, "treatment", t);
    CHECK(std::fabs(b0 - step_at(na0, t)) <= 1e-10);
    CHECK(std::fabs((b0 + b1) - step_at(na1, t)) <= 1e-10);
  }
}

TEST_CASE("all-censored data throws NoUsableEventTimes via validation or fit") {
  Dataset ds;
  ds.subjects = {subj("a", 0, {}, 1.0, false), subj("b", 1, {}, 2.0, false)};
  HazardSpec spec;
  CHECK_THROWS(dynpath::fit_additive(ds, spec));
}

TEST_CASE("constant mediator forces skips that are counted") {
  // With include_mediator and every at-risk subject sharing one mediator
  // value, the mediator column duplicates the intercept: every time skips.
  Dataset ds;
  for (int i = 0; i < 10; ++i) {
    ds.subjects.push_back(subj("s" + std::to_string(i), i % 2, {{0.0, 7.0}},
                               1.0 + i, true));
  }
  HazardSpec spec;
  spec.include_mediator = true;
  CHECK_THROWS_AS(dynpath::fit_additive(ds, spec), dynpath::NoUsableEventTimes);

  // Break the collinearity at later times only: early times still skip.
  ds.subjects[8].mediator_series = {{0.0, 7.0}, {3.0, 9.0}};
  ds.subjects[9].mediator_series = {{0.0, 7.0}, {3.0, 5.0}};
  auto fit = dynpath::fit_additive(ds, spec);
  CHECK(fit.skipped > 0);
  CHECK(fit.skipped < fit.curve.times.size());
  for (std::size_t k = 0; k < fit.curve.times.size(); ++k) {
    if (fit.curve.times[k] <= 3.0) {
      for (const auto& inc : fit.curve.increments) CHECK(inc[k] == 0.0);
    }
  }
}

TEST_CASE("at-risk subjects without a mediator left limit are dropped") {
  Dataset ds;
  ds.subjects = {subj("a", 1, {{0.0, 10.0}}, 1.0, true),
                 subj("b", 0, {{0.0, 8.0}}, 2.0, true),
                 subj("c", 1, {{0.0, 9.0}}, 3.0, true),
                 subj("d", 0, {{2.5, 11.0}}, 3.0, true)};  // first value late
  HazardSpec spec;
  spec.include_treatment = false;
  spec.include_mediator = true;
  auto fit = dynpath::fit_additive(ds, spec);
  // Subject d lacks X2(t-) at t=1 and t=2 -> two dropped subject-times.
  CHECK(fit.dropped_no_mediator == 2);
}

TEST_CASE("covariate scaling rescales the coefficient inversely") {
  Dataset ds = random_trial(31, 200);
  for (auto& s : ds.subjects) {
    s.baseline = {s.mediator_series[0].second - 10.0};
  }
  ds.covariate_names = {"z_1"};
  HazardSpec spec;
  spec.adjust = {"z_1"};
  auto fit = dynpath::fit_additive(ds, spec);

  Dataset scaled = ds;
  for (auto& s : scaled.subjects) s.baseline[0] *= 10.0;
  auto fit2 = dynpath::fit_additive(scaled, spec);

  REQUIRE(fit.curve.times.size() == fit2.curve.times.size());
  const std::size_t zj = fit.curve.label_index("z_1");
  const std::size_t bj = fit.curve.label_index("baseline");
  for (std::size_t k = 0; k < fit.curve.times.size(); ++k) {
    CHECK(fit2.curve.increments[zj][k] ==
          doctest::Approx(fit.curve.increments[zj][k] / 10.0).epsilon(1e-8));
    CHECK(fit2.curve.increments[bj][k] ==
          doctest::Approx(fit.curve.increments[bj][k]).epsilon(1e-8));
  }
}

TEST_CASE("eval_cumulative is a right-continuous step function") {
  Dataset ds;
  ds.subjects = {subj("a", 0, {}, 1.0, true), subj("b", 0, {}, 2.0, true),
                 subj("c", 0, {}, 3.0, false)};
  HazardSpec spec;
  spec.include_treatment = false;
  auto fit = dynpath::fit_additive(ds, spec);
  const auto& c = fit.curve;
  CHECK(dynpath::eval_cumulative(c, "baseline", 0.0) == 0.0);
  CHECK(dynpath::eval_cumulative(c, "baseline", 0.999) == 0.0);
  CHECK(dynpath::eval_cumulative(c, "baseline", 1.0) ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(dynpath::eval_cumulative(c, "baseline", 1.5) ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(dynpath::eval_cumulative(c, "baseline", 2.0) ==
        doctest::Approx(1.0 / 3.0 + 1.0 / 2.0).epsilon(1e-14));
  CHECK_THROWS_AS(dynpath::eval_cumulative(c, "nope", 1.0),
                  dynpath::ValidationError);
}
