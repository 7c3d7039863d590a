#include "dynpath/hazard.hpp"

#include <algorithm>
#include <fstream>

#include "dynpath/errors.hpp"
#include "dynpath/regress.hpp"

namespace dynpath {

std::size_t CumulativeCurve::label_index(const std::string& label) const {
  auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end()) {
    throw ValidationError("curve: unknown covariate label '" + label + "'");
  }
  return static_cast<std::size_t>(it - labels.begin());
}

double CumulativeCurve::value_at(std::size_t label_idx, double t) const {
  // Right-continuous: value at the k-th event time is cumulative[k].
  auto it = std::upper_bound(times.begin(), times.end(), t);
  if (it == times.begin()) return 0.0;
  return cumulative[label_idx][static_cast<std::size_t>(it - times.begin()) - 1];
}

double CumulativeCurve::value_at(const std::string& label, double t) const {
  return value_at(label_index(label), t);
}

void CumulativeCurve::finalize_cumulative() {
  cumulative.assign(increments.size(), {});
  for (std::size_t j = 0; j < increments.size(); ++j) {
    cumulative[j].resize(increments[j].size());
    double run = 0.0;
    for (std::size_t k = 0; k < increments[j].size(); ++k) {
      run += increments[j][k];
      cumulative[j][k] = run;
    }
  }
}

double eval_cumulative(const CumulativeCurve& c, const std::string& label, double t) {
  return c.value_at(label, t);
}

namespace {

std::vector<std::size_t> adjust_indices(const Dataset& ds,
                                        const std::vector<std::string>& adjust) {
  std::vector<std::size_t> idx;
  for (const auto& name : adjust) {
    auto it = std::find(ds.covariate_names.begin(), ds.covariate_names.end(), name);
    if (it == ds.covariate_names.end()) {
      throw ValidationError("fit: unknown covariate label '" + name + "'");
    }
    idx.push_back(static_cast<std::size_t>(it - ds.covariate_names.begin()));
  }
  return idx;
}

}  // namespace

AdditiveFit fit_additive(const Dataset& ds, const HazardSpec& spec) {
  validate(ds);
  const auto zidx = adjust_indices(ds, spec.adjust);
  const auto times = event_times(ds);

  AdditiveFit out;
  auto& curve = out.curve;
  curve.times = times;
  curve.labels.push_back("baseline");
  if (spec.include_treatment) curve.labels.push_back("treatment");
  if (spec.include_mediator) curve.labels.push_back("mediator");
  for (const auto& name : spec.adjust) curve.labels.push_back(name);
  const std::size_t q = curve.labels.size();
  curve.increments.assign(q, std::vector<double>(times.size(), 0.0));

  std::size_t usable = 0;
  LinearSystem sys;
  sys.cols = q;
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double t = times[k];
    sys.design.clear();
    sys.response.clear();
    for (const auto& s : ds.subjects) {
      if (s.followup < t) continue;
      double med = 0.0;
      if (spec.include_mediator) {
        auto m = locf(s, t);
        if (!m) {
          ++out.dropped_no_mediator;
          continue;
        }
        med = *m;
      }
      sys.design.push_back(1.0);
      if (spec.include_treatment) sys.design.push_back(s.treatment);
      if (spec.include_mediator) sys.design.push_back(med);
      for (std::size_t j : zidx) sys.design.push_back(s.baseline[j]);
      sys.response.push_back(s.event && s.followup == t ? 1.0 : 0.0);
    }
    sys.rows = sys.response.size();
    if (sys.rows < q) {
      ++out.skipped;
      continue;
    }
    const OlsFit fit = ols(sys);
    if (!fit.full_rank) {
      ++out.skipped;
      continue;
    }
    for (std::size_t j = 0; j < q; ++j) curve.increments[j][k] = fit.coef[j];
    ++usable;
  }

  if (usable == 0) {
    throw NoUsableEventTimes("fit_additive: all " + std::to_string(times.size()) +
                             " event times skipped");
  }
  curve.finalize_cumulative();
  return out;
}

void write_curve_csv(const CumulativeCurve& c, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("curve: cannot write " + path);
  out.precision(17);
  out << "time";
  for (const auto& l : c.labels) out << ',' << l << "_dB," << l << "_B";
  out << '\n';
  for (std::size_t k = 0; k < c.times.size(); ++k) {
    out << c.times[k];
    for (std::size_t j = 0; j < c.labels.size(); ++j) {
      out << ',' << c.increments[j][k] << ',' << c.cumulative[j][k];
    }
    out << '\n';
  }
}

}  // namespace dynpath
