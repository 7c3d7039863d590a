#include "dynpath/dpa.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "dynpath/errors.hpp"

namespace dynpath {

namespace {

struct Node {
  enum Kind { kTreatment, kMediatorProcess, kBaseline } kind;
  std::size_t baseline_idx = 0;  // for kBaseline
  std::string label;
};

std::vector<Node> resolve_nodes(const Dataset& ds,
                                const std::vector<std::string>& node_order) {
  if (node_order.empty() || node_order.front() != "treatment") {
    throw ValidationError("path: node order must start with 'treatment'");
  }
  std::vector<Node> nodes;
  for (const auto& label : node_order) {
    Node n;
    n.label = label;
    if (label == "treatment") {
      n.kind = Node::kTreatment;
    } else if (label == "mediator") {
      n.kind = Node::kMediatorProcess;
    } else {
      auto it = std::find(ds.covariate_names.begin(), ds.covariate_names.end(), label);
      if (it == ds.covariate_names.end()) {
        throw ValidationError("path: unknown node label '" + label + "'");
      }
      n.kind = Node::kBaseline;
      n.baseline_idx = static_cast<std::size_t>(it - ds.covariate_names.begin());
    }
    nodes.push_back(n);
  }
  return nodes;
}

std::vector<std::size_t> resolve_adjust(const Dataset& ds,
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

// Shared per-event-time estimates: hazard increments for every node and
// the coefficient of each earlier node in the regression of node k on all
// of its predecessors. Both the hazard solve and the edge regressions use
// one risk set (subjects at risk with a usable mediator left limit).
struct TimeEstimates {
  bool usable = false;
  std::vector<double> hazard_inc;          // one per node
  std::vector<std::vector<double>> edge;   // edge[k][j], j < k, for k >= 1
};

TimeEstimates estimates_at(const Dataset& ds, const std::vector<Node>& nodes,
                           const std::vector<std::size_t>& zidx, double t,
                           std::size_t* dropped_no_mediator) {
  TimeEstimates est;
  const std::size_t m = nodes.size();
  const bool needs_mediator =
      std::any_of(nodes.begin(), nodes.end(),
                  [](const Node& n) { return n.kind == Node::kMediatorProcess; });

  // Node value matrix over the shared risk set, plus the event response.
  std::vector<std::vector<double>> vals(m);
  std::vector<double> response;
  std::vector<std::vector<double>> zvals(zidx.size());
  for (const auto& s : ds.subjects) {
    if (s.followup < t) continue;
    double med = 0.0;
    if (needs_mediator) {
      auto lv = locf(s, t);
      if (!lv) {
        if (dropped_no_mediator) ++(*dropped_no_mediator);
        continue;
      }
      med = *lv;
    }
    for (std::size_t k = 0; k < m; ++k) {
      switch (nodes[k].kind) {
        case Node::kTreatment: vals[k].push_back(s.treatment); break;
        case Node::kMediatorProcess: vals[k].push_back(med); break;
        case Node::kBaseline: vals[k].push_back(s.baseline[nodes[k].baseline_idx]); break;
      }
    }
    for (std::size_t j = 0; j < zidx.size(); ++j) {
      zvals[j].push_back(s.baseline[zidx[j]]);
    }
    response.push_back(s.event && s.followup == t ? 1.0 : 0.0);
  }
  const std::size_t n = response.size();
  const std::size_t q_hazard = 1 + m + zidx.size();
  if (n < q_hazard) return est;

  auto build = [&](std::size_t n_nodes, const std::vector<double>& resp) {
    LinearSystem sys;
    sys.rows = n;
    sys.cols = 1 + n_nodes + zidx.size();
    sys.design.reserve(n * sys.cols);
    for (std::size_t r = 0; r < n; ++r) {
      sys.design.push_back(1.0);
      for (std::size_t k = 0; k < n_nodes; ++k) sys.design.push_back(vals[k][r]);
      for (std::size_t j = 0; j < zidx.size(); ++j) sys.design.push_back(zvals[j][r]);
    }
    sys.response = resp;
    return sys;
  };

  const OlsFit hz = ols(build(m, response));
  if (!hz.full_rank) return est;
  est.hazard_inc.resize(m);
  for (std::size_t k = 0; k < m; ++k) est.hazard_inc[k] = hz.coef[1 + k];

  est.edge.assign(m, {});
  for (std::size_t k = 1; k < m; ++k) {
    if (n < 1 + k + zidx.size()) return est;
    const OlsFit ef = ols(build(k, vals[k]));
    if (!ef.full_rank) return est;
    est.edge[k].resize(k);
    for (std::size_t j = 0; j < k; ++j) est.edge[k][j] = ef.coef[1 + j];
  }
  est.usable = true;
  return est;
}

}  // namespace

std::string PathSpec::to_string() const {
  std::string s;
  for (const auto& n : nodes) {
    s += n;
    s += "->";
  }
  s += "outcome";
  return s;
}

OlsFit mediator_regression_at(const Dataset& ds, double t,
                              const std::vector<std::string>& adjust) {
  const auto zidx = resolve_adjust(ds, adjust);
  LinearSystem sys;
  sys.cols = 2 + zidx.size();
  for (const auto& s : ds.subjects) {
    if (s.followup < t) continue;
    auto lv = locf(s, t);
    if (!lv) continue;
    sys.design.push_back(1.0);
    sys.design.push_back(s.treatment);
    for (std::size_t j : zidx) sys.design.push_back(s.baseline[j]);
    sys.response.push_back(*lv);
  }
  sys.rows = sys.response.size();
  if (sys.rows < sys.cols) {
    OlsFit f;
    f.full_rank = false;
    return f;
  }
  return ols(sys);
}

DpaResult fit_dpa(const Dataset& ds, const std::vector<std::string>& adjust) {
  validate(ds);
  const auto nodes = resolve_nodes(ds, {"treatment", "mediator"});
  const auto zidx = resolve_adjust(ds, adjust);
  const auto times = event_times(ds);

  DpaResult r;
  r.times = times;
  const std::size_t nt = times.size();
  r.direct_inc.assign(nt, 0.0);
  r.indirect_inc.assign(nt, 0.0);
  r.local_b21.assign(nt, 0.0);
  r.skipped.assign(nt, 0);

  std::size_t usable = 0;
  for (std::size_t k = 0; k < nt; ++k) {
    const TimeEstimates est =
        estimates_at(ds, nodes, zidx, times[k], &r.dropped_no_mediator);
    if (!est.usable) {
      r.skipped[k] = 1;
      ++r.n_skipped;
      continue;
    }
    r.direct_inc[k] = est.hazard_inc[0];
    r.local_b21[k] = est.edge[1][0];
    r.indirect_inc[k] = est.edge[1][0] * est.hazard_inc[1];
    ++usable;
  }
  if (usable == 0) {
    throw NoUsableEventTimes("fit_dpa: all " + std::to_string(nt) +
                             " event times skipped");
  }

  r.direct.resize(nt);
  r.indirect.resize(nt);
  r.total.resize(nt);
  double cd = 0.0, ci = 0.0;
  for (std::size_t k = 0; k < nt; ++k) {
    cd += r.direct_inc[k];
    ci += r.indirect_inc[k];
    r.direct[k] = cd;
    r.indirect[k] = ci;
    r.total[k] = cd + ci;
  }
  return r;
}

namespace {

// Path product at one usable event time; the path holds node indices into
// the node order, starting at 0 (treatment).
double path_increment(const TimeEstimates& est, const std::vector<std::size_t>& path) {
  double prod = 1.0;
  for (std::size_t j = 1; j < path.size(); ++j) {
    prod *= est.edge[path[j]][path[j - 1]];
  }
  return prod * est.hazard_inc[path.back()];
}

std::vector<std::size_t> path_indices(const PathSpec& path,
                                      const std::vector<std::string>& node_order) {
  if (path.nodes.empty() || path.nodes.front() != "treatment") {
    throw ValidationError("path: must start at 'treatment'");
  }
  std::vector<std::size_t> idx;
  for (const auto& label : path.nodes) {
    auto it = std::find(node_order.begin(), node_order.end(), label);
    if (it == node_order.end()) {
      throw ValidationError("path: node '" + label + "' not in node order");
    }
    const std::size_t i = static_cast<std::size_t>(it - node_order.begin());
    if (!idx.empty() && i <= idx.back()) {
      throw ValidationError("path: nodes must be strictly increasing in measurement order");
    }
    idx.push_back(i);
  }
  return idx;
}

}  // namespace

PathCurve path_effect(const Dataset& ds, const PathSpec& path,
                      const std::vector<std::string>& node_order,
                      const std::vector<std::string>& adjust) {
  validate(ds);
  const auto nodes = resolve_nodes(ds, node_order);
  const auto zidx = resolve_adjust(ds, adjust);
  const auto idx = path_indices(path, node_order);
  const auto times = event_times(ds);

  PathCurve pc;
  pc.path = path;
  pc.increments.assign(times.size(), 0.0);
  std::size_t usable = 0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    const TimeEstimates est = estimates_at(ds, nodes, zidx, times[k], nullptr);
    if (!est.usable) continue;
    pc.increments[k] = path_increment(est, idx);
    ++usable;
  }
  if (usable == 0) throw NoUsableEventTimes("path_effect: all event times skipped");
  pc.cumulative.resize(times.size());
  double run = 0.0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    run += pc.increments[k];
    pc.cumulative[k] = run;
  }
  return pc;
}

TotalDecomposition total_decomposition(const Dataset& ds,
                                       const std::vector<std::string>& node_order,
                                       const std::vector<std::string>& adjust) {
  validate(ds);
  const auto nodes = resolve_nodes(ds, node_order);
  const auto zidx = resolve_adjust(ds, adjust);
  const std::size_t n_med = nodes.size() - 1;
  if (n_med > 15) {
    throw ValidationError("total_decomposition: too many mediators (path count over 2^15)");
  }
  const auto times = event_times(ds);

  // Enumerate increasing paths: every subset of mediators, in order. The
  // empty subset is the direct path.
  std::vector<std::vector<std::size_t>> all_paths;
  for (std::size_t mask = 0; mask < (std::size_t{1} << n_med); ++mask) {
    std::vector<std::size_t> p{0};
    for (std::size_t b = 0; b < n_med; ++b) {
      if (mask & (std::size_t{1} << b)) p.push_back(1 + b);
    }
    all_paths.push_back(std::move(p));
  }

  TotalDecomposition td;
  td.times = times;
  td.paths.resize(all_paths.size());
  for (std::size_t i = 0; i < all_paths.size(); ++i) {
    for (std::size_t ni : all_paths[i]) {
      td.paths[i].path.nodes.push_back(node_order[ni]);
    }
    td.paths[i].increments.assign(times.size(), 0.0);
  }

  std::size_t usable = 0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    const TimeEstimates est = estimates_at(ds, nodes, zidx, times[k], nullptr);
    if (!est.usable) {
      ++td.n_skipped;
      continue;
    }
    for (std::size_t i = 0; i < all_paths.size(); ++i) {
      td.paths[i].increments[k] = path_increment(est, all_paths[i]);
    }
    ++usable;
  }
  if (usable == 0) {
    throw NoUsableEventTimes("total_decomposition: all event times skipped");
  }
  for (auto& pc : td.paths) {
    pc.cumulative.resize(times.size());
    double run = 0.0;
    for (std::size_t k = 0; k < times.size(); ++k) {
      run += pc.increments[k];
      pc.cumulative[k] = run;
    }
  }
  return td;
}

ProportionMediated proportion_mediated(const DpaResult& r, double t, double tol_abs) {
  ProportionMediated pm;
  if (r.times.empty() || t < r.times.front()) return pm;
  auto it = std::upper_bound(r.times.begin(), r.times.end(), t);
  const std::size_t k = static_cast<std::size_t>(it - r.times.begin()) - 1;
  const double tot = r.total[k];
  if (std::fabs(tot) <= tol_abs) return pm;
  double max_abs = 0.0;
  for (double v : r.total) max_abs = std::max(max_abs, std::fabs(v));
  pm.value = r.indirect[k] / tot;
  pm.unstable = std::fabs(tot) < 0.05 * max_abs;
  return pm;
}

void write_dpa_csv(const DpaResult& r, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("dpa: cannot write " + path);
  out.precision(17);
  out << "time,direct,indirect,total,local_b21,skipped\n";
  for (std::size_t k = 0; k < r.times.size(); ++k) {
    out << r.times[k] << ',' << r.direct[k] << ',' << r.indirect[k] << ','
        << r.total[k] << ',' << r.local_b21[k] << ','
        << static_cast<int>(r.skipped[k]) << '\n';
  }
}

}  // namespace dynpath
