#include "dynpath/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "dynpath/errors.hpp"

namespace dynpath {

void validate(const Dataset& ds) {
  if (ds.subjects.empty()) throw ValidationError("dataset: no subjects");
  const std::size_t p = ds.covariate_names.size();
  bool any_event = false;
  for (const auto& s : ds.subjects) {
    if (s.baseline.size() != p) {
      throw ValidationError("dataset: subject " + s.id +
                            " has wrong baseline dimension");
    }
    if (!(s.followup > 0.0)) {
      throw ValidationError("dataset: subject " + s.id + " has followup <= 0");
    }
    for (std::size_t i = 1; i < s.mediator_series.size(); ++i) {
      if (!(s.mediator_series[i].first > s.mediator_series[i - 1].first)) {
        throw ValidationError("dataset: subject " + s.id +
                              " mediator times not strictly increasing");
      }
    }
    for (const auto& [mt, mv] : s.mediator_series) {
      if (!std::isfinite(mt) || !std::isfinite(mv) || mt < 0.0) {
        throw ValidationError("dataset: subject " + s.id +
                              " has invalid mediator measurement");
      }
    }
    any_event = any_event || s.event;
  }
  if (!any_event) throw ValidationError("dataset: no observed events");
}

std::optional<double> locf(const Subject& s, double t) {
  // Latest measurement with time strictly less than t.
  const auto& m = s.mediator_series;
  auto it = std::lower_bound(
      m.begin(), m.end(), t,
      [](const std::pair<double, double>& a, double b) { return a.first < b; });
  if (it == m.begin()) return std::nullopt;
  return std::prev(it)->second;
}

std::vector<double> event_times(const Dataset& ds) {
  std::vector<double> times;
  for (const auto& s : ds.subjects) {
    if (s.event) times.push_back(s.followup);
  }
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  return times;
}

std::vector<std::size_t> risk_set(const Dataset& ds, double t) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < ds.subjects.size(); ++i) {
    if (ds.subjects[i].followup >= t) idx.push_back(i);
  }
  return idx;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ValidationError("csv: cannot parse " + what + " value '" + s + "'");
  }
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

Dataset read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("csv: empty file " + path);
  const auto header = split_csv_line(line);
  if (header.size() < 6 || header[0] != "id" || header[1] != "treatment" ||
      header[header.size() - 4] != "med_time" ||
      header[header.size() - 3] != "med_value" ||
      header[header.size() - 2] != "followup" ||
      header.back() != "event") {
    throw ValidationError(
        "csv: expected header id,treatment,z_...,med_time,med_value,followup,event");
  }
  const std::size_t p = header.size() - 6;

  Dataset ds;
  ds.covariate_names.assign(header.begin() + 2, header.begin() + 2 + p);
  std::map<std::string, std::size_t> index;  // id -> position in ds.subjects

  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != header.size()) {
      throw ValidationError("csv: line " + std::to_string(lineno) +
                            " has wrong field count");
    }
    Subject row;
    row.id = f[0];
    row.treatment = parse_double(f[1], "treatment");
    for (std::size_t j = 0; j < p; ++j) {
      row.baseline.push_back(parse_double(f[2 + j], "covariate"));
    }
    row.followup = parse_double(f[p + 4], "followup");
    const std::string& ev = f[p + 5];
    if (ev == "0") {
      row.event = false;
    } else if (ev == "1") {
      row.event = true;
    } else {
      throw ValidationError("csv: line " + std::to_string(lineno) +
                            " event must be 0 or 1");
    }

    auto [it, inserted] = index.emplace(row.id, ds.subjects.size());
    if (inserted) {
      ds.subjects.push_back(row);
    } else {
      const Subject& s = ds.subjects[it->second];
      if (s.treatment != row.treatment || s.baseline != row.baseline ||
          s.followup != row.followup || s.event != row.event) {
        throw ValidationError("csv: line " + std::to_string(lineno) +
                              " inconsistent repeated fields for id " + row.id);
      }
    }
    if (!f[p + 2].empty() || !f[p + 3].empty()) {
      const double mt = parse_double(f[p + 2], "med_time");
      const double mv = parse_double(f[p + 3], "med_value");
      ds.subjects[it->second].mediator_series.emplace_back(mt, mv);
    }
  }
  for (auto& s : ds.subjects) {
    std::sort(s.mediator_series.begin(), s.mediator_series.end());
  }
  validate(ds);
  return ds;
}

void write_csv(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("csv: cannot write " + path);
  out << "id,treatment";
  for (const auto& z : ds.covariate_names) out << ',' << z;
  out << ",med_time,med_value,followup,event\n";
  for (const auto& s : ds.subjects) {
    std::string prefix = s.id + ',' + format_double(s.treatment);
    for (double z : s.baseline) prefix += ',' + format_double(z);
    const std::string suffix =
        ',' + format_double(s.followup) + ',' + (s.event ? "1" : "0");
    if (s.mediator_series.empty()) {
      out << prefix << ",," << suffix << '\n';
    } else {
      for (const auto& [mt, mv] : s.mediator_series) {
        out << prefix << ',' << format_double(mt) << ',' << format_double(mv)
            << suffix << '\n';
      }
    }
  }
}

}  // namespace dynpath
