#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace dynpath {

// One trial participant with a repeatedly measured mediator process.
struct Subject {
  std::string id;
  double treatment = 0.0;
  std::vector<double> baseline;
  // (time, value) pairs with strictly increasing times.
  std::vector<std::pair<double, double>> mediator_series;
  double followup = 0.0;
  bool event = false;
};

// Immutable after construction; shared read-only by parallel workers.
struct Dataset {
  std::vector<Subject> subjects;
  std::vector<std::string> covariate_names;  // labels for baseline entries
};

// Throws ValidationError if invariants fail (baseline dimensions, mediator
// time ordering, followup > 0, at least one observed event).
void validate(const Dataset& ds);

// Left limit of the mediator process at t: value of the latest measurement
// strictly before t, or nullopt if none exists.
std::optional<double> locf(const Subject& s, double t);

// Strictly increasing distinct times at which an event was observed.
std::vector<double> event_times(const Dataset& ds);

// Indices of subjects with followup >= t. Exact binary64 comparison.
std::vector<std::size_t> risk_set(const Dataset& ds, double t);

// Long-format CSV: id,treatment,z_1..z_p,med_time,med_value,followup,event;
// one row per mediator measurement, subject fields repeated and checked for
// consistency. A subject with no mediator measurements writes a single row
// with empty med_time/med_value fields.
Dataset read_csv(const std::string& path);
void write_csv(const Dataset& ds, const std::string& path);

}  // namespace dynpath
