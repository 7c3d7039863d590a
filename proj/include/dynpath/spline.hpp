#pragma once

#include <cstddef>
#include <vector>

namespace dynpath {

// Natural interpolating cubic spline with constant extrapolation beyond the
// knot range. Immutable after construction; safe to share across threads.
class SplineFunction {
 public:
  SplineFunction() : SplineFunction({0.0, 1.0}, {0.0, 0.0}) {}
  SplineFunction(std::vector<double> knots, std::vector<double> values);

  double operator()(double t) const;

  const std::vector<double>& knots() const { return knots_; }
  const std::vector<double>& values() const { return values_; }

 private:
  std::vector<double> knots_;
  std::vector<double> values_;
  std::vector<double> second_derivatives_;
};

}  // namespace dynpath
