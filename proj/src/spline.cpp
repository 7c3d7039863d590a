#include "dynpath/spline.hpp"

#include <algorithm>
#include <utility>

#include "dynpath/errors.hpp"

namespace dynpath {

SplineFunction::SplineFunction(std::vector<double> knots, std::vector<double> values)
    : knots_(std::move(knots)), values_(std::move(values)) {
  const std::size_t n = knots_.size();
  if (n != values_.size()) {
    throw ValidationError("spline: knots and values differ in length");
  }
  if (n < 2) {
    throw ValidationError("spline: need at least two knots");
  }
  for (std::size_t i = 1; i < n; ++i) {
    if (!(knots_[i] > knots_[i - 1])) {
      throw ValidationError("spline: knots must be strictly increasing");
    }
  }

  // Natural boundary: zero second derivative at both ends. The interior
  // second derivatives solve a tridiagonal system (Thomas algorithm).
  second_derivatives_.assign(n, 0.0);
  if (n == 2) return;

  std::vector<double> diag(n - 2), upper(n - 2), rhs(n - 2);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double h0 = knots_[i] - knots_[i - 1];
    const double h1 = knots_[i + 1] - knots_[i];
    diag[i - 1] = 2.0 * (h0 + h1);
    upper[i - 1] = h1;
    rhs[i - 1] = 6.0 * ((values_[i + 1] - values_[i]) / h1 -
                        (values_[i] - values_[i - 1]) / h0);
  }
  for (std::size_t i = 1; i + 1 < n - 1; ++i) {
    const double h = knots_[i + 1] - knots_[i];  // sub-diagonal entry
    const double fac = h / diag[i - 1];
    diag[i] -= fac * upper[i - 1];
    rhs[i] -= fac * rhs[i - 1];
  }
  const std::size_t m = n - 2;
  second_derivatives_[m] = rhs[m - 1] / diag[m - 1];
  for (std::size_t i = m - 1; i >= 1; --i) {
    second_derivatives_[i] =
        (rhs[i - 1] - upper[i - 1] * second_derivatives_[i + 1]) / diag[i - 1];
  }
}

double SplineFunction::operator()(double t) const {
  if (t <= knots_.front()) return values_.front();
  if (t >= knots_.back()) return values_.back();
  const auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
  const std::size_t i = static_cast<std::size_t>(it - knots_.begin()) - 1;
  const double h = knots_[i + 1] - knots_[i];
  const double a = (knots_[i + 1] - t) / h;
  const double b = (t - knots_[i]) / h;
  return a * values_[i] + b * values_[i + 1] +
         ((a * a * a - a) * second_derivatives_[i] +
          (b * b * b - b) * second_derivatives_[i + 1]) *
             (h * h) / 6.0;
}

}  // namespace dynpath
