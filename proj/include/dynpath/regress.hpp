#pragma once

#include <cstddef>
#include <vector>

namespace dynpath {

// Dense row-major design matrix with its response vector.
struct LinearSystem {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> design;    // rows*cols, row-major
  std::vector<double> response;  // rows

  double& at(std::size_t r, std::size_t c) { return design[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return design[r * cols + c]; }
};

struct OlsFit {
  std::vector<double> coef;
  std::vector<double> se;  // filled by ols_with_se only
  bool full_rank = false;
};

// Relative pivot tolerance for the pivoted factorization of X'X.
inline constexpr double kRankTolerance = 1e-10;

// Ordinary least squares via the normal equations (X'X) b = X'y, solved with
// a diagonally pivoted Cholesky factorization. full_rank is false when the
// smallest pivot falls below kRankTolerance times the largest; coef is then
// unspecified and the caller decides whether to skip.
OlsFit ols(const LinearSystem& sys);

// As ols, but also fills classical coefficient standard errors
// sqrt(sigma2 * [(X'X)^-1]_jj) with sigma2 = RSS / (n - q).
OlsFit ols_with_se(const LinearSystem& sys);

// Rank diagnostic on the design alone (same pivot rule as ols).
bool rank_check(const LinearSystem& sys);

}  // namespace dynpath
