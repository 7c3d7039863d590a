#include "dynpath/regress.hpp"

#include <cmath>
#include <numeric>

#include "dynpath/errors.hpp"

namespace dynpath {

namespace {

// Cholesky with symmetric diagonal pivoting on a q x q Gram matrix.
// Returns false if the smallest selected pivot is below tol times the
// largest initial diagonal entry; otherwise leaves the factorization in g
// and the permutation in perm.
bool pivoted_cholesky(std::vector<double>& g, std::size_t q,
                      std::vector<std::size_t>& perm, double tol) {
  perm.resize(q);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  double dmax = 0.0;
  for (std::size_t i = 0; i < q; ++i) dmax = std::max(dmax, g[i * q + i]);
  if (!(dmax > 0.0)) return false;

  for (std::size_t k = 0; k < q; ++k) {
    std::size_t p = k;
    for (std::size_t i = k + 1; i < q; ++i) {
      if (g[i * q + i] > g[p * q + p]) p = i;
    }
    if (p != k) {
      std::swap(perm[k], perm[p]);
      for (std::size_t j = 0; j < q; ++j) std::swap(g[k * q + j], g[p * q + j]);
      for (std::size_t i = 0; i < q; ++i) std::swap(g[i * q + k], g[i * q + p]);
    }
    const double d = g[k * q + k];
    if (!(d > tol * dmax)) return false;
    const double s = std::sqrt(d);
    g[k * q + k] = s;
    for (std::size_t i = k + 1; i < q; ++i) g[i * q + k] /= s;
    // Update the full trailing block so later symmetric pivot swaps see
    // consistent values in both triangles.
    for (std::size_t j = k + 1; j < q; ++j) {
      for (std::size_t i = k + 1; i < q; ++i) {
        g[i * q + j] -= g[i * q + k] * g[j * q + k];
      }
    }
  }
  return true;
}

void gram_and_rhs(const LinearSystem& sys, std::vector<double>& gram,
                  std::vector<double>& rhs) {
  const std::size_t n = sys.rows, q = sys.cols;
  const bool have_response = sys.response.size() == n;
  gram.assign(q * q, 0.0);
  rhs.assign(q, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    const double* row = sys.design.data() + r * q;
    for (std::size_t i = 0; i < q; ++i) {
      for (std::size_t j = 0; j <= i; ++j) {
        gram[i * q + j] += row[i] * row[j];
      }
      if (have_response) rhs[i] += row[i] * sys.response[r];
    }
  }
  for (std::size_t i = 0; i < q; ++i) {
    for (std::size_t j = i + 1; j < q; ++j) gram[i * q + j] = gram[j * q + i];
  }
}

}  // namespace

OlsFit ols(const LinearSystem& sys) {
  const std::size_t n = sys.rows, q = sys.cols;
  if (q < 1 || n < q) throw ValidationError("ols: need rows >= cols >= 1");
  if (sys.design.size() != n * q || sys.response.size() != n) {
    throw ValidationError("ols: inconsistent system dimensions");
  }

  std::vector<double> gram, rhs;
  gram_and_rhs(sys, gram, rhs);

  std::vector<std::size_t> perm;
  OlsFit fit;
  if (!pivoted_cholesky(gram, q, perm, kRankTolerance)) {
    fit.full_rank = false;
    return fit;
  }

  // Solve L L' (P b) = P rhs.
  std::vector<double> y(q);
  for (std::size_t i = 0; i < q; ++i) {
    double s = rhs[perm[i]];
    for (std::size_t j = 0; j < i; ++j) s -= gram[i * q + j] * y[j];
    y[i] = s / gram[i * q + i];
  }
  std::vector<double> z(q);
  for (std::size_t ii = q; ii-- > 0;) {
    double s = y[ii];
    for (std::size_t j = ii + 1; j < q; ++j) s -= gram[j * q + ii] * z[j];
    z[ii] = s / gram[ii * q + ii];
  }
  fit.coef.assign(q, 0.0);
  for (std::size_t i = 0; i < q; ++i) fit.coef[perm[i]] = z[i];
  fit.full_rank = true;
  return fit;
}

OlsFit ols_with_se(const LinearSystem& sys) {
  OlsFit fit = ols(sys);
  if (!fit.full_rank) return fit;
  const std::size_t n = sys.rows, q = sys.cols;

  double rss = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    double pred = 0.0;
    for (std::size_t j = 0; j < q; ++j) pred += sys.at(r, j) * fit.coef[j];
    const double e = sys.response[r] - pred;
    rss += e * e;
  }
  const double sigma2 = n > q ? rss / static_cast<double>(n - q) : 0.0;

  // Diagonal of (X'X)^-1 by solving against unit vectors.
  std::vector<double> gram, rhs;
  gram_and_rhs(sys, gram, rhs);
  std::vector<std::size_t> perm;
  pivoted_cholesky(gram, q, perm, kRankTolerance);
  std::vector<std::size_t> inv_perm(q);
  for (std::size_t i = 0; i < q; ++i) inv_perm[perm[i]] = i;

  fit.se.assign(q, 0.0);
  std::vector<double> y(q), z(q);
  for (std::size_t col = 0; col < q; ++col) {
    for (std::size_t i = 0; i < q; ++i) {
      double s = perm[i] == col ? 1.0 : 0.0;
      for (std::size_t j = 0; j < i; ++j) s -= gram[i * q + j] * y[j];
      y[i] = s / gram[i * q + i];
    }
    for (std::size_t ii = q; ii-- > 0;) {
      double s = y[ii];
      for (std::size_t j = ii + 1; j < q; ++j) s -= gram[j * q + ii] * z[j];
      z[ii] = s / gram[ii * q + ii];
    }
    fit.se[col] = std::sqrt(std::max(0.0, sigma2 * z[inv_perm[col]]));
  }
  return fit;
}

bool rank_check(const LinearSystem& sys) {
  const std::size_t q = sys.cols;
  if (q < 1 || sys.rows < q) return false;
  std::vector<double> gram, rhs;
  gram_and_rhs(sys, gram, rhs);
  std::vector<std::size_t> perm;
  return pivoted_cholesky(gram, q, perm, kRankTolerance);
}

}  // namespace dynpath
