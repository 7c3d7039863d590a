#include "dynpath/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "dynpath/errors.hpp"
#include "dynpath/rng.hpp"

namespace dynpath {

namespace {

// Step-function read-back of a replicate curve onto the original grid.
double step_eval(const std::vector<double>& times, const std::vector<double>& cum,
                 double t) {
  auto it = std::upper_bound(times.begin(), times.end(), t);
  if (it == times.begin()) return 0.0;
  return cum[static_cast<std::size_t>(it - times.begin()) - 1];
}

}  // namespace

BootstrapResult bootstrap_bands(const Dataset& ds,
                                const std::vector<std::string>& adjust, int B,
                                double level, std::uint64_t seed, int threads) {
  if (B < 2) throw ValidationError("bootstrap: B must be >= 2");
  if (!(level > 0.0 && level < 1.0)) {
    throw ValidationError("bootstrap: level must be in (0,1)");
  }
  const DpaResult base = fit_dpa(ds, adjust);
  const std::vector<double>& grid = base.times;
  const std::size_t g = grid.size();
  const std::size_t n = ds.subjects.size();

  // Row r holds replicate r's three curves on the grid; NaN marks a
  // discarded replicate. Filled by replicate index, so the merge is
  // deterministic regardless of scheduling.
  std::vector<std::vector<double>> dir(B), ind(B), tot(B);

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(threads)
#endif
  for (int r = 0; r < B; ++r) {
    std::mt19937_64 rng = make_stream(seed, static_cast<std::uint64_t>(r));
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    Dataset resampled;
    resampled.covariate_names = ds.covariate_names;
    resampled.subjects.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      resampled.subjects.push_back(ds.subjects[pick(rng)]);
    }
    try {
      const DpaResult fit = fit_dpa(resampled, adjust);
      dir[r].resize(g);
      ind[r].resize(g);
      tot[r].resize(g);
      for (std::size_t k = 0; k < g; ++k) {
        dir[r][k] = step_eval(fit.times, fit.direct, grid[k]);
        ind[r][k] = step_eval(fit.times, fit.indirect, grid[k]);
        tot[r][k] = step_eval(fit.times, fit.total, grid[k]);
      }
    } catch (const NoUsableEventTimes&) {
      // leave empty; counted below
    }
  }

  std::size_t kept = 0;
  for (int r = 0; r < B; ++r) {
    if (!dir[r].empty()) ++kept;
  }
  const std::size_t discarded = static_cast<std::size_t>(B) - kept;
  if (discarded * 5 > static_cast<std::size_t>(B)) {
    throw NumericalError("bootstrap: more than 20% of replicates discarded (" +
                         std::to_string(discarded) + " of " + std::to_string(B) + ")");
  }

  const double p_lo = (1.0 - level) / 2.0;
  const double p_hi = 1.0 - p_lo;
  auto make_band = [&](const std::vector<std::vector<double>>& rows,
                       const std::vector<double>& point, const char* name) {
    BandSet b;
    b.curve_name = name;
    b.grid = grid;
    b.point = point;
    b.replicates = B;
    b.level = level;
    b.seed = seed;
    b.lower.resize(g);
    b.upper.resize(g);
    std::vector<double> col;
    col.reserve(kept);
    for (std::size_t k = 0; k < g; ++k) {
      col.clear();
      for (const auto& row : rows) {
        if (!row.empty()) col.push_back(row[k]);
      }
      std::sort(col.begin(), col.end());
      const std::size_t m = col.size();
      const std::size_t i_lo =
          static_cast<std::size_t>(std::floor(p_lo * static_cast<double>(m - 1)));
      const std::size_t i_hi =
          static_cast<std::size_t>(std::ceil(p_hi * static_cast<double>(m - 1)));
      b.lower[k] = col[i_lo];
      b.upper[k] = col[i_hi];
    }
    return b;
  };

  BootstrapResult out;
  out.direct = make_band(dir, base.direct, "direct");
  out.indirect = make_band(ind, base.indirect, "indirect");
  out.total = make_band(tot, base.total, "total");
  out.discarded = discarded;
  return out;
}

void write_bands_csv(const BootstrapResult& r, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("bootstrap: cannot write " + path);
  out.precision(17);
  out << "time,point,lower,upper,curve_name\n";
  for (const BandSet* b : {&r.direct, &r.indirect, &r.total}) {
    for (std::size_t k = 0; k < b->grid.size(); ++k) {
      out << b->grid[k] << ',' << b->point[k] << ',' << b->lower[k] << ','
          << b->upper[k] << ',' << b->curve_name << '\n';
    }
  }
}

}  // namespace dynpath
