// Timing comparison of the parallel kernels at 1 thread vs all cores.
// Every kernel is bitwise deterministic in its thread count, so the runs
// also double as a cheap equality check.

#include <chrono>
#include <cstdio>
#include <thread>

#include "dynpath/bootstrap.hpp"
#include "dynpath/collider.hpp"
#include "dynpath/simgen.hpp"

namespace {

template <typename F>
double time_run(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(t1 - t0).count();
}

dynpath::SimConfig bench_config() {
  dynpath::SimConfig cfg;
  cfg.delta = 1.0 / 52.0;
  cfg.horizon = 2.0;
  cfg.beta0 = dynpath::SplineFunction({0.0, 5.0}, {0.5, 0.5});
  cfg.beta_treat = dynpath::SplineFunction({0.0, 5.0}, {-0.2, -0.2});
  cfg.beta_med = dynpath::SplineFunction({0.0, 5.0}, {0.02, 0.02});
  cfg.b21 = dynpath::SplineFunction({0.0, 5.0}, {-1.0, -1.0});
  cfg.censor_max = 50.0;
  cfg.n = 20000;
  cfg.seed = 7;
  return cfg;
}

}  // namespace

int main() {
  const int hw = static_cast<int>(std::thread::hardware_concurrency());
  const int many = hw > 0 ? hw : 4;
  std::printf("threads: 1 vs %d\n\n", many);

  const dynpath::SimConfig cfg = bench_config();
  {
    const double t1 = time_run([&] { dynpath::generate_trial(cfg, 1); });
    const double tn = time_run([&] { dynpath::generate_trial(cfg, many); });
    std::printf("generate_trial  n=%zu      %8.3fs  %8.3fs  speedup %.2fx\n",
                cfg.n, t1, tn, t1 / tn);
  }

  dynpath::SimConfig small = cfg;
  small.n = 1500;
  const dynpath::Dataset ds = dynpath::generate_trial(small, many).dataset;
  {
    const double t1 =
        time_run([&] { dynpath::bootstrap_bands(ds, {}, 100, 0.95, 3, 1); });
    const double tn =
        time_run([&] { dynpath::bootstrap_bands(ds, {}, 100, 0.95, 3, many); });
    std::printf("bootstrap_bands B=100     %8.3fs  %8.3fs  speedup %.2fx\n",
                t1, tn, t1 / tn);
  }

  {
    const dynpath::SemSpec spec =
        dynpath::independence_spec(dynpath::HazardForm::kAdditive);
    const double t1 =
        time_run([&] { dynpath::sample_survivors(spec, 4.0, 200000, 5, 1); });
    const double tn =
        time_run([&] { dynpath::sample_survivors(spec, 4.0, 200000, 5, many); });
    std::printf("sample_survivors m=200000 %8.3fs  %8.3fs  speedup %.2fx\n",
                t1, tn, t1 / tn);
  }
  return 0;
}
