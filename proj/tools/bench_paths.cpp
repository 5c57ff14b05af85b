// Benchmark: serial reference driver vs the parallel worker pool on the
// containment kernel. Verifies the counts agree bit for bit while reporting
// throughput, so the parallel path can be trusted and sized.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "pullbound/drift.hpp"
#include "pullbound/estimator.hpp"

namespace {

double run_once(int workers, std::uint64_t n_paths, pullbound::ContainmentEstimate& out) {
  using clock = std::chrono::steady_clock;
  const pullbound::DriftSpec drift = pullbound::DriftSpec::ou(1.0);
  const pullbound::NoiseSpec noise{std::sqrt(2.0)};
  const std::vector<double> origin{0.0};
  pullbound::EstimatorOptions opts;
  opts.bridge = true;
  opts.workers = workers;
  const auto start = clock::now();
  out = pullbound::containment_probability(drift, noise, origin, 3.0, 5.0, n_paths, 1e-3,
                                           20240517, opts);
  return std::chrono::duration<double>(clock::now() - start).count();
}

}  // namespace

int main(int argc, char** argv) {
  std::uint64_t n_paths = 20000;
  std::vector<int> worker_counts{1, 2, 4, 8};
  if (argc > 1) n_paths = std::strtoull(argv[1], nullptr, 10);
  if (argc > 2) {
    worker_counts.clear();
    for (int i = 2; i < argc; ++i) worker_counts.push_back(std::atoi(argv[i]));
  }

  pullbound::ContainmentEstimate serial;
  const double t_serial = run_once(1, n_paths, serial);
  std::printf("workers=1 (serial reference): %.3fs, %.0f paths/s, p_hat=%.6f\n", t_serial,
              static_cast<double>(n_paths) / t_serial, serial.p_hat);

  bool all_match = true;
  for (const int w : worker_counts) {
    if (w == 1) continue;
    pullbound::ContainmentEstimate est;
    const double t = run_once(w, n_paths, est);
    const bool match = est.n_exit == serial.n_exit && est.n_exit_grid == serial.n_exit_grid &&
                       est.n_overflow == serial.n_overflow;
    all_match = all_match && match;
    std::printf("workers=%d: %.3fs, %.0f paths/s, speedup %.2fx, counts %s\n", w, t,
                static_cast<double>(n_paths) / t, t_serial / t, match ? "match" : "MISMATCH");
  }
  return all_match ? 0 : 1;
}
