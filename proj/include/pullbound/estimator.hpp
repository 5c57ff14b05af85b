#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pullbound/drift.hpp"
#include "pullbound/sim.hpp"

namespace pullbound {

// Monte Carlo containment estimation. Paths are streamed: the kernel advances
// one state in place and never materializes a trajectory, yet reproduces the
// materialized path bit for bit because every random draw is addressed by
// (path, step) rather than consumed from shared sequential state. Results are
// therefore independent of the worker count, and an estimate at a shorter
// horizon or smaller radius is a deterministic restriction of the same paths.

struct EstimatorOptions {
  bool bridge = false;   // Brownian-bridge exit correction (dimension 1 only)
  int workers = 0;       // 0 = all hardware threads, 1 = serial reference driver
  bool rotated = false;  // state-dependent rotation of the noise (dimension >= 2)
};

struct ContainmentEstimate {
  double p_hat = 0.0;  // P(sup |X_t| <= R up to the horizon)
  double ci_low = 0.0;
  double ci_high = 0.0;  // Wilson 95 percent interval
  std::uint64_t n_paths = 0;
  std::uint64_t n_exit = 0;       // exits under the active detection mode
  std::uint64_t n_exit_grid = 0;  // exits under plain grid detection
  std::uint64_t n_overflow = 0;   // non-finite paths, counted as exits
  bool bridge_corrected = false;
};

struct WilsonInterval {
  double low = 0.0;
  double high = 0.0;
};

// Score interval for successes/n at normal quantile z. Requires n > 0.
WilsonInterval wilson_interval(std::uint64_t successes, std::uint64_t n, double z);

inline constexpr double kZ95 = 1.959963984540054;

ContainmentEstimate containment_probability(const DriftSpec& drift, const NoiseSpec& noise,
                                            std::span<const double> x0, double radius,
                                            double horizon, std::uint64_t n_paths, double dt,
                                            std::uint64_t seed, const EstimatorOptions& opts = {});

// Full serializable record of one estimation run.
struct ContainmentRecord {
  std::string drift;
  double sigma = 1.0;
  double radius = 0.0;
  double horizon = 0.0;
  double dt_requested = 0.0;
  double dt_effective = 0.0;
  std::uint64_t n_paths = 0;
  std::uint64_t seed = 0;
  ContainmentEstimate estimate;
};

ContainmentRecord containment_record(const DriftSpec& drift, const NoiseSpec& noise,
                                     std::span<const double> x0, double radius, double horizon,
                                     std::uint64_t n_paths, double dt, std::uint64_t seed,
                                     const EstimatorOptions& opts = {});

std::string to_json(const ContainmentRecord& record);

struct RateEstimate {
  double mu = 0.0;
  std::string method;
  std::optional<double> stderr_est;
};

struct DecayFit {
  RateEstimate rate;              // method "mc-fit"
  bool lower_bound_only = false;  // some horizon saw no survivors
  std::vector<double> horizons;
  std::vector<ContainmentEstimate> per_horizon;
  double dt_effective = 0.0;
};

// Least-squares slope of -log p_hat(T) over the given horizons, with a
// delta-method standard error. All horizons share one set of paths simulated
// to the largest horizon; the per-horizon estimates are exact restrictions.
// When some horizon has p_hat = 0 the fit degenerates; the reported mu is then
// the largest rate certified by the Wilson upper bound at such a horizon.
DecayFit fit_decay_rate(const DriftSpec& drift, const NoiseSpec& noise,
                        std::span<const double> x0, double radius,
                        std::span<const double> horizons, std::uint64_t n_paths, double dt,
                        std::uint64_t seed, const EstimatorOptions& opts = {});

struct SweepPoint {
  double lambda = 0.0;
  double dt_effective = 0.0;
  ContainmentEstimate estimate;
};

struct SweepResult {
  std::vector<SweepPoint> points;       // piecewise pull: lambda on the left, 1 on the right
  ContainmentEstimate reflected;        // symmetric reference with unit pull on both sides
  double reflected_dt_effective = 0.0;  // reference stream uses a derived seed
};

// One-sided pull strengthening sweep from the origin: every point shares the
// same master seed (common random numbers across lambda); the symmetric
// reference row runs on a seed derived via splitmix64 so its draws are
// unrelated to the sweep's.
SweepResult counterexample_sweep(std::span<const double> lambdas, double radius, double horizon,
                                 std::uint64_t n_paths, double dt, std::uint64_t seed,
                                 const EstimatorOptions& opts = {});

// Plain binomial standard error pooled across two independent estimates.
double pooled_stderr(const ContainmentEstimate& a, const ContainmentEstimate& b);

}  // namespace pullbound
