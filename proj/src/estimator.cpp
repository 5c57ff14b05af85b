#include "pullbound/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>
#include <utility>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <json.hpp>

#include "pullbound/io.hpp"
#include "pullbound/rotation.hpp"

namespace pullbound {
namespace {

constexpr std::uint64_t kNoExit = ~std::uint64_t{0};

// Outcome of one streamed path: grid index of the first detected exit under
// each detection mode (kNoExit when the path stayed inside), plus whether the
// path left the finite range. Overflow is stamped as an exit at its step.
struct PathOutcome {
  std::uint64_t grid_exit = kNoExit;
  std::uint64_t corrected_exit = kNoExit;
  bool overflow = false;
};

struct KernelConfig {
  const DriftSpec* drift = nullptr;
  double sigma = 1.0;
  std::vector<double> x0;
  double radius = 0.0;
  double dt = 0.0;
  std::uint64_t n_steps = 0;
  std::uint64_t seed = 0;
  bool bridge = false;
  bool rotated = false;
};

PathOutcome run_path_1d(const KernelConfig& c, std::uint64_t path) {
  RngStream stream(c.seed, path);
  NormalCursor cursor(stream);
  PathOutcome o;
  double x = c.x0[0];
  double gap = c.radius - std::abs(x);
  if (gap < 0.0) {
    o.grid_exit = o.corrected_exit = 0;
    return o;
  }
  const double scale = c.sigma * std::sqrt(c.dt);
  const double denom = c.sigma * c.sigma * c.dt;
  for (std::uint64_t k = 1; k <= c.n_steps; ++k) {
    const double next = x + c.drift->eval1(x) * c.dt + scale * cursor.next();
    if (!std::isfinite(next)) {
      o.overflow = true;
      o.grid_exit = k;
      if (o.corrected_exit == kNoExit) o.corrected_exit = k;
      return o;
    }
    const double g = c.radius - std::abs(next);
    if (g < 0.0) {
      o.grid_exit = k;
      if (o.corrected_exit == kNoExit) o.corrected_exit = k;
      return o;
    }
    if (c.bridge && o.corrected_exit == kNoExit) {
      const double p = std::exp(-2.0 * gap * g / denom);
      if (stream.uniform(k - 1) < p) o.corrected_exit = k;
    }
    x = next;
    gap = g;
  }
  return o;
}

struct Scratch {
  std::vector<double> x, fx, xi, add;
  explicit Scratch(std::size_t d) : x(d), fx(d), xi(d), add(d) {}
};

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double c : v) s += c * c;
  return std::sqrt(s);
}

PathOutcome run_path_nd(const KernelConfig& c, std::uint64_t path, Scratch& s) {
  RngStream stream(c.seed, path);
  NormalCursor cursor(stream);
  PathOutcome o;
  const std::size_t d = c.x0.size();
  std::copy(c.x0.begin(), c.x0.end(), s.x.begin());
  if (norm2(s.x) > c.radius) {
    o.grid_exit = o.corrected_exit = 0;
    return o;
  }
  const double scale = c.sigma * std::sqrt(c.dt);
  for (std::uint64_t k = 1; k <= c.n_steps; ++k) {
    c.drift->eval(s.x, s.fx);
    for (std::size_t i = 0; i < d; ++i) s.xi[i] = cursor.next();
    if (c.rotated) {
      RotationToE1 rot(s.x);
      rot.apply_transpose(s.xi, s.add);
    } else {
      std::copy(s.xi.begin(), s.xi.end(), s.add.begin());
    }
    bool finite = true;
    double r2 = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      s.x[i] += s.fx[i] * c.dt + scale * s.add[i];
      finite = finite && std::isfinite(s.x[i]);
      r2 += s.x[i] * s.x[i];
    }
    if (!finite) {
      o.overflow = true;
      o.grid_exit = o.corrected_exit = k;
      return o;
    }
    if (std::sqrt(r2) > c.radius) {
      o.grid_exit = o.corrected_exit = k;
      return o;
    }
  }
  return o;
}

int resolve_workers(int workers) {
  if (workers > 0) return workers;
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

// Runs the per-path kernel over [0, n_paths) and folds outcomes into an
// accumulator. workers == 1 takes the plain serial loop; any other count
// uses the parallel driver. Accumulator merges are integer additions, so the
// result is identical for every worker count.
template <class Acc>
Acc run_paths(const KernelConfig& cfg, std::uint64_t n_paths, int workers, const Acc& proto) {
  const bool one_d = cfg.x0.size() == 1;
  const int n_workers = resolve_workers(workers);
  if (n_workers == 1) {
    Acc acc = proto;
    Scratch scratch(cfg.x0.size());
    for (std::uint64_t i = 0; i < n_paths; ++i) {
      acc.add(one_d ? run_path_1d(cfg, i) : run_path_nd(cfg, i, scratch));
    }
    return acc;
  }
  Acc total = proto;
#ifdef _OPENMP
#pragma omp parallel num_threads(n_workers)
  {
    Acc local = proto;
    Scratch scratch(cfg.x0.size());
#pragma omp for schedule(static) nowait
    for (long long i = 0; i < static_cast<long long>(n_paths); ++i) {
      const auto path = static_cast<std::uint64_t>(i);
      local.add(one_d ? run_path_1d(cfg, path) : run_path_nd(cfg, path, scratch));
    }
#pragma omp critical
    total.merge(local);
  }
#else
  Scratch scratch(cfg.x0.size());
  for (std::uint64_t i = 0; i < n_paths; ++i) {
    total.add(one_d ? run_path_1d(cfg, i) : run_path_nd(cfg, i, scratch));
  }
#endif
  return total;
}

struct ScalarCounts {
  std::uint64_t exit_corrected = 0;
  std::uint64_t exit_grid = 0;
  std::uint64_t overflow = 0;
  void add(const PathOutcome& o) {
    exit_corrected += o.corrected_exit != kNoExit;
    exit_grid += o.grid_exit != kNoExit;
    overflow += o.overflow;
  }
  void merge(const ScalarCounts& other) {
    exit_corrected += other.exit_corrected;
    exit_grid += other.exit_grid;
    overflow += other.overflow;
  }
};

// Per-horizon exit counts; thresholds[j] is the step count of horizon j.
struct HorizonCounts {
  std::vector<std::uint64_t> thresholds;
  std::vector<std::uint64_t> exit_corrected, exit_grid, overflow;
  explicit HorizonCounts(std::vector<std::uint64_t> steps)
      : thresholds(std::move(steps)),
        exit_corrected(thresholds.size(), 0),
        exit_grid(thresholds.size(), 0),
        overflow(thresholds.size(), 0) {}
  void add(const PathOutcome& o) {
    for (std::size_t j = 0; j < thresholds.size(); ++j) {
      exit_corrected[j] += o.corrected_exit <= thresholds[j];
      exit_grid[j] += o.grid_exit <= thresholds[j];
      overflow[j] += o.overflow && o.grid_exit <= thresholds[j];
    }
  }
  void merge(const HorizonCounts& other) {
    for (std::size_t j = 0; j < thresholds.size(); ++j) {
      exit_corrected[j] += other.exit_corrected[j];
      exit_grid[j] += other.exit_grid[j];
      overflow[j] += other.overflow[j];
    }
  }
};

ContainmentEstimate assemble(std::uint64_t n_paths, std::uint64_t exit_corrected,
                             std::uint64_t exit_grid, std::uint64_t overflow, bool bridge) {
  ContainmentEstimate est;
  est.n_paths = n_paths;
  est.n_exit = exit_corrected;
  est.n_exit_grid = exit_grid;
  est.n_overflow = overflow;
  est.bridge_corrected = bridge;
  const std::uint64_t contained = n_paths - est.n_exit;
  est.p_hat = static_cast<double>(contained) / static_cast<double>(n_paths);
  const auto ci = wilson_interval(contained, n_paths, kZ95);
  est.ci_low = ci.low;
  est.ci_high = ci.high;
  return est;
}

KernelConfig make_config(const DriftSpec& drift, const NoiseSpec& noise,
                         std::span<const double> x0, double radius, double horizon,
                         double dt, std::uint64_t seed, const EstimatorOptions& opts) {
  validate(noise);
  if (static_cast<int>(x0.size()) != drift.dimension()) {
    throw std::invalid_argument("initial state dimension does not match the drift");
  }
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw std::invalid_argument("radius must be positive and finite");
  }
  if (opts.bridge && drift.dimension() != 1) {
    throw std::invalid_argument("bridge correction needs dimension 1");
  }
  if (opts.rotated && drift.dimension() < 2) {
    throw std::invalid_argument("rotated noise needs dimension >= 2");
  }
  for (double c : x0) {
    if (!std::isfinite(c)) throw std::invalid_argument("initial state must be finite");
  }
  KernelConfig cfg;
  cfg.drift = &drift;
  cfg.sigma = noise.sigma;
  cfg.x0.assign(x0.begin(), x0.end());
  cfg.radius = radius;
  cfg.dt = effective_dt(dt, drift);
  cfg.n_steps = step_count(horizon, cfg.dt);
  cfg.seed = seed;
  cfg.bridge = opts.bridge;
  cfg.rotated = opts.rotated;
  return cfg;
}

}  // namespace

WilsonInterval wilson_interval(std::uint64_t successes, std::uint64_t n, double z) {
  if (n == 0) throw std::invalid_argument("Wilson interval needs n > 0");
  if (successes > n) throw std::invalid_argument("successes exceed trials");
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(successes) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = p + z2 / (2.0 * nn);
  const double radius = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn));
  // Boundary counts have exact endpoints; the algebra only reproduces them up
  // to rounding residue.
  const double low = successes == 0 ? 0.0 : std::max(0.0, (center - radius) / denom);
  const double high = successes == n ? 1.0 : std::min(1.0, (center + radius) / denom);
  return {low, high};
}

ContainmentEstimate containment_probability(const DriftSpec& drift, const NoiseSpec& noise,
                                            std::span<const double> x0, double radius,
                                            double horizon, std::uint64_t n_paths, double dt,
                                            std::uint64_t seed, const EstimatorOptions& opts) {
  if (n_paths == 0) throw std::invalid_argument("n_paths must be positive");
  const KernelConfig cfg = make_config(drift, noise, x0, radius, horizon, dt, seed, opts);
  const auto counts = run_paths(cfg, n_paths, opts.workers, ScalarCounts{});
  return assemble(n_paths, counts.exit_corrected, counts.exit_grid, counts.overflow, opts.bridge);
}

ContainmentRecord containment_record(const DriftSpec& drift, const NoiseSpec& noise,
                                     std::span<const double> x0, double radius, double horizon,
                                     std::uint64_t n_paths, double dt, std::uint64_t seed,
                                     const EstimatorOptions& opts) {
  ContainmentRecord rec;
  rec.drift = drift.describe();
  rec.sigma = noise.sigma;
  rec.radius = radius;
  rec.horizon = horizon;
  rec.dt_requested = dt;
  rec.dt_effective = effective_dt(dt, drift);
  rec.n_paths = n_paths;
  rec.seed = seed;
  rec.estimate = containment_probability(drift, noise, x0, radius, horizon, n_paths, dt, seed, opts);
  return rec;
}

std::string to_json(const ContainmentRecord& record) {
  nlohmann::json j;
  j["drift"] = record.drift;
  j["sigma"] = record.sigma;
  j["radius"] = record.radius;
  j["horizon"] = record.horizon;
  j["dt_requested"] = record.dt_requested;
  j["dt_effective"] = record.dt_effective;
  j["n_paths"] = record.n_paths;
  j["seed"] = record.seed;
  j["p_hat"] = record.estimate.p_hat;
  j["ci_low"] = record.estimate.ci_low;
  j["ci_high"] = record.estimate.ci_high;
  j["n_exit"] = record.estimate.n_exit;
  j["n_exit_grid"] = record.estimate.n_exit_grid;
  j["n_overflow"] = record.estimate.n_overflow;
  j["bridge_corrected"] = record.estimate.bridge_corrected;
  return j.dump(2);
}

DecayFit fit_decay_rate(const DriftSpec& drift, const NoiseSpec& noise,
                        std::span<const double> x0, double radius,
                        std::span<const double> horizons, std::uint64_t n_paths, double dt,
                        std::uint64_t seed, const EstimatorOptions& opts) {
  if (horizons.empty()) throw std::invalid_argument("fit needs at least one horizon");
  if (n_paths == 0) throw std::invalid_argument("n_paths must be positive");
  double t_max = 0.0;
  for (double t : horizons) {
    if (!(t > 0.0) || !std::isfinite(t)) throw std::invalid_argument("horizons must be positive");
    t_max = std::max(t_max, t);
  }
  KernelConfig cfg = make_config(drift, noise, x0, radius, t_max, dt, seed, opts);

  std::vector<std::uint64_t> thresholds(horizons.size());
  for (std::size_t j = 0; j < horizons.size(); ++j) thresholds[j] = step_count(horizons[j], cfg.dt);
  const auto counts = run_paths(cfg, n_paths, opts.workers, HorizonCounts{std::move(thresholds)});

  DecayFit fit;
  fit.horizons.assign(horizons.begin(), horizons.end());
  fit.dt_effective = cfg.dt;
  fit.rate.method = "mc-fit";
  for (std::size_t j = 0; j < horizons.size(); ++j) {
    fit.per_horizon.push_back(assemble(n_paths, counts.exit_corrected[j], counts.exit_grid[j],
                                       counts.overflow[j], opts.bridge));
  }

  // Degenerate horizons: no surviving path pins -log p_hat at infinity, so the
  // honest report is the largest rate certified by a Wilson upper bound.
  bool any_zero = false;
  double mu_floor = 0.0;
  for (std::size_t j = 0; j < horizons.size(); ++j) {
    if (fit.per_horizon[j].p_hat == 0.0) {
      any_zero = true;
      mu_floor = std::max(mu_floor, -std::log(fit.per_horizon[j].ci_high) / horizons[j]);
    }
  }
  if (any_zero) {
    fit.lower_bound_only = true;
    fit.rate.mu = mu_floor;
    return fit;
  }

  const std::size_t m = horizons.size();
  if (m == 1) {
    const double p = fit.per_horizon[0].p_hat;
    fit.rate.mu = -std::log(p) / horizons[0];
    fit.rate.stderr_est =
        std::sqrt((1.0 - p) / (static_cast<double>(n_paths) * p)) / horizons[0];
    return fit;
  }

  double t_bar = 0.0;
  for (double t : horizons) t_bar += t;
  t_bar /= static_cast<double>(m);
  double sxx = 0.0;
  for (double t : horizons) sxx += (t - t_bar) * (t - t_bar);
  if (sxx == 0.0) throw std::invalid_argument("fit needs distinct horizons");

  double slope = 0.0;
  double var_slope = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    const double cj = (horizons[j] - t_bar) / sxx;
    const double p = fit.per_horizon[j].p_hat;
    slope += cj * (-std::log(p));
    var_slope += cj * cj * (1.0 - p) / (static_cast<double>(n_paths) * p);
  }
  fit.rate.mu = slope;
  fit.rate.stderr_est = std::sqrt(var_slope);
  return fit;
}

SweepResult counterexample_sweep(std::span<const double> lambdas, double radius, double horizon,
                                 std::uint64_t n_paths, double dt, std::uint64_t seed,
                                 const EstimatorOptions& opts) {
  if (lambdas.empty()) throw std::invalid_argument("sweep needs at least one lambda");
  for (double l : lambdas) {
    if (!(l >= 1.0) || !std::isfinite(l)) {
      throw std::invalid_argument("sweep pulls must be finite and at least 1");
    }
  }
  const NoiseSpec unit_noise{1.0};
  const std::vector<double> origin{0.0};
  SweepResult result;
  for (double l : lambdas) {
    const DriftSpec drift = DriftSpec::piecewise(l, 1.0);
    SweepPoint point;
    point.lambda = l;
    point.dt_effective = effective_dt(dt, drift);
    point.estimate =
        containment_probability(drift, unit_noise, origin, radius, horizon, n_paths, dt, seed, opts);
    result.points.push_back(std::move(point));
  }
  const DriftSpec reference = DriftSpec::ou(1.0);
  const std::uint64_t ref_seed = splitmix64(seed ^ 0x5265666c65637400ull);
  result.reflected_dt_effective = effective_dt(dt, reference);
  result.reflected = containment_probability(reference, unit_noise, origin, radius, horizon,
                                             n_paths, dt, ref_seed, opts);
  return result;
}

double pooled_stderr(const ContainmentEstimate& a, const ContainmentEstimate& b) {
  const auto var = [](const ContainmentEstimate& e) {
    return e.p_hat * (1.0 - e.p_hat) / static_cast<double>(e.n_paths);
  };
  return std::sqrt(var(a) + var(b));
}

}  // namespace pullbound
