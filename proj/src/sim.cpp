#include "pullbound/sim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pullbound {
namespace {

bool all_finite(std::span<const double> v) {
  for (double c : v) {
    if (!std::isfinite(c)) return false;
  }
  return true;
}

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double c : v) s += c * c;
  return std::sqrt(s);
}

double guard(double dt, const DriftSpec& f) {
  if (auto pull = f.max_pull(); pull && *pull > 0.0) return std::min(dt, 0.5 / *pull);
  return dt;
}

// Coupling sign with the +1 convention at zero.
double coupling_sign(double v) { return v < 0.0 ? -1.0 : 1.0; }

struct MarginalKernel {
  const DriftSpec& drift;
  const NoiseSpec& noise;
  bool rotated = false;
};

Trajectory run_marginal(const MarginalKernel& kernel, std::span<const double> x0, double horizon,
                        double dt, const RngStream& stream) {
  const DriftSpec& drift = kernel.drift;
  validate(kernel.noise);
  const int d = drift.dimension();
  if (static_cast<int>(x0.size()) != d) {
    throw std::invalid_argument("initial state dimension does not match the drift");
  }
  if (kernel.rotated && d < 2) {
    throw std::invalid_argument("rotated noise needs dimension >= 2");
  }

  Trajectory traj;
  traj.dimension = d;
  traj.dt = guard(dt, drift);
  const std::uint64_t n_steps = step_count(horizon, traj.dt);
  traj.states.reserve((n_steps + 1) * static_cast<std::size_t>(d));
  traj.states.insert(traj.states.end(), x0.begin(), x0.end());
  if (!all_finite(x0)) {
    traj.failed_at_step = 0;
    return traj;
  }

  const double scale = kernel.noise.sigma * std::sqrt(traj.dt);
  std::vector<double> x(x0.begin(), x0.end());
  std::vector<double> fx(d), xi(d), add(d);
  NormalCursor cursor(stream);
  for (std::uint64_t k = 0; k < n_steps; ++k) {
    drift.eval(x, fx);
    for (int c = 0; c < d; ++c) xi[c] = cursor.next();
    if (kernel.rotated) {
      RotationToE1 rot(x);
      rot.apply_transpose(xi, add);
    } else {
      std::copy(xi.begin(), xi.end(), add.begin());
    }
    for (int c = 0; c < d; ++c) x[c] += fx[c] * traj.dt + scale * add[c];
    if (!all_finite(x)) {
      traj.failed_at_step = k + 1;
      return traj;
    }
    traj.states.insert(traj.states.end(), x.begin(), x.end());
  }
  return traj;
}

}  // namespace

std::uint64_t step_count(double horizon, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be positive and finite");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw std::invalid_argument("horizon must be positive and finite");
  }
  return static_cast<std::uint64_t>(horizon / dt * (1.0 + 1e-12) + 1e-9);
}

double effective_dt(double dt, const DriftSpec& f) { return guard(dt, f); }

double effective_dt(double dt, const DriftSpec& f, const DriftSpec& g) {
  return guard(guard(dt, f), g);
}

Trajectory euler_maruyama(const DriftSpec& drift, const NoiseSpec& noise,
                          std::span<const double> x0, double horizon, double dt,
                          const RngStream& stream) {
  return run_marginal({drift, noise, false}, x0, horizon, dt, stream);
}

Trajectory euler_maruyama_rotated(const DriftSpec& drift, const NoiseSpec& noise,
                                  std::span<const double> x0, double horizon, double dt,
                                  const RngStream& stream) {
  return run_marginal({drift, noise, true}, x0, horizon, dt, stream);
}

ExitResult first_exit(const Trajectory& traj, double radius, const ExitOptions& opt,
                      const RngStream* stream) {
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw std::invalid_argument("exit radius must be positive and finite");
  }
  if (opt.bridge) {
    if (traj.dimension != 1) throw std::invalid_argument("bridge correction needs dimension 1");
    if (stream == nullptr) throw std::invalid_argument("bridge correction needs the path's stream");
    if (!(opt.sigma > 0.0)) throw std::invalid_argument("bridge correction needs sigma > 0");
  }

  const std::size_t n = traj.n_points();
  const double denom = opt.sigma * opt.sigma * traj.dt;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = norm2(traj.state_at(i));
    if (r > radius) return {traj.time_at(i), false};
    if (opt.bridge && i > 0) {
      const double prev = std::abs(traj.state_at(i - 1)[0]);
      const double p = std::exp(-2.0 * (radius - prev) * (radius - r) / denom);
      if (stream->uniform(i - 1) < p) return {traj.time_at(i), true};
    }
  }
  return {};
}

CoupledPair simulate_coupled_1d(const DriftSpec& f, const DriftSpec& g, double dt, double horizon,
                                double check_radius, const RngStream& stream) {
  if (f.dimension() != 1 || g.dimension() != 1) {
    throw std::invalid_argument("one-dimensional coupling needs scalar drifts");
  }
  if (!(check_radius > 0.0) || !std::isfinite(check_radius)) {
    throw std::invalid_argument("check radius must be positive and finite");
  }
  CoupledPair pair;
  const double dte = effective_dt(dt, f, g);
  pair.x.dt = pair.y.dt = dte;
  const std::uint64_t n_steps = step_count(horizon, dte);
  pair.x.states.reserve(n_steps + 1);
  pair.y.states.reserve(n_steps + 1);
  pair.noise_x.reserve(n_steps);
  pair.noise_y.reserve(n_steps);
  pair.x.states.push_back(0.0);
  pair.y.states.push_back(0.0);

  const double root_dt = std::sqrt(dte);
  double x = 0.0, y = 0.0;
  NormalCursor cursor(stream);
  for (std::uint64_t k = 0; k < n_steps; ++k) {
    const double db = root_dt * cursor.next();
    const double wx = coupling_sign(x) * db;
    const double wy = coupling_sign(y) * db;
    x += f.eval1(x) * dte + wx;
    y += g.eval1(y) * dte + wy;
    if (!std::isfinite(x) || !std::isfinite(y)) {
      if (!std::isfinite(x)) pair.x.failed_at_step = k + 1;
      if (!std::isfinite(y)) pair.y.failed_at_step = k + 1;
      return pair;
    }
    pair.noise_x.push_back(wx);
    pair.noise_y.push_back(wy);
    pair.x.states.push_back(x);
    pair.y.states.push_back(y);
    if (!pair.t_check && std::abs(y) >= check_radius) {
      pair.t_check = static_cast<double>(k + 1) * dte;
    }
  }
  return pair;
}

CoupledPair simulate_coupled_nd(const DriftSpec& f, const DriftSpec& g, double dt, double horizon,
                                double check_radius, const RngStream& stream) {
  const int d = f.dimension();
  if (d < 2) throw std::invalid_argument("use the one-dimensional coupling below dimension 2");
  if (g.dimension() != d) throw std::invalid_argument("coupled drifts need equal dimensions");
  if (!(check_radius > 0.0) || !std::isfinite(check_radius)) {
    throw std::invalid_argument("check radius must be positive and finite");
  }
  CoupledPair pair;
  const double dte = effective_dt(dt, f, g);
  pair.x.dimension = pair.y.dimension = d;
  pair.x.dt = pair.y.dt = dte;
  const std::uint64_t n_steps = step_count(horizon, dte);
  const auto dim = static_cast<std::size_t>(d);
  pair.x.states.reserve((n_steps + 1) * dim);
  pair.y.states.reserve((n_steps + 1) * dim);
  pair.x.states.insert(pair.x.states.end(), dim, 0.0);
  pair.y.states.insert(pair.y.states.end(), dim, 0.0);

  const double root_dt = std::sqrt(dte);
  std::vector<double> x(dim, 0.0), y(dim, 0.0);
  std::vector<double> fx(dim), gy(dim), db(dim), add(dim);
  NormalCursor cursor(stream);
  for (std::uint64_t k = 0; k < n_steps; ++k) {
    for (std::size_t c = 0; c < dim; ++c) db[c] = root_dt * cursor.next();
    f.eval(x, fx);
    g.eval(y, gy);
    RotationToE1 rx(x);
    rx.apply_transpose(db, add);
    for (std::size_t c = 0; c < dim; ++c) x[c] += fx[c] * dte + add[c];
    RotationToE1 ry(y);
    ry.apply_transpose(db, add);
    for (std::size_t c = 0; c < dim; ++c) y[c] += gy[c] * dte + add[c];
    if (!all_finite(x) || !all_finite(y)) {
      if (!all_finite(x)) pair.x.failed_at_step = k + 1;
      if (!all_finite(y)) pair.y.failed_at_step = k + 1;
      return pair;
    }
    pair.x.states.insert(pair.x.states.end(), x.begin(), x.end());
    pair.y.states.insert(pair.y.states.end(), y.begin(), y.end());
    if (!pair.t_check && norm2(y) >= check_radius) {
      pair.t_check = static_cast<double>(k + 1) * dte;
    }
  }
  return pair;
}

HittingTimes hitting_times(const Trajectory& traj, double eps) {
  if (traj.dimension != 1) throw std::invalid_argument("hitting times need a scalar trajectory");
  if (!(eps > 0.0) || !std::isfinite(eps)) {
    throw std::invalid_argument("eps must be positive and finite");
  }
  HittingTimes out;
  out.tau.push_back(0.0);
  bool waiting_for_eps = true;
  double held_sign = 0.0;
  const std::size_t n = traj.n_points();
  for (std::size_t i = 1; i < n; ++i) {
    const double v = traj.states[i];
    if (waiting_for_eps) {
      if (std::abs(v) >= eps) {
        out.upsilon.push_back(traj.time_at(i));
        held_sign = v > 0.0 ? 1.0 : -1.0;
        waiting_for_eps = false;
      }
    } else {
      const double s = v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
      if (s != held_sign) {
        out.tau.push_back(traj.time_at(i));
        waiting_for_eps = true;
      }
    }
  }
  return out;
}

}  // namespace pullbound
