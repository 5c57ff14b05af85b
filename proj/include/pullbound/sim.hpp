#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "pullbound/drift.hpp"
#include "pullbound/rng.hpp"
#include "pullbound/rotation.hpp"

namespace pullbound {

// Explicit Euler-Maruyama scheme
//   X_{k+1} = X_k + f(X_k) dt + sigma sqrt(dt) xi_k .
// Families with a known largest linear pull get the stability guard
// dt_eff = min(dt, 0.5 / pull); the trajectory records the step it used.
// States are row-major, include the initial state, and hold
// floor(T / dt_eff) + 1 points unless the path aborted on a non-finite state.

struct Trajectory {
  int dimension = 1;
  double dt = 0.0;
  std::vector<double> states;
  std::optional<std::uint64_t> failed_at_step;

  std::size_t n_points() const { return states.size() / static_cast<std::size_t>(dimension); }
  double time_at(std::size_t i) const { return static_cast<double>(i) * dt; }
  std::span<const double> state_at(std::size_t i) const {
    const auto d = static_cast<std::size_t>(dimension);
    return {states.data() + i * d, d};
  }
};

double effective_dt(double dt, const DriftSpec& f);
double effective_dt(double dt, const DriftSpec& f, const DriftSpec& g);

// floor(horizon / dt) with a relative tolerance absorbing representation error.
std::uint64_t step_count(double horizon, double dt);

// Gaussian increments come from stream indices k*d .. k*d+d-1 at step k, so a
// path prefix is independent of the horizon it was simulated for.
Trajectory euler_maruyama(const DriftSpec& drift, const NoiseSpec& noise,
                          std::span<const double> x0, double horizon, double dt,
                          const RngStream& stream);

// Same scheme with the increment replaced by R_{X_k}^{-1} dB (d >= 2). The
// rotation is orthogonal, so the marginal law matches plain noise.
Trajectory euler_maruyama_rotated(const DriftSpec& drift, const NoiseSpec& noise,
                                  std::span<const double> x0, double horizon, double dt,
                                  const RngStream& stream);

struct ExitOptions {
  bool bridge = false;  // one-dimensional trajectories only
  double sigma = 1.0;   // diffusion scale entering the bridge probability
};

struct ExitResult {
  std::optional<double> time;  // first grid time with |X| > R, or bridge exit
  bool by_bridge = false;
};

// Grid detection: first state with |X_k| > R. With the bridge correction, an
// exit is also declared between interior neighbors with probability
//   exp(-2 (R - |x_k|)(R - |x_{k+1}|) / (sigma^2 dt)),
// consuming stream.uniform(k); a declared exit is stamped at the later point.
ExitResult first_exit(const Trajectory& traj, double radius, const ExitOptions& opt = {},
                      const RngStream* stream = nullptr);

struct CoupledPair {
  Trajectory x;
  Trajectory y;
  // First grid time with |Y| >= check_radius (norm in d >= 2); comparisons
  // between |X| and |Y| are certified up to this time.
  std::optional<double> t_check;
  // Realized noise increments per step (one-dimensional coupling only).
  std::vector<double> noise_x;
  std::vector<double> noise_y;
};

// Unit-noise coupling dX = f(X) dt + s(X) dB, dY = g(Y) dt + s(Y) dB with the
// shared Brownian increment and s(v) = +1 when v >= 0, -1 when v < 0 (the
// zero state takes +1). Both paths start at 0.
CoupledPair simulate_coupled_1d(const DriftSpec& f, const DriftSpec& g, double dt, double horizon,
                                double check_radius, const RngStream& stream);

// d >= 2 analogue: each process receives R_{state}^{-1} dB with the shared
// increment dB. Both paths start at the origin.
CoupledPair simulate_coupled_nd(const DriftSpec& f, const DriftSpec& g, double dt, double horizon,
                                double check_radius, const RngStream& stream);

struct HittingTimes {
  std::vector<double> tau;      // tau[0] = 0 always
  std::vector<double> upsilon;  // upsilon[k] pairs with tau[k]
};

// Alternating hitting times of |Y| >= eps and the subsequent return to zero.
// A return is declared at the first grid point whose sign differs from the
// sign held at the preceding eps-crossing (a zero state counts as a return).
HittingTimes hitting_times(const Trajectory& traj, double eps);

}  // namespace pullbound
