#pragma once

#include <span>
#include <string>
#include <vector>

namespace pullbound {

// Containment decay rates for the normalized reference process
// dX = -X dt + sqrt(2) dB started at 0. Containment up to horizon T inside
// [-R, R] behaves like exp(-mu(R) T); the three rates are
//   kushner_rate        closed form 2 / R^2, a guaranteed exponent
//   sturm_liouville_rate  smallest Dirichlet eigenvalue nu of y'' - x y' = -nu y
//                         on [-R, R], the exact asymptotic exponent
//   asymptotic_rate     closed form R / sqrt(2 pi) * exp(-R^2 / 2),
//                       accurate once R >= 3
//
// The eigenvalue solve rewrites the operator in self-adjoint form with weight
// w(x) = exp(-x^2 / 2), discretizes with a conservative three-point stencil on
// a uniform grid, and runs inverse power iteration on the symmetrized
// tridiagonal matrix. Dyadic grid refinements feed Richardson extrapolation.

struct SpectralConfig {
  int n_grid = 4001;     // interior nodes, odd so that x = 0 is a node
  int refinement = 2;    // extra dyadic grids for extrapolation
  double tol = 1e-12;    // relative Rayleigh-quotient convergence
  int max_iterations = 200;
};

struct SpectralResult {
  double mu = 0.0;
  double stderr_est = 0.0;  // magnitude of the last extrapolation correction
};

double kushner_rate(double radius);
double asymptotic_rate(double radius);

SpectralResult sturm_liouville_rate(double radius, const SpectralConfig& cfg = {});

// Identical discretization with the weight forced to 1. The continuum limit
// is the Dirichlet Laplacian value (pi / (2 R))^2, the drift-off validation
// target for the solver machinery.
SpectralResult laplace_dirichlet_rate(double radius, const SpectralConfig& cfg = {});

// Half-domain solve on [0, R] with an even-symmetry condition at 0. The
// ground state is even, so this must agree with the full solve.
SpectralResult sturm_liouville_rate_half(double radius, const SpectralConfig& cfg = {});

// Converged ground-state vector on a single grid (no extrapolation), for
// shape diagnostics: Perron sign and even symmetry.
std::vector<double> sturm_liouville_ground_state(double radius, int n_grid);

// exp(-mu * horizon); mu may be +infinity, giving 0.
double containment_lower_bound(double mu, double horizon);

enum class RateMethod { kushner, spectral, asymptotic };

const char* rate_method_name(RateMethod method);

struct RateTableRow {
  double radius = 0.0;
  double mu_kushner = 0.0;
  double mu_spectral = 0.0;
  double mu_spectral_stderr = 0.0;
  double mu_asymptotic = 0.0;
  bool spectral_ok = false;
  std::string spectral_error;
};

// Spectral failures are recorded per row, never thrown.
std::vector<RateTableRow> rate_table(std::span<const double> radii,
                                     const SpectralConfig& cfg = {});

// Header exactly: R,mu_kushner,mu_spectral,mu_asymptotic
std::string rate_table_csv(const std::vector<RateTableRow>& rows);

}  // namespace pullbound
