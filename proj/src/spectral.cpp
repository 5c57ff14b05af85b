#include "pullbound/spectral.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "pullbound/io.hpp"

namespace pullbound {

namespace {

struct Tridiag {
  std::vector<double> diag;
  std::vector<double> off;  // off[j] couples j and j+1
};

double gauss_weight(double x) { return std::exp(-0.5 * x * x); }

// Conservative stencil for -(w y')' = nu w y on the interior of [-R, R] with
// Dirichlet ends, symmetrized to T = W^{-1/2} A W^{-1/2}.
Tridiag build_full(double radius, int n, bool weighted) {
  const double h = 2.0 * radius / static_cast<double>(n + 1);
  auto node = [&](int j) { return -radius + (j + 1) * h; };
  auto w_at = [&](double x) { return weighted ? gauss_weight(x) : 1.0; };

  Tridiag t;
  t.diag.resize(static_cast<std::size_t>(n));
  t.off.resize(static_cast<std::size_t>(n - 1));
  const double inv_h2 = 1.0 / (h * h);
  for (int j = 0; j < n; ++j) {
    const double x = node(j);
    const double wm = w_at(x - 0.5 * h);
    const double wp = w_at(x + 0.5 * h);
    t.diag[static_cast<std::size_t>(j)] = (wm + wp) * inv_h2 / w_at(x);
    if (j + 1 < n) {
      t.off[static_cast<std::size_t>(j)] = -wp * inv_h2 / std::sqrt(w_at(x) * w_at(x + h));
    }
  }
  return t;
}

// Half-domain stencil on [0, R]: unknowns at x_j = j h including 0, Dirichlet
// at R. Even symmetry enters through a mirrored ghost node and a half mass at
// x = 0, which keeps the matrix symmetric and the scheme second order.
Tridiag build_half(double radius, int n_unknowns) {
  const int m = n_unknowns;  // nodes 0 .. m-1 at x = j h, boundary at x = m h
  const double h = radius / static_cast<double>(m);
  auto w_at = [&](double x) { return gauss_weight(x); };

  Tridiag t;
  t.diag.resize(static_cast<std::size_t>(m));
  t.off.resize(static_cast<std::size_t>(m - 1));
  const double inv_h2 = 1.0 / (h * h);
  {
    const double wp = w_at(0.5 * h);
    const double mass0 = 0.5 * w_at(0.0);
    t.diag[0] = wp * inv_h2 / mass0;
    t.off[0] = -wp * inv_h2 / std::sqrt(mass0 * w_at(h));
  }
  for (int j = 1; j < m; ++j) {
    const double x = j * h;
    const double wm = w_at(x - 0.5 * h);
    const double wp = w_at(x + 0.5 * h);
    t.diag[static_cast<std::size_t>(j)] = (wm + wp) * inv_h2 / w_at(x);
    if (j + 1 < m) {
      t.off[static_cast<std::size_t>(j)] = -wp * inv_h2 / std::sqrt(w_at(x) * w_at(x + h));
    }
  }
  return t;
}

void thomas_solve(const Tridiag& t, std::vector<double>& rhs, std::vector<double>& scratch) {
  const std::size_t n = t.diag.size();
  scratch.resize(n);
  double piv = t.diag[0];
  scratch[0] = 0.0;
  rhs[0] /= piv;
  for (std::size_t j = 1; j < n; ++j) {
    scratch[j] = t.off[j - 1] / piv;
    piv = t.diag[j] - t.off[j - 1] * scratch[j];
    rhs[j] = (rhs[j] - t.off[j - 1] * rhs[j - 1]) / piv;
  }
  for (std::size_t j = n - 1; j-- > 0;) {
    rhs[j] -= scratch[j + 1] * rhs[j + 1];
  }
}

double rayleigh(const Tridiag& t, const std::vector<double>& y) {
  const std::size_t n = y.size();
  double num = 0.0;
  double den = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    double ty = t.diag[j] * y[j];
    if (j > 0) ty += t.off[j - 1] * y[j - 1];
    if (j + 1 < n) ty += t.off[j] * y[j + 1];
    num += y[j] * ty;
    den += y[j] * y[j];
  }
  return num / den;
}

struct EigenResult {
  double value;
  std::vector<double> vector;
};

EigenResult smallest_eigen(const Tridiag& t, double tol, int max_iterations) {
  const std::size_t n = t.diag.size();
  std::vector<double> y(n, 1.0);
  std::vector<double> scratch;
  double prev = std::numeric_limits<double>::infinity();
  for (int it = 0; it < max_iterations; ++it) {
    thomas_solve(t, y, scratch);
    double norm = 0.0;
    for (const double v : y) norm += v * v;
    norm = std::sqrt(norm);
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      throw std::runtime_error("eigen solve: iteration collapsed");
    }
    for (auto& v : y) v /= norm;
    const double nu = rayleigh(t, y);
    if (std::fabs(nu - prev) <= tol * std::fabs(nu)) {
      return {nu, std::move(y)};
    }
    prev = nu;
  }
  throw std::runtime_error("eigen solve: no convergence within iteration budget");
}

void check_config(double radius, const SpectralConfig& cfg) {
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw std::invalid_argument("spectral: radius must be finite and > 0");
  }
  if (cfg.n_grid < 3 || cfg.n_grid % 2 == 0) {
    throw std::invalid_argument("spectral: n_grid must be odd and >= 3");
  }
  if (cfg.refinement < 0 || cfg.refinement > 6) {
    throw std::invalid_argument("spectral: refinement must be in [0, 6]");
  }
}

// Richardson extrapolation for an h^2 expansion across dyadic grids.
SpectralResult extrapolate(std::vector<double> levels) {
  if (levels.size() == 1) {
    return {levels[0], std::numeric_limits<double>::quiet_NaN()};
  }
  double last_correction = 0.0;
  std::size_t width = levels.size();
  double factor = 4.0;
  while (width > 1) {
    for (std::size_t k = 0; k + 1 < width; ++k) {
      const double corr = (levels[k + 1] - levels[k]) / (factor - 1.0);
      levels[k] = levels[k + 1] + corr;
      last_correction = corr;
    }
    --width;
    factor *= 4.0;
  }
  return {levels[0], std::fabs(last_correction)};
}

SpectralResult solve_extrapolated(double radius, const SpectralConfig& cfg, bool weighted,
                                  bool half_domain) {
  check_config(radius, cfg);
  std::vector<double> levels;
  levels.reserve(static_cast<std::size_t>(cfg.refinement) + 1);
  int n = half_domain ? (cfg.n_grid + 1) / 2 : cfg.n_grid;
  for (int level = 0; level <= cfg.refinement; ++level) {
    const Tridiag t = half_domain ? build_half(radius, n) : build_full(radius, n, weighted);
    levels.push_back(smallest_eigen(t, cfg.tol, cfg.max_iterations).value);
    n = 2 * n + (half_domain ? 0 : 1);
  }
  return extrapolate(std::move(levels));
}

}  // namespace

double kushner_rate(double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw std::invalid_argument("kushner_rate: radius must be finite and > 0");
  }
  return 2.0 / (radius * radius);
}

double asymptotic_rate(double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw std::invalid_argument("asymptotic_rate: radius must be finite and > 0");
  }
  return radius / std::sqrt(2.0 * std::numbers::pi) * std::exp(-0.5 * radius * radius);
}

SpectralResult sturm_liouville_rate(double radius, const SpectralConfig& cfg) {
  return solve_extrapolated(radius, cfg, /*weighted=*/true, /*half_domain=*/false);
}

SpectralResult laplace_dirichlet_rate(double radius, const SpectralConfig& cfg) {
  return solve_extrapolated(radius, cfg, /*weighted=*/false, /*half_domain=*/false);
}

SpectralResult sturm_liouville_rate_half(double radius, const SpectralConfig& cfg) {
  return solve_extrapolated(radius, cfg, /*weighted=*/true, /*half_domain=*/true);
}

std::vector<double> sturm_liouville_ground_state(double radius, int n_grid) {
  SpectralConfig cfg;
  cfg.n_grid = n_grid;
  check_config(radius, cfg);
  const Tridiag t = build_full(radius, n_grid, /*weighted=*/true);
  auto eig = smallest_eigen(t, cfg.tol, cfg.max_iterations);
  // Undo the symmetrizing similarity so the vector is the eigenfunction y,
  // then fix the overall sign to the interior maximum.
  const double h = 2.0 * radius / static_cast<double>(n_grid + 1);
  for (int j = 0; j < n_grid; ++j) {
    const double x = -radius + (j + 1) * h;
    eig.vector[static_cast<std::size_t>(j)] /= std::sqrt(gauss_weight(x));
  }
  double peak = 0.0;
  for (const double v : eig.vector) {
    if (std::fabs(v) > std::fabs(peak)) peak = v;
  }
  if (peak < 0.0) {
    for (auto& v : eig.vector) v = -v;
  }
  return eig.vector;
}

double containment_lower_bound(double mu, double horizon) {
  if (std::isnan(mu) || mu < 0.0) {
    throw std::invalid_argument("containment_lower_bound: mu must be >= 0");
  }
  if (!(horizon >= 0.0) || !std::isfinite(horizon)) {
    throw std::invalid_argument("containment_lower_bound: horizon must be finite and >= 0");
  }
  return std::exp(-mu * horizon);
}

const char* rate_method_name(RateMethod method) {
  switch (method) {
    case RateMethod::kushner: return "kushner";
    case RateMethod::spectral: return "spectral";
    case RateMethod::asymptotic: return "asymptotic";
  }
  return "unknown";
}

std::vector<RateTableRow> rate_table(std::span<const double> radii, const SpectralConfig& cfg) {
  std::vector<RateTableRow> rows;
  rows.reserve(radii.size());
  for (const double r : radii) {
    RateTableRow row;
    row.radius = r;
    row.mu_kushner = kushner_rate(r);
    row.mu_asymptotic = asymptotic_rate(r);
    try {
      const SpectralResult s = sturm_liouville_rate(r, cfg);
      row.mu_spectral = s.mu;
      row.mu_spectral_stderr = s.stderr_est;
      row.spectral_ok = true;
    } catch (const std::exception& e) {
      row.mu_spectral = std::numeric_limits<double>::quiet_NaN();
      row.mu_spectral_stderr = std::numeric_limits<double>::quiet_NaN();
      row.spectral_ok = false;
      row.spectral_error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string rate_table_csv(const std::vector<RateTableRow>& rows) {
  std::string out = "R,mu_kushner,mu_spectral,mu_asymptotic\n";
  for (const auto& row : rows) {
    out += format_double(row.radius);
    out += ',';
    out += format_double(row.mu_kushner);
    out += ',';
    out += format_double(row.mu_spectral);
    out += ',';
    out += format_double(row.mu_asymptotic);
    out += '\n';
  }
  return out;
}

}  // namespace pullbound
