#include "pullbound/drift.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace pullbound {

DriftSpec DriftSpec::ou(double lambda, int dimension) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("ou drift: lambda must be finite and >= 0");
  }
  if (dimension < 1) {
    throw std::invalid_argument("ou drift: dimension must be >= 1");
  }
  DriftSpec d;
  d.family_ = DriftFamily::ou;
  d.dimension_ = dimension;
  d.lambda_ = lambda;
  return d;
}

DriftSpec DriftSpec::piecewise(double lambda_left, double lambda_right) {
  if (!(lambda_left >= 0.0) || !(lambda_right >= 0.0) || !std::isfinite(lambda_left) ||
      !std::isfinite(lambda_right)) {
    throw std::invalid_argument("piecewise drift: pulls must be finite and >= 0");
  }
  DriftSpec d;
  d.family_ = DriftFamily::piecewise;
  d.dimension_ = 1;
  d.lambda_left_ = lambda_left;
  d.lambda_right_ = lambda_right;
  return d;
}

DriftSpec DriftSpec::expression(std::string source) {
  DriftSpec d;
  d.family_ = DriftFamily::expression;
  d.dimension_ = 1;
  d.compiled_ = parse_expr(source, "x");
  d.source_ = std::move(source);
  return d;
}

DriftSpec DriftSpec::radial(std::string source, int dimension) {
  if (dimension < 1) {
    throw std::invalid_argument("radial drift: dimension must be >= 1");
  }
  DriftSpec d;
  d.family_ = DriftFamily::radial;
  d.dimension_ = dimension;
  d.compiled_ = parse_expr(source, "r");
  d.source_ = std::move(source);
  return d;
}

double DriftSpec::eval1(double x) const {
  switch (family_) {
    case DriftFamily::ou:
      return -lambda_ * x;
    case DriftFamily::piecewise:
      if (x > 0.0) return -lambda_right_ * x;
      if (x < 0.0) return -lambda_left_ * x;
      return 0.0;
    case DriftFamily::expression:
      return ::pullbound::eval(*compiled_, x);
    case DriftFamily::radial: {
      // One-dimensional radial field: rho(|x|) * sgn(x).
      if (x == 0.0) return 0.0;
      const double rho = ::pullbound::eval(*compiled_, std::fabs(x));
      return x > 0.0 ? rho : -rho;
    }
  }
  return 0.0;
}

void DriftSpec::eval(std::span<const double> x, std::span<double> out) const {
  if (x.size() != static_cast<std::size_t>(dimension_) || out.size() != x.size()) {
    throw std::invalid_argument("drift eval: state dimension mismatch");
  }
  switch (family_) {
    case DriftFamily::ou:
      for (std::size_t i = 0; i < x.size(); ++i) out[i] = -lambda_ * x[i];
      return;
    case DriftFamily::piecewise:
    case DriftFamily::expression:
      out[0] = eval1(x[0]);
      return;
    case DriftFamily::radial: {
      double r2 = 0.0;
      for (const double xi : x) r2 += xi * xi;
      if (r2 == 0.0) {
        for (auto& o : out) o = 0.0;
        return;
      }
      const double r = std::sqrt(r2);
      const double scale = ::pullbound::eval(*compiled_, r) / r;
      for (std::size_t i = 0; i < x.size(); ++i) out[i] = scale * x[i];
      return;
    }
  }
}

std::optional<double> DriftSpec::max_pull() const {
  switch (family_) {
    case DriftFamily::ou:
      return lambda_;
    case DriftFamily::piecewise:
      return std::max(lambda_left_, lambda_right_);
    case DriftFamily::expression:
    case DriftFamily::radial:
      return std::nullopt;
  }
  return std::nullopt;
}

std::string DriftSpec::describe() const {
  std::ostringstream os;
  switch (family_) {
    case DriftFamily::ou:
      os << "ou(lambda=" << lambda_ << ", d=" << dimension_ << ")";
      break;
    case DriftFamily::piecewise:
      os << "piecewise(lambda_left=" << lambda_left_ << ", lambda_right=" << lambda_right_ << ")";
      break;
    case DriftFamily::expression:
      os << "expression(" << source_ << ")";
      break;
    case DriftFamily::radial:
      os << "radial(" << source_ << ", d=" << dimension_ << ")";
      break;
  }
  return os.str();
}

void validate(const NoiseSpec& noise) {
  if (!(noise.sigma > 0.0) || !std::isfinite(noise.sigma)) {
    throw std::invalid_argument("noise: sigma must be finite and > 0");
  }
}

void validate(const ContainmentQuery& query) {
  if (!(query.radius > 0.0) || !std::isfinite(query.radius)) {
    throw std::invalid_argument("query: radius must be finite and > 0");
  }
  if (!(query.horizon > 0.0) || !std::isfinite(query.horizon)) {
    throw std::invalid_argument("query: horizon must be finite and > 0");
  }
  if (!(query.check_radius >= query.radius)) {
    throw std::invalid_argument("query: check_radius must be >= radius");
  }
}

}  // namespace pullbound
