#pragma once

#include <optional>
#include <span>
#include <string>

#include "pullbound/expr.hpp"

namespace pullbound {

// Drift families:
//   ou          f(x) = -lambda * x, any dimension
//   piecewise   f(x) = -lambda_right * x for x > 0, -lambda_left * x for x < 0,
//               f(0) = 0, one-dimensional
//   expression  scalar field from the expression language, variable "x"
//   radial      f(x) = rho(|x|) * x/|x|, f(0) = 0, profile variable "r"
enum class DriftFamily { ou, piecewise, expression, radial };

class DriftSpec {
 public:
  static DriftSpec ou(double lambda, int dimension = 1);
  static DriftSpec piecewise(double lambda_left, double lambda_right);
  static DriftSpec expression(std::string source);
  static DriftSpec radial(std::string source, int dimension);

  DriftFamily family() const { return family_; }
  int dimension() const { return dimension_; }
  double lambda() const { return lambda_; }
  double lambda_left() const { return lambda_left_; }
  double lambda_right() const { return lambda_right_; }
  const std::string& source() const { return source_; }

  // Scalar fast path; requires dimension() == 1.
  double eval1(double x) const;

  // Writes f(x) into out; both spans must have length dimension().
  void eval(std::span<const double> x, std::span<double> out) const;

  // Largest linear pull, used by the explicit-scheme step guard. Empty for
  // expression and radial families, whose stiffness is not known a priori.
  std::optional<double> max_pull() const;

  std::string describe() const;

 private:
  DriftSpec() = default;

  DriftFamily family_ = DriftFamily::ou;
  int dimension_ = 1;
  double lambda_ = 0.0;
  double lambda_left_ = 0.0;
  double lambda_right_ = 0.0;
  std::string source_;
  ExprPtr compiled_;
};

struct NoiseSpec {
  double sigma = 1.0;
};

// Containment question: probability that the path stays inside |x| <= radius
// up to the horizon, with comparisons certified on |x| <= check_radius.
struct ContainmentQuery {
  double radius = 1.0;
  double horizon = 1.0;
  double check_radius = 1.0;
};

void validate(const NoiseSpec& noise);
void validate(const ContainmentQuery& query);

}  // namespace pullbound
