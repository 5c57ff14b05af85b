#pragma once

#include <span>
#include <vector>

namespace pullbound {

// Proper rotation R_x with R_x * (x/|x|) = e1 and det = +1; R_0 = identity.
// d = 2 uses the Givens rotation of the unit direction. d >= 3 composes a
// Householder reflection (built on the branch that avoids cancellation) with
// a single coordinate flip to restore det = +1. Applications run in O(d)
// without materializing the matrix.
class RotationToE1 {
 public:
  explicit RotationToE1(std::span<const double> x);

  int dimension() const { return d_; }

  void apply(std::span<const double> v, std::span<double> out) const;

  // R_x is orthogonal, so this is also the inverse.
  void apply_transpose(std::span<const double> v, std::span<double> out) const;

  // Row-major d x d matrix, for inspection and tests.
  std::vector<double> matrix() const;

 private:
  enum class Kind { identity, givens, householder };

  Kind kind_ = Kind::identity;
  int d_ = 0;
  double c_ = 1.0;  // givens: cos, sin
  double s_ = 0.0;
  std::vector<double> w_;  // householder direction
  double w_norm2_ = 1.0;
  int flip_coord_ = 0;  // coordinate negated after (before, for transpose) the reflection

  void reflect(std::span<const double> v, std::span<double> out) const;
};

}  // namespace pullbound
