#include "pullbound/rotation.hpp"

#include <cmath>
#include <stdexcept>

namespace pullbound {

RotationToE1::RotationToE1(std::span<const double> x) : d_(static_cast<int>(x.size())) {
  if (d_ < 2) {
    throw std::invalid_argument("rotation: dimension must be >= 2");
  }
  double norm2 = 0.0;
  for (const double xi : x) norm2 += xi * xi;
  if (norm2 == 0.0) {
    kind_ = Kind::identity;
    return;
  }
  const double norm = std::sqrt(norm2);
  if (d_ == 2) {
    kind_ = Kind::givens;
    c_ = x[0] / norm;
    s_ = x[1] / norm;
    return;
  }
  kind_ = Kind::householder;
  w_.assign(x.begin(), x.end());
  for (auto& wi : w_) wi /= norm;
  // u1 <= 0: reflect u -> +e1 across w = u - e1, then flip the last coordinate.
  // u1 >  0: reflect u -> -e1 across w = u + e1, then flip the first.
  // Either branch keeps |w|^2 = 2 (1 + |u1|) away from zero.
  if (w_[0] <= 0.0) {
    w_[0] -= 1.0;
    flip_coord_ = d_ - 1;
  } else {
    w_[0] += 1.0;
    flip_coord_ = 0;
  }
  w_norm2_ = 0.0;
  for (const double wi : w_) w_norm2_ += wi * wi;
}

void RotationToE1::reflect(std::span<const double> v, std::span<double> out) const {
  double proj = 0.0;
  for (int i = 0; i < d_; ++i) proj += w_[static_cast<std::size_t>(i)] * v[static_cast<std::size_t>(i)];
  const double scale = 2.0 * proj / w_norm2_;
  for (int i = 0; i < d_; ++i) {
    out[static_cast<std::size_t>(i)] =
        v[static_cast<std::size_t>(i)] - scale * w_[static_cast<std::size_t>(i)];
  }
}

void RotationToE1::apply(std::span<const double> v, std::span<double> out) const {
  if (v.size() != static_cast<std::size_t>(d_) || out.size() != v.size()) {
    throw std::invalid_argument("rotation apply: dimension mismatch");
  }
  switch (kind_) {
    case Kind::identity:
      for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i];
      return;
    case Kind::givens: {
      const double v0 = v[0];
      const double v1 = v[1];
      out[0] = c_ * v0 + s_ * v1;
      out[1] = -s_ * v0 + c_ * v1;
      return;
    }
    case Kind::householder: {
      reflect(v, out);
      out[static_cast<std::size_t>(flip_coord_)] = -out[static_cast<std::size_t>(flip_coord_)];
      return;
    }
  }
}

void RotationToE1::apply_transpose(std::span<const double> v, std::span<double> out) const {
  if (v.size() != static_cast<std::size_t>(d_) || out.size() != v.size()) {
    throw std::invalid_argument("rotation apply: dimension mismatch");
  }
  switch (kind_) {
    case Kind::identity:
      for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i];
      return;
    case Kind::givens: {
      const double v0 = v[0];
      const double v1 = v[1];
      out[0] = c_ * v0 - s_ * v1;
      out[1] = s_ * v0 + c_ * v1;
      return;
    }
    case Kind::householder: {
      // R = F H with H symmetric and F the coordinate flip, so R^T = H F.
      for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i];
      out[static_cast<std::size_t>(flip_coord_)] = -out[static_cast<std::size_t>(flip_coord_)];
      // In-place reflection is safe: proj is read before writes.
      double proj = 0.0;
      for (int i = 0; i < d_; ++i) {
        proj += w_[static_cast<std::size_t>(i)] * out[static_cast<std::size_t>(i)];
      }
      const double scale = 2.0 * proj / w_norm2_;
      for (int i = 0; i < d_; ++i) {
        out[static_cast<std::size_t>(i)] -= scale * w_[static_cast<std::size_t>(i)];
      }
      return;
    }
  }
}

std::vector<double> RotationToE1::matrix() const {
  std::vector<double> m(static_cast<std::size_t>(d_) * static_cast<std::size_t>(d_), 0.0);
  std::vector<double> e(static_cast<std::size_t>(d_), 0.0);
  std::vector<double> col(static_cast<std::size_t>(d_), 0.0);
  for (int j = 0; j < d_; ++j) {
    e[static_cast<std::size_t>(j)] = 1.0;
    apply(e, col);
    for (int i = 0; i < d_; ++i) {
      m[static_cast<std::size_t>(i) * static_cast<std::size_t>(d_) + static_cast<std::size_t>(j)] =
          col[static_cast<std::size_t>(i)];
    }
    e[static_cast<std::size_t>(j)] = 0.0;
  }
  return m;
}

}  // namespace pullbound
