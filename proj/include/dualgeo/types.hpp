#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <array>
#include <cassert>
#include <string_view>

namespace dualgeo {

/// Largest chart dimension supported by the builtin catalog. Small fixed
/// capacities keep every hot-path vector and matrix off the heap.
inline constexpr int kMaxDim = 8;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

/// A point of the manifold, expressed in the model's single working chart.
struct Point {
  Vec coords;

  Point() = default;
  explicit Point(Vec c) : coords(std::move(c)) {}

  int dim() const { return static_cast<int>(coords.size()); }
  friend bool operator==(const Point& a, const Point& b) {
    return a.coords.size() == b.coords.size() && a.coords == b.coords;
  }
};

/// A tangent vector in the coordinate basis d/dx^i at `base`.
struct Tangent {
  Point base;
  Vec components;

  Tangent() = default;
  Tangent(Point b, Vec c) : base(std::move(b)), components(std::move(c)) {}

  int dim() const { return static_cast<int>(components.size()); }
};

enum class ConnectionKind { Primal, Dual };

constexpr ConnectionKind dual_of(ConnectionKind k) {
  return k == ConnectionKind::Primal ? ConnectionKind::Dual : ConnectionKind::Primal;
}

constexpr std::string_view to_string(ConnectionKind k) {
  return k == ConnectionKind::Primal ? "primal" : "dual";
}

/// Lower-index connection symbols Gamma_ijk = g(nabla_{d_i} d_j, d_k).
/// The third index is the lowered one.
class Christoffel {
 public:
  Christoffel() = default;
  explicit Christoffel(int n) { reset(n); }

  /// Resizes to dimension `n` and zeroes the live entries.
  void reset(int n) {
    assert(n >= 0 && n <= kMaxDim);
    n_ = n;
    std::fill_n(data_.begin(), n * n * n, 0.0);
  }

  int dim() const { return n_; }

  double& operator()(int i, int j, int k) {
    assert(i < n_ && j < n_ && k < n_);
    return data_[static_cast<std::size_t>((i * n_ + j) * n_ + k)];
  }
  double operator()(int i, int j, int k) const {
    assert(i < n_ && j < n_ && k < n_);
    return data_[static_cast<std::size_t>((i * n_ + j) * n_ + k)];
  }

  /// c_k = Gamma_ijk u^i w^j.
  Vec contract(const Vec& u, const Vec& w) const {
    Vec c = Vec::Zero(n_);
    for (int i = 0; i < n_; ++i) {
      if (u[i] == 0.0) continue;
      for (int j = 0; j < n_; ++j) {
        const double uw = u[i] * w[j];
        if (uw == 0.0) continue;
        for (int k = 0; k < n_; ++k) c[k] += (*this)(i, j, k) * uw;
      }
    }
    return c;
  }

 private:
  int n_ = 0;
  std::array<double, static_cast<std::size_t>(kMaxDim * kMaxDim * kMaxDim)> data_;
};

}  // namespace dualgeo
