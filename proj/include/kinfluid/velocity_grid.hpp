#pragma once
// Uniform cell-centered velocity lattice on the cube [-vmax, vmax]^3 with the
// midpoint quadrature weight w = dv^3 at every node.  The midpoint layout is
// symmetric under v -> -v (node map only, no interpolation) and has no node
// with any component exactly zero, so upwind splittings never see a
// degenerate direction.

#include <array>
#include <cstddef>
#include <vector>

#include "kinfluid/common.hpp"

namespace kinfluid {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  double& operator[](int a) { return a == 0 ? x : (a == 1 ? y : z); }
  double operator[](int a) const { return a == 0 ? x : (a == 1 ? y : z); }

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3 operator-() const { return {-x, -y, -z}; }
};

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double norm2(const Vec3& a) { return dot(a, a); }

class VelocityGrid {
public:
  VelocityGrid(int n_per_axis, double vmax)
      : n_(n_per_axis), vmax_(vmax), dv_(2.0 * vmax / n_per_axis) {
    KF_REQUIRE(n_per_axis >= 4, "velocity grid needs at least 4 nodes per axis");
    KF_REQUIRE(vmax > 0.0, "velocity cutoff must be positive");
    coords_.resize(n_);
    for (int i = 0; i < n_; ++i) coords_[i] = -vmax_ + (i + 0.5) * dv_;
  }

  int n() const { return n_; }
  std::size_t size() const { return static_cast<std::size_t>(n_) * n_ * n_; }
  double vmax() const { return vmax_; }
  double dv() const { return dv_; }
  // Quadrature weight of every node (uniform midpoint rule).
  double weight() const { return dv_ * dv_ * dv_; }

  double coord(int i) const { return coords_[i]; }
  const std::vector<double>& coords() const { return coords_; }

  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * n_ + j) * n_ + k;
  }

  std::array<int, 3> unpack(std::size_t flat) const {
    const int k = static_cast<int>(flat % n_);
    const int j = static_cast<int>((flat / n_) % n_);
    const int i = static_cast<int>(flat / (static_cast<std::size_t>(n_) * n_));
    return {i, j, k};
  }

  Vec3 node(std::size_t flat) const {
    const auto ijk = unpack(flat);
    return {coords_[ijk[0]], coords_[ijk[1]], coords_[ijk[2]]};
  }

  Vec3 node(int i, int j, int k) const { return {coords_[i], coords_[j], coords_[k]}; }

  // Index of the node at -v (exact on the midpoint lattice).
  std::size_t negation_index(std::size_t flat) const {
    const auto ijk = unpack(flat);
    return index(n_ - 1 - ijk[0], n_ - 1 - ijk[1], n_ - 1 - ijk[2]);
  }

  bool same_layout(const VelocityGrid& o) const {
    return n_ == o.n_ && vmax_ == o.vmax_;
  }

private:
  int n_;
  double vmax_;
  double dv_;
  std::vector<double> coords_;
};

}  // namespace kinfluid
