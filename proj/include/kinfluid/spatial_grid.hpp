#pragma once
// 1D slab grid: Nx cells of width dx on [0,1], cell-centered unknowns, walls
// exactly on the domain faces x=0 and x=1.

#include <vector>

#include "kinfluid/common.hpp"

namespace kinfluid {

class SpatialGrid1D {
public:
  explicit SpatialGrid1D(int nx) : nx_(nx), dx_(1.0 / nx) {
    KF_REQUIRE(nx >= 2, "slab grid needs at least 2 cells");
  }

  int nx() const { return nx_; }
  double dx() const { return dx_; }
  double center(int i) const { return (i + 0.5) * dx_; }
  double face(int i) const { return i * dx_; }

  std::vector<double> centers() const {
    std::vector<double> c(nx_);
    for (int i = 0; i < nx_; ++i) c[i] = center(i);
    return c;
  }

private:
  int nx_;
  double dx_;
};

}  // namespace kinfluid
