#pragma once
// Maxwellian states and discrete velocity moments.
//
// Discrete moments of a nodal Maxwellian differ from (rho, u, theta) by
// quadrature/truncation error (tiny but nonzero), so wherever an algorithm
// needs "the Maxwellian whose *grid* moments equal a target" (BGK relaxation,
// splitting fixed points, conservative projections) use matched_maxwellian(),
// which Newton-adjusts the parameters until the discrete moments match to
// machine precision.

#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "kinfluid/common.hpp"
#include "kinfluid/velocity_grid.hpp"

namespace kinfluid {

struct MaxwellParams {
  double rho = 1.0;
  Vec3 u{0.0, 0.0, 0.0};
  double theta = 1.0;
};

inline MaxwellParams reference_params() { return MaxwellParams{1.0, {0.0, 0.0, 0.0}, 1.0}; }

inline double maxwellian(const MaxwellParams& p, const Vec3& v) {
  const double tp = 2.0 * std::numbers::pi * p.theta;
  return p.rho / (tp * std::sqrt(tp)) * std::exp(-norm2(v - p.u) / (2.0 * p.theta));
}

inline std::vector<double> maxwellian_field(const VelocityGrid& grid, const MaxwellParams& p) {
  KF_REQUIRE(p.rho > 0.0 && p.theta > 0.0, "Maxwellian needs rho, theta > 0");
  std::vector<double> f(grid.size());
  const double tp = 2.0 * std::numbers::pi * p.theta;
  const double pref = p.rho / (tp * std::sqrt(tp));
  const int n = grid.n();
  // exp() separates over axes; precompute the three 1D factor tables.
  std::vector<double> ex(n), ey(n), ez(n);
  for (int i = 0; i < n; ++i) {
    const double c = grid.coord(i);
    ex[i] = std::exp(-sq(c - p.u.x) / (2.0 * p.theta));
    ey[i] = std::exp(-sq(c - p.u.y) / (2.0 * p.theta));
    ez[i] = std::exp(-sq(c - p.u.z) / (2.0 * p.theta));
  }
  std::size_t a = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double pij = pref * ex[i] * ey[j];
      for (int k = 0; k < n; ++k, ++a) f[a] = pij * ez[k];
    }
  return f;
}

// Conserved moments (mass, momentum, kinetic energy density) plus the derived
// bulk velocity and temperature.
struct Moments {
  double rho = 0.0;
  Vec3 momentum{0.0, 0.0, 0.0};
  double energy = 0.0;  // (1/2) integral |v|^2 F dv

  Vec3 velocity() const { return momentum * (1.0 / rho); }
  double temperature() const {
    const Vec3 u = velocity();
    return (2.0 * energy / rho - norm2(u)) / 3.0;
  }
  MaxwellParams params() const { return {rho, velocity(), temperature()}; }
};

inline Moments moments(const VelocityGrid& grid, const std::vector<double>& F) {
  KF_REQUIRE(F.size() == grid.size(), "field size mismatch");
  Moments m;
  double mx = 0.0, my = 0.0, mz = 0.0, en = 0.0, rho = 0.0;
  const int n = grid.n();
  std::size_t a = 0;
  for (int i = 0; i < n; ++i) {
    const double vx = grid.coord(i);
    for (int j = 0; j < n; ++j) {
      const double vy = grid.coord(j);
      for (int k = 0; k < n; ++k, ++a) {
        const double vz = grid.coord(k);
        const double f = F[a];
        rho += f;
        mx += vx * f;
        my += vy * f;
        mz += vz * f;
        en += (vx * vx + vy * vy + vz * vz) * f;
      }
    }
  }
  const double w = grid.weight();
  m.rho = w * rho;
  m.momentum = {w * mx, w * my, w * mz};
  m.energy = 0.5 * w * en;
  return m;
}

// Newton solve for the nodal Maxwellian whose *discrete* moments equal the
// given target.  Starts from the analytic parameters; 2-4 iterations reach
// machine precision on any reasonably resolved grid.
inline MaxwellParams matched_maxwellian_params(const VelocityGrid& grid, const Moments& target,
                                               int max_iter = 50) {
  KF_REQUIRE(target.rho > 0.0, "matched Maxwellian needs positive density");
  KF_REQUIRE(target.temperature() > 0.0, "matched Maxwellian needs positive temperature");
  MaxwellParams p = target.params();

  const double scale_rho = target.rho;
  const double scale_en = std::abs(target.energy) + target.rho;
  for (int iter = 0; iter < max_iter; ++iter) {
    const std::vector<double> M = maxwellian_field(grid, p);
    const Moments got = moments(grid, M);

    Eigen::Matrix<double, 5, 1> r;
    r << got.rho - target.rho, got.momentum.x - target.momentum.x,
        got.momentum.y - target.momentum.y, got.momentum.z - target.momentum.z,
        got.energy - target.energy;
    const double res = std::abs(r(0)) / scale_rho +
                       (std::abs(r(1)) + std::abs(r(2)) + std::abs(r(3))) / scale_rho +
                       std::abs(r(4)) / scale_en;
    if (res < 1e-14) return p;

    // Jacobian of the discrete moments w.r.t. (rho, u, theta); the parameter
    // derivatives of M are M times low-degree polynomials in (v - u).
    Eigen::Matrix<double, 5, 5> J = Eigen::Matrix<double, 5, 5>::Zero();
    const double w = grid.weight();
    const int n = grid.n();
    std::size_t a = 0;
    for (int i = 0; i < n; ++i) {
      const double vx = grid.coord(i);
      for (int j = 0; j < n; ++j) {
        const double vy = grid.coord(j);
        for (int k = 0; k < n; ++k, ++a) {
          const double vz = grid.coord(k);
          const double m = w * M[a];
          const double cx = vx - p.u.x, cy = vy - p.u.y, cz = vz - p.u.z;
          const double c2 = cx * cx + cy * cy + cz * cz;
          const double dlog[5] = {1.0 / p.rho, cx / p.theta, cy / p.theta, cz / p.theta,
                                  c2 / (2.0 * sq(p.theta)) - 1.5 / p.theta};
          const double mom[5] = {1.0, vx, vy, vz, 0.5 * (vx * vx + vy * vy + vz * vz)};
          for (int c = 0; c < 5; ++c)
            for (int q = 0; q < 5; ++q) J(c, q) += mom[c] * m * dlog[q];
        }
      }
    }
    const Eigen::Matrix<double, 5, 1> dq = J.partialPivLu().solve(r);
    p.rho -= dq(0);
    p.u.x -= dq(1);
    p.u.y -= dq(2);
    p.u.z -= dq(3);
    p.theta -= dq(4);
    KF_REQUIRE(p.rho > 0.0 && p.theta > 0.0, "matched Maxwellian Newton left the physical domain");
  }
  throw error("matched Maxwellian Newton failed to converge");
}

inline std::vector<double> matched_maxwellian(const VelocityGrid& grid, const Moments& target) {
  return maxwellian_field(grid, matched_maxwellian_params(grid, target));
}

}  // namespace kinfluid
