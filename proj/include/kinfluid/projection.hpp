#pragma once
// Macro/micro decomposition of a velocity profile about a Maxwellian state:
// orthogonal projection onto the five collision invariants
//   chi_0 = M/sqrt(rho), chi_i = (v_i - u_i) M / sqrt(rho theta),
//   chi_4 = (|v-u|^2/theta - 3) M / sqrt(6 rho)
// in the L^2(dv/M) inner product.  The chi_k are orthonormal in the
// continuum; on the grid their Gram matrix is solved explicitly (5x5), which
// keeps the projection exactly idempotent and self-adjoint regardless of
// quadrature and truncation error.
//
// All inner products are evaluated as sum w * M * p_k * p_l with the
// polynomial factors p_k = chi_k / M, so no division by Gaussian tails ever
// happens.

#include <array>
#include <vector>

#include <Eigen/Dense>

#include "kinfluid/common.hpp"
#include "kinfluid/maxwell.hpp"
#include "kinfluid/velocity_grid.hpp"

namespace kinfluid {

// Coefficients in the parameterization
//   P0 R = (a/rho) M + (b·(v-u)/(rho theta)) M + (c/(rho theta)) (|v-u|^2/theta - 3) M.
struct MacroCoefficients {
  double a = 0.0;
  Vec3 b{0.0, 0.0, 0.0};
  double c = 0.0;
};

struct MacroDecomposition {
  MacroCoefficients coeff;
  std::array<double, 5> alpha{};  // coordinates in the orthonormal chi basis
  std::vector<double> P0;         // hydrodynamic part
  std::vector<double> P1;         // kinetic remainder, orthogonal to all chi_k
};

class MacroProjector {
public:
  MacroProjector(const VelocityGrid& grid, const MaxwellParams& p)
      : grid_(&grid), params_(p), M_(maxwellian_field(grid, p)) {
    const std::size_t nv = grid.size();
    const double srho = std::sqrt(p.rho);
    const double srt = std::sqrt(p.rho * p.theta);
    const double s6r = std::sqrt(6.0 * p.rho);
    for (auto& pk : poly_) pk.resize(nv);
    for (std::size_t a = 0; a < nv; ++a) {
      const Vec3 c = grid.node(a) - p.u;
      poly_[0][a] = 1.0 / srho;
      poly_[1][a] = c.x / srt;
      poly_[2][a] = c.y / srt;
      poly_[3][a] = c.z / srt;
      poly_[4][a] = (norm2(c) / p.theta - 3.0) / s6r;
    }
    Eigen::Matrix<double, 5, 5> G;
    const double w = grid.weight();
    for (int k = 0; k < 5; ++k)
      for (int l = k; l < 5; ++l) {
        double s = 0.0;
        for (std::size_t a = 0; a < nv; ++a) s += M_[a] * poly_[k][a] * poly_[l][a];
        G(k, l) = G(l, k) = w * s;
      }
    gram_solver_.compute(G);
    KF_REQUIRE(gram_solver_.info() == Eigen::Success,
               "collision-invariant Gram matrix not SPD (grid too coarse for this state?)");
  }

  const MaxwellParams& params() const { return params_; }
  const std::vector<double>& maxwellian() const { return M_; }
  // chi_k = poly_k * M nodal values.
  double chi(int k, std::size_t node) const { return poly_[k][node] * M_[node]; }

  // <chi_k, R> in L^2(dv/M) for all k; R is a plain nodal profile.
  std::array<double, 5> inner_products(const std::vector<double>& R) const {
    KF_REQUIRE(R.size() == grid_->size(), "profile size mismatch");
    std::array<double, 5> r{};
    for (int k = 0; k < 5; ++k) {
      double s = 0.0;
      for (std::size_t a = 0; a < R.size(); ++a) s += poly_[k][a] * R[a];
      r[k] = grid_->weight() * s;
    }
    return r;
  }

  std::array<double, 5> coefficients(const std::vector<double>& R) const {
    const auto rhs = inner_products(R);
    Eigen::Matrix<double, 5, 1> b;
    for (int k = 0; k < 5; ++k) b(k) = rhs[k];
    const Eigen::Matrix<double, 5, 1> alpha = gram_solver_.solve(b);
    return {alpha(0), alpha(1), alpha(2), alpha(3), alpha(4)};
  }

  MacroCoefficients abc_from_alpha(const std::array<double, 5>& alpha) const {
    MacroCoefficients c;
    const double srho = std::sqrt(params_.rho);
    const double srt = std::sqrt(params_.rho * params_.theta);
    c.a = srho * alpha[0];
    c.b = {srt * alpha[1], srt * alpha[2], srt * alpha[3]};
    c.c = params_.theta * std::sqrt(params_.rho / 6.0) * alpha[4];
    return c;
  }

  void add_macro_part(const std::array<double, 5>& alpha, std::vector<double>& out) const {
    for (std::size_t a = 0; a < out.size(); ++a) {
      double s = 0.0;
      for (int k = 0; k < 5; ++k) s += alpha[k] * poly_[k][a];
      out[a] += s * M_[a];
    }
  }

  MacroDecomposition decompose(const std::vector<double>& R) const {
    MacroDecomposition d;
    d.alpha = coefficients(R);
    d.coeff = abc_from_alpha(d.alpha);
    d.P0.assign(R.size(), 0.0);
    add_macro_part(d.alpha, d.P0);
    d.P1.resize(R.size());
    for (std::size_t a = 0; a < R.size(); ++a) d.P1[a] = R[a] - d.P0[a];
    return d;
  }

  // In-place micro projection: R <- R - P0 R.  Returns the L^2(dv/M) norm of
  // the removed hydrodynamic component (coefficient 2-norm in the
  // orthonormalized basis, up to Gram conditioning).
  double project_micro(std::vector<double>& R) const {
    const auto alpha = coefficients(R);
    std::vector<double> neg(R.size(), 0.0);
    add_macro_part(alpha, neg);
    double mag = 0.0;
    for (int k = 0; k < 5; ++k) mag += sq(alpha[k]);
    for (std::size_t a = 0; a < R.size(); ++a) R[a] -= neg[a];
    return std::sqrt(mag);
  }

private:
  const VelocityGrid* grid_;
  MaxwellParams params_;
  std::vector<double> M_;
  std::array<std::vector<double>, 5> poly_;
  Eigen::LLT<Eigen::Matrix<double, 5, 5>> gram_solver_;
};

inline MacroDecomposition project_macro(const VelocityGrid& grid, const MaxwellParams& p,
                                        const std::vector<double>& R) {
  return MacroProjector(grid, p).decompose(R);
}

}  // namespace kinfluid
