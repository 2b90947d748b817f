#pragma once
// Deviation norms from the convergence statement: the global L^2 norm of
// f/sqrt(M_-) and the weighted sup norm of w_l * f / sqrt(M_-) with
// w_l(v) = (1 + |v|^2)^(l/2), l > 3/2, plus the macro L^p norms applied to
// hydrodynamic coefficient fields.
//
// The sqrt(M_-) weight only controls Maxwellian-like deviations when the
// local temperature satisfies theta < 2 (below that threshold M/sqrt(M_-)
// decays; at and above it the continuum norm diverges even though any
// truncated grid returns a finite number).  Callers that know the state being
// measured pass it in so the guard can reject silently-meaningless values.

#include <cmath>
#include <optional>
#include <vector>

#include "kinfluid/common.hpp"
#include "kinfluid/maxwell.hpp"
#include "kinfluid/velocity_grid.hpp"

namespace kinfluid {

enum class NormKind {
  L2_sqrtMminus,        // sqrt( sum_x dx sum_v w f^2 / M_- )
  Linf_wl_sqrtMminus,   // sup_{x,v} (1+|v|^2)^{l/2} |f| / sqrt(M_-)
};

inline void require_weight_domination(const MaxwellParams& p) {
  if (!(p.theta < 2.0))
    throw error("sqrt(M_-)-weighted norm undefined: state temperature " +
                std::to_string(p.theta) + " >= 2, reference weight fails to dominate");
}

inline void require_weight_exponent(double ell) {
  KF_REQUIRE(ell > 1.5, "weighted sup norm needs weight exponent l > 3/2");
}

namespace detail {
// Per-node inverse reference weights, shared by both norms.  invM[a] = 1/M_-(v_a).
inline std::vector<double> inv_reference_maxwellian(const VelocityGrid& grid) {
  auto M = maxwellian_field(grid, reference_params());
  for (double& m : M) m = 1.0 / m;
  return M;
}
}  // namespace detail

// Single-profile (one spatial cell / pure velocity function) versions.
inline double l2_sqrtMminus(const VelocityGrid& grid, const std::vector<double>& f,
                            const std::optional<MaxwellParams>& state = std::nullopt) {
  if (state) require_weight_domination(*state);
  KF_REQUIRE(f.size() == grid.size(), "profile size mismatch");
  const auto invM = detail::inv_reference_maxwellian(grid);
  double s = 0.0;
  for (std::size_t a = 0; a < f.size(); ++a) s += f[a] * f[a] * invM[a];
  require_finite(s, "L2 sqrt(M_-) norm");
  return std::sqrt(grid.weight() * s);
}

inline double linf_wl_sqrtMminus(const VelocityGrid& grid, const std::vector<double>& f,
                                 double ell,
                                 const std::optional<MaxwellParams>& state = std::nullopt) {
  if (state) require_weight_domination(*state);
  require_weight_exponent(ell);
  KF_REQUIRE(f.size() == grid.size(), "profile size mismatch");
  const auto invM = detail::inv_reference_maxwellian(grid);
  double best = 0.0;
  for (std::size_t a = 0; a < f.size(); ++a) {
    const double w = std::pow(1.0 + norm2(grid.node(a)), 0.5 * ell);
    const double val = w * std::abs(f[a]) * std::sqrt(invM[a]);
    if (val > best) best = val;
  }
  require_finite(best, "weighted sup norm");
  return best;
}

// Phase-space fields: one velocity profile per spatial cell, cell width dx.
inline double l2_sqrtMminus_field(const VelocityGrid& grid,
                                  const std::vector<std::vector<double>>& F, double dx,
                                  const std::vector<MaxwellParams>* states = nullptr) {
  const auto invM = detail::inv_reference_maxwellian(grid);
  double total = 0.0;
  for (std::size_t c = 0; c < F.size(); ++c) {
    if (states) require_weight_domination((*states)[c]);
    KF_REQUIRE(F[c].size() == grid.size(), "profile size mismatch");
    double s = 0.0;
    for (std::size_t a = 0; a < F[c].size(); ++a) s += F[c][a] * F[c][a] * invM[a];
    total += s;
  }
  require_finite(total, "phase-space L2 norm");
  return std::sqrt(dx * grid.weight() * total);
}

inline double linf_wl_sqrtMminus_field(const VelocityGrid& grid,
                                       const std::vector<std::vector<double>>& F, double ell,
                                       const std::vector<MaxwellParams>* states = nullptr) {
  require_weight_exponent(ell);
  const auto invM = detail::inv_reference_maxwellian(grid);
  std::vector<double> wl(grid.size());
  for (std::size_t a = 0; a < wl.size(); ++a)
    wl[a] = std::pow(1.0 + norm2(grid.node(a)), 0.5 * ell) * std::sqrt(invM[a]);
  double best = 0.0;
  for (std::size_t c = 0; c < F.size(); ++c) {
    if (states) require_weight_domination((*states)[c]);
    for (std::size_t a = 0; a < F[c].size(); ++a) {
      const double val = wl[a] * std::abs(F[c][a]);
      if (val > best) best = val;
    }
  }
  require_finite(best, "phase-space weighted sup norm");
  return best;
}

// Macro L^p norm over the slab of a scalar coefficient field (p = 3 or 6 in
// the diagnostics, but any p >= 1 works).
inline double macro_lp_norm(const std::vector<double>& field, double dx, double p) {
  KF_REQUIRE(p >= 1.0, "macro norm exponent must be >= 1");
  double s = 0.0;
  for (double x : field) s += std::pow(std::abs(x), p);
  require_finite(s, "macro Lp norm");
  return std::pow(dx * s, 1.0 / p);
}

}  // namespace kinfluid
