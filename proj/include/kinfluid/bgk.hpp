#pragma once
// BGK relaxation surrogate: nu_ref * (M_F - F) with M_F the Maxwellian whose
// *discrete* moments match F's (so the relaxation is exactly conservative and
// nodal Maxwellians are exact equilibria), and nu_ref the hard-sphere
// collision-frequency scale at the bulk velocity,
//   nu_ref = rho sqrt(theta) * 2 pi sqrt(8/pi).

#include <cmath>
#include <numbers>
#include <vector>

#include "kinfluid/common.hpp"
#include "kinfluid/maxwell.hpp"
#include "kinfluid/velocity_grid.hpp"

namespace kinfluid {

// nu_M(u) / (rho sqrt(theta)) for a hard-sphere Maxwellian: 2 pi sqrt(8/pi).
inline double bgk_nu1() { return 2.0 * std::numbers::pi * std::sqrt(8.0 / std::numbers::pi); }

inline double bgk_reference_frequency(const MaxwellParams& p) {
  return p.rho * std::sqrt(p.theta) * bgk_nu1();
}

struct BgkRelaxation {
  Moments moments;        // discrete moments of F
  MaxwellParams matched;  // parameters of the moment-matched Maxwellian
  std::vector<double> M;  // its nodal field
  double nu_ref = 0.0;
};

inline BgkRelaxation bgk_analyze(const VelocityGrid& grid, const std::vector<double>& F) {
  BgkRelaxation r;
  r.moments = moments(grid, F);
  if (!(r.moments.rho > 0.0) || !(r.moments.temperature() > 0.0))
    throw error("BGK relaxation: degenerate moments (rho=" + std::to_string(r.moments.rho) +
                ", theta=" + std::to_string(r.moments.temperature()) + ")");
  r.matched = matched_maxwellian_params(grid, r.moments);
  r.M = maxwellian_field(grid, r.matched);
  r.nu_ref = bgk_reference_frequency(r.moments.params());
  return r;
}

inline std::vector<double> bgk_relax(const VelocityGrid& grid, const std::vector<double>& F) {
  const BgkRelaxation r = bgk_analyze(grid, F);
  std::vector<double> out(F.size());
  for (std::size_t a = 0; a < F.size(); ++a) out[a] = r.nu_ref * (r.M[a] - F[a]);
  return out;
}

}  // namespace kinfluid
