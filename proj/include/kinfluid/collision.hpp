#pragma once
// Discrete hard-sphere collision operator.
//
// Off-grid post-collision values are evaluated by trilinear interpolation of
// the ratio F/M_w against a reference Maxwellian weight M_w carried by the
// operator (energy-shell renormalization): because M_w(v')M_w(v*') =
// M_w(v)M_w(v*) exactly on the collision sphere, the gain term becomes
//   Q_gain = sum  B * M_w(v) M_w(v*) * I[F1/M_w](v') * I[F2/M_w](v*')
// and the weight's own Maxwellian is an exact discrete equilibrium at any
// parameters.  The operator is bilinear for a fixed weight.  A final
// least-squares correction (micro projection against M_w) restores the three
// collision invariants exactly; its magnitude is reported.
//
// Evaluations are serial and deterministic; callers parallelize across
// spatial cells.

#include <memory>
#include <vector>

#include "kinfluid/collision_quadrature.hpp"
#include "kinfluid/common.hpp"
#include "kinfluid/maxwell.hpp"
#include "kinfluid/projection.hpp"
#include "kinfluid/velocity_grid.hpp"

namespace kinfluid {

class CollisionOperator {
public:
  CollisionOperator(const VelocityGrid& grid, std::shared_ptr<const TrilinearTable> table,
                    const MaxwellParams& weight)
      : grid_(&grid),
        table_(std::move(table)),
        weight_(weight),
        Mw_(maxwellian_field(grid, weight)),
        projector_(grid, weight) {
    KF_REQUIRE(table_ != nullptr, "collision operator needs a quadrature table");
    KF_REQUIRE(table_->n() == grid.n(), "quadrature table and grid disagree on N_v");
  }

  const VelocityGrid& grid() const { return *grid_; }
  const MaxwellParams& weight_params() const { return weight_; }
  const std::vector<double>& weight_maxwellian() const { return Mw_; }
  const TrilinearTable& table() const { return *table_; }

  // Q(F, F), conservatively corrected.  correction_magnitude (optional out)
  // receives the L^2(dv/M_w) size of the removed invariant component.
  std::vector<double> q_full(const std::vector<double>& F,
                             double* correction_magnitude = nullptr) const {
    std::vector<double> out = q_raw(F);
    const double mag = conserve(out);
    if (correction_magnitude) *correction_magnitude = mag;
    return out;
  }

  // Bilinear Q(F1, F2) (first argument rides the v slot, second the v* slot),
  // conservatively corrected.
  std::vector<double> q_full(const std::vector<double>& F1, const std::vector<double>& F2,
                             double* correction_magnitude = nullptr) const {
    std::vector<double> out = q_raw_bilinear(F1, F2);
    const double mag = conserve(out);
    if (correction_magnitude) *correction_magnitude = mag;
    return out;
  }

  // Uncorrected quadratic evaluation (exposed for linearization cross-checks).
  std::vector<double> q_raw(const std::vector<double>& F) const {
    KF_REQUIRE(F.size() == grid_->size(), "collision operand has wrong grid size");
    const std::size_t nv = grid_->size();
    std::vector<double> phi(nv), out(nv, 0.0);
    for (std::size_t a = 0; a < nv; ++a) phi[a] = F[a] / Mw_[a];

    const int n = grid_->n();
    const std::int32_t c1 = 1, cN = n, cN1 = n + 1;
    const std::int32_t cQ = n * n, cQ1 = cQ + 1, cQN = cQ + n, cQN1 = cQ + n + 1;
    const double* __restrict p = phi.data();
    const double* __restrict f = F.data();
    const double* __restrict m = Mw_.data();
    double* __restrict o = out.data();
    std::vector<double> dbuf(n);
    double* __restrict db = dbuf.data();

    for (const TrilinearEntry& e : table_->entries()) {
      const double B = e.bker;
      const double g0 = e.w_gain[0], g1 = e.w_gain[1], g2 = e.w_gain[2], g3 = e.w_gain[3];
      const double g4 = e.w_gain[4], g5 = e.w_gain[5], g6 = e.w_gain[6], g7 = e.w_gain[7];
      const double s0 = e.w_star[0], s1 = e.w_star[1], s2 = e.w_star[2], s3 = e.w_star[3];
      const double s4 = e.w_star[4], s5 = e.w_star[5], s6 = e.w_star[6], s7 = e.w_star[7];
      for (int ix = e.i0[0]; ix < e.i1[0]; ++ix) {
        for (int iy = e.i0[1]; iy < e.i1[1]; ++iy) {
          const std::size_t row = (static_cast<std::size_t>(ix) * n + iy) * n;
          const std::size_t a0 = row + e.i0[2];
          const int len = e.i1[2] - e.i0[2];
          const double* __restrict pg = p + a0 + e.off_gain;
          const double* __restrict ps = p + a0 + e.off_star;
          const double* __restrict fa = f + a0;
          const double* __restrict fb = f + a0 + e.off_j;
          const double* __restrict ma = m + a0;
          const double* __restrict mb = m + a0 + e.off_j;
          for (int k = 0; k < len; ++k) {
            const double ig = g0 * pg[k] + g1 * pg[k + c1] + g2 * pg[k + cN] +
                              g3 * pg[k + cN1] + g4 * pg[k + cQ] + g5 * pg[k + cQ1] +
                              g6 * pg[k + cQN] + g7 * pg[k + cQN1];
            const double is = s0 * ps[k] + s1 * ps[k + c1] + s2 * ps[k + cN] +
                              s3 * ps[k + cN1] + s4 * ps[k + cQ] + s5 * ps[k + cQ1] +
                              s6 * ps[k + cQN] + s7 * ps[k + cQN1];
            db[k] = B * (ma[k] * mb[k] * ig * is - fa[k] * fb[k]);
          }
          // oa/ob may overlap for small |off_j|; two sequential plain-pointer
          // passes keep the arithmetic exact and the compiler honest.
          double* oa = o + a0;
          double* ob = o + a0 + e.off_j;
          for (int k = 0; k < len; ++k) oa[k] += db[k];
          for (int k = 0; k < len; ++k) ob[k] += db[k];
        }
      }
    }
    return out;
  }

  std::vector<double> q_raw_bilinear(const std::vector<double>& F1,
                                     const std::vector<double>& F2) const {
    KF_REQUIRE(F1.size() == grid_->size() && F2.size() == grid_->size(),
               "collision operand has wrong grid size");
    const std::size_t nv = grid_->size();
    std::vector<double> p1(nv), p2(nv), out(nv, 0.0);
    for (std::size_t a = 0; a < nv; ++a) p1[a] = F1[a] / Mw_[a];
    for (std::size_t a = 0; a < nv; ++a) p2[a] = F2[a] / Mw_[a];

    const int n = grid_->n();
    const std::int32_t co[8] = {0, 1, n, n + 1, n * n, n * n + 1, n * n + n, n * n + n + 1};
    std::vector<double> dA(n), dB(n);

    for (const TrilinearEntry& e : table_->entries()) {
      const double B = e.bker;
      for (int ix = e.i0[0]; ix < e.i1[0]; ++ix) {
        for (int iy = e.i0[1]; iy < e.i1[1]; ++iy) {
          const std::size_t a0 = (static_cast<std::size_t>(ix) * n + iy) * n + e.i0[2];
          const int len = e.i1[2] - e.i0[2];
          for (int k = 0; k < len; ++k) {
            const std::size_t a = a0 + k;
            const std::size_t b = a + e.off_j;
            double i1g = 0, i2s = 0, i1s = 0, i2g = 0;
            for (int c = 0; c < 8; ++c) {
              i1g += e.w_gain[c] * p1[a + e.off_gain + co[c]];
              i2s += e.w_star[c] * p2[a + e.off_star + co[c]];
              i1s += e.w_star[c] * p1[a + e.off_star + co[c]];
              i2g += e.w_gain[c] * p2[a + e.off_gain + co[c]];
            }
            const double mm = Mw_[a] * Mw_[b];
            // ordered pair (a, b): v' carries slot 1, v*' carries slot 2
            dA[k] = B * (mm * i1g * i2s - F1[a] * F2[b]);
            // ordered pair (b, a): primes swap roles
            dB[k] = B * (mm * i1s * i2g - F1[b] * F2[a]);
          }
          for (int k = 0; k < len; ++k) out[a0 + k] += dA[k];
          for (int k = 0; k < len; ++k) out[a0 + k + e.off_j] += dB[k];
        }
      }
    }
    return out;
  }

  // Least-squares removal of the collision-invariant component in
  // L^2(dv/M_w); leaves mass/momentum/energy moments exactly zero.  Two
  // passes of the 5x5 Gram solve push the residual to rounding level.
  double conservative_correction_inplace(std::vector<double>& q) const {
    const double mag = projector_.project_micro(q);
    projector_.project_micro(q);
    return mag;
  }

  std::vector<double> conservative_correction(const std::vector<double>& q,
                                              double* magnitude = nullptr) const {
    std::vector<double> out = q;
    const double mag = conservative_correction_inplace(out);
    if (magnitude) *magnitude = mag;
    return out;
  }

private:
  double conserve(std::vector<double>& q) const { return conservative_correction_inplace(q); }

  const VelocityGrid* grid_;
  std::shared_ptr<const TrilinearTable> table_;
  MaxwellParams weight_;
  std::vector<double> Mw_;
  MacroProjector projector_;
};

// --- collision frequency -----------------------------------------------------
//
// nu_M(v) = int int |(v - v*).omega| M(v*) dv* domega.  The angular factor
// S(d) = sum_m w_m |dv d.omega_m| depends only on the lattice offset, so the
// field is a 3D correlation of M with S over the full offset range (no
// stencil drops: nu is defined without interpolation).

class NuTable {
public:
  NuTable(const VelocityGrid& grid, const AngularRule& rule)
      : n_(grid.n()), rule_name_(rule.name) {
    const int n = n_;
    const int m = 2 * n - 1;
    S_.assign(static_cast<std::size_t>(m) * m * m, 0.0);
    for (int dx = -(n - 1); dx <= n - 1; ++dx)
      for (int dy = -(n - 1); dy <= n - 1; ++dy)
        for (int dz = -(n - 1); dz <= n - 1; ++dz) {
          double s = 0.0;
          for (std::size_t q = 0; q < rule.size(); ++q) {
            const Vec3& om = rule.node[q];
            s += rule.weight[q] * std::abs(dx * om.x + dy * om.y + dz * om.z);
          }
          at(dx, dy, dz) = grid.dv() * s;
        }
  }

  double& at(int dx, int dy, int dz) {
    const int n1 = n_ - 1, m = 2 * n_ - 1;
    return S_[(static_cast<std::size_t>(dx + n1) * m + (dy + n1)) * m + (dz + n1)];
  }
  double at(int dx, int dy, int dz) const {
    const int n1 = n_ - 1, m = 2 * n_ - 1;
    return S_[(static_cast<std::size_t>(dx + n1) * m + (dy + n1)) * m + (dz + n1)];
  }

  // nu as a field on the grid for a profile G in the v* slot (G = M for the
  // physical collision frequency; general G feeds the loss-side linearization).
  std::vector<double> correlate(const VelocityGrid& grid, const std::vector<double>& G) const {
    KF_REQUIRE(grid.n() == n_, "nu table and grid disagree on N_v");
    const int n = n_;
    std::vector<double> nu(grid.size(), 0.0);
    for (int ix = 0; ix < n; ++ix)
      for (int iy = 0; iy < n; ++iy)
        for (int iz = 0; iz < n; ++iz) {
          double s = 0.0;
          std::size_t b = 0;
          for (int jx = 0; jx < n; ++jx)
            for (int jy = 0; jy < n; ++jy)
              for (int jz = 0; jz < n; ++jz, ++b)
                s += G[b] * at(jx - ix, jy - iy, jz - iz);
          nu[(static_cast<std::size_t>(ix) * n + iy) * n + iz] = grid.weight() * s;
        }
    return nu;
  }

  const std::string& rule_name() const { return rule_name_; }

private:
  int n_;
  std::string rule_name_;
  std::vector<double> S_;
};

inline std::vector<double> nu_field(const VelocityGrid& grid, const AngularRule& rule,
                                    const MaxwellParams& p) {
  const NuTable t(grid, rule);
  return t.correlate(grid, maxwellian_field(grid, p));
}

// nu at an arbitrary (possibly off-grid) velocity, by direct summation.
inline double nu_at(const VelocityGrid& grid, const AngularRule& rule, const MaxwellParams& p,
                    const Vec3& v) {
  const auto M = maxwellian_field(grid, p);
  double s = 0.0;
  for (std::size_t b = 0; b < grid.size(); ++b) {
    const Vec3 g = grid.node(b) - v;
    double ang = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) ang += rule.weight[q] * std::abs(dot(g, rule.node[q]));
    s += M[b] * ang;
  }
  return grid.weight() * s;
}

}  // namespace kinfluid
