#pragma once
// Precomputed quadrature tables for the hard-sphere collision integral on the
// uniform velocity lattice.
//
// For nodes v_i, v_j the post-collision pair
//   v'  = v_i + ((v_j - v_i).omega) omega,   v*' = v_j - ((v_j - v_i).omega) omega
// depends on i only through the lattice offset d = j - i, so every stencil
// quantity (integer base offsets, interpolation weights, kernel factor) is a
// function of (d, omega) alone and is tabulated once.  Inner loops over i then
// touch contiguous memory and carry no branches.
//
// Two symmetries halve the table twice:
//   * omega -> -omega leaves (v', v*') unchanged  (antipodal fold),
//   * the unordered pair {i, j} serves both ordered pairs: the (j, i, omega)
//     contribution is the same gain/loss difference scattered to j.
//
// Any triple whose interpolation stencil would leave the velocity box is
// dropped entirely — gain and loss together — which keeps discrete equilibria
// exact in the presence of truncation; the dropped kernel mass is
// exponentially small and is reported by the builder.

#include <cstdint>
#include <vector>

#include "kinfluid/angular_rules.hpp"
#include "kinfluid/common.hpp"
#include "kinfluid/velocity_grid.hpp"

namespace kinfluid {

// --- trilinear stencils (nonlinear operator Q) ------------------------------

struct TrilinearEntry {
  double w_gain[8];      // trilinear weights at v'
  double w_star[8];      // trilinear weights at v*'
  double bker;           // dv^3 * w_omega(folded) * dv * |d.omega|
  std::int32_t off_j;    // flat(j) - flat(i)
  std::int32_t off_gain; // flat offset of the v' stencil origin, relative to flat(i)
  std::int32_t off_star; // flat offset of the v*' stencil origin, relative to flat(i)
  std::int16_t i0[3];    // inclusive start of valid i per axis
  std::int16_t i1[3];    // exclusive end of valid i per axis
};

// --- triquadratic stencils (weak-form Galerkin assembly) --------------------

struct TriquadEntry {
  double w_gain[27];
  double w_star[27];
  double mker;           // (1/2) dv^6 * w_omega(folded) * dv * |d.omega|
  std::int32_t off_j;
  std::int32_t off_gain; // origin = stencil corner (center - (1,1,1))
  std::int32_t off_star;
  std::int16_t i0[3];
  std::int16_t i1[3];
};

namespace detail {

// Lexicographically positive half-space of nonzero lattice offsets.
inline bool positive_half(int dx, int dy, int dz) {
  if (dx != 0) return dx > 0;
  if (dy != 0) return dy > 0;
  return dz > 0;
}

struct StencilAxes {
  int base[3];
  double frac[3];
};

inline StencilAxes linear_axes(const double y[3]) {
  StencilAxes s;
  for (int a = 0; a < 3; ++a) {
    s.base[a] = static_cast<int>(std::floor(y[a]));
    s.frac[a] = y[a] - s.base[a];
  }
  return s;
}

inline StencilAxes quadratic_axes(const double y[3]) {
  StencilAxes s;
  for (int a = 0; a < 3; ++a) {
    s.base[a] = static_cast<int>(std::floor(y[a] + 0.5));  // nearest node
    s.frac[a] = y[a] - s.base[a];                          // in [-1/2, 1/2]
  }
  return s;
}

}  // namespace detail

struct TableStats {
  std::size_t entries = 0;
  double kept_kernel_mass = 0.0;     // sum of kernel factors over retained entries
  double dropped_kernel_mass = 0.0;  // same sum over out-of-box entries
};

class TrilinearTable {
public:
  TrilinearTable(const VelocityGrid& grid, const AngularRule& rule)
      : n_(grid.n()), folded_(fold_antipodal(rule)), rule_name_(rule.name) {
    const int n = n_;
    for (int c = 0; c < 8; ++c) {
      const int cx = (c >> 2) & 1, cy = (c >> 1) & 1, cz = c & 1;
      corner_[c] = (cx * n + cy) * n + cz;
    }
    const double dv = grid.dv();
    const double w3 = grid.weight();
    for (int dx = -(n - 1); dx <= n - 1; ++dx)
      for (int dy = -(n - 1); dy <= n - 1; ++dy)
        for (int dz = -(n - 1); dz <= n - 1; ++dz) {
          if (!detail::positive_half(dx, dy, dz)) continue;
          const double d[3] = {double(dx), double(dy), double(dz)};
          for (std::size_t m = 0; m < folded_.size(); ++m) {
            const Vec3& om = folded_.node[m];
            const double g = d[0] * om.x + d[1] * om.y + d[2] * om.z;
            if (std::abs(g) < 1e-14) continue;  // grazing: zero kernel
            const double kb = w3 * folded_.weight[m] * dv * std::abs(g);
            const double y[3] = {g * om.x, g * om.y, g * om.z};
            const auto gs = detail::linear_axes(y);
            const double ys[3] = {-y[0], -y[1], -y[2]};
            const auto ss = detail::linear_axes(ys);

            TrilinearEntry e;
            bool ok = true;
            for (int a = 0; a < 3; ++a) {
              const int da = a == 0 ? dx : (a == 1 ? dy : dz);
              int lo = std::max(0, -da);
              int hi = std::min(n - 1, n - 1 - da);
              lo = std::max(lo, -gs.base[a]);
              hi = std::min(hi, n - 2 - gs.base[a]);
              lo = std::max(lo, -da - ss.base[a]);
              hi = std::min(hi, n - 2 - da - ss.base[a]);
              if (lo > hi) ok = false;
              e.i0[a] = static_cast<std::int16_t>(lo);
              e.i1[a] = static_cast<std::int16_t>(hi + 1);
            }
            if (!ok) {
              stats_.dropped_kernel_mass += kb;
              continue;
            }
            for (int c = 0; c < 8; ++c) {
              double wg = 1.0, wsn = 1.0;
              for (int a = 0; a < 3; ++a) {
                const bool hi = (c >> (2 - a)) & 1;
                wg *= hi ? gs.frac[a] : 1.0 - gs.frac[a];
                wsn *= hi ? ss.frac[a] : 1.0 - ss.frac[a];
              }
              e.w_gain[c] = wg;
              e.w_star[c] = wsn;
            }
            e.bker = kb;
            e.off_j = (dx * n + dy) * n + dz;
            e.off_gain = (gs.base[0] * n + gs.base[1]) * n + gs.base[2];
            e.off_star = e.off_j + (ss.base[0] * n + ss.base[1]) * n + ss.base[2];
            entries_.push_back(e);
            stats_.kept_kernel_mass += kb;
          }
        }
    stats_.entries = entries_.size();
  }

  int n() const { return n_; }
  const std::vector<TrilinearEntry>& entries() const { return entries_; }
  const std::int32_t* corner_offsets() const { return corner_; }
  const AngularRule& folded_rule() const { return folded_; }
  const std::string& rule_name() const { return rule_name_; }
  const TableStats& stats() const { return stats_; }

private:
  int n_;
  AngularRule folded_;
  std::string rule_name_;
  std::vector<TrilinearEntry> entries_;
  std::int32_t corner_[8];
  TableStats stats_;
};

class TriquadTable {
public:
  TriquadTable(const VelocityGrid& grid, const AngularRule& rule)
      : n_(grid.n()), folded_(fold_antipodal(rule)), rule_name_(rule.name) {
    const int n = n_;
    for (int c = 0; c < 27; ++c) {
      const int cx = c / 9, cy = (c / 3) % 3, cz = c % 3;
      corner_[c] = (cx * n + cy) * n + cz;
    }
    const double dv = grid.dv();
    const double w3 = grid.weight();
    for (int dx = -(n - 1); dx <= n - 1; ++dx)
      for (int dy = -(n - 1); dy <= n - 1; ++dy)
        for (int dz = -(n - 1); dz <= n - 1; ++dz) {
          if (!detail::positive_half(dx, dy, dz)) continue;
          const double d[3] = {double(dx), double(dy), double(dz)};
          for (std::size_t m = 0; m < folded_.size(); ++m) {
            const Vec3& om = folded_.node[m];
            const double g = d[0] * om.x + d[1] * om.y + d[2] * om.z;
            if (std::abs(g) < 1e-14) continue;
            const double mk = 0.5 * w3 * w3 * folded_.weight[m] * dv * std::abs(g);
            const double y[3] = {g * om.x, g * om.y, g * om.z};
            const auto gs = detail::quadratic_axes(y);
            const double ys[3] = {-y[0], -y[1], -y[2]};
            const auto ss = detail::quadratic_axes(ys);

            TriquadEntry e;
            bool ok = true;
            for (int a = 0; a < 3; ++a) {
              const int da = a == 0 ? dx : (a == 1 ? dy : dz);
              int lo = std::max(0, -da);
              int hi = std::min(n - 1, n - 1 - da);
              lo = std::max(lo, 1 - gs.base[a]);
              hi = std::min(hi, n - 2 - gs.base[a]);
              lo = std::max(lo, 1 - da - ss.base[a]);
              hi = std::min(hi, n - 2 - da - ss.base[a]);
              if (lo > hi) ok = false;
              e.i0[a] = static_cast<std::int16_t>(lo);
              e.i1[a] = static_cast<std::int16_t>(hi + 1);
            }
            if (!ok) {
              stats_.dropped_kernel_mass += mk;
              continue;
            }
            for (int c = 0; c < 27; ++c) {
              const int cc[3] = {c / 9, (c / 3) % 3, c % 3};
              double wg = 1.0, wsn = 1.0;
              for (int a = 0; a < 3; ++a) {
                const double t = gs.frac[a];
                const double ts = ss.frac[a];
                const double lg[3] = {0.5 * t * (t - 1.0), 1.0 - t * t, 0.5 * t * (t + 1.0)};
                const double ls[3] = {0.5 * ts * (ts - 1.0), 1.0 - ts * ts,
                                      0.5 * ts * (ts + 1.0)};
                wg *= lg[cc[a]];
                wsn *= ls[cc[a]];
              }
              e.w_gain[c] = wg;
              e.w_star[c] = wsn;
            }
            e.mker = mk;
            e.off_j = (dx * n + dy) * n + dz;
            e.off_gain = ((gs.base[0] - 1) * n + (gs.base[1] - 1)) * n + (gs.base[2] - 1);
            e.off_star = e.off_j + ((ss.base[0] - 1) * n + (ss.base[1] - 1)) * n + (ss.base[2] - 1);
            entries_.push_back(e);
            stats_.kept_kernel_mass += mk;
          }
        }
    stats_.entries = entries_.size();
  }

  int n() const { return n_; }
  const std::vector<TriquadEntry>& entries() const { return entries_; }
  const std::int32_t* corner_offsets() const { return corner_; }
  const AngularRule& folded_rule() const { return folded_; }
  const std::string& rule_name() const { return rule_name_; }
  const TableStats& stats() const { return stats_; }

private:
  int n_;
  AngularRule folded_;
  std::string rule_name_;
  std::vector<TriquadEntry> entries_;
  std::int32_t corner_[27];
  TableStats stats_;
};

}  // namespace kinfluid
