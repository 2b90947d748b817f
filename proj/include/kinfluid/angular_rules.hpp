#pragma once
// Quadrature rules on the unit sphere for the collision-kernel angle.
// All rules integrate 1 to exactly 4*pi.  Because the collision map
// (v, v*, omega) -> (v', v*') is invariant under omega -> -omega, antipodal
// node pairs are folded into half the nodes with doubled weights before the
// expensive tables are built.

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "kinfluid/common.hpp"
#include "kinfluid/velocity_grid.hpp"

namespace kinfluid {

struct AngularRule {
  std::string name;
  std::vector<Vec3> node;
  std::vector<double> weight;  // sums to 4*pi

  std::size_t size() const { return node.size(); }

  double weight_sum() const {
    double s = 0.0;
    for (double w : weight) s += w;
    return s;
  }
};

// 6 axis directions, weight 4*pi/6: exact through degree 3.
inline AngularRule octahedron_rule() {
  AngularRule r;
  r.name = "octahedron6";
  const double w = 4.0 * std::numbers::pi / 6.0;
  for (int a = 0; a < 3; ++a)
    for (int s : {1, -1}) {
      Vec3 v{0, 0, 0};
      v[a] = static_cast<double>(s);
      r.node.push_back(v);
      r.weight.push_back(w);
    }
  return r;
}

// Classic 26-point rule (octahedron vertices + edge midpoints + cube
// corners), exact through degree 7.  This is the default collision rule.
inline AngularRule lebedev26_rule() {
  AngularRule r;
  r.name = "lebedev26";
  const double fourpi = 4.0 * std::numbers::pi;
  const double wa = fourpi / 21.0;        // 6 axis points
  const double wb = fourpi * 4.0 / 105.0; // 12 edge midpoints
  const double wc = fourpi * 27.0 / 840.0;// 8 corners
  for (int a = 0; a < 3; ++a)
    for (int s : {1, -1}) {
      Vec3 v{0, 0, 0};
      v[a] = static_cast<double>(s);
      r.node.push_back(v);
      r.weight.push_back(wa);
    }
  const double h = 1.0 / std::sqrt(2.0);
  for (int a = 0; a < 3; ++a) {
    const int b = (a + 1) % 3;
    for (int sa : {1, -1})
      for (int sb : {1, -1}) {
        Vec3 v{0, 0, 0};
        v[a] = sa * h;
        v[b] = sb * h;
        r.node.push_back(v);
        r.weight.push_back(wb);
      }
  }
  const double c = 1.0 / std::sqrt(3.0);
  for (int sx : {1, -1})
    for (int sy : {1, -1})
      for (int sz : {1, -1}) {
        r.node.push_back({sx * c, sy * c, sz * c});
        r.weight.push_back(wc);
      }
  return r;
}

namespace detail {
// Gauss-Legendre nodes/weights on [-1, 1] by Newton on the Legendre
// recurrence; plenty for the small orders used here.
inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.resize(n);
  w.resize(n);
  for (int i = 0; i < n; ++i) {
    double t = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = t;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      const double dp = n * (t * p1 - p0) / (t * t - 1.0);
      const double dt = p1 / dp;
      t -= dt;
      if (std::abs(dt) < 1e-15) {
        x[i] = t;
        w[i] = 2.0 / ((1.0 - t * t) * dp * dp);
        break;
      }
    }
  }
}
}  // namespace detail

// Tensor rule: Gauss-Legendre in cos(polar) x uniform in azimuth.
// Degree grows with the counts; used for convergence studies and for the
// transport-grade operator assembly.
inline AngularRule product_gauss_rule(int n_polar, int n_azimuth) {
  KF_REQUIRE(n_polar >= 1 && n_azimuth >= 2, "product rule needs n_polar>=1, n_azimuth>=2");
  AngularRule r;
  r.name = "product_gauss_" + std::to_string(n_polar) + "x" + std::to_string(n_azimuth);
  std::vector<double> mu, wmu;
  detail::gauss_legendre(n_polar, mu, wmu);
  const double dphi = 2.0 * std::numbers::pi / n_azimuth;
  for (int i = 0; i < n_polar; ++i) {
    const double s = std::sqrt(std::max(0.0, 1.0 - mu[i] * mu[i]));
    for (int j = 0; j < n_azimuth; ++j) {
      const double phi = dphi * (j + 0.5);
      r.node.push_back({s * std::cos(phi), s * std::sin(phi), mu[i]});
      r.weight.push_back(wmu[i] * dphi);
    }
  }
  return r;
}

// Collapse antipodal pairs: one representative per pair with doubled weight.
// Nodes without an exact antipode are kept as-is.
inline AngularRule fold_antipodal(const AngularRule& rule) {
  AngularRule out;
  out.name = rule.name + "/folded";
  std::vector<bool> used(rule.size(), false);
  for (std::size_t i = 0; i < rule.size(); ++i) {
    if (used[i]) continue;
    used[i] = true;
    double w = rule.weight[i];
    for (std::size_t j = i + 1; j < rule.size(); ++j) {
      if (used[j]) continue;
      const Vec3 d = rule.node[i] + rule.node[j];
      if (norm2(d) < 1e-24 && std::abs(rule.weight[i] - rule.weight[j]) < 1e-15) {
        used[j] = true;
        w += rule.weight[j];
        break;
      }
    }
    out.node.push_back(rule.node[i]);
    out.weight.push_back(w);
  }
  return out;
}

inline AngularRule make_angular_rule(const std::string& spec) {
  if (spec == "lebedev26") return lebedev26_rule();
  if (spec == "octahedron6") return octahedron_rule();
  if (spec.rfind("product_gauss_", 0) == 0) {
    const std::string counts = spec.substr(14);
    const auto xpos = counts.find('x');
    KF_REQUIRE(xpos != std::string::npos, "product rule spec must look like product_gauss_4x8");
    return product_gauss_rule(std::stoi(counts.substr(0, xpos)),
                              std::stoi(counts.substr(xpos + 1)));
  }
  throw config_error("unknown angular rule: " + spec);
}

}  // namespace kinfluid
