#pragma once

// Linearized collision operator L about a Maxwellian M, realized as a
// symmetric Galerkin form in the L^2(dv/M) inner product.
//
// The bilinear form is the standard symmetrized collision pairing
//   a(phi, psi) = 1/4 sum B M M* [Dphi][Dpsi],   Dphi = phi' + phi*' - phi - phi*
// with phi = g/M, discretized on the unordered-pair direction table with
// triquadratic interpolation at the post-collision points.  Quadratic
// polynomials are reproduced exactly by the stencils and the collision
// identities are exact, so every table entry annihilates span{1, v, |v|^2}
// termwise: the discrete operator is symmetric positive semidefinite with a
// machine-exact five-dimensional kernel, by construction rather than by
// tolerance.
//
// Internally everything runs in "hat" coordinates ghat = g sqrt(w/M), where
// the L^2(dv/M) inner product becomes the Euclidean dot product and the
// operator becomes an explicitly symmetric matrix
//   Ahat = sum_entries mker (M Mstar) Shat Shat^T,
// applied matrix-free from the pooled stencil table.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cstdint>
#include <memory>
#include <random>
#include <vector>

#include "kinfluid/collision.hpp"
#include "kinfluid/collision_quadrature.hpp"
#include "kinfluid/maxwell.hpp"
#include "kinfluid/velocity_grid.hpp"

namespace kinfluid {

struct SolveInfo {
  double removed_component = 0.0;  // Euclidean size of the kernel part of rhs
  int iterations = 0;
  double relative_residual = 0.0;
};

struct CoercivityReport {
  double delta0 = 0.0;       // min over ker-perp of <L g, g>/<nu g, g>
  double error_bound = 0.0;  // Lanczos residual bound on delta0
  int iterations = 0;
  MaxwellParams params;
  int n_per_axis = 0;
  double vmax = 0.0;
};

class LinearizedOperator {
public:
  LinearizedOperator(const VelocityGrid& grid, std::shared_ptr<const TriquadTable> table,
                     const MaxwellParams& p,
                     const AngularRule& nu_rule = lebedev26_rule())
      : grid_(&grid), table_(std::move(table)), params_(p) {
    KF_REQUIRE(table_ != nullptr, "linearized operator needs a quadrature table");
    KF_REQUIRE(table_->n() == grid.n(), "quadrature table and grid disagree on N_v");
    require(p.rho > 0.0 && p.theta > 0.0, "linearization Maxwellian needs rho, theta > 0");

    M_ = maxwellian_field(grid, p);
    const double w = grid.weight();
    inv_sqrt_wM_.resize(M_.size());
    for (std::size_t a = 0; a < M_.size(); ++a) inv_sqrt_wM_[a] = 1.0 / std::sqrt(w * M_[a]);

    nu_ = nu_field(grid, nu_rule, p);

    build_stencils();
    build_kernel_basis();
  }

  const VelocityGrid& grid() const { return *grid_; }
  const MaxwellParams& params() const { return params_; }
  const std::vector<double>& nu() const { return nu_; }
  // Collision-frequency weight assembled from exactly the kept quadrature
  // entries: twice the Galerkin diagonal, i.e. the total event rate carried
  // by the node across all of its roles (in/out state, interpolation target).
  // Its support matches the form's reachable set exactly — a node has
  // nu_form = 0 iff its operator row is identically zero — so the coercivity
  // quotient stays meaningful out to the tail, where the full-rule nu would
  // overweight couplings the truncated form no longer carries.  On resolved
  // nodes it is uniformly equivalent to the classic collision frequency.
  const std::vector<double>& nu_form() const { return nu_form_; }
  std::size_t inactive_nodes() const { return inactive_; }  // nodes with no kept coupling
  const std::array<std::vector<double>, 5>& kernel_hat() const { return khat_; }

  // ---- representation changes ------------------------------------------
  std::vector<double> to_hat(const std::vector<double>& g) const {
    KF_REQUIRE(g.size() == M_.size(), "profile has wrong grid size");
    std::vector<double> out(g.size());
    const double w = grid_->weight();
    for (std::size_t a = 0; a < g.size(); ++a) out[a] = g[a] * w * inv_sqrt_wM_[a];
    return out;  // g sqrt(w/M) = g w / sqrt(w M)
  }
  std::vector<double> from_hat(const std::vector<double>& ghat) const {
    KF_REQUIRE(ghat.size() == M_.size(), "profile has wrong grid size");
    std::vector<double> out(ghat.size());
    const double w = grid_->weight();
    for (std::size_t a = 0; a < ghat.size(); ++a) out[a] = ghat[a] / (w * inv_sqrt_wM_[a]);
    return out;
  }

  // ---- matrix-free applies ----------------------------------------------
  // Ahat u: symmetric PSD, kernel = span(khat).
  std::vector<double> apply_hat(const std::vector<double>& u) const {
    KF_REQUIRE(u.size() == M_.size(), "profile has wrong grid size");
    const int n = grid_->n();
    const std::size_t nv = M_.size();
    std::vector<double> ut(nv), z(nv, 0.0);
    for (std::size_t a = 0; a < nv; ++a) ut[a] = u[a] * inv_sqrt_wM_[a];

    std::vector<double> delta(n), s(n);
    const double* Mf = M_.data();
    for (const auto& e : entries_) {
      const std::int32_t* offs = &pool_off_[e.start];
      const double* wts = &pool_w_[e.start];
      const int cnt = e.count;
      for (int ix = e.i0[0]; ix < e.i1[0]; ++ix) {
        for (int iy = e.i0[1]; iy < e.i1[1]; ++iy) {
          const std::size_t a0 = (static_cast<std::size_t>(ix) * n + iy) * n + e.i0[2];
          const int len = e.i1[2] - e.i0[2];
          double* dl = delta.data();
          for (int k = 0; k < len; ++k) dl[k] = 0.0;
          for (int pqi = 0; pqi < cnt; ++pqi) {
            const double wp = wts[pqi];
            const double* up = &ut[a0 + offs[pqi]];
            for (int k = 0; k < len; ++k) dl[k] += wp * up[k];
          }
          const double* Ma = &Mf[a0];
          const double* Mb = &Mf[a0 + e.off_j];
          const double mk = e.mker;
          double* sl = s.data();
          for (int k = 0; k < len; ++k) sl[k] = mk * Ma[k] * Mb[k] * dl[k];
          for (int pqi = 0; pqi < cnt; ++pqi) {
            const double wp = wts[pqi];
            double* zp = &z[a0 + offs[pqi]];
            for (int k = 0; k < len; ++k) zp[k] += wp * sl[k];
          }
        }
      }
    }
    for (std::size_t a = 0; a < nv; ++a) z[a] *= inv_sqrt_wM_[a];
    return z;
  }

  // L g in plain node values (deviation profiles).
  std::vector<double> apply(const std::vector<double>& g) const {
    return from_hat(apply_hat(to_hat(g)));
  }

  // K g = nu g - L g (the definitional splitting of L into nu Id - K).
  std::vector<double> apply_K(const std::vector<double>& g) const {
    auto out = apply(g);
    for (std::size_t a = 0; a < out.size(); ++a) out[a] = nu_[a] * g[a] - out[a];
    return out;
  }

  // ---- kernel handling ----------------------------------------------------
  // Remove the span(khat) component (two passes); returns its Euclidean size.
  double project_out_kernel_hat(std::vector<double>& u) const {
    double removed2 = 0.0;
    for (int pass = 0; pass < 2; ++pass) {
      for (int k = 0; k < 5; ++k) {
        const auto& b = khat_[k];
        double c = 0.0;
        for (std::size_t a = 0; a < u.size(); ++a) c += b[a] * u[a];
        for (std::size_t a = 0; a < u.size(); ++a) u[a] -= c * b[a];
        if (pass == 0) removed2 += c * c;
      }
    }
    return std::sqrt(removed2);
  }

  // ---- constrained solve --------------------------------------------------
  // Solve Ahat x = P rhs_hat with x in ker-perp, by preconditioned CG with
  // per-iteration kernel projection (diagonal nu preconditioner).
  std::vector<double> solve_hat(std::vector<double> rhs, double tol = 1e-12,
                                SolveInfo* info = nullptr, int max_iter = 800) const {
    KF_REQUIRE(rhs.size() == M_.size(), "profile has wrong grid size");
    SolveInfo local;
    local.removed_component = project_out_kernel_hat(rhs);

    const std::size_t nv = rhs.size();
    double rhs_norm = 0.0;
    for (double v : rhs) rhs_norm += v * v;
    rhs_norm = std::sqrt(rhs_norm);
    std::vector<double> x(nv, 0.0);
    if (rhs_norm == 0.0) {
      if (info) *info = local;
      return x;
    }

    std::vector<double> r = rhs, z(nv), p(nv), q;
    auto precond = [&](const std::vector<double>& in, std::vector<double>& out) {
      for (std::size_t a = 0; a < nv; ++a) out[a] = in[a] / nu_[a];
      project_out_kernel_hat(out);
    };
    precond(r, z);
    p = z;
    double rz = 0.0;
    for (std::size_t a = 0; a < nv; ++a) rz += r[a] * z[a];

    double rel = 1.0;
    int it = 0;
    for (; it < max_iter; ++it) {
      q = apply_hat(p);
      project_out_kernel_hat(q);
      double pq = 0.0;
      for (std::size_t a = 0; a < nv; ++a) pq += p[a] * q[a];
      KF_REQUIRE(pq > 0.0, "constrained solve: curvature lost (operator not PD on ker-perp)");
      const double alpha = rz / pq;
      double rn2 = 0.0;
      for (std::size_t a = 0; a < nv; ++a) {
        x[a] += alpha * p[a];
        r[a] -= alpha * q[a];
        rn2 += r[a] * r[a];
      }
      rel = std::sqrt(rn2) / rhs_norm;
      if (rel <= tol) {
        ++it;
        break;
      }
      precond(r, z);
      double rz_next = 0.0;
      for (std::size_t a = 0; a < nv; ++a) rz_next += r[a] * z[a];
      const double beta = rz_next / rz;
      rz = rz_next;
      for (std::size_t a = 0; a < nv; ++a) p[a] = z[a] + beta * p[a];
    }
    KF_REQUIRE(rel <= std::max(tol, 1e-9),
               "constrained solve did not converge: residual " + std::to_string(rel));
    project_out_kernel_hat(x);
    local.iterations = it;
    local.relative_residual = rel;
    if (info) *info = local;
    return x;
  }

  // Plain-representation wrapper: returns g in ker-perp with L g = P1 rhs.
  std::vector<double> solve(const std::vector<double>& rhs, double tol = 1e-12,
                            SolveInfo* info = nullptr) const {
    return from_hat(solve_hat(to_hat(rhs), tol, info));
  }

  // ---- coercivity ----------------------------------------------------------
  // Smallest generalized eigenvalue of (Ahat, diag(nu_form)) on ker-perp, via
  // Lanczos with full reorthogonalization on the symmetrized, deflated
  // operator C = D^{-1/2} Ahat D^{-1/2} + shift (P P^T + dead-node mask),
  // D = diag(nu_form).  Nodes with no kept coupling carry neither quadratic
  // form nor Gram weight and are masked out of the eigenproblem.
  CoercivityReport coercivity_probe(int max_iter = 240, double tol = 1e-7,
                                    std::uint64_t seed = fnv1a64("coercivity-probe")) const {
    const std::size_t nv = M_.size();
    std::vector<double> sq_nu(nv), isq_nu(nv);
    std::vector<unsigned char> dead(nv, 0);
    for (std::size_t a = 0; a < nv; ++a) {
      if (nu_form_[a] > 0.0) {
        sq_nu[a] = std::sqrt(nu_form_[a]);
        isq_nu[a] = 1.0 / sq_nu[a];
      } else {
        sq_nu[a] = isq_nu[a] = 0.0;
        dead[a] = 1;
      }
    }
    // Deflation basis: orthonormalized D^{1/2} khat.
    std::array<std::vector<double>, 5> P;
    {
      Eigen::Matrix<double, 5, 5> gram;
      for (int k = 0; k < 5; ++k) {
        P[k].resize(nv);
        for (std::size_t a = 0; a < nv; ++a) P[k][a] = sq_nu[a] * khat_[k][a];
      }
      for (int k = 0; k < 5; ++k)
        for (int l = 0; l <= k; ++l) {
          double s = 0.0;
          for (std::size_t a = 0; a < nv; ++a) s += P[k][a] * P[l][a];
          gram(k, l) = gram(l, k) = s;
        }
      const Eigen::LLT<Eigen::Matrix<double, 5, 5>> llt(gram);
      KF_REQUIRE(llt.info() == Eigen::Success, "coercivity: deflation basis degenerate");
      const Eigen::Matrix<double, 5, 5> Linv =
          llt.matrixL().solve(Eigen::Matrix<double, 5, 5>::Identity());
      // Ptilde_k = sum_l Linv(k,l) P_l  gives an orthonormal set.
      std::array<std::vector<double>, 5> Pt;
      for (int k = 0; k < 5; ++k) {
        Pt[k].assign(nv, 0.0);
        for (int l = 0; l <= k; ++l) {
          const double c = Linv(k, l);
          for (std::size_t a = 0; a < nv; ++a) Pt[k][a] += c * P[l][a];
        }
      }
      P = std::move(Pt);
    }
    auto project_out_P = [&](std::vector<double>& u) {
      for (int pass = 0; pass < 2; ++pass)
        for (int k = 0; k < 5; ++k) {
          double c = 0.0;
          for (std::size_t a = 0; a < nv; ++a) c += P[k][a] * u[a];
          for (std::size_t a = 0; a < nv; ++a) u[a] -= c * P[k][a];
        }
    };
    const double shift = 4.0;  // above ||C||; keeps deflated directions away
    auto apply_C = [&](const std::vector<double>& u) {
      std::vector<double> t(nv);
      for (std::size_t a = 0; a < nv; ++a) t[a] = isq_nu[a] * u[a];
      t = apply_hat(t);
      for (std::size_t a = 0; a < nv; ++a) t[a] *= isq_nu[a];
      for (int k = 0; k < 5; ++k) {
        double c = 0.0;
        for (std::size_t a = 0; a < nv; ++a) c += P[k][a] * u[a];
        for (std::size_t a = 0; a < nv; ++a) t[a] += shift * c * P[k][a];
      }
      for (std::size_t a = 0; a < nv; ++a)
        if (dead[a]) t[a] += shift * u[a];
      return t;
    };

    // Lanczos with full reorthogonalization.
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<std::vector<double>> V;
    std::vector<double> alpha, beta;  // tridiagonal entries
    std::vector<double> v(nv);
    for (auto& x : v) x = gauss(rng);
    project_out_P(v);
    {
      double nrm = 0.0;
      for (double x : v) nrm += x * x;
      nrm = std::sqrt(nrm);
      for (auto& x : v) x /= nrm;
    }
    V.push_back(v);

    CoercivityReport rep;
    rep.params = params_;
    rep.n_per_axis = grid_->n();
    rep.vmax = grid_->vmax();

    double ritz = 0.0, bound = 1e300;
    Eigen::VectorXd evec;
    for (int m = 0; m < max_iter; ++m) {
      auto wv = apply_C(V.back());
      project_out_P(wv);
      double am = 0.0;
      for (std::size_t a = 0; a < nv; ++a) am += V.back()[a] * wv[a];
      alpha.push_back(am);
      // full reorthogonalization, two passes
      for (int pass = 0; pass < 2; ++pass)
        for (const auto& vj : V) {
          double c = 0.0;
          for (std::size_t a = 0; a < nv; ++a) c += vj[a] * wv[a];
          for (std::size_t a = 0; a < nv; ++a) wv[a] -= c * vj[a];
        }
      double b = 0.0;
      for (double x : wv) b += x * x;
      b = std::sqrt(b);

      // Ritz values of the current tridiagonal matrix.
      const int msz = static_cast<int>(alpha.size());
      Eigen::MatrixXd T = Eigen::MatrixXd::Zero(msz, msz);
      for (int i = 0; i < msz; ++i) {
        T(i, i) = alpha[i];
        if (i + 1 < msz) T(i, i + 1) = T(i + 1, i) = beta[i];
      }
      const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
      int imin = 0;
      es.eigenvalues().minCoeff(&imin);
      ritz = es.eigenvalues()(imin);
      bound = b * std::abs(es.eigenvectors()(msz - 1, imin));
      rep.iterations = msz;
      if (bound <= tol * std::max(ritz, 1e-30) || b <= 1e-13) break;
      if (m + 1 >= max_iter) break;

      beta.push_back(b);
      for (auto& x : wv) x /= b;
      V.push_back(std::move(wv));
    }
    rep.delta0 = ritz;
    rep.error_bound = bound;
    KF_REQUIRE(rep.delta0 > 0.0, "coercivity probe returned a nonpositive estimate");
    return rep;
  }

  // ---- dense assembly (small grids; unit-test oracle) ----------------------
  Eigen::MatrixXd dense_hat() const {
    const int n = grid_->n();
    KF_REQUIRE(n <= 12, "dense assembly exceeds the memory guard (N_v <= 12)");
    const std::size_t nv = M_.size();
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(nv, nv);
    std::vector<double> shat(64);
    std::vector<std::int64_t> node(64);
    for (const auto& e : entries_) {
      const std::int32_t* offs = &pool_off_[e.start];
      const double* wts = &pool_w_[e.start];
      const int cnt = e.count;
      for (int ix = e.i0[0]; ix < e.i1[0]; ++ix)
        for (int iy = e.i0[1]; iy < e.i1[1]; ++iy)
          for (int iz = e.i0[2]; iz < e.i1[2]; ++iz) {
            const std::size_t a0 = (static_cast<std::size_t>(ix) * n + iy) * n + iz;
            const double mk = e.mker * M_[a0] * M_[a0 + e.off_j];
            for (int c = 0; c < cnt; ++c) {
              node[c] = static_cast<std::int64_t>(a0) + offs[c];
              shat[c] = wts[c] * inv_sqrt_wM_[node[c]];
            }
            for (int c = 0; c < cnt; ++c)
              for (int d = 0; d < cnt; ++d) A(node[c], node[d]) += mk * shat[c] * shat[d];
          }
    }
    return A;
  }

private:
  struct Entry {
    double mker;
    std::int32_t off_j;
    std::int32_t start;
    std::int32_t count;
    std::int16_t i0[3], i1[3];
  };

  void build_stencils() {
    const int n = grid_->n();
    nu_form_.assign(M_.size(), 0.0);
    entries_.reserve(table_->entries().size());
    std::array<std::pair<std::int32_t, double>, 56> buf;
    std::vector<double> f(n);
    for (const auto& te : table_->entries()) {
      int cnt = 0;
      buf[cnt++] = {0, -1.0};
      buf[cnt++] = {te.off_j, -1.0};
      for (int c = 0; c < 27; ++c) {
        const std::int32_t cc = ((c / 9) * n + (c / 3) % 3) * n + c % 3;
        if (te.w_gain[c] != 0.0) buf[cnt++] = {te.off_gain + cc, te.w_gain[c]};
        if (te.w_star[c] != 0.0) buf[cnt++] = {te.off_star + cc, te.w_star[c]};
      }
      std::sort(buf.begin(), buf.begin() + cnt,
                [](const auto& x, const auto& y) { return x.first < y.first; });
      // merge coincident offsets, drop cancellations
      Entry e;
      e.mker = te.mker;
      e.off_j = te.off_j;
      e.start = static_cast<std::int32_t>(pool_off_.size());
      int kept = 0;
      for (int i = 0; i < cnt;) {
        int j = i;
        double wsum = 0.0;
        while (j < cnt && buf[j].first == buf[i].first) wsum += buf[j++].second;
        if (std::abs(wsum) > 1e-14) {
          pool_off_.push_back(buf[i].first);
          pool_w_.push_back(wsum);
          ++kept;
        }
        i = j;
      }
      if (kept == 0) {
        continue;  // head-on swap: the form contribution vanishes identically
      }
      e.count = kept;
      for (int a = 0; a < 3; ++a) {
        e.i0[a] = te.i0[a];
        e.i1[a] = te.i1[a];
      }
      entries_.push_back(e);
      // form-consistent weight: nu_form[c] += 2 mker M_a M_b w_c^2 / (w M_c)
      // over the same kept triples and deduplicated stencil (2x the Galerkin
      // diagonal).
      for (int ix = te.i0[0]; ix < te.i1[0]; ++ix)
        for (int iy = te.i0[1]; iy < te.i1[1]; ++iy) {
          const std::size_t a0 =
              (static_cast<std::size_t>(ix) * n + iy) * n + te.i0[2];
          const int len = te.i1[2] - te.i0[2];
          for (int k = 0; k < len; ++k)
            f[k] = 2.0 * te.mker * M_[a0 + k] * M_[a0 + te.off_j + k];
          for (int pqi = 0; pqi < e.count; ++pqi) {
            const std::int32_t op = pool_off_[e.start + pqi];
            const double wp2 = sq(pool_w_[e.start + pqi]);
            double* nf = &nu_form_[a0 + op];
            const double* iw = &inv_sqrt_wM_[a0 + op];
            for (int k = 0; k < len; ++k) nf[k] += f[k] * wp2 * iw[k] * iw[k];
          }
        }
    }
    inactive_ = 0;
    for (double x : nu_form_)
      if (x == 0.0) ++inactive_;
  }

  void build_kernel_basis() {
    const std::size_t nv = M_.size();
    const double w = grid_->weight();
    // raw invariants 1, c, |c|^2 (c = v - u), in hat coordinates sqrt(wM) p
    std::array<std::vector<double>, 5> raw;
    for (auto& r : raw) r.resize(nv);
    for (std::size_t a = 0; a < nv; ++a) {
      const Vec3 c = grid_->node(a) - params_.u;
      const double s = std::sqrt(w * M_[a]);
      raw[0][a] = s;
      raw[1][a] = s * c.x;
      raw[2][a] = s * c.y;
      raw[3][a] = s * c.z;
      raw[4][a] = s * norm2(c);
    }
    Eigen::Matrix<double, 5, 5> gram;
    for (int k = 0; k < 5; ++k)
      for (int l = 0; l <= k; ++l) {
        double s = 0.0;
        for (std::size_t a = 0; a < nv; ++a) s += raw[k][a] * raw[l][a];
        gram(k, l) = gram(l, k) = s;
      }
    const Eigen::LLT<Eigen::Matrix<double, 5, 5>> llt(gram);
    KF_REQUIRE(llt.info() == Eigen::Success, "kernel basis Gram not positive definite");
    const Eigen::Matrix<double, 5, 5> Linv =
        llt.matrixL().solve(Eigen::Matrix<double, 5, 5>::Identity());
    for (int k = 0; k < 5; ++k) {
      khat_[k].assign(nv, 0.0);
      for (int l = 0; l <= k; ++l) {
        const double c = Linv(k, l);
        for (std::size_t a = 0; a < nv; ++a) khat_[k][a] += c * raw[l][a];
      }
    }
  }

  const VelocityGrid* grid_;
  std::shared_ptr<const TriquadTable> table_;
  MaxwellParams params_;
  std::size_t inactive_ = 0;
  std::vector<double> M_, inv_sqrt_wM_, nu_, nu_form_;
  std::array<std::vector<double>, 5> khat_;
  std::vector<Entry> entries_;
  std::vector<std::int32_t> pool_off_;
  std::vector<double> pool_w_;
};

}  // namespace kinfluid
