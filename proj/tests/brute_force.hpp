#pragma once

// Independent cross-check of the channel coupling matrices.  The
// recoupled expression in the library is bypassed entirely: every
// channel |(j_el l) J M> is expanded into uncoupled products, the
// scalar contraction sum_q (-1)^q T_kq C_k,-q is evaluated with
// electronic matrix elements taken from the explicit product-space
// tensors and angular ones from Gauss-Legendre quadrature of spherical
// harmonics, and the double sum over magnetic quantum numbers is done
// in full.  No 6j or 9j symbol appears anywhere in this path.

#include <array>
#include <cmath>
#include <map>
#include <tuple>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include "lndimer/angmom.hpp"
#include "lndimer/rovib.hpp"
#include "lndimer/spintensor.hpp"

namespace brute {

// Gauss-Legendre nodes and weights on [-1, 1].
struct quad_rule {
  std::vector<double> x, w;
};

inline quad_rule gauss_legendre(int n) {
  quad_rule q;
  q.x.assign(n, 0.0);
  q.w.assign(n, 0.0);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = 1.0, p2 = 0.0;
      for (int k = 0; k < n; ++k) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * k + 1.0) * z * p2 - k * p3) / (k + 1.0);
      }
      pp = n * (z * p1 - p2) / (z * z - 1.0);
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) < 1e-15) break;
    }
    q.x[i] = -z;
    q.x[n - 1 - i] = z;
    q.w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
    q.w[n - 1 - i] = q.w[i];
  }
  return q;
}

// Y_lm(theta, 0), real, with the Condon-Shortley phase; negative m via
// Y_{l,-m}(theta, 0) = (-1)^m Y_{l,m}(theta, 0).
inline double ylm0(int l, int m, double theta) {
  const int am = std::abs(m);
  if (am > l) return 0.0;
  double v = std::sph_legendre(static_cast<unsigned>(l), static_cast<unsigned>(am), theta);
  if (m < 0 && am % 2 != 0) v = -v;
  return v;
}

// <l' m'|C_kq|l m> from quadrature of the triple product of spherical
// harmonics (the integrand is a polynomial in cos theta, so 64 nodes
// are exact for the ranks used here).
class c_table {
 public:
  double operator()(int lp, int mp, int k, int q, int l, int m) {
    if (mp != m + q || std::abs(mp) > lp || std::abs(m) > l || std::abs(q) > k) return 0.0;
    const auto key = std::make_tuple(lp, mp, k, q, l, m);
    if (const auto it = cache_.find(key); it != cache_.end()) return it->second;
    double s = 0.0;
    for (std::size_t i = 0; i < rule_.x.size(); ++i) {
      const double theta = std::acos(rule_.x[i]);
      s += rule_.w[i] * ylm0(lp, mp, theta) * ylm0(k, q, theta) * ylm0(l, m, theta);
    }
    s *= 2.0 * M_PI * std::sqrt(4.0 * M_PI / (2.0 * k + 1.0));
    cache_.emplace(key, s);
    return s;
  }

 private:
  quad_rule rule_ = gauss_legendre(64);
  std::map<std::tuple<int, int, int, int, int, int>, double> cache_;
};

// All spherical components of the seven strength operators on the
// product space, mirroring the q = 0 construction of the library.
inline std::array<lndimer::spintensor::detail::tensor_op, 7> pair_components(int two_j) {
  using lndimer::spintensor::detail::couple;
  using lndimer::spintensor::detail::j_tensor;
  using lndimer::spintensor::detail::tensor_op;
  const int dim = two_j + 1;
  const auto j1 = j_tensor(two_j);
  const auto quad = couple(j1, j1, 2);
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(dim, dim);

  const auto couple_pair = [&](const tensor_op& a, const tensor_op& b, int k) {
    tensor_op t;
    t.rank = k;
    t.comp.assign(2 * k + 1, Eigen::MatrixXd::Zero(dim * dim, dim * dim));
    for (int q = -k; q <= k; ++q)
      for (int qa = -a.rank; qa <= a.rank; ++qa) {
        const int qb = q - qa;
        if (std::abs(qb) > b.rank) continue;
        const double cg = lndimer::angmom::clebsch_gordan(2 * a.rank, 2 * qa, 2 * b.rank,
                                                          2 * qb, 2 * k, 2 * q);
        if (cg == 0.0) continue;
        t.comp[q + k] +=
            cg * Eigen::kroneckerProduct(a.comp[qa + a.rank], b.comp[qb + b.rank]).eval();
      }
    return t;
  };

  std::array<tensor_op, 7> out;
  out[0].rank = 0;
  out[0].comp = {Eigen::MatrixXd::Identity(dim * dim, dim * dim)};
  out[1].rank = 2;
  out[1].comp.assign(5, Eigen::MatrixXd::Zero(dim * dim, dim * dim));
  for (int q = -2; q <= 2; ++q)
    out[1].comp[q + 2] = Eigen::kroneckerProduct(quad.comp[q + 2], eye).eval() +
                         Eigen::kroneckerProduct(eye, quad.comp[q + 2]).eval();
  out[2] = couple_pair(j1, j1, 0);
  out[3] = couple_pair(j1, j1, 2);
  out[4] = couple_pair(quad, quad, 0);
  out[5] = couple_pair(quad, quad, 2);
  out[6] = couple_pair(quad, quad, 4);
  return out;
}

// <j' m'|T_kq|j m> over the coupled pair states, as a matrix indexed by
// (m' + j', m + j).
inline Eigen::MatrixXd electronic_block(const lndimer::spintensor::detail::tensor_op& op,
                                        int two_j, int jp, int j, int q) {
  const int dim = two_j + 1;
  Eigen::MatrixXd vp(dim * dim, 2 * jp + 1);
  for (int m = -jp; m <= jp; ++m)
    vp.col(m + jp) = lndimer::rovib::detail::coupled_pair_vector(two_j, jp, m);
  Eigen::MatrixXd v(dim * dim, 2 * j + 1);
  for (int m = -j; m <= j; ++m)
    v.col(m + j) = lndimer::rovib::detail::coupled_pair_vector(two_j, j, m);
  return vp.transpose() * op.comp[q + op.rank] * v;
}

// Full uncoupled evaluation of one coupling matrix at total projection M.
inline Eigen::MatrixXd coupling_by_sums(const lndimer::spintensor::detail::tensor_op& op,
                                        const std::vector<lndimer::rovib::channel>& chans,
                                        c_table& ct, int M = 0) {
  using lndimer::angmom::clebsch_gordan;
  const int n = static_cast<int>(chans.size());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
  if (n == 0) return out;
  const int two_j = chans[0].two_j;
  const int J = chans[0].J;
  const int k = op.rank;

  std::map<std::tuple<int, int, int>, Eigen::MatrixXd> el;
  const auto electronic = [&](int jp, int j, int q) -> const Eigen::MatrixXd& {
    const auto key = std::make_tuple(jp, j, q);
    if (const auto it = el.find(key); it != el.end()) return it->second;
    return el.emplace(key, electronic_block(op, two_j, jp, j, q)).first->second;
  };

  for (int p = 0; p < n; ++p)
    for (int c = 0; c < n; ++c) {
      const auto& bra = chans[p];
      const auto& ket = chans[c];
      double sum = 0.0;
      for (int mjp = -bra.j_el; mjp <= bra.j_el; ++mjp) {
        const int mlp = M - mjp;
        if (std::abs(mlp) > bra.ell) continue;
        const double cgp = clebsch_gordan(2 * bra.j_el, 2 * mjp, 2 * bra.ell, 2 * mlp,
                                          2 * J, 2 * M);
        if (cgp == 0.0) continue;
        for (int mj = -ket.j_el; mj <= ket.j_el; ++mj) {
          const int ml = M - mj;
          if (std::abs(ml) > ket.ell) continue;
          const int q = mjp - mj;
          if (std::abs(q) > k) continue;
          const double cg = clebsch_gordan(2 * ket.j_el, 2 * mj, 2 * ket.ell, 2 * ml,
                                           2 * J, 2 * M);
          if (cg == 0.0) continue;
          const double t_el = electronic(bra.j_el, ket.j_el, q)(mjp + bra.j_el, mj + ket.j_el);
          if (t_el == 0.0) continue;
          const double c_ang = ct(bra.ell, mlp, k, -q, ket.ell, ml);
          sum += cgp * cg * ((q % 2 == 0) ? 1.0 : -1.0) * t_el * c_ang;
        }
      }
      out(p, c) = sum;
    }
  return out;
}

}  // namespace brute
