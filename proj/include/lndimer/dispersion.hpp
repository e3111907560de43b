#pragma once

// The seven anisotropic van-der-Waals coefficients C_k^(i) of the
// ground-state lanthanide dimer interaction, computed from atomic line
// lists by closed-form angular recoupling of the second-order
// dipole-dipole energy.  Also provides linear uncertainty propagation
// with the correlation matrix over the four independent coefficients,
// a Monte-Carlo cross-check, and the weak long-range extras (magnetic
// dipole-dipole 1/R^3 and quadrupole-quadrupole 1/R^5 prefactors).
//
// Internally everything is in Hartree atomic units: squared dipoles in
// (e a0)^2, energies in E_h, coefficients in E_h a0^6.

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "lndimer/angmom.hpp"
#include "lndimer/constants.hpp"
#include "lndimer/lines.hpp"

namespace lndimer::dispersion {

// Second-order tensor contraction factor M(b, j; l) for one atom: the
// dependence of the dipole-dipole recoupling on the intermediate-state
// angular momentum b at atomic tensor rank l.
inline double m_factor(int tb, int tj, int l) {
  if (std::abs(tb - tj) > 2) throw std::invalid_argument("m_factor: b must be j-1, j or j+1");
  const double j = 0.5 * tj;
  const double b = 0.5 * tb;
  const double ratio = std::sqrt((tb + 1.0) / (tj + 1.0));
  const int sign_bj = ((tb - tj) / 2) % 2 == 0 ? 1 : -1;  // (-1)^(b-j)
  switch (l) {
    case 0:
      return -sign_bj / std::sqrt(3.0) * ratio;
    case 1:
      return sign_bj / (2.0 * std::sqrt(2.0)) * ratio *
             (2.0 + j * (j + 1.0) - b * (b + 1.0)) / (j * (j + 1.0));
    case 2: {
      if (tj < 2) return 0.0;  // no rank-2 atomic tensor below j = 1
      const double w_b = angmom::racah_w(tj, 2, tj, 2, tb, 4);
      const double w_j = angmom::racah_w(tj, 2, tj, 2, tj, 4);
      return ratio * (w_b / w_j) / (j * (j + 1.0));
    }
    default:
      throw std::invalid_argument("m_factor: l must be 0, 1 or 2");
  }
}

// h[b1][b2] = sum over excited-state pairs of |d1|^2 |d2|^2 / (-dE1-dE2),
// indexed 0..2 for b = j-1, j, j+1.  Every entry is negative and the
// matrix is symmetric when both atoms share one line list.
inline Eigen::Matrix3d h_matrix(const lines::line_list& a, const lines::line_list& b) {
  if (a.two_j_ground != b.two_j_ground)
    throw std::invalid_argument("h_matrix: mismatched ground states");
  if (a.records.empty() || b.records.empty())
    throw std::domain_error("h_matrix: empty line list");
  const int tj = a.two_j_ground;
  Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
  for (const auto& ra : a.records) {
    const double da = lines::reduced_dipole_sq(ra, tj);
    const double ea = ra.delta_e_hartree();
    const int ia = (ra.two_j - (tj - 2)) / 2;
    for (const auto& rb : b.records) {
      const double db = lines::reduced_dipole_sq(rb, tj);
      const double eb = rb.delta_e_hartree();
      const int ib = (rb.two_j - (tj - 2)) / 2;
      h(ia, ib) += da * db / (-ea - eb);
    }
  }
  return h;
}

inline Eigen::Matrix3d h_matrix(const lines::line_list& homonuclear) {
  // identical atoms: enforce the symmetry that summation order otherwise
  // breaks at the last bit
  const Eigen::Matrix3d h = h_matrix(homonuclear, homonuclear);
  return 0.5 * (h + h.transpose());
}

// The seven (k, l1, l2) recoupling channels in output order; the
// (2,2,0)/(2,0,2) pair shares one operator (single-atom anisotropy on
// either atom) and is represented by (2,2,0) alone.
struct channel {
  int k, l1, l2;
};
inline constexpr std::array<channel, 7> channels{{
    {0, 0, 0},  // C_0^(1)
    {2, 2, 0},  // C_2^(1)
    {0, 1, 1},  // C_0^(2)
    {2, 1, 1},  // C_2^(2)
    {0, 2, 2},  // C_0^(3)
    {2, 2, 2},  // C_2^(3)
    {4, 2, 2},  // C_4^(1)
}};

// ratios of the three dependent coefficients to the k = 0 channel with
// the same (l1, l2): C_2^(2)/C_0^(2), C_2^(3)/C_0^(3), C_4^(1)/C_0^(3).
// These follow from the 9j and Clebsch-Gordan prefactors alone, so they
// hold exactly for any line list.
inline double ratio_c22_c02() { return std::sqrt(2.0); }
inline double ratio_c23_c03() { return std::sqrt(10.0 / 7.0); }
inline double ratio_c41_c03() { return 6.0 * std::sqrt(18.0 / 7.0); }

namespace detail {

// per-branch weight phi_l(b) = (-1)^(b-j) M(b,j;l) / sqrt(2b+1)
inline std::array<double, 3> branch_weights(int tj, int l) {
  std::array<double, 3> w{};
  for (int i = 0; i < 3; ++i) {
    const int tb = tj - 2 + 2 * i;
    if (tb < 0) {
      w[i] = 0.0;
      continue;
    }
    const int sign = (i == 1) ? 1 : -1;  // (-1)^(b-j)
    w[i] = sign * m_factor(tb, tj, l) / std::sqrt(tb + 1.0);
  }
  return w;
}

// 3x3 weight matrix W_c with C = sum_{b1 b2} W_c(b1,b2) h(b1,b2).
// The overall sign is fixed so that the isotropic coefficient comes out
// negative (attractive) for ground-state atoms, matching the V = C/R^6
// convention used throughout.
inline Eigen::Matrix3d channel_weight(const channel& c, int tj) {
  const double pre = 30.0 *
                     std::sqrt((2.0 * c.l1 + 1.0) * (2.0 * c.l2 + 1.0)) / (tj + 1.0) *
                     angmom::wigner_9j(2, 2, 2 * c.l1, 2, 2, 2 * c.l2, 4, 4, 2 * c.k) *
                     angmom::clebsch_gordan(4, 0, 4, 0, 2 * c.k, 0);
  const auto w1 = branch_weights(tj, c.l1);
  const auto w2 = branch_weights(tj, c.l2);
  Eigen::Matrix3d w;
  for (int i = 0; i < 3; ++i)
    for (int l = 0; l < 3; ++l) w(i, l) = pre * w1[i] * w2[l];
  return w;
}

inline std::array<Eigen::Matrix3d, 7> channel_weights(int tj) {
  std::array<Eigen::Matrix3d, 7> w;
  for (std::size_t a = 0; a < channels.size(); ++a) w[a] = channel_weight(channels[a], tj);
  return w;
}

// gradient of each coefficient wrt each line strength: with
// w_m = |d_m|^2 = slope_m * s_m and h(b1,b2) bilinear in the w's,
//   dC/ds_m = slope_m * sum_b2 [W(b_m,b2) + W(b2,b_m)] S_m(b2),
//   S_m(b2) = sum_{n in branch b2} w_n / (-(e_m + e_n)).
inline Eigen::MatrixXd vdw_gradient(const lines::line_list& list, int tj) {
  const std::size_t n = list.records.size();
  std::vector<double> w(n), slope(n), energy(n);
  std::vector<int> branch(n);
  for (std::size_t m = 0; m < n; ++m) {
    const auto& r = list.records[m];
    slope[m] = lines::reduced_dipole_sq_slope(r, tj);
    w[m] = r.strength * slope[m];
    energy[m] = r.delta_e_hartree();
    branch[m] = (r.two_j - (tj - 2)) / 2;
  }
  Eigen::MatrixXd smat(n, 3);  // S_m(b2)
  for (std::size_t m = 0; m < n; ++m) {
    std::array<double, 3> acc{};
    for (std::size_t l = 0; l < n; ++l) acc[branch[l]] += w[l] / (-(energy[m] + energy[l]));
    for (int b = 0; b < 3; ++b) smat(m, b) = acc[b];
  }
  Eigen::MatrixXd grad(7, n);
  for (int a : {0, 1, 2, 4}) {
    const Eigen::Matrix3d wm = channel_weight(channels[a], tj);
    for (std::size_t m = 0; m < n; ++m) {
      double g = 0.0;
      for (int b2 = 0; b2 < 3; ++b2)
        g += (wm(branch[m], b2) + wm(b2, branch[m])) * smat(m, b2);
      grad(a, m) = slope[m] * g;
    }
  }
  // dependent channels, consistent with vdw_central
  grad.row(3) = ratio_c22_c02() * grad.row(2);
  grad.row(5) = ratio_c23_c03() * grad.row(4);
  grad.row(6) = ratio_c41_c03() * grad.row(4);
  return grad;
}

}  // namespace detail

// central values of the seven coefficients in channel order.  The four
// independent ones come from contracting their weight matrices with h;
// the dependent three are exact multiples of the k = 0 partner sharing
// its (l1, l2).  Contracting them separately would reproduce the same
// numbers only to ~1e-11 because the contraction cancels to a small
// fraction of its terms.
inline std::array<double, 7> vdw_central(const Eigen::Matrix3d& h, int tj) {
  std::array<double, 7> c{};
  for (int a : {0, 1, 2, 4})
    c[a] = detail::channel_weight(channels[a], tj).cwiseProduct(h).sum();
  c[3] = ratio_c22_c02() * c[2];
  c[5] = ratio_c23_c03() * c[4];
  c[6] = ratio_c41_c03() * c[4];
  return c;
}

struct dispersion_set {
  // coefficient values, E_h a0^6, in the order
  // C_0^(1), C_2^(1), C_0^(2), C_2^(2), C_0^(3), C_2^(3), C_4^(1)
  std::array<double, 7> value{};
  std::array<double, 7> u{};  // one-sigma uncertainties
  // correlation matrix over the four independent coefficients
  // (C_0^(1), C_2^(1), C_0^(2), C_0^(3))
  Eigen::Matrix4d corr = Eigen::Matrix4d::Identity();
  double c_ss = 0.0, u_ss = 0.0;  // spin-stretched isotropic C6 and its sigma
  double d2_2 = 0.0;              // magnetic dipole-dipole prefactor, E_h a0^3
  double q4_1 = 0.0;              // quadrupole-quadrupole prefactor, E_h a0^5

  static constexpr std::array<std::pair<int, int>, 7> labels{{
      {0, 1}, {2, 1}, {0, 2}, {2, 2}, {0, 3}, {2, 3}, {4, 1}}};
};

// weak long-range prefactors from species constants
struct extras {
  double d2_2 = 0.0;  // magnetic dipole-dipole prefactor, E_h a0^3
  double q4_1 = 0.0;  // quadrupole-quadrupole prefactor, E_h a0^5
};
inline extras long_range_extras(const species_params& sp) {
  const double alpha = constants::fine_structure;
  extras out;
  out.d2_2 = -std::sqrt(6.0) * alpha * alpha * 0.25 * sp.g_j * sp.g_j;
  const double j = sp.j();
  if (sp.quadrupole_ea02 != 0.0) {
    const double denom = j * j * (2.0 * j - 1.0) * (2.0 * j - 1.0);
    if (denom <= 0.0) throw std::domain_error("quadrupole prefactor undefined for j < 1");
    out.q4_1 = 6.0 * std::sqrt(70.0) * sp.quadrupole_ea02 * sp.quadrupole_ea02 / denom;
  }
  return out;
}

// Full pipeline: central values, linear uncertainty propagation over
// independent line strengths (transition-energy uncertainties are
// neglected; they contribute negligibly), correlations, the
// spin-stretched C6 and the long-range extras.
inline dispersion_set vdw_coefficients(const lines::line_list& list,
                                       const species_params& sp) {
  if (list.records.empty()) throw std::domain_error("vdw_coefficients: empty line list");
  const int tj = list.two_j_ground;
  const Eigen::Matrix3d h = h_matrix(list);

  dispersion_set out;
  out.value = vdw_central(h, tj);

  const std::size_t n = list.records.size();
  const Eigen::MatrixXd grad = detail::vdw_gradient(list, tj);
  // covariance over the four independent coefficients + all u's
  const std::array<int, 4> indep{0, 1, 2, 4};  // C_0^(1), C_2^(1), C_0^(2), C_0^(3)
  Eigen::Matrix4d cov = Eigen::Matrix4d::Zero();
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (std::size_t m = 0; m < n; ++m)
        cov(a, b) += grad(indep[a], m) * grad(indep[b], m) *
                     list.records[m].u_strength * list.records[m].u_strength;
  for (int a = 0; a < 7; ++a) {
    double v = 0.0;
    for (std::size_t m = 0; m < n; ++m)
      v += grad(a, m) * grad(a, m) * list.records[m].u_strength * list.records[m].u_strength;
    out.u[a] = std::sqrt(v);
  }
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      const double den = std::sqrt(cov(a, a) * cov(b, b));
      out.corr(a, b) = den > 0.0 ? cov(a, b) / den : (a == b ? 1.0 : 0.0);
    }

  // spin-stretched isotropic C6: C_ss = C_0^(1) + 2j(2j-1) C_2^(1)/sqrt(6)
  const double fac = tj * (tj - 1.0) / std::sqrt(6.0);
  out.c_ss = out.value[0] + fac * out.value[1];
  out.u_ss = std::sqrt(cov(0, 0) + 2.0 * fac * cov(0, 1) + fac * fac * cov(1, 1));

  const extras ex = long_range_extras(sp);
  out.d2_2 = ex.d2_2;
  out.q4_1 = ex.q4_1;
  return out;
}

// Monte-Carlo propagation cross-check: resample every line strength as
// an independent normal deviate and report the sample standard
// deviation of the four independent coefficients.  Deterministic for a
// fixed seed.
inline std::array<double, 4> monte_carlo_u(const lines::line_list& list, int samples,
                                           std::uint64_t seed) {
  const int tj = list.two_j_ground;
  const std::size_t n = list.records.size();
  std::vector<double> slope(n), energy(n), w(n);
  std::vector<int> branch(n);
  for (std::size_t m = 0; m < n; ++m) {
    slope[m] = lines::reduced_dipole_sq_slope(list.records[m], tj);
    energy[m] = list.records[m].delta_e_hartree();
    branch[m] = (list.records[m].two_j - (tj - 2)) / 2;
  }
  const auto weights = detail::channel_weights(tj);
  const std::array<int, 4> indep{0, 1, 2, 4};

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> unit(0.0, 1.0);
  std::array<double, 4> mean{}, m2{};
  for (int s = 0; s < samples; ++s) {
    for (std::size_t m = 0; m < n; ++m)
      w[m] = slope[m] * (list.records[m].strength + list.records[m].u_strength * unit(rng));
    Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b)
        h(branch[a], branch[b]) += w[a] * w[b] / (-(energy[a] + energy[b]));
    for (int a = 0; a < 4; ++a) {
      const double x = weights[indep[a]].cwiseProduct(h).sum();
      const double delta = x - mean[a];
      mean[a] += delta / (s + 1);
      m2[a] += delta * (x - mean[a]);
    }
  }
  std::array<double, 4> u{};
  for (int a = 0; a < 4; ++a) u[a] = std::sqrt(m2[a] / (samples - 1));
  return u;
}

inline nlohmann::json to_json(const dispersion_set& d, const std::string& species) {
  nlohmann::json coeffs = nlohmann::json::array();
  for (int a = 0; a < 7; ++a)
    coeffs.push_back({{"k", dispersion_set::labels[a].first},
                      {"i", dispersion_set::labels[a].second},
                      {"value", d.value[a]},
                      {"u", d.u[a]}});
  nlohmann::json corr = nlohmann::json::array();
  for (int a = 0; a < 4; ++a) {
    nlohmann::json row = nlohmann::json::array();
    for (int b = 0; b < 4; ++b) row.push_back(d.corr(a, b));
    corr.push_back(row);
  }
  return {{"species", species}, {"coefficients", coeffs},   {"correlations", corr},
          {"c_ss", d.c_ss},     {"u_c_ss", d.u_ss},         {"d2_2", d.d2_2},
          {"q4_1", d.q4_1}};
}

}  // namespace lndimer::dispersion
