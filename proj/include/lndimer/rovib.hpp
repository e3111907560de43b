#pragma once

// Coupled-channel rovibrational bound states of the dimer.
//
// The scattering frame couples the total electronic angular momentum
// j_el of the atom pair to the partial wave l, giving channels
// |(j_el l) J> at fixed total angular momentum J.  Gerade states carry
// even j_el, ungerade odd, and because every interaction operator has
// even tensor rank the parity of l is conserved separately, so each J
// splits into four (sigma, l-parity) blocks.  Which blocks exist
// physically depends on the nuclear spin: spinless nuclei (168Er)
// restrict a boson pair to sigma * (-1)^l = +1, while a nonzero nuclear
// spin (169Tm, i = 1/2) populates both exchange sectors once hyperfine
// structure is ignored, so all four blocks appear.
//
// The radial problem is discretized on a uniform grid with the
// sine-like discrete variable representation on the half line (wall one
// spacing below the first point), which converges exponentially for
// potentials that are smooth on the grid.  The Hamiltonian in the
// channel basis is
//
//   H = T kinetic (diagonal in channels)
//     + l(l+1)/(2 mu R^2)                 (centrifugal, optional)
//     + sum_a V_a(R) G_a                  (anisotropic interaction)
//
// where G_a is the angular coupling matrix of strength operator a,
//
//   G_a[(j' l'), (j l)] = (-1)^(J + j + l') {J l' j'; k j l}
//                         <j'||T_a||j> <l'||C_k||l>,
//
// k the rank of operator a.  The pair reduced matrix elements are
// extracted numerically from the product-space operators, so the matrix
// stays consistent with the body-frame construction used for the
// adiabatic potentials.
//
// Bound levels are labeled by v (node count of the dominant channel
// amplitude), by the adiabatic potential they follow (best body-frame
// overlap at the equilibrium distance, giving the |Omega| label), and
// by their leading channels.

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <lapacke.h>

#include "lndimer/angmom.hpp"
#include "lndimer/constants.hpp"
#include "lndimer/curves.hpp"
#include "lndimer/spintensor.hpp"

namespace lndimer::rovib {

// ---------------------------------------------------------------------------
// Channel basis

// One coupled channel |(j_el l) J>.  two_j is the single-atom angular
// momentum (doubled); j_el and l are plain integers for identical atoms.
struct channel {
  int two_j = 0;
  int j_el = 0;
  int ell = 0;
  int J = 0;
};

// "g_even", "u_odd", ... for a (sigma, l parity) block.
inline std::string block_name(int sigma, int ell_parity) {
  std::string out = (sigma > 0) ? "g_" : "u_";
  out += (ell_parity == 0) ? "even" : "odd";
  return out;
}

// All channels of one (sigma, l parity) block at total angular momentum
// J, ordered by j_el then l ascending.  sigma = +1 selects even j_el
// (gerade), -1 odd; ell_parity is 0 for even l, 1 for odd.
inline std::vector<channel> build_channels(int J, int sigma, int ell_parity, int two_j) {
  if (J < 0) throw std::invalid_argument("J must be non-negative");
  if (sigma != +1 && sigma != -1) throw std::invalid_argument("sigma must be +1 or -1");
  if (ell_parity != 0 && ell_parity != 1)
    throw std::invalid_argument("ell_parity must be 0 (even) or 1 (odd)");
  if (two_j < 0) throw std::invalid_argument("two_j must be non-negative");
  std::vector<channel> out;
  for (int j_el = (sigma > 0) ? 0 : 1; j_el <= two_j; j_el += 2)
    for (int ell = std::abs(J - j_el); ell <= J + j_el; ++ell)
      if (ell % 2 == ell_parity) out.push_back({two_j, j_el, ell, J});
  return out;
}

inline std::vector<channel> build_channels(int J, int sigma, int ell_parity,
                                           const species_params& sp) {
  return build_channels(J, sigma, ell_parity, sp.two_j);
}

// The (sigma, l parity) blocks that exist for a pair of this species:
// two for spinless nuclei, four otherwise.
struct block_spec {
  int sigma = 0;
  int ell_parity = 0;
};

inline std::vector<block_spec> physical_blocks(const species_params& sp) {
  if (sp.two_i == 0) return {{+1, 0}, {-1, 1}};
  return {{+1, 0}, {+1, 1}, {-1, 0}, {-1, 1}};
}

// ---------------------------------------------------------------------------
// Angular coupling matrices

namespace detail {

// (rank, index) labels of the seven strength operators, in storage order.
inline constexpr std::array<std::pair<int, int>, 7> strength_channels = {
    {{0, 1}, {2, 1}, {0, 2}, {2, 2}, {0, 3}, {2, 3}, {4, 1}}};

inline int strength_index(int k, int i) {
  for (int a = 0; a < 7; ++a)
    if (strength_channels[a].first == k && strength_channels[a].second == i) return a;
  throw std::invalid_argument("no strength operator with rank " + std::to_string(k) +
                              ", index " + std::to_string(i));
}

// |(j j) j_el m> expanded in the product basis (atom 1 slow).
inline Eigen::VectorXd coupled_pair_vector(int two_j, int j_el, int m) {
  const int dim = two_j + 1;
  Eigen::VectorXd out = Eigen::VectorXd::Zero(dim * dim);
  for (int tm1 = -two_j; tm1 <= two_j; tm1 += 2) {
    const int tm2 = 2 * m - tm1;
    if (tm2 < -two_j || tm2 > two_j) continue;
    const double c = angmom::clebsch_gordan(two_j, tm1, two_j, tm2, 2 * j_el, 2 * m);
    if (c == 0.0) continue;
    out(((tm1 + two_j) / 2) * dim + (tm2 + two_j) / 2) = c;
  }
  return out;
}

// <j_el'||T_a||j_el> of a pair operator, from its q = 0 product-space
// matrix through the Wigner-Eckart ratio at the first m where the
// projecting Clebsch-Gordan coefficient is nonzero.
inline double pair_reduced_element(const Eigen::MatrixXd& q0, int two_j, int k, int j_el_p,
                                   int j_el) {
  if (!angmom::triangle_ok(2 * j_el_p, 2 * k, 2 * j_el)) return 0.0;
  for (int m = std::min(j_el_p, j_el); m >= -std::min(j_el_p, j_el); --m) {
    const double c = angmom::clebsch_gordan(2 * j_el, 2 * m, 2 * k, 0, 2 * j_el_p, 2 * m);
    if (std::abs(c) < 1e-8) continue;
    const Eigen::VectorXd bra = coupled_pair_vector(two_j, j_el_p, m);
    const Eigen::VectorXd ket = coupled_pair_vector(two_j, j_el, m);
    return bra.dot(q0 * ket) * std::sqrt(2.0 * j_el_p + 1.0) / c;
  }
  return 0.0;
}

}  // namespace detail

// Coupling matrix of the strength operator with tensor rank k and index
// i over a channel list (all channels must share J and two_j).  The
// identity operator (k = 0, i = 1) yields the unit matrix exactly.
inline Eigen::MatrixXd coupling_matrix(int k, int i, const std::vector<channel>& chans) {
  const int a = detail::strength_index(k, i);
  const int n = static_cast<int>(chans.size());
  if (n == 0) return Eigen::MatrixXd();
  const int J = chans[0].J;
  const int two_j = chans[0].two_j;
  for (const auto& c : chans)
    if (c.J != J || c.two_j != two_j)
      throw std::invalid_argument("coupling_matrix: channels mix different J or two_j");

  const auto ops = spintensor::build_operators(two_j);
  std::map<std::pair<int, int>, double> rme;
  for (const auto& cp : chans)
    for (const auto& c : chans) {
      const auto key = std::make_pair(cp.j_el, c.j_el);
      if (rme.count(key)) continue;
      rme[key] = detail::pair_reduced_element(ops.q0[a], two_j, k, cp.j_el, c.j_el);
    }

  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q) {
      const auto& cp = chans[p];
      const auto& c = chans[q];
      const double r = rme.at({cp.j_el, c.j_el});
      if (r == 0.0) continue;
      const double cred = angmom::reduced_c(2 * cp.ell, k, 2 * c.ell);
      if (cred == 0.0) continue;
      const double six = angmom::wigner_6j(2 * J, 2 * cp.ell, 2 * cp.j_el, 2 * k, 2 * c.j_el,
                                           2 * c.ell);
      const int sign = ((J + c.j_el + cp.ell) % 2 == 0) ? 1 : -1;
      out(p, q) = sign * six * r * cred;
    }
  return out;
}

// ---------------------------------------------------------------------------
// Radial grid and kinetic energy

// Uniform radial grid (bohr) with the reduced mass in electron masses.
// The hard wall of the discrete variable representation sits one
// spacing below r_min.
struct dvr_grid {
  int n = 350;
  double r_min = 6.5;
  double r_max = 30.0;
  double mu_me = 0.0;

  double spacing() const { return (r_max - r_min) / (n - 1); }
  double point(int g) const { return r_min + g * spacing(); }
  void validate() const {
    if (n < 50) throw std::invalid_argument("dvr_grid: need at least 50 points");
    if (!(r_min > 0.0) || !(r_max > r_min))
      throw std::invalid_argument("dvr_grid: need 0 < r_min < r_max");
    if (!(mu_me > 0.0)) throw std::invalid_argument("dvr_grid: reduced mass must be positive");
  }
};

inline dvr_grid default_grid(const species_params& sp) {
  return {350, 6.5, 30.0, sp.reduced_mass_me()};
}

// Kinetic-energy matrix in cm^-1 on the semi-infinite uniform grid.
inline Eigen::MatrixXd dvr_kinetic(const dvr_grid& g) {
  g.validate();
  const double dr = g.spacing();
  const double c = constants::hartree_to_invcm / (2.0 * g.mu_me * dr * dr);
  const double pi2_3 = M_PI * M_PI / 3.0;
  Eigen::MatrixXd t(g.n, g.n);
  for (int a = 0; a < g.n; ++a) {
    const double ia = a + 1;  // index counted from the wall
    t(a, a) = c * (pi2_3 - 0.5 / (ia * ia));
    for (int b = 0; b < a; ++b) {
      const double d = a - b;
      const double s = a + b + 2;
      const double v = c * (((a - b) % 2 == 0) ? 1.0 : -1.0) * (2.0 / (d * d) - 2.0 / (s * s));
      t(a, b) = v;
      t(b, a) = v;
    }
  }
  return t;
}

// ---------------------------------------------------------------------------
// Dense symmetric eigensolver (LAPACK dsyevr)

namespace detail {

// Lowest nev eigenvalues (and vectors when requested) of a symmetric
// matrix; the contents of h are destroyed.
inline Eigen::VectorXd sym_lowest(Eigen::MatrixXd& h, int nev, Eigen::MatrixXd* vectors) {
  const int n = static_cast<int>(h.rows());
  if (n == 0 || h.cols() != n) throw std::invalid_argument("sym_lowest: matrix must be square");
  nev = std::min(std::max(nev, 1), n);
  Eigen::VectorXd w(n);
  if (vectors) vectors->resize(n, nev);
  std::vector<lapack_int> isuppz(2 * static_cast<std::size_t>(nev));
  lapack_int found = 0;
  const lapack_int info = LAPACKE_dsyevr(
      LAPACK_COL_MAJOR, vectors ? 'V' : 'N', 'I', 'L', n, h.data(), n, 0.0, 0.0, 1, nev, 0.0,
      &found, w.data(), vectors ? vectors->data() : nullptr, n, isuppz.data());
  if (info != 0)
    throw std::runtime_error("sym_lowest: dsyevr failed with info " + std::to_string(info));
  return w.head(found);
}

}  // namespace detail

// Lowest nev levels of a single radial potential, in cm^-1.
template <class F>
inline Eigen::VectorXd dvr_levels_1d(F&& potential, const dvr_grid& grid, int nev) {
  Eigen::MatrixXd h = dvr_kinetic(grid);
  for (int g = 0; g < grid.n; ++g) h(g, g) += potential(grid.point(g));
  return detail::sym_lowest(h, nev, nullptr);
}

// ---------------------------------------------------------------------------
// Coupled-channel Hamiltonian

enum class model_kind { two_tensor, full };

inline std::string to_string(model_kind m) {
  return m == model_kind::two_tensor ? "two_tensor" : "full";
}

inline model_kind model_from_string(const std::string& s) {
  if (s == "two_tensor") return model_kind::two_tensor;
  if (s == "full") return model_kind::full;
  throw std::invalid_argument("unknown model '" + s + "' (expected two_tensor or full)");
}

// Strength operators active in a model: the isotropic term plus the
// single-atom quadrupoles for two_tensor, all seven otherwise.
inline std::vector<int> active_operators(model_kind m) {
  if (m == model_kind::two_tensor) return {0, 1};
  return {0, 1, 2, 3, 4, 5, 6};
}

// Full Hamiltonian in cm^-1, channel-major (row c * n + g).  The
// centrifugal term can be dropped to expose the exact decoupling of the
// two-tensor model into its adiabatic potentials.
inline Eigen::MatrixXd hamiltonian(const std::vector<channel>& chans, model_kind model,
                                   const curves::strength_set& cs, const dvr_grid& grid,
                                   bool include_centrifugal = true) {
  grid.validate();
  const int nch = static_cast<int>(chans.size());
  if (nch == 0) return Eigen::MatrixXd();
  const int n = grid.n;
  const std::size_t dim = static_cast<std::size_t>(nch) * n;
  if (dim > 20000)
    throw std::invalid_argument("hamiltonian: dimension " + std::to_string(dim) +
                                " exceeds the dense-solver limit of 20000");

  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
  const Eigen::MatrixXd t = dvr_kinetic(grid);
  std::vector<double> r(n);
  for (int g = 0; g < n; ++g) r[g] = grid.point(g);

  for (int c = 0; c < nch; ++c) {
    h.block(static_cast<Eigen::Index>(c) * n, static_cast<Eigen::Index>(c) * n, n, n) = t;
    if (include_centrifugal) {
      const double ll = static_cast<double>(chans[c].ell) * (chans[c].ell + 1);
      for (int g = 0; g < n; ++g)
        h(static_cast<Eigen::Index>(c) * n + g, static_cast<Eigen::Index>(c) * n + g) +=
            ll * constants::hartree_to_invcm / (2.0 * grid.mu_me * r[g] * r[g]);
    }
  }

  std::vector<double> v(n);
  for (int a : active_operators(model)) {
    const auto [k, i] = detail::strength_channels[a];
    const Eigen::MatrixXd gmat = coupling_matrix(k, i, chans);
    for (int g = 0; g < n; ++g) v[g] = cs[a](r[g]);
    for (int p = 0; p < nch; ++p)
      for (int q = 0; q <= p; ++q) {
        const double w = gmat(p, q);
        if (w == 0.0) continue;
        for (int g = 0; g < n; ++g) {
          h(static_cast<Eigen::Index>(p) * n + g, static_cast<Eigen::Index>(q) * n + g) +=
              w * v[g];
          if (p != q)
            h(static_cast<Eigen::Index>(q) * n + g, static_cast<Eigen::Index>(p) * n + g) +=
                w * v[g];
        }
      }
  }
  return h;
}

inline Eigen::MatrixXd hamiltonian(int J, int sigma, int ell_parity,
                                   const species_params& sp, model_kind model,
                                   const curves::strength_set& cs, const dvr_grid& grid,
                                   bool include_centrifugal = true) {
  return hamiltonian(build_channels(J, sigma, ell_parity, sp), model, cs, grid,
                     include_centrifugal);
}

// Eigenvalues only, for scans and convergence checks.
inline Eigen::VectorXd level_energies(const std::vector<channel>& chans, model_kind model,
                                      const curves::strength_set& cs, const dvr_grid& grid,
                                      int nev, bool include_centrifugal = true) {
  if (chans.empty()) return Eigen::VectorXd();
  Eigen::MatrixXd h = hamiltonian(chans, model, cs, grid, include_centrifugal);
  return detail::sym_lowest(h, nev, nullptr);
}

// ---------------------------------------------------------------------------
// Adiabat minimum and spectroscopic constants

namespace detail {

// Matrices of the active strength operators projected on one
// symmetrized (Omega, sigma) pair block.
inline std::vector<Eigen::MatrixXd> block_operator_matrices(int two_j, int omega, int sigma,
                                                            const std::vector<int>& active) {
  const auto ops = spintensor::build_operators(two_j);
  for (const auto& blk : spintensor::symmetrized_blocks(two_j))
    if (blk.omega == omega && blk.sigma == sigma) {
      std::vector<Eigen::MatrixXd> out;
      out.reserve(active.size());
      for (int a : active) out.push_back(spintensor::block_matrix(ops.q0[a], blk, two_j));
      return out;
    }
  throw std::invalid_argument("no symmetrized block with Omega " + std::to_string(omega) +
                              ", sigma " + std::to_string(sigma));
}

}  // namespace detail

// Location and depth of the minimum of the energetically lowest adiabat
// in the (omega, sigma) pair block, assembled from the strength curves.
// Returns {r_e, V(r_e)}; throws when the bracket holds no interior
// minimum.
inline std::pair<double, double> lowest_adiabat_minimum(const species_params& sp,
                                                        const curves::strength_set& cs,
                                                        model_kind model = model_kind::full,
                                                        int omega = 0, int sigma = +1,
                                                        double lo = 7.4, double hi = 10.2) {
  const std::vector<int> active = active_operators(model);
  const auto bm = detail::block_operator_matrices(sp.two_j, omega, sigma, active);
  const auto lowest = [&](double r) {
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(bm[0].rows(), bm[0].cols());
    for (std::size_t t = 0; t < active.size(); ++t) h += cs[active[t]](r) * bm[t];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
  };
  const double r_e = curves::minimize(lowest, lo, hi, 1e-9);
  if (r_e - lo < 1e-3 || hi - r_e < 1e-3)
    throw std::runtime_error("lowest_adiabat_minimum: no interior minimum in bracket");
  return {r_e, lowest(r_e)};
}

// Equilibrium constants of the lowest adiabat of one (omega, sigma)
// block: B_e from R_e, the harmonic interval both from the curvature at
// the minimum and from the v = 0 -> 1 interval of the exact 1D levels
// (the two differ for an anharmonic well, so both are reported).
struct spectro_constants {
  double r_e = 0.0;        // bohr
  double d_e = 0.0;        // well depth, cm^-1
  double b_e = 0.0;        // rotational constant, cm^-1
  double omega_curv = 0.0; // harmonic interval from curvature, cm^-1
  double omega_dvr = 0.0;  // E(v=1) - E(v=0), cm^-1
  double e0 = 0.0;         // lowest level energy, cm^-1
  double e1 = 0.0;
};

inline spectro_constants spectroscopic_constants(const species_params& sp,
                                                 const curves::strength_set& cs,
                                                 const dvr_grid& grid,
                                                 model_kind model = model_kind::full,
                                                 int omega = 0, int sigma = +1) {
  grid.validate();
  const std::vector<int> active = active_operators(model);
  const auto bm = detail::block_operator_matrices(sp.two_j, omega, sigma, active);
  const auto lowest = [&](double r) {
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(bm[0].rows(), bm[0].cols());
    for (std::size_t t = 0; t < active.size(); ++t) h += cs[active[t]](r) * bm[t];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
  };

  spectro_constants out;
  out.r_e = curves::minimize(lowest, 7.4, 10.2, 1e-9);
  if (out.r_e - 7.4 < 1e-3 || 10.2 - out.r_e < 1e-3)
    throw std::runtime_error("spectroscopic_constants: no interior minimum in bracket");
  out.d_e = -lowest(out.r_e);
  out.b_e = constants::hartree_to_invcm / (2.0 * grid.mu_me * out.r_e * out.r_e);

  const double h = 1e-3;
  const double curv = (lowest(out.r_e + h) - 2.0 * lowest(out.r_e) + lowest(out.r_e - h)) /
                      (h * h);
  if (curv <= 0.0) throw std::runtime_error("spectroscopic_constants: non-convex minimum");
  out.omega_curv = std::sqrt(curv * constants::hartree_to_invcm / grid.mu_me);

  const Eigen::VectorXd e = dvr_levels_1d(lowest, grid, 2);
  if (e.size() < 2)
    throw std::runtime_error("spectroscopic_constants: fewer than two levels in the well");
  out.e0 = e(0);
  out.e1 = e(1);
  out.omega_dvr = e(1) - e(0);
  return out;
}

// ---------------------------------------------------------------------------
// Bound levels with labels

struct bound_level {
  double energy_cm = 0.0;
  int J = 0;
  int sigma = 0;
  int ell_parity = 0;
  int index = 0;       // position in the block, ascending energy
  int v = 0;           // node count of the dominant channel amplitude
  int omega = 0;       // |Omega| of the best-overlap adiabat
  std::string omega_label;                         // "0_g^+", "1_u", ...
  double omega1 = 0.0;                             // <|Omega_1|> of that adiabat
  std::vector<std::pair<int, double>> top_channels; // (channel index, weight), descending
};

struct block_result {
  int J = 0;
  int sigma = 0;
  int ell_parity = 0;
  std::vector<channel> channels;
  std::vector<bound_level> levels;
};

namespace detail {

// Body-frame states (signed Omega, j_el) reachable from a channel list.
struct bf_state {
  int omega = 0;
  int j_el = 0;
};

inline std::vector<bf_state> bf_states(const std::vector<channel>& chans) {
  std::vector<int> jels;
  for (const auto& c : chans)
    if (std::find(jels.begin(), jels.end(), c.j_el) == jels.end()) jels.push_back(c.j_el);
  std::sort(jels.begin(), jels.end());
  const int J = chans.empty() ? 0 : chans[0].J;
  std::vector<bf_state> out;
  for (int j : jels)
    for (int om = -std::min(j, J); om <= std::min(j, J); ++om) out.push_back({om, j});
  return out;
}

// Transformation from channels to body-frame states,
// u[c, b] = sqrt((2 l + 1)/(2 J + 1)) <j_el Omega l 0|J Omega>.
// Columns are orthonormal when the channel list spans both l parities.
inline Eigen::MatrixXd bf_transform(const std::vector<channel>& chans,
                                    const std::vector<bf_state>& bf) {
  const int J = chans.empty() ? 0 : chans[0].J;
  Eigen::MatrixXd u = Eigen::MatrixXd::Zero(chans.size(), bf.size());
  for (std::size_t c = 0; c < chans.size(); ++c)
    for (std::size_t b = 0; b < bf.size(); ++b) {
      if (chans[c].j_el != bf[b].j_el) continue;
      u(c, b) = std::sqrt((2.0 * chans[c].ell + 1.0) / (2.0 * J + 1.0)) *
                angmom::clebsch_gordan(2 * bf[b].j_el, 2 * bf[b].omega, 2 * chans[c].ell, 0,
                                       2 * J, 2 * bf[b].omega);
    }
  return u;
}

// Amplitude of an adiabat eigenvector on |j_el, Omega> for signed Omega
// (+/- the block Omega); only the j_el parity matching sigma survives.
inline double adiabat_bf_weight(const spintensor::adiabat& ad, const spintensor::sym_block& blk,
                                int two_j, int j_el, int signed_omega) {
  if (std::abs(signed_omega) != ad.omega) return 0.0;
  double w = 0.0;
  for (std::size_t p = 0; p < blk.states.size(); ++p) {
    const auto& st = blk.states[p];
    const double npair = st.equal() ? 0.5 : (1.0 / std::sqrt(2.0));
    const double c = angmom::clebsch_gordan(two_j, st.two_m1, two_j, st.two_m2, 2 * j_el,
                                            2 * ad.omega);
    w += 2.0 * npair * c * ad.coeffs(p);
  }
  if (signed_omega < 0 && ((two_j - j_el) % 2 != 0)) w = -w;
  return w;
}

// <|Omega_1|> of an adiabat, from its pair-state weights.
inline double adiabat_omega1(const spintensor::adiabat& ad, const spintensor::sym_block& blk) {
  double out = 0.0;
  for (std::size_t p = 0; p < blk.states.size(); ++p)
    out += ad.coeffs(p) * ad.coeffs(p) *
           0.5 * (std::abs(0.5 * blk.states[p].two_m1) + std::abs(0.5 * blk.states[p].two_m2));
  return out;
}

// Node count of a radial amplitude: strict sign changes among entries
// above a relative floor.
inline int count_nodes(const Eigen::VectorXd& psi) {
  const double floor = 1e-6 * psi.cwiseAbs().maxCoeff();
  int nodes = 0;
  int last = 0;
  for (int g = 0; g < psi.size(); ++g) {
    if (std::abs(psi(g)) <= floor) continue;
    const int s = (psi(g) > 0.0) ? 1 : -1;
    if (last != 0 && s != last) ++nodes;
    last = s;
  }
  return nodes;
}

}  // namespace detail

// Bound levels of one (J, sigma, l parity) block, labeled.  At most
// max_levels eigenpairs are computed and only energies below zero are
// returned.
inline block_result bound_levels_block(int J, int sigma, int ell_parity,
                                       const species_params& sp, model_kind model,
                                       const curves::strength_set& cs, const dvr_grid& grid,
                                       int max_levels = 20) {
  block_result out;
  out.J = J;
  out.sigma = sigma;
  out.ell_parity = ell_parity;
  out.channels = build_channels(J, sigma, ell_parity, sp);
  if (out.channels.empty()) return out;

  Eigen::MatrixXd h = hamiltonian(out.channels, model, cs, grid);
  Eigen::MatrixXd z;
  const Eigen::VectorXd w =
      detail::sym_lowest(h, std::min<int>(max_levels, h.rows()), &z);
  h.resize(0, 0);

  // Labeling context: adiabats of the active model at the grid point
  // nearest the global equilibrium distance.
  const auto [r_e, v_min] = lowest_adiabat_minimum(sp, cs, model);
  (void)v_min;
  int g_label = static_cast<int>(std::lround((r_e - grid.r_min) / grid.spacing()));
  g_label = std::clamp(g_label, 0, grid.n - 1);
  const auto ops = spintensor::build_operators(sp.two_j);
  std::array<double, 7> strengths{};
  for (int a : active_operators(model)) strengths[a] = cs[a](grid.point(g_label));
  const auto ads = spintensor::adiabats(ops, strengths);
  const auto bf = detail::bf_states(out.channels);
  const Eigen::MatrixXd u = detail::bf_transform(out.channels, bf);

  const int nch = static_cast<int>(out.channels.size());
  const int n = grid.n;
  for (int e = 0; e < w.size(); ++e) {
    if (w(e) >= 0.0) break;
    bound_level lev;
    lev.energy_cm = w(e);
    lev.J = J;
    lev.sigma = sigma;
    lev.ell_parity = ell_parity;
    lev.index = e;

    // Channel weights and the dominant channel's node count.
    std::vector<std::pair<int, double>> weights(nch);
    for (int c = 0; c < nch; ++c)
      weights[c] = {c, z.col(e).segment(static_cast<Eigen::Index>(c) * n, n).squaredNorm()};
    const int dominant =
        std::max_element(weights.begin(), weights.end(), [](const auto& a, const auto& b) {
          return a.second < b.second;
        })->first;
    lev.v = detail::count_nodes(z.col(e).segment(static_cast<Eigen::Index>(dominant) * n, n));
    std::sort(weights.begin(), weights.end(),
              [](const auto& a, const auto& b) { return a.second > b.second; });
    weights.resize(std::min<std::size_t>(weights.size(), 3));
    lev.top_channels = std::move(weights);

    // Body-frame amplitudes at the equilibrium slice, scored against
    // every same-sigma adiabat.
    Eigen::VectorXd slice(nch);
    for (int c = 0; c < nch; ++c) slice(c) = z(static_cast<Eigen::Index>(c) * n + g_label, e);
    const Eigen::VectorXd amp = u.transpose() * slice;
    const spintensor::adiabat* best = nullptr;
    double best_score = -1.0;
    for (const auto& ad : ads.states) {
      if (ad.sigma != sigma || ad.omega > J) continue;
      const auto& blk = ads.blocks[ad.block];
      double score = 0.0;
      for (const int som : (ad.omega == 0) ? std::vector<int>{0}
                                           : std::vector<int>{-ad.omega, +ad.omega}) {
        double overlap = 0.0;
        for (std::size_t b = 0; b < bf.size(); ++b) {
          if (bf[b].omega != som) continue;
          overlap += detail::adiabat_bf_weight(ad, blk, sp.two_j, bf[b].j_el, som) * amp(b);
        }
        score += overlap * overlap;
      }
      if (score > best_score) {
        best_score = score;
        best = &ad;
      }
    }
    if (best) {
      lev.omega = best->omega;
      lev.omega_label = spintensor::label(*best);
      lev.omega1 = detail::adiabat_omega1(*best, ads.blocks[best->block]);
    }
    out.levels.push_back(std::move(lev));
  }
  return out;
}

// Levels over a set of J values and symmetry blocks.
inline std::vector<block_result> bound_levels(const std::vector<int>& js,
                                              const std::vector<block_spec>& blocks,
                                              const species_params& sp,
                                              model_kind model, const curves::strength_set& cs,
                                              const dvr_grid& grid, int max_levels = 20) {
  std::vector<block_result> out;
  for (int J : js)
    for (const auto& b : blocks)
      out.push_back(bound_levels_block(J, b.sigma, b.ell_parity, sp, model, cs, grid,
                                       max_levels));
  return out;
}

// Largest change of the lowest `count` levels between two grids, for
// convergence reporting.
inline double convergence_delta(int J, int sigma, int ell_parity,
                                const species_params& sp, model_kind model,
                                const curves::strength_set& cs, const dvr_grid& coarse,
                                const dvr_grid& fine, int count = 20) {
  const auto chans = build_channels(J, sigma, ell_parity, sp);
  if (chans.empty()) return 0.0;
  const Eigen::VectorXd a = level_energies(chans, model, cs, coarse, count);
  const Eigen::VectorXd b = level_energies(chans, model, cs, fine, count);
  const int m = static_cast<int>(std::min(a.size(), b.size()));
  double delta = 0.0;
  for (int t = 0; t < m; ++t) delta = std::max(delta, std::abs(a(t) - b(t)));
  return delta;
}

}  // namespace lndimer::rovib
