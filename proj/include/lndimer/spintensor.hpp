#pragma once

// Spin-tensor structure of the interaction between two identical
// open-shell atoms at fixed internuclear distance R, in the body frame.
//
// The interaction that is diagonal in the total projection Omega is a
// linear combination of seven operators, each the q = 0 component of a
// spherical tensor built from the two atomic angular momenta:
//
//   index  label  operator                                  tensor rank
//   0      v0_1   identity                                  0
//   1      v2_1   [j1 j1]_2,0 + [j2 j2]_2,0                 2
//   2      v0_2   [j1 (x) j2]_0,0                           0
//   3      v2_2   [j1 (x) j2]_2,0                           2
//   4      v0_3   [[j1 j1]_2 (x) [j2 j2]_2]_0,0             0
//   5      v2_3   [[j1 j1]_2 (x) [j2 j2]_2]_2,0             2
//   6      v4_1   [[j1 j1]_2 (x) [j2 j2]_2]_4,0             4
//
// The ordering matches the dispersion channels, so a strength vector can
// be filled directly from C_k^(i) / R^6.  Spherical components follow the
// convention c_{+1} = -j_+/sqrt(2), c_0 = j_z, c_{-1} = +j_-/sqrt(2), which
// keeps every matrix real in the |j m> basis.
//
// For identical atoms the product basis |j m1>|j m2> is symmetrized into
// gerade/ungerade combinations
//
//   |m1 m2; sigma> ~ |m1 m2> + eps * sigma |m2 m1>,   eps = (-1)^(2j),
//
// with sigma = +1 for gerade and -1 for ungerade.  States are grouped into
// blocks of fixed (Omega = m1 + m2 >= 0, sigma); the interaction never
// mixes blocks.  Diagonalizing each block yields the adiabatic potentials,
// labeled n_{Omega, g/u} with n counting up in energy inside the block and
// a reflection label (+/-) attached to Omega = 0.
//
// fit_strengths solves the inverse problem: given observed adiabat
// positions at one distance, recover the strength vector by iterated
// linear least squares on the splittings from the stretched state, with
// the isotropic strength anchored so the stretched level is reproduced
// exactly (the identity operator leaves no trace in any splitting).

#include <algorithm>
#include <array>
#include <cmath>
#include <istream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include "lndimer/angmom.hpp"
#include "lndimer/csv.hpp"

namespace lndimer::spintensor {

// Exchange phase of the two-atom state under transposition of the atoms,
// (-1)^(2j): +1 for integer j, -1 for half-integer j.
inline int epsilon(int two_j) { return (two_j % 2 == 0) ? +1 : -1; }

namespace detail {

// A spherical tensor operator: components comp[q + rank] for q = -rank..rank.
struct tensor_op {
  int rank = 0;
  std::vector<Eigen::MatrixXd> comp;
};

// Angular momentum as a rank-1 spherical tensor on the (2j+1)-dimensional
// space with basis |j m>, m ascending.
inline tensor_op j_tensor(int two_j) {
  const int dim = two_j + 1;
  const double j = 0.5 * two_j;
  tensor_op t;
  t.rank = 1;
  t.comp.assign(3, Eigen::MatrixXd::Zero(dim, dim));
  for (int i = 0; i < dim; ++i) {
    const double m = -j + i;
    t.comp[1](i, i) = m;
    if (i + 1 < dim) {
      const double amp = std::sqrt(j * (j + 1.0) - m * (m + 1.0));  // <m+1|j_+|m>
      t.comp[2](i + 1, i) = -amp / std::sqrt(2.0);
      t.comp[0](i, i + 1) = amp / std::sqrt(2.0);
    }
  }
  return t;
}

// Couple two tensors acting on the same space: [a (x) b]_k.
inline tensor_op couple(const tensor_op& a, const tensor_op& b, int k) {
  tensor_op t;
  t.rank = k;
  t.comp.assign(2 * k + 1, Eigen::MatrixXd::Zero(a.comp[0].rows(), a.comp[0].cols()));
  for (int q = -k; q <= k; ++q)
    for (int qa = -a.rank; qa <= a.rank; ++qa) {
      const int qb = q - qa;
      if (std::abs(qb) > b.rank) continue;
      const double cg =
          angmom::clebsch_gordan(2 * a.rank, 2 * qa, 2 * b.rank, 2 * qb, 2 * k, 2 * q);
      if (cg == 0.0) continue;
      t.comp[q + k] += cg * a.comp[qa + a.rank] * b.comp[qb + b.rank];
    }
  return t;
}

// q = 0 component of [a(1) (x) b(2)]_k on the product space, atom 1 slow:
// index i = i1 * dim2 + i2.
inline Eigen::MatrixXd couple_atoms_q0(const tensor_op& a, const tensor_op& b, int k) {
  const Eigen::Index d = a.comp[0].rows() * b.comp[0].rows();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(d, d);
  for (int qa = -a.rank; qa <= a.rank; ++qa) {
    if (std::abs(qa) > b.rank) continue;
    const double cg = angmom::clebsch_gordan(2 * a.rank, 2 * qa, 2 * b.rank, -2 * qa, 2 * k, 0);
    if (cg == 0.0) continue;
    out += cg * Eigen::kroneckerProduct(a.comp[qa + a.rank], b.comp[-qa + b.rank]).eval();
  }
  return out;
}

}  // namespace detail

inline constexpr std::array<const char*, 7> strength_labels = {
    "v0_1", "v2_1", "v0_2", "v2_2", "v0_3", "v2_3", "v4_1"};

// The seven q = 0 operators on the product space (dimension (2j+1)^2).
struct operator_set {
  int two_j = 0;
  std::array<Eigen::MatrixXd, 7> q0;
};

inline operator_set build_operators(int two_j) {
  operator_set out;
  out.two_j = two_j;
  const int dim = two_j + 1;
  const auto j1 = detail::j_tensor(two_j);
  const auto quad = detail::couple(j1, j1, 2);
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(dim, dim);
  out.q0[0] = Eigen::MatrixXd::Identity(dim * dim, dim * dim);
  out.q0[1] = Eigen::kroneckerProduct(quad.comp[2], eye).eval() +
              Eigen::kroneckerProduct(eye, quad.comp[2]).eval();
  out.q0[2] = detail::couple_atoms_q0(j1, j1, 0);
  out.q0[3] = detail::couple_atoms_q0(j1, j1, 2);
  out.q0[4] = detail::couple_atoms_q0(quad, quad, 0);
  out.q0[5] = detail::couple_atoms_q0(quad, quad, 2);
  out.q0[6] = detail::couple_atoms_q0(quad, quad, 4);
  return out;
}

// One symmetrized basis state, stored with two_m1 >= two_m2; the pair with
// m1 = m2 exists only when eps * sigma = +1.
struct pair_state {
  int two_m1 = 0;
  int two_m2 = 0;
  bool equal() const { return two_m1 == two_m2; }
};

// All symmetrized states with fixed Omega = m1 + m2 >= 0 (an integer for
// identical atoms) and fixed gerade/ungerade character sigma.
struct sym_block {
  int omega = 0;
  int sigma = 0;  // +1 gerade, -1 ungerade
  std::vector<pair_state> states;  // ascending two_m1
};

// Blocks ordered by Omega ascending, gerade before ungerade; empty blocks
// are dropped.
inline std::vector<sym_block> symmetrized_blocks(int two_j) {
  const int eps = epsilon(two_j);
  std::vector<sym_block> out;
  for (int omega = 0; omega <= two_j; ++omega)
    for (int sigma : {+1, -1}) {
      sym_block blk;
      blk.omega = omega;
      blk.sigma = sigma;
      for (int tm1 = -two_j; tm1 <= two_j; tm1 += 2) {
        const int tm2 = 2 * omega - tm1;
        if (tm2 > tm1 || tm2 < -two_j) continue;
        if (tm1 == tm2 && eps * sigma != +1) continue;
        blk.states.push_back({tm1, tm2});
      }
      if (!blk.states.empty()) out.push_back(std::move(blk));
    }
  return out;
}

// Project a product-space operator that commutes with atom exchange onto
// one symmetrized block.  The combination |m1 m2> + s |m2 m1> with
// s = eps * sigma gives the element 2 Na Nb (direct + s * exchanged) with
// Na = 1/2 for an equal pair and 1/sqrt(2) otherwise.
inline Eigen::MatrixXd block_matrix(const Eigen::MatrixXd& op, const sym_block& blk,
                                    int two_j) {
  const int dim = two_j + 1;
  const int s = epsilon(two_j) * blk.sigma;
  const auto pidx = [&](int tm1, int tm2) {
    return ((tm1 + two_j) / 2) * dim + (tm2 + two_j) / 2;
  };
  const int n = static_cast<int>(blk.states.size());
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  Eigen::MatrixXd out(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      const auto& sa = blk.states[a];
      const auto& sb = blk.states[b];
      const double na = sa.equal() ? 0.5 : inv_sqrt2;
      const double nb = sb.equal() ? 0.5 : inv_sqrt2;
      const double direct = op(pidx(sa.two_m1, sa.two_m2), pidx(sb.two_m1, sb.two_m2));
      const double exch = op(pidx(sa.two_m1, sa.two_m2), pidx(sb.two_m2, sb.two_m1));
      out(a, b) = 2.0 * na * nb * (direct + s * exch);
    }
  return out;
}

// One adiabatic potential at fixed R.  n is 1-based and counts up in
// energy inside the (Omega, sigma) block.  For Omega = 0 the reflection
// label is +1 (gerade) or -1 (ungerade), a consequence of the exchange
// construction; it is 0 for Omega > 0.
struct adiabat {
  int n = 0;
  int omega = 0;
  int sigma = 0;
  int reflection = 0;
  double energy = 0.0;
  int block = 0;           // index into adiabat_set::blocks
  Eigen::VectorXd coeffs;  // eigenvector over the block's pair states
};

struct adiabat_set {
  int two_j = 0;
  std::vector<sym_block> blocks;
  std::vector<adiabat> states;  // sorted by energy
};

// "0_g^+", "0_u^-", "1_u", "12_g", ...
inline std::string label(const adiabat& a) {
  std::string out = std::to_string(a.omega);
  out += '_';
  out += (a.sigma > 0) ? 'g' : 'u';
  if (a.omega == 0) out += (a.reflection > 0) ? "^+" : "^-";
  return out;
}

inline adiabat_set adiabats(const operator_set& ops, const std::array<double, 7>& strengths) {
  adiabat_set out;
  out.two_j = ops.two_j;
  out.blocks = symmetrized_blocks(ops.two_j);
  for (int bi = 0; bi < static_cast<int>(out.blocks.size()); ++bi) {
    const auto& blk = out.blocks[bi];
    const int n = static_cast<int>(blk.states.size());
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
    for (int a = 0; a < 7; ++a) {
      if (strengths[a] == 0.0) continue;
      h += strengths[a] * block_matrix(ops.q0[a], blk, ops.two_j);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    for (int k = 0; k < n; ++k) {
      adiabat ad;
      ad.n = k + 1;
      ad.omega = blk.omega;
      ad.sigma = blk.sigma;
      ad.reflection = (blk.omega == 0) ? blk.sigma : 0;
      ad.energy = es.eigenvalues()(k);
      ad.block = bi;
      ad.coeffs = es.eigenvectors().col(k);
      out.states.push_back(std::move(ad));
    }
  }
  std::stable_sort(out.states.begin(), out.states.end(),
                   [](const adiabat& a, const adiabat& b) {
                     if (a.energy != b.energy) return a.energy < b.energy;
                     if (a.omega != b.omega) return a.omega < b.omega;
                     if (a.sigma != b.sigma) return a.sigma > b.sigma;
                     return a.n < b.n;
                   });
  return out;
}

// Closed-form adiabat of the two-tensor model (identity plus single-atom
// quadrupoles): every symmetrized state built from the pair (m1, m2) has
// energy v0_1 + v2_1 [3 (m1^2 + m2^2) - 2 j (j+1)] / sqrt(6).
inline double model_energy(int two_m1, int two_m2, int two_j, double v0_1, double v2_1) {
  const double j = 0.5 * two_j;
  const double m1 = 0.5 * two_m1;
  const double m2 = 0.5 * two_m2;
  return v0_1 + v2_1 * (3.0 * (m1 * m1 + m2 * m2) - 2.0 * j * (j + 1.0)) / std::sqrt(6.0);
}

// Diagonal (product-basis) shift produced by the two atom-atom dipole
// operators: (-v0_2 / sqrt(3) + 2 v2_2 / sqrt(6)) m1 m2.
inline double first_order_splitting(int two_m1, int two_m2, double v0_2, double v2_2) {
  return (-v0_2 / std::sqrt(3.0) + 2.0 * v2_2 / std::sqrt(6.0)) * (0.5 * two_m1) *
         (0.5 * two_m2);
}

// One observed adiabat position at fixed R, identified by its labels.
struct observation {
  int n = 1;
  int omega = 0;
  int sigma = 0;
  double energy = 0.0;  // absolute potential, cm^-1
};

struct fit_options {
  // Which strengths to fit; the rest are held at initial[].  The identity
  // strength cannot be fitted from splittings: requesting active[0] sets
  // rank_deficient and drops it from the solve.
  std::array<bool, 7> active{false, true, false, false, false, false, false};
  std::array<double, 7> initial{};
  double u_splitting = 1.0;     // one-sigma uncertainty of each splitting, cm^-1
  bool derive_isotropic = true; // anchor v0_1 so the stretched level is exact
  int max_iterations = 50;
  double tolerance = 1e-12;     // on the change of fitted strengths
};

struct fit_result {
  std::array<double, 7> strengths{};
  std::array<double, 7> u{};
  double chi2 = 0.0;
  double chi2_nu = 0.0;
  double max_residual = 0.0;  // largest |observed - model| splitting, cm^-1
  int n_splittings = 0;
  int n_free = 0;             // rank of the design matrix actually used
  int iterations = 0;
  bool converged = false;
  bool rank_deficient = false;
};

// Iterated linear least squares on the splittings E(stretched) - E(level).
// With the eigenvectors frozen, every block eigenvalue is linear in the
// strengths, so each pass is a weighted linear solve; re-diagonalizing and
// repeating converges in a few passes.  The observations must include the
// stretched state (Omega = 2j), whose position anchors v0_1 when
// derive_isotropic is set.
inline fit_result fit_strengths(const std::vector<observation>& obs,
                                const operator_set& ops, const fit_options& opt) {
  if (opt.u_splitting <= 0.0) throw std::invalid_argument("u_splitting must be positive");
  const int two_j = ops.two_j;
  const auto blocks = symmetrized_blocks(two_j);
  const auto find_block = [&](int omega, int sigma) {
    for (int i = 0; i < static_cast<int>(blocks.size()); ++i)
      if (blocks[i].omega == omega && blocks[i].sigma == sigma) return i;
    return -1;
  };

  int str_idx = -1;
  for (int i = 0; i < static_cast<int>(obs.size()); ++i) {
    const int bi = find_block(obs[i].omega, obs[i].sigma);
    if (bi < 0)
      throw std::invalid_argument("observation labels (" + std::to_string(obs[i].omega) +
                                  (obs[i].sigma > 0 ? ", g" : ", u") +
                                  ") match no symmetrized block");
    if (obs[i].n < 1 || obs[i].n > static_cast<int>(blocks[bi].states.size()))
      throw std::invalid_argument("observation n out of range for its block");
    if (obs[i].omega == two_j) {
      if (str_idx >= 0) throw std::invalid_argument("duplicate stretched-state observation");
      str_idx = i;
    }
  }
  if (str_idx < 0)
    throw std::invalid_argument("observations must include the stretched state");

  fit_result out;
  out.strengths = opt.initial;

  std::vector<int> act;
  for (int a = 0; a < 7; ++a)
    if (opt.active[a]) {
      if (a == 0) {
        out.rank_deficient = true;  // identity drops out of every splitting
        continue;
      }
      act.push_back(a);
    }

  // Per-block operator matrices for the blocks that carry observations.
  std::vector<int> obs_block(obs.size());
  std::vector<char> block_used(blocks.size(), 0);
  for (std::size_t i = 0; i < obs.size(); ++i) {
    obs_block[i] = find_block(obs[i].omega, obs[i].sigma);
    block_used[obs_block[i]] = 1;
  }
  std::vector<std::array<Eigen::MatrixXd, 7>> bmat(blocks.size());
  for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
    if (!block_used[bi]) continue;
    for (int a = 0; a < 7; ++a) bmat[bi][a] = block_matrix(ops.q0[a], blocks[bi], two_j);
  }

  // Stretched block is 1 x 1: its energy is exactly sum_a theta_a * S[a].
  std::array<double, 7> S{};
  for (int a = 0; a < 7; ++a) S[a] = bmat[obs_block[str_idx]][a](0, 0);

  const int n_split = static_cast<int>(obs.size()) - 1;
  out.n_splittings = n_split;
  const double e_str_obs = obs[str_idx].energy;

  // w(i, a) = <v_i | B_a | v_i> with v_i the current eigenvector of the
  // observed level; row i of the design is S[a] - w(i, a).
  Eigen::MatrixXd w(n_split, 7);
  const auto build_w = [&](const std::array<double, 7>& theta) {
    std::vector<Eigen::MatrixXd> vecs(blocks.size());
    for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
      if (!block_used[bi]) continue;
      const int nb = static_cast<int>(blocks[bi].states.size());
      Eigen::MatrixXd h = Eigen::MatrixXd::Zero(nb, nb);
      for (int a = 0; a < 7; ++a)
        if (theta[a] != 0.0) h += theta[a] * bmat[bi][a];
      vecs[bi] = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(h).eigenvectors();
    }
    int row = 0;
    for (std::size_t i = 0; i < obs.size(); ++i) {
      if (static_cast<int>(i) == str_idx) continue;
      const Eigen::VectorXd v = vecs[obs_block[i]].col(obs[i].n - 1);
      for (int a = 0; a < 7; ++a) w(row, a) = v.dot(bmat[obs_block[i]][a] * v);
      ++row;
    }
  };

  const auto assemble = [&](Eigen::MatrixXd& jac, Eigen::VectorXd& rhs) {
    int row = 0;
    for (std::size_t i = 0; i < obs.size(); ++i) {
      if (static_cast<int>(i) == str_idx) continue;
      double y = e_str_obs - obs[i].energy;
      for (int a = 0; a < 7; ++a)
        if (!opt.active[a] || a == 0) y -= out.strengths[a] * (S[a] - w(row, a));
      rhs(row) = y;
      for (std::size_t c = 0; c < act.size(); ++c) jac(row, c) = S[act[c]] - w(row, act[c]);
      ++row;
    }
  };

  const int n_act = static_cast<int>(act.size());
  Eigen::MatrixXd jac(n_split, n_act);
  Eigen::VectorXd rhs(n_split);
  Eigen::BDCSVD<Eigen::MatrixXd> svd;

  if (n_act == 0 || n_split == 0) {
    out.converged = true;
    if (n_act > 0 && n_split == 0) out.rank_deficient = true;
  } else {
    for (out.iterations = 1; out.iterations <= opt.max_iterations; ++out.iterations) {
      build_w(out.strengths);
      assemble(jac, rhs);
      svd.compute(jac, Eigen::ComputeThinU | Eigen::ComputeThinV);
      svd.setThreshold(1e-10);
      const Eigen::VectorXd theta = svd.solve(rhs);
      double delta = 0.0;
      double scale = 1.0;
      for (int c = 0; c < n_act; ++c) {
        delta = std::max(delta, std::abs(theta(c) - out.strengths[act[c]]));
        scale = std::max(scale, std::abs(theta(c)));
        out.strengths[act[c]] = theta(c);
      }
      if (delta <= opt.tolerance * scale) {
        out.converged = true;
        break;
      }
    }
  }

  // Uncertainties and rank from the design at the converged strengths.
  if (n_act > 0 && n_split > 0) {
    build_w(out.strengths);
    assemble(jac, rhs);
    svd.compute(jac, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(1e-10);
    out.n_free = static_cast<int>(svd.rank());
    if (out.n_free < n_act) out.rank_deficient = true;
    for (int c = 0; c < n_act; ++c) {
      double var = 0.0;
      for (int k = 0; k < out.n_free; ++k) {
        const double t = svd.matrixV()(c, k) / svd.singularValues()(k);
        var += t * t;
      }
      out.u[act[c]] = opt.u_splitting * std::sqrt(var);
    }
  }

  if (opt.derive_isotropic) {
    double aniso = 0.0;
    double var0 = 0.0;
    for (int a = 1; a < 7; ++a) aniso += out.strengths[a] * S[a];
    out.strengths[0] = e_str_obs - aniso;
    // Propagate the fitted-strength covariance u^2 V diag(1/s^2) V^T
    // through theta_0 = E_str - sum_a theta_a S[a].
    for (int k = 0; k < out.n_free; ++k) {
      double proj = 0.0;
      for (int c = 0; c < n_act; ++c)
        proj += S[act[c]] * svd.matrixV()(c, k) / svd.singularValues()(k);
      var0 += proj * proj;
    }
    out.u[0] = opt.u_splitting * std::sqrt(var0);
  }

  // Final residuals from exact eigenvalues at the converged strengths.
  {
    std::vector<Eigen::VectorXd> vals(blocks.size());
    for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
      if (!block_used[bi]) continue;
      const int nb = static_cast<int>(blocks[bi].states.size());
      Eigen::MatrixXd h = Eigen::MatrixXd::Zero(nb, nb);
      for (int a = 0; a < 7; ++a)
        if (out.strengths[a] != 0.0) h += out.strengths[a] * bmat[bi][a];
      vals[bi] = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(h).eigenvalues();
    }
    double e_str_model = 0.0;
    for (int a = 0; a < 7; ++a) e_str_model += out.strengths[a] * S[a];
    for (std::size_t i = 0; i < obs.size(); ++i) {
      if (static_cast<int>(i) == str_idx) continue;
      const double model = e_str_model - vals[obs_block[i]](obs[i].n - 1);
      const double r = (e_str_obs - obs[i].energy) - model;
      out.chi2 += (r / opt.u_splitting) * (r / opt.u_splitting);
      out.max_residual = std::max(out.max_residual, std::abs(r));
    }
    const int dof = n_split - out.n_free;
    out.chi2_nu = dof > 0 ? out.chi2 / dof : 0.0;
  }
  return out;
}

// One row of a relative-level table: adiabat positions quoted as depths
// against an arbitrary per-distance zero (a deeper level has a larger
// u_rel), the usual convention of digitized well-depth tables.
struct relative_row {
  double r = 0.0;   // internuclear distance, bohr
  int n = 1;
  int omega = 0;
  int sigma = 0;       // +1 gerade, -1 ungerade
  int reflection = 0;  // +1 / -1 for omega = 0, otherwise 0
  double u_rel = 0.0;  // depth below the table's zero, cm^-1
};

// CSV with header "r,n,omega,sigma,reflection,u_rel"; sigma is "g" or "u",
// reflection is "+", "-", or "0".  Malformed or inconsistent rows are
// collected and reported together.
inline std::vector<relative_row> parse_relative_csv(std::istream& in) {
  std::vector<relative_row> out;
  std::vector<std::string> bad;
  std::string row;
  int line_no = 0;
  bool saw_header = false;
  const std::vector<std::string> expected = {"r", "n", "omega", "sigma", "reflection", "u_rel"};
  while (std::getline(in, row)) {
    ++line_no;
    const std::string t = csv::trim(row);
    if (t.empty() || t[0] == '#') continue;
    const auto f = csv::split(t);
    if (!saw_header) {
      if (f != expected)
        throw csv::parse_error("relative-level table must start with header r,n,omega,sigma,reflection,u_rel");
      saw_header = true;
      continue;
    }
    const auto reject = [&](const std::string& why) {
      bad.push_back("line " + std::to_string(line_no) + ": " + why);
    };
    if (f.size() != 6) {
      reject("expected 6 fields, got " + std::to_string(f.size()));
      continue;
    }
    try {
      relative_row r{};
      r.r = std::stod(f[0]);
      r.n = std::stoi(f[1]);
      r.omega = std::stoi(f[2]);
      if (f[3] == "g") r.sigma = +1;
      else if (f[3] == "u") r.sigma = -1;
      else throw std::invalid_argument("sigma must be g or u");
      if (f[4] == "+") r.reflection = +1;
      else if (f[4] == "-") r.reflection = -1;
      else if (f[4] == "0") r.reflection = 0;
      else throw std::invalid_argument("reflection must be +, -, or 0");
      r.u_rel = std::stod(f[5]);
      if (r.r <= 0.0) throw std::invalid_argument("distance must be positive");
      if (r.n < 1) throw std::invalid_argument("n must be >= 1");
      if (r.omega < 0) throw std::invalid_argument("omega must be >= 0");
      if (r.omega == 0 && r.reflection != r.sigma)
        throw std::invalid_argument("omega = 0 reflection must match g/u (0_g^+, 0_u^-)");
      if (r.omega > 0 && r.reflection != 0)
        throw std::invalid_argument("reflection label applies only to omega = 0");
      out.push_back(r);
    } catch (const std::exception& e) {
      reject(e.what());
    }
  }
  if (!saw_header)
    throw csv::parse_error("relative-level table must start with header r,n,omega,sigma,reflection,u_rel");
  if (!bad.empty())
    throw csv::parse_error("relative-level table has " + std::to_string(bad.size()) +
                               " bad row(s)",
                           bad);
  return out;
}

// Anchor relative rows at one distance to the absolute stretched-state
// potential v_ss there: V_abs = v_ss - (u_rel - u_rel[stretched]), which
// cancels the arbitrary zero of the depth table.  The rows at that
// distance must include the stretched state.
inline std::vector<observation> anchor_relative(const std::vector<relative_row>& rows,
                                                double r, double v_ss, int two_j) {
  double u_str = 0.0;
  bool have_str = false;
  for (const auto& row : rows) {
    if (std::abs(row.r - r) > 1e-9) continue;
    if (row.omega == two_j) {
      if (have_str) throw std::invalid_argument("duplicate stretched-state row at this distance");
      u_str = row.u_rel;
      have_str = true;
    }
  }
  if (!have_str)
    throw std::invalid_argument("no stretched-state row at the requested distance");
  std::vector<observation> out;
  for (const auto& row : rows) {
    if (std::abs(row.r - r) > 1e-9) continue;
    out.push_back({row.n, row.omega, row.sigma, v_ss - (row.u_rel - u_str)});
  }
  return out;
}

}  // namespace lndimer::spintensor
