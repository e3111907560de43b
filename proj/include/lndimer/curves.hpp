#pragma once

// Assembly of the seven interaction-strength curves V_k^(i)(R) from the
// bundled potential tables and the computed dispersion coefficients.
//
// The spin-stretched potential and the leading anisotropic strength are
// tabulated at discrete separations; everything in this header works in
// cm^-1 and bohr.  A tabulated curve is evaluated piecewise:
//   R below the first node        linear extrapolation through the
//                                 first two nodes,
//   first node .. R_join          Akima spline built on R^6 V(R) so the
//                                 interpolant varies slowly at large R,
//   beyond R_join                 dispersive tail C6/R^6 + C8/R^8 + C10/R^10.
// R_join sits half a bohr beyond the last node and the tail value there
// is appended as an extra spline node, which makes both handovers exact.
// For the spin-stretched curve C6 is fixed to the computed C6_ss and
// C8/C10 are anchored on the last two table nodes; the anisotropic
// curve keeps its pure computed C6.  The isotropic strength is not
// assembled independently: it is the pointwise combination
//   V_0^(1)(R) = V_ss(R) - 2j(2j-1)/sqrt(6) V_2^(1)(R),
// which reproduces the tabulated isotropic values and tends to C_0^(1)
// at long range.  The five weak strengths are pure power laws; the
// (2,2) channel carries the magnetic dipole-dipole R^-3 term and the
// (4,1) channel the electrostatic quadrupole-quadrupole R^-5 term.

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <istream>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "lndimer/constants.hpp"
#include "lndimer/csv.hpp"
#include "lndimer/dispersion.hpp"

namespace lndimer::curves {

// Piecewise cubic Hermite interpolant on strictly increasing nodes.
// Construction chooses the node derivatives: Akima's weighted slopes or
// a natural cubic spline (used as the small-table fallback).  Both are
// exact on the nodes; evaluation outside the node range throws.
class interpolant {
 public:
  interpolant() = default;

  static interpolant akima(std::vector<double> x, std::vector<double> y) {
    check_nodes(x, y, 5);
    const std::size_t n = x.size();
    // interval slopes, extended two intervals past each end
    std::vector<double> m(n + 3);
    for (std::size_t i = 0; i + 1 < n; ++i) m[i + 2] = (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
    m[1] = 2.0 * m[2] - m[3];
    m[0] = 2.0 * m[1] - m[2];
    m[n + 1] = 2.0 * m[n] - m[n - 1];
    m[n + 2] = 2.0 * m[n + 1] - m[n];

    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) {
      // node i sees slopes m[i] .. m[i+3] of the extended array
      const double w1 = std::abs(m[i + 3] - m[i + 2]);
      const double w2 = std::abs(m[i + 1] - m[i]);
      d[i] = (w1 + w2 > 0.0) ? (w1 * m[i + 1] + w2 * m[i + 2]) / (w1 + w2)
                             : 0.5 * (m[i + 1] + m[i + 2]);
    }
    return interpolant(std::move(x), std::move(y), std::move(d));
  }

  static interpolant natural_cubic(std::vector<double> x, std::vector<double> y) {
    check_nodes(x, y, 2);
    const std::size_t n = x.size();
    // second derivatives z with natural ends, Thomas solve
    std::vector<double> z(n, 0.0);
    if (n > 2) {
      std::vector<double> diag(n - 2), upper(n - 2), rhs(n - 2);
      for (std::size_t i = 1; i + 1 < n; ++i) {
        const double h0 = x[i] - x[i - 1], h1 = x[i + 1] - x[i];
        diag[i - 1] = 2.0 * (h0 + h1);
        upper[i - 1] = h1;
        rhs[i - 1] = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
      }
      for (std::size_t i = 1; i < n - 2; ++i) {
        const double lower = x[i + 1] - x[i];  // h_i couples rows i-1 and i
        const double f = lower / diag[i - 1];
        diag[i] -= f * upper[i - 1];
        rhs[i] -= f * rhs[i - 1];
      }
      for (std::size_t i = n - 2; i-- > 0;) {
        z[i + 1] = rhs[i];
        if (i + 1 < n - 2) z[i + 1] -= upper[i] * z[i + 2];
        z[i + 1] /= diag[i];
      }
    }
    // node first derivatives reproduce the same cubics through Hermite
    std::vector<double> d(n);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const double h = x[i + 1] - x[i];
      d[i] = (y[i + 1] - y[i]) / h - h * (2.0 * z[i] + z[i + 1]) / 6.0;
    }
    const double h = x[n - 1] - x[n - 2];
    d[n - 1] = (y[n - 1] - y[n - 2]) / h + h * (z[n - 2] + 2.0 * z[n - 1]) / 6.0;
    return interpolant(std::move(x), std::move(y), std::move(d));
  }

  double operator()(double r) const {
    if (x_.empty()) throw std::logic_error("interpolant: evaluated before construction");
    if (r < x_.front() || r > x_.back())
      throw std::domain_error("interpolant: " + std::to_string(r) + " outside [" +
                              std::to_string(x_.front()) + ", " + std::to_string(x_.back()) + "]");
    const auto it = std::upper_bound(x_.begin(), x_.end(), r);
    const std::size_t i = std::min<std::size_t>(
        x_.size() - 2, it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1);
    const double h = x_[i + 1] - x_[i];
    const double slope = (y_[i + 1] - y_[i]) / h;
    const double c = (3.0 * slope - 2.0 * d_[i] - d_[i + 1]) / h;
    const double e = (d_[i] + d_[i + 1] - 2.0 * slope) / (h * h);
    const double s = r - x_[i];
    return y_[i] + s * (d_[i] + s * (c + s * e));
  }

  bool empty() const { return x_.empty(); }
  double front() const { return x_.front(); }
  double back() const { return x_.back(); }

 private:
  interpolant(std::vector<double> x, std::vector<double> y, std::vector<double> d)
      : x_(std::move(x)), y_(std::move(y)), d_(std::move(d)) {}

  static void check_nodes(const std::vector<double>& x, const std::vector<double>& y,
                          std::size_t minimum) {
    if (x.size() != y.size()) throw std::invalid_argument("interpolant: size mismatch");
    if (x.size() < minimum)
      throw std::invalid_argument("interpolant: need at least " + std::to_string(minimum) +
                                  " nodes, got " + std::to_string(x.size()));
    for (std::size_t i = 0; i + 1 < x.size(); ++i)
      if (!(x[i] < x[i + 1]))
        throw std::invalid_argument("interpolant: nodes must increase strictly");
  }

  std::vector<double> x_, y_, d_;
};

// Akima when the table is large enough, natural cubic below five nodes
// (with a warning), error below two.
inline interpolant akima_interpolate(std::vector<double> x, std::vector<double> y,
                                     std::vector<std::string>* warnings = nullptr) {
  if (x.size() < 2)
    throw std::invalid_argument("akima_interpolate: need at least 2 nodes, got " +
                                std::to_string(x.size()));
  if (x.size() >= 5) return interpolant::akima(std::move(x), std::move(y));
  if (warnings)
    warnings->push_back("only " + std::to_string(x.size()) +
                        " nodes; falling back to a natural cubic spline");
  return interpolant::natural_cubic(std::move(x), std::move(y));
}

// Golden-section search for the minimum of a unimodal function.
template <class F>
double minimize(F&& f, double lo, double hi, double tol = 1e-6) {
  if (!(lo < hi)) throw std::invalid_argument("minimize: empty bracket");
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double c = b - phi * (b - a), d = a + phi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

// ---------------------------------------------------------------------------
// bundled tables

struct vss_table {
  std::vector<double> r;  // bohr, strictly increasing
  std::vector<double> v;  // cm^-1
};

struct strength_table {
  std::vector<double> r;
  std::vector<std::optional<double>> v0;  // isotropic column, may have gaps
  std::vector<double> v2;
};

namespace detail {

inline bool skip_row(const std::string& line) {
  const std::string t = csv::trim(line);
  return t.empty() || t.front() == '#';
}

inline void check_increasing(const std::vector<double>& r, const char* what) {
  for (std::size_t i = 0; i + 1 < r.size(); ++i)
    if (!(r[i] < r[i + 1]))
      throw csv::parse_error(std::string(what) + ": separations must increase strictly");
}

}  // namespace detail

inline vss_table parse_vss(std::istream& in) {
  vss_table out;
  std::vector<std::string> bad;
  std::string line;
  bool saw_header = false;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::skip_row(line)) continue;
    const auto f = csv::split(line);
    if (!saw_header) {
      if (f != std::vector<std::string>{"r_bohr", "v_cm"})
        throw csv::parse_error("potential table: expected header r_bohr,v_cm");
      saw_header = true;
      continue;
    }
    if (f.size() != 2) {
      bad.push_back("line " + std::to_string(lineno) + ": expected 2 fields, got " +
                    std::to_string(f.size()));
      continue;
    }
    try {
      out.r.push_back(std::stod(f[0]));
      out.v.push_back(std::stod(f[1]));
    } catch (const std::exception& e) {
      out.r.resize(out.v.size());
      bad.push_back("line " + std::to_string(lineno) + ": malformed field (" + e.what() + ")");
    }
  }
  if (!saw_header) throw csv::parse_error("potential table: missing header r_bohr,v_cm");
  if (!bad.empty()) {
    std::string msg = "potential table has " + std::to_string(bad.size()) + " invalid row(s)";
    for (const auto& b : bad) msg += "\n  " + b;
    throw csv::parse_error(msg, bad);
  }
  detail::check_increasing(out.r, "potential table");
  return out;
}

inline strength_table parse_strength_table(std::istream& in) {
  strength_table out;
  std::vector<std::string> bad;
  std::string line;
  bool saw_header = false;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::skip_row(line)) continue;
    const auto f = csv::split(line);
    if (!saw_header) {
      if (f != std::vector<std::string>{"r_bohr", "v0_1_cm", "v2_1_cm"})
        throw csv::parse_error("strength table: expected header r_bohr,v0_1_cm,v2_1_cm");
      saw_header = true;
      continue;
    }
    if (f.size() != 3) {
      bad.push_back("line " + std::to_string(lineno) + ": expected 3 fields, got " +
                    std::to_string(f.size()));
      continue;
    }
    try {
      const double r = std::stod(f[0]);
      std::optional<double> v0;
      if (!f[1].empty()) v0 = std::stod(f[1]);
      const double v2 = std::stod(f[2]);
      out.r.push_back(r);
      out.v0.push_back(v0);
      out.v2.push_back(v2);
    } catch (const std::exception& e) {
      bad.push_back("line " + std::to_string(lineno) + ": malformed field (" + e.what() + ")");
    }
  }
  if (!saw_header)
    throw csv::parse_error("strength table: missing header r_bohr,v0_1_cm,v2_1_cm");
  if (!bad.empty()) {
    std::string msg = "strength table has " + std::to_string(bad.size()) + " invalid row(s)";
    for (const auto& b : bad) msg += "\n  " + b;
    throw csv::parse_error(msg, bad);
  }
  detail::check_increasing(out.r, "strength table");
  return out;
}

inline vss_table load_vss(const species_params& sp, const std::string& dir = "") {
  const std::string path = data_dir(dir) + "/" + sp.vss_file;
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open potential table " + path);
  return parse_vss(in);
}

inline strength_table load_strength_table(const species_params& sp, const std::string& dir = "") {
  const std::string path = data_dir(dir) + "/" + sp.strengths_file;
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open strength table " + path);
  return parse_strength_table(in);
}

// ---------------------------------------------------------------------------
// assembled curves

// One interaction strength V(R) in cm^-1 over R in bohr.  Members are
// public so the handover radii and branch formulas stay inspectable.
struct strength_curve {
  std::string name;  // v0_1, v2_1, v0_2, v2_2, v0_3, v2_3, v4_1 or v_ss

  // hard validity range; evaluation outside throws
  double r_min_valid = 0.5;
  double r_max_valid = 1.0e4;

  // tabulated branch (absent for the pure long-range strengths)
  bool has_table = false;
  double lin_a = 0.0, lin_b = 0.0;  // V = lin_a + lin_b R below the first node
  interpolant spline;               // on R^6 V(R), first node .. r_join
  double r_join = 0.0;

  // long-range form, cm^-1 bohr^n
  double c6 = 0.0, c8 = 0.0, c10 = 0.0;
  double d3 = 0.0;  // magnetic dipole-dipole
  double q5 = 0.0;  // electric quadrupole-quadrupole

  // pointwise combination V = base - factor * sub (isotropic strength)
  std::shared_ptr<const strength_curve> comb_base, comb_sub;
  double comb_factor = 0.0;

  // uncertainty metadata, cm^-1: a constant sigma over the tabulated
  // range (anisotropic strength), or a C6-like sigma/R^6 with separate
  // table-range and tail coefficients (spin-stretched curve)
  double u_const = 0.0;
  double u_c6_table = 0.0, u_c6_tail = 0.0;
  double r_u_switch = 0.0;

  double tail(double r) const {
    const double r2 = r * r, r3 = r2 * r, r6 = r3 * r3;
    return c6 / r6 + c8 / (r6 * r2) + c10 / (r6 * r2 * r2) + d3 / r3 + q5 / (r3 * r2);
  }

  double operator()(double r) const {
    if (!(r >= r_min_valid && r <= r_max_valid))
      throw std::domain_error(name + ": R = " + std::to_string(r) + " outside validity [" +
                              std::to_string(r_min_valid) + ", " + std::to_string(r_max_valid) +
                              "] bohr");
    if (comb_base) return (*comb_base)(r) - comb_factor * (*comb_sub)(r);
    if (has_table) {
      if (r < spline.front()) return lin_a + lin_b * r;
      if (r <= r_join) {
        const double r3 = r * r * r;
        return spline(r) / (r3 * r3);
      }
    }
    return tail(r);
  }

  double u_at(double r) const {
    const double r3 = r * r * r, r6 = r3 * r3;
    if (comb_base) {
      const double ub = comb_base->u_at(r), us = comb_factor * comb_sub->u_at(r);
      return std::sqrt(ub * ub + us * us);
    }
    if (u_const > 0.0 && has_table && r <= r_join) return u_const;
    if (u_c6_table > 0.0 && r < r_u_switch) return u_c6_table / r6;
    return u_c6_tail / r6;
  }
};

namespace detail {

// C8 and C10 from the last two table nodes with C6 held fixed, so the
// dispersive branch passes through both nodes exactly.
inline std::pair<double, double> anchor_c8_c10(const std::vector<double>& r,
                                               const std::vector<double>& v, double c6) {
  const std::size_t n = r.size();
  const double r1 = r[n - 2], r2 = r[n - 1];
  const double p18 = std::pow(r1, -8.0), p110 = std::pow(r1, -10.0);
  const double p28 = std::pow(r2, -8.0), p210 = std::pow(r2, -10.0);
  const double b1 = v[n - 2] - c6 * std::pow(r1, -6.0);
  const double b2 = v[n - 1] - c6 * std::pow(r2, -6.0);
  const double det = p18 * p210 - p110 * p28;
  if (det == 0.0) throw std::domain_error("dispersive anchor: degenerate node pair");
  return {(b1 * p210 - b2 * p110) / det, (p18 * b2 - p28 * b1) / det};
}

// Shared assembly of a tabulated curve: linear short range through the
// first two nodes, Akima on R^6 V up to half a bohr past the last node,
// where the spline hands over to the dispersive tail exactly.
inline void attach_table(strength_curve& s, const std::vector<double>& r,
                         const std::vector<double>& v, std::vector<std::string>* warnings) {
  if (r.size() < 2) throw std::invalid_argument(s.name + ": table needs at least 2 nodes");
  s.has_table = true;
  s.lin_b = (v[1] - v[0]) / (r[1] - r[0]);
  s.lin_a = v[0] - s.lin_b * r[0];
  s.r_join = r.back() + 0.5;

  const auto pow6 = [](double t) { const double t3 = t * t * t; return t3 * t3; };
  std::vector<double> x = r, y(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) y[i] = pow6(r[i]) * v[i];
  x.push_back(s.r_join);
  y.push_back(pow6(s.r_join) * s.tail(s.r_join));
  s.spline = akima_interpolate(std::move(x), std::move(y), warnings);
}

}  // namespace detail

// Spin-stretched potential: tabulated, C6 fixed to C6_ss, C8/C10
// anchored on the two outermost nodes.
inline strength_curve assemble_spin_stretched(const vss_table& table,
                                              const dispersion::dispersion_set& ds,
                                              std::vector<std::string>* warnings = nullptr) {
  strength_curve s;
  s.name = "v_ss";
  s.c6 = ds.c_ss * constants::hartree_to_invcm;
  const auto [c8, c10] = detail::anchor_c8_c10(table.r, table.v, s.c6);
  s.c8 = c8;
  s.c10 = c10;
  detail::attach_table(s, table.r, table.v, warnings);
  s.u_c6_table = 2.0 * ds.u[0] * constants::hartree_to_invcm;
  s.u_c6_tail = ds.u_ss * constants::hartree_to_invcm;
  s.r_u_switch = table.r.back();
  return s;
}

// Published one-sigma uncertainty of the tabulated anisotropic strength.
inline double tabulated_u_v2(const species_params& sp) {
  if (sp.name == "er") return 0.094;
  if (sp.name == "tm") return 0.40;
  throw std::invalid_argument("no tabulated strength uncertainty for species " + sp.name);
}

// Leading anisotropic strength: tabulated, pure computed C6 beyond.
inline strength_curve assemble_v2(const species_params& sp, const strength_table& table,
                                  const dispersion::dispersion_set& ds,
                                  std::vector<std::string>* warnings = nullptr) {
  strength_curve s;
  s.name = "v2_1";
  s.c6 = ds.value[1] * constants::hartree_to_invcm;
  detail::attach_table(s, table.r, table.v2, warnings);
  s.u_const = tabulated_u_v2(sp);
  s.u_c6_tail = ds.u[1] * constants::hartree_to_invcm;
  return s;
}

// One of the five weak strengths (channel index 2..6): a pure power
// law, with the extra R^-3 or R^-5 term where the channel carries one.
inline strength_curve assemble_weak(int channel, const dispersion::dispersion_set& ds) {
  if (channel < 2 || channel > 6)
    throw std::invalid_argument("assemble_weak: channel must be 2..6, got " +
                                std::to_string(channel));
  const auto [k, i] = dispersion::dispersion_set::labels[channel];
  strength_curve s;
  s.name = "v" + std::to_string(k) + "_" + std::to_string(i);
  s.c6 = ds.value[channel] * constants::hartree_to_invcm;
  if (channel == 3) s.d3 = ds.d2_2 * constants::hartree_to_invcm;
  if (channel == 6) s.q5 = ds.q4_1 * constants::hartree_to_invcm;
  s.u_c6_tail = ds.u[channel] * constants::hartree_to_invcm;
  return s;
}

// All seven strengths in channel order plus the spin-stretched curve.
struct strength_set {
  std::array<std::shared_ptr<const strength_curve>, 7> curve;
  std::shared_ptr<const strength_curve> vss;
  std::vector<std::string> warnings;

  const strength_curve& operator[](int a) const { return *curve.at(a); }
  const strength_curve& by_name(const std::string& name) const {
    if (name == "v_ss") return *vss;
    for (const auto& c : curve)
      if (c->name == name) return *c;
    throw std::invalid_argument("unknown strength curve " + name);
  }
};

inline strength_set assemble_all(const species_params& sp, const dispersion::dispersion_set& ds,
                                 const std::string& dir = "") {
  strength_set out;
  const vss_table vt = load_vss(sp, dir);
  const strength_table st = load_strength_table(sp, dir);

  out.vss = std::make_shared<strength_curve>(assemble_spin_stretched(vt, ds, &out.warnings));
  auto v2 = std::make_shared<strength_curve>(assemble_v2(sp, st, ds, &out.warnings));

  // isotropic strength as the pointwise combination; its long-range
  // fields record the effective tail (C6 reduces to C_0^(1) exactly)
  auto v0 = std::make_shared<strength_curve>();
  v0->name = "v0_1";
  v0->comb_base = out.vss;
  v0->comb_sub = v2;
  v0->comb_factor = sp.two_j * (sp.two_j - 1.0) / std::sqrt(6.0);
  v0->c6 = ds.value[0] * constants::hartree_to_invcm;
  v0->c8 = out.vss->c8;
  v0->c10 = out.vss->c10;

  out.curve[0] = v0;
  out.curve[1] = v2;
  for (int a = 2; a < 7; ++a)
    out.curve[a] = std::make_shared<strength_curve>(assemble_weak(a, ds));
  return out;
}

}  // namespace lndimer::curves
