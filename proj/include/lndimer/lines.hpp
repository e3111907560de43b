#pragma once

// Atomic line-list ingestion and conversion of measured line strengths
// (Einstein A coefficients or absorption oscillator strengths) into
// squared reduced electric-dipole matrix elements.
//
// File format: CSV with header
//   delta_e_cm,kind,strength,u_strength,two_j,source
// where kind is "A" (strength in 10^6 1/s) or "f" (dimensionless
// absorption oscillator strength), and two_j is twice the excited-state
// angular momentum as an integer; the fraction spelling "7" == "7/2" is
// also accepted.  Strength uncertainties are one standard deviation in
// the same units as the strength.
//
// Reduced matrix elements use the symmetric convention of angmom.hpp,
// so for an excited state |n b> and ground state |g j>:
//   A   = (4/3) (E_h/hbar) alpha^3 (dE/E_h)^3 |(g j||d||n b)|^2 / (2b+1)
//   f   = (2/3) (dE/E_h) |(g j||d||n b)|^2 / (2j+1)
// with the dipole operator in units of e a0.

#include <cmath>
#include <fstream>
#include <istream>
#include <stdexcept>
#include <string>
#include <vector>

#include "lndimer/constants.hpp"
#include "lndimer/csv.hpp"

namespace lndimer::lines {

enum class strength_kind { einstein_a, oscillator_f };

struct line_record {
  double delta_e_cm = 0.0;  // transition energy in cm^-1
  strength_kind kind = strength_kind::einstein_a;
  double strength = 0.0;    // A in 10^6 1/s, or f dimensionless
  double u_strength = 0.0;  // one-sigma uncertainty, same units
  int two_j = 0;            // twice the excited-state angular momentum
  std::string source;       // provenance tag, free text

  double delta_e_hartree() const { return delta_e_cm / constants::hartree_to_invcm; }
};

struct line_list {
  std::string species;
  int two_j_ground = 0;
  std::vector<line_record> records;
  std::vector<std::string> warnings;
};

using parse_error = csv::parse_error;

namespace detail {

// two_j column: plain integer means 2j; "n/2" means j = n/2, i.e. 2j = n
inline int parse_two_j(const std::string& s) {
  if (const auto slash = s.find('/'); slash != std::string::npos) {
    if (csv::trim(s.substr(slash + 1)) != "2") throw std::invalid_argument("bad fraction");
    return std::stoi(csv::trim(s.substr(0, slash)));
  }
  return std::stoi(s);
}

}  // namespace detail

// Parse and validate a line list.  Rows violating the electric-dipole
// selection rule b in {j-1, j, j+1}, with non-positive energy, or with
// malformed fields are collected and reported together in a parse_error
// that lists every offending row.  An empty file yields an empty list
// with a warning attached.
inline line_list parse_linelist(std::istream& in, const std::string& species,
                                int two_j_ground) {
  line_list out;
  out.species = species;
  out.two_j_ground = two_j_ground;

  std::vector<std::string> bad;
  std::string row;
  int lineno = 0;
  bool header_seen = false;
  while (std::getline(in, row)) {
    ++lineno;
    const std::string t = csv::trim(row);
    if (t.empty() || t.front() == '#') continue;
    if (!header_seen) {
      header_seen = true;
      if (t.find("delta_e_cm") == std::string::npos)
        bad.push_back("line " + std::to_string(lineno) + ": missing header row");
      continue;
    }
    const auto f = csv::split(t);
    if (f.size() != 6) {
      bad.push_back("line " + std::to_string(lineno) + ": expected 6 fields, got " +
                    std::to_string(f.size()));
      continue;
    }
    line_record rec;
    try {
      rec.delta_e_cm = std::stod(f[0]);
      if (f[1] == "A")
        rec.kind = strength_kind::einstein_a;
      else if (f[1] == "f")
        rec.kind = strength_kind::oscillator_f;
      else
        throw std::invalid_argument("kind must be A or f");
      rec.strength = std::stod(f[2]);
      rec.u_strength = std::stod(f[3]);
      rec.two_j = detail::parse_two_j(f[4]);
      rec.source = f[5];
    } catch (const std::exception& e) {
      bad.push_back("line " + std::to_string(lineno) + ": malformed field (" + e.what() + ")");
      continue;
    }
    if (rec.delta_e_cm <= 0.0) {
      bad.push_back("line " + std::to_string(lineno) + ": non-positive transition energy");
      continue;
    }
    if (rec.strength < 0.0 || rec.u_strength < 0.0) {
      bad.push_back("line " + std::to_string(lineno) + ": negative strength or uncertainty");
      continue;
    }
    if (std::abs(rec.two_j - two_j_ground) > 2) {
      bad.push_back("line " + std::to_string(lineno) +
                    ": two_j=" + std::to_string(rec.two_j) +
                    " violates dipole selection from ground two_j=" +
                    std::to_string(two_j_ground));
      continue;
    }
    out.records.push_back(rec);
  }
  if (!bad.empty()) {
    std::string msg = "line list has " + std::to_string(bad.size()) + " invalid row(s)";
    for (const auto& b : bad) msg += "\n  " + b;
    throw parse_error(msg, bad);
  }
  if (out.records.empty())
    out.warnings.push_back("line list is empty; dispersion coefficients will be zero");
  // a meaningful isotropic C6 needs at least one line per dipole branch
  for (int tb = two_j_ground - 2; tb <= two_j_ground + 2; tb += 2) {
    bool found = false;
    for (const auto& r : out.records) found = found || (r.two_j == tb);
    if (!found && !out.records.empty())
      out.warnings.push_back("no line with two_j=" + std::to_string(tb) +
                             "; that excited branch contributes nothing");
  }
  return out;
}

inline line_list load_linelist(const std::string& path, const std::string& species,
                               int two_j_ground) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open line list " + path);
  return parse_linelist(in, species, two_j_ground);
}

// Convenience: species defaults plus bundled data directory.
inline line_list load_linelist(const species_params& sp, const std::string& dir = "") {
  return load_linelist(data_dir(dir) + "/" + sp.lines_file, sp.name, sp.two_j);
}

// d |d|^2 / d strength; the conversion is linear in the strength.
inline double reduced_dipole_sq_slope(const line_record& rec, int two_j_ground) {
  const double omega = rec.delta_e_hartree();
  if (omega <= 0.0) throw std::domain_error("transition energy must be positive");
  if (rec.kind == strength_kind::einstein_a) {
    const double denom = (4.0 / 3.0) * constants::hartree_over_hbar *
                         std::pow(constants::fine_structure, 3) * std::pow(omega, 3);
    return 1e6 * (rec.two_j + 1) / denom;
  }
  return 3.0 * (two_j_ground + 1) / (2.0 * omega);
}

// |(g j||d/(e a0)||n b)|^2 in the symmetric reduced-element convention
inline double reduced_dipole_sq(const line_record& rec, int two_j_ground) {
  return rec.strength * reduced_dipole_sq_slope(rec, two_j_ground);
}

}  // namespace lndimer::lines
