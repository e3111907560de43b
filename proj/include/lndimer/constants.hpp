#pragma once

// Physical constants (CODATA 2018) and per-species parameters for the
// two lanthanide dimers handled by this library.  Species parameters
// can be overridden from a JSON file, either passed explicitly or named
// by the LNDIMER_CONSTANTS environment variable; the bundled data
// directory can likewise be replaced via LNDIMER_DATA_DIR.

#include <cstdlib>
#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

namespace lndimer::constants {

// CODATA 2018
inline constexpr double fine_structure = 7.2973525693e-3;   // alpha
inline constexpr double hartree_over_hbar = 4.1341373335e16;  // E_h/hbar, 1/s
inline constexpr double hartree_to_invcm = 219474.6313632;  // E_h/(h c), cm^-1
inline constexpr double amu_to_me = 1822.888486209;         // u in electron masses

}  // namespace lndimer::constants

namespace lndimer {

struct species_params {
  std::string name;            // "er" or "tm"
  int two_j = 0;               // ground-state electronic angular momentum, doubled
  double mass_u = 0.0;         // isotope mass in u
  double g_j = 0.0;            // atomic g factor (NIST ASD level data)
  double quadrupole_ea02 = 0.0;  // ground-state electric quadrupole moment, e a0^2
  int two_i = 0;               // nuclear spin, doubled
  std::string lines_file;      // atomic line list (CSV)
  std::string vss_file;        // spin-stretched potential nodes (CSV)
  std::string strengths_file;  // tabulated isotropic/anisotropic strengths (CSV)

  double mass_me() const { return mass_u * constants::amu_to_me; }
  double reduced_mass_me() const { return 0.5 * mass_me(); }
  double j() const { return 0.5 * two_j; }
};

// 168Er: bosonic isotope with spinless nuclei, 3H6 ground state.
// 169Tm: only stable isotope, nuclear spin 1/2, 2F7/2 ground state.
// Masses are AME2016 atomic masses.
inline species_params erbium_defaults() {
  return {"er", 12, 167.9323767, 1.163801, 0.029, 0,
          "er_lines.csv", "er_vss.csv", "er_strengths.csv"};
}

inline species_params thulium_defaults() {
  return {"tm", 7, 168.9342179, 1.141189, 0.0, 1,
          "tm_lines.csv", "tm_vss.csv", "tm_strengths.csv"};
}

// Directory holding the bundled CSV tables.  Priority: explicit
// argument > LNDIMER_DATA_DIR environment variable > build-time default.
inline std::string data_dir(const std::string& override_dir = "") {
  if (!override_dir.empty()) return override_dir;
  if (const char* env = std::getenv("LNDIMER_DATA_DIR"); env && *env) return env;
#ifdef LNDIMER_DATA_DIR
  return LNDIMER_DATA_DIR;
#else
  return ".";
#endif
}

// Species lookup with optional JSON override of individual fields, e.g.
//   {"er": {"mass_u": 165.930, "g_j": 1.16}}
// Priority: explicit path > LNDIMER_CONSTANTS environment variable >
// built-in defaults.
inline species_params species_by_name(const std::string& name,
                                      const std::string& constants_path = "") {
  species_params p;
  if (name == "er")
    p = erbium_defaults();
  else if (name == "tm")
    p = thulium_defaults();
  else
    throw std::invalid_argument("unknown species '" + name + "' (expected er or tm)");

  std::string path = constants_path;
  if (path.empty())
    if (const char* env = std::getenv("LNDIMER_CONSTANTS"); env && *env) path = env;
  if (path.empty()) return p;

  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open constants file " + path);
  nlohmann::json j;
  in >> j;
  if (!j.contains(name)) return p;
  const auto& o = j.at(name);
  if (o.contains("two_j")) p.two_j = o.at("two_j").get<int>();
  if (o.contains("mass_u")) p.mass_u = o.at("mass_u").get<double>();
  if (o.contains("g_j")) p.g_j = o.at("g_j").get<double>();
  if (o.contains("quadrupole_ea02")) p.quadrupole_ea02 = o.at("quadrupole_ea02").get<double>();
  if (o.contains("two_i")) p.two_i = o.at("two_i").get<int>();
  if (o.contains("lines_file")) p.lines_file = o.at("lines_file").get<std::string>();
  if (o.contains("vss_file")) p.vss_file = o.at("vss_file").get<std::string>();
  if (o.contains("strengths_file")) p.strengths_file = o.at("strengths_file").get<std::string>();
  return p;
}

}  // namespace lndimer
