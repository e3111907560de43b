// Command-line front end for the lanthanide dimer interaction library.
//
// Subcommands:
//   dispersion     van der Waals coefficients from an atomic line list (JSON)
//   curves         sampled interaction strengths V(R) (CSV)
//   adiabats       labeled adiabatic potentials at one distance (CSV)
//   strengths-fit  strengths from observed adiabat positions (JSON)
//   levels         coupled-channel bound levels over a J range (CSV)
//   constants      spectroscopic constants of the lowest well (JSON)
//
// Every output carries a manifest (inputs, physical constants, library and
// toolchain versions, and a hash over all of them) so a run can be
// reproduced bit for bit on the same build.  JSON outputs embed it under
// "manifest"; CSV outputs carry it as a single '#' comment line, which
// every parser in the library skips.
//
// Exit codes: 0 success, 2 validation failure, 3 numerical failure.

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lndimer/constants.hpp"
#include "lndimer/csv.hpp"
#include "lndimer/curves.hpp"
#include "lndimer/dispersion.hpp"
#include "lndimer/lines.hpp"
#include "lndimer/rovib.hpp"
#include "lndimer/spintensor.hpp"

namespace {

using nlohmann::json;
using namespace lndimer;

#ifndef LNDIMER_VERSION
#define LNDIMER_VERSION "0.0.0"
#endif

// ---------------------------------------------------------------------------
// formatting and manifest plumbing

// shortest decimal form that round-trips the double exactly
std::string fmt(double x) {
  std::array<char, 40> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), res.ptr);
}

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (const unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

json constants_block(const species_params& sp) {
  return json{{"name", sp.name},
              {"two_j", sp.two_j},
              {"two_i", sp.two_i},
              {"mass_u", sp.mass_u},
              {"g_j", sp.g_j},
              {"quadrupole_ea02", sp.quadrupole_ea02},
              {"hartree_to_invcm", constants::hartree_to_invcm},
              {"amu_to_me", constants::amu_to_me}};
}

json versions_block() {
  return json{{"lndimer", LNDIMER_VERSION},
              {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                            std::to_string(EIGEN_MAJOR_VERSION) + "." +
                            std::to_string(EIGEN_MINOR_VERSION)},
              {"cli11", CLI11_VERSION},
              {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                    std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                    std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
              {"compiler", __VERSION__}};
}

// command + configuration + constants + versions, hashed over their
// canonical (key-sorted) serialization
json make_manifest(const std::string& command, const json& config, const species_params& sp) {
  json m;
  m["command"] = command;
  m["config"] = config;
  m["constants"] = constants_block(sp);
  m["versions"] = versions_block();
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx",
                static_cast<unsigned long long>(fnv1a64(m.dump())));
  m["config_hash"] = std::string(hex);
  return m;
}

void write_output(const std::string& out, const std::string& text) {
  if (out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out);
  if (!f) throw std::invalid_argument("cannot write output file: " + out);
  f << text;
}

void require_file(const std::string& path, const std::string& what) {
  if (!std::filesystem::exists(path))
    throw std::invalid_argument(what + " not found: " + path);
}

// ---------------------------------------------------------------------------
// shared option handling

struct common_opts {
  std::string species;
  std::string constants_file;  // --constants, else LNDIMER_CONSTANTS, else built-in
  std::string lines_file;      // optional line-list override
  std::string out;             // output path; stdout when empty
};

void add_common(CLI::App* cmd, common_opts& o, bool needs_lines) {
  cmd->add_option("--species", o.species, "species name (er, tm)")->required();
  cmd->add_option("--constants", o.constants_file,
                  "JSON constants override (default: $LNDIMER_CONSTANTS)");
  if (needs_lines)
    cmd->add_option("--lines", o.lines_file, "atomic line list CSV (default: bundled)");
  cmd->add_option("--out", o.out, "output file (default: stdout)");
}

species_params resolve_species(const common_opts& o) {
  std::string path = o.constants_file;
  if (path.empty())
    if (const char* env = std::getenv("LNDIMER_CONSTANTS")) path = env;
  if (!path.empty()) require_file(path, "constants file");
  return species_by_name(o.species, path);
}

lines::line_list load_lines(const common_opts& o, const species_params& sp) {
  if (o.lines_file.empty()) return lines::load_linelist(sp);
  require_file(o.lines_file, "line list");
  return lines::load_linelist(o.lines_file, sp.name, sp.two_j);
}

curves::strength_set assemble(const common_opts& o, const species_params& sp) {
  const auto list = load_lines(o, sp);
  const auto ds = dispersion::vdw_coefficients(list, sp);
  return curves::assemble_all(sp, ds);
}

json config_common(const common_opts& o) {
  return json{{"species", o.species},
              {"constants_file", o.constants_file},
              {"lines_file", o.lines_file}};
}

std::string coefficient_name(int k, int i) {
  return "c" + std::to_string(k) + "_" + std::to_string(i);
}

// "lo:hi:step" with lo > 0, step > 0, lo <= hi
struct grid_spec {
  double lo = 0.0, hi = 0.0, step = 0.0;
};

grid_spec parse_grid(const std::string& s) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string field;
  while (std::getline(ss, field, ':')) parts.push_back(field);
  if (parts.size() != 3) throw std::invalid_argument("grid must be lo:hi:step, got '" + s + "'");
  grid_spec g;
  try {
    g.lo = std::stod(parts[0]);
    g.hi = std::stod(parts[1]);
    g.step = std::stod(parts[2]);
  } catch (const std::exception&) {
    throw std::invalid_argument("grid must be numeric lo:hi:step, got '" + s + "'");
  }
  if (!(g.lo > 0.0) || !(g.step > 0.0) || !(g.lo <= g.hi))
    throw std::invalid_argument("grid needs 0 < lo <= hi and step > 0, got '" + s + "'");
  return g;
}

std::vector<double> grid_points(const grid_spec& g) {
  std::vector<double> r;
  for (int k = 0;; ++k) {
    const double x = g.lo + k * g.step;
    if (x > g.hi + 1e-9) break;
    r.push_back(x);
  }
  return r;
}

// "a" or "a:b", non-negative, ascending
std::pair<int, int> parse_j_range(const std::string& s) {
  const auto colon = s.find(':');
  try {
    if (colon == std::string::npos) {
      const int j = std::stoi(s);
      if (j < 0) throw std::invalid_argument("");
      return {j, j};
    }
    const int a = std::stoi(s.substr(0, colon));
    const int b = std::stoi(s.substr(colon + 1));
    if (a < 0 || b < a) throw std::invalid_argument("");
    return {a, b};
  } catch (const std::exception&) {
    throw std::invalid_argument("J range must be 'a' or 'a:b' with 0 <= a <= b, got '" + s + "'");
  }
}

std::string strength_alias(const std::string& w) {
  if (w == "v0") return "v0_1";
  if (w == "v2") return "v2_1";
  if (w == "v4") return "v4_1";
  if (w == "vss") return "v_ss";
  return w;
}

int strength_index_by_name(const std::string& name) {
  for (int a = 0; a < 7; ++a)
    if (name == spintensor::strength_labels[a]) return a;
  throw std::invalid_argument("unknown strength name: " + name);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string field;
  while (std::getline(ss, field, ',')) {
    const std::string t = csv::trim(field);
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

// ---------------------------------------------------------------------------
// dispersion

struct dispersion_opts {
  common_opts common;
  int montecarlo = 0;
  unsigned seed = 20260815;
};

int cmd_dispersion(const dispersion_opts& o) {
  const species_params sp = resolve_species(o.common);
  const auto list = load_lines(o.common, sp);
  const auto ds = dispersion::vdw_coefficients(list, sp);

  json j;
  j["species"] = sp.name;
  j["n_lines"] = list.records.size();
  json coeffs = json::array();
  for (int a = 0; a < 7; ++a) {
    const auto [k, i] = dispersion::dispersion_set::labels[a];
    coeffs.push_back(json{{"name", coefficient_name(k, i)},
                          {"k", k},
                          {"i", i},
                          {"value", ds.value[a]},
                          {"u", ds.u[a]}});
  }
  j["coefficients"] = coeffs;

  json corr;
  corr["labels"] = json::array({"c0_1", "c2_1", "c0_2", "c0_3"});
  json rows = json::array();
  for (int p = 0; p < 4; ++p) {
    json row = json::array();
    for (int q = 0; q < 4; ++q) row.push_back(ds.corr(p, q));
    rows.push_back(row);
  }
  corr["matrix"] = rows;
  j["correlations"] = corr;

  j["c_ss"] = json{{"value", ds.c_ss}, {"u", ds.u_ss}};
  j["d2_2"] = ds.d2_2;
  j["q4_1"] = ds.q4_1;
  if (!list.warnings.empty()) j["warnings"] = list.warnings;

  if (o.montecarlo > 0) {
    const auto mc = dispersion::monte_carlo_u(list, o.montecarlo, o.seed);
    // sampled uncertainties of the four independent coefficients
    j["montecarlo"] = json{{"samples", o.montecarlo},
                           {"seed", o.seed},
                           {"u", json{{"c0_1", mc[0]},
                                      {"c2_1", mc[1]},
                                      {"c0_2", mc[2]},
                                      {"c0_3", mc[3]}}}};
  }

  json config = config_common(o.common);
  config["montecarlo"] = o.montecarlo;
  config["seed"] = o.seed;
  j["manifest"] = make_manifest("dispersion", config, sp);

  write_output(o.common.out, j.dump(2) + "\n");
  return 0;
}

// ---------------------------------------------------------------------------
// curves

struct curves_opts {
  common_opts common;
  std::string grid = "6:30:0.1";
  std::string which;  // one strength by name; all eight columns when empty
};

int cmd_curves(const curves_opts& o) {
  const species_params sp = resolve_species(o.common);
  const grid_spec g = parse_grid(o.grid);
  const auto cs = assemble(o.common, sp);

  std::vector<const curves::strength_curve*> cols;
  if (o.which.empty()) {
    for (int a = 0; a < 7; ++a) cols.push_back(cs.curve[a].get());
    cols.push_back(cs.vss.get());
  } else {
    cols.push_back(&cs.by_name(strength_alias(o.which)));
  }

  json config = config_common(o.common);
  config["grid"] = o.grid;
  config["which"] = o.which;
  const json manifest = make_manifest("curves", config, sp);

  std::ostringstream out;
  out << "# manifest: " << manifest.dump() << "\n";
  out << "r";
  for (const auto* c : cols) out << "," << c->name;
  out << "\n";
  for (const double r : grid_points(g)) {
    out << fmt(r);
    for (const auto* c : cols) out << "," << fmt((*c)(r));
    out << "\n";
  }

  write_output(o.common.out, out.str());
  return 0;
}

// ---------------------------------------------------------------------------
// adiabats

struct adiabats_opts {
  common_opts common;
  double r = 0.0;
  std::string model = "full";
  bool relative = false;  // emit the strengths-fit input format instead
};

int cmd_adiabats(const adiabats_opts& o) {
  const species_params sp = resolve_species(o.common);
  const rovib::model_kind model = rovib::model_from_string(o.model);
  if (!(o.r > 0.0)) throw std::invalid_argument("--r must be a positive distance in bohr");
  const auto cs = assemble(o.common, sp);

  std::array<double, 7> strengths{};
  for (const int a : rovib::active_operators(model)) strengths[a] = (*cs.curve[a])(o.r);

  const auto ops = spintensor::build_operators(sp.two_j);
  const auto ads = spintensor::adiabats(ops, strengths);

  json config = config_common(o.common);
  config["r"] = o.r;
  config["model"] = o.model;
  config["relative"] = o.relative;
  const json manifest = make_manifest("adiabats", config, sp);

  std::ostringstream out;
  out << "# manifest: " << manifest.dump() << "\n";
  const auto sig = [](int s) { return s > 0 ? "g" : "u"; };
  const auto refl = [](int x) { return x > 0 ? "+" : (x < 0 ? "-" : "0"); };
  if (o.relative) {
    // directly re-ingestible by strengths-fit; u_rel is a depth below the
    // shallowest adiabat, and that arbitrary zero cancels when the rows
    // are anchored
    out << "r,n,omega,sigma,reflection,u_rel\n";
    const double top = ads.states.back().energy;
    for (const auto& a : ads.states)
      out << fmt(o.r) << "," << a.n << "," << a.omega << "," << sig(a.sigma) << ","
          << refl(a.reflection) << "," << fmt(top - a.energy) << "\n";
  } else {
    out << "n,omega,sigma,reflection,label,energy_cm\n";
    for (const auto& a : ads.states)
      out << a.n << "," << a.omega << "," << sig(a.sigma) << "," << refl(a.reflection) << ","
          << spintensor::label(a) << "," << fmt(a.energy) << "\n";
  }

  write_output(o.common.out, out.str());
  return 0;
}

// ---------------------------------------------------------------------------
// strengths-fit

struct fit_opts {
  common_opts common;
  std::string relative_file;
  double r = 0.0;
  double u_splitting = 1.0;
  std::string active = "v2_1,v0_2,v2_2,v0_3,v2_3,v4_1";
};

int cmd_strengths_fit(const fit_opts& o) {
  const species_params sp = resolve_species(o.common);
  if (!(o.r > 0.0)) throw std::invalid_argument("--r must be a positive distance in bohr");
  require_file(o.relative_file, "relative depth table");

  const auto cs = assemble(o.common, sp);
  const double v_ss = (*cs.vss)(o.r);

  std::ifstream in(o.relative_file);
  const auto rows = spintensor::parse_relative_csv(in);
  const auto obs = spintensor::anchor_relative(rows, o.r, v_ss, sp.two_j);

  const auto ops = spintensor::build_operators(sp.two_j);
  spintensor::fit_options opt;
  opt.u_splitting = o.u_splitting;
  for (int a = 0; a < 7; ++a) {
    opt.active[a] = false;
    opt.initial[a] = (*cs.curve[a])(o.r);  // hold inactive strengths at the tabulated values
  }
  for (const auto& name : split_list(o.active)) opt.active[strength_index_by_name(name)] = true;

  const auto fit = spintensor::fit_strengths(obs, ops, opt);
  if (!fit.converged)
    throw std::runtime_error("strength fit did not converge after " +
                             std::to_string(fit.iterations) + " iterations");

  json j;
  j["species"] = sp.name;
  j["r"] = o.r;
  j["v_ss"] = v_ss;
  json strengths, u;
  for (int a = 0; a < 7; ++a) {
    strengths[spintensor::strength_labels[a]] = fit.strengths[a];
    u[spintensor::strength_labels[a]] = fit.u[a];
  }
  j["strengths"] = strengths;
  j["u"] = u;
  j["chi2"] = fit.chi2;
  j["chi2_nu"] = fit.chi2_nu;
  j["max_residual"] = fit.max_residual;
  j["n_splittings"] = fit.n_splittings;
  j["n_free"] = fit.n_free;
  j["iterations"] = fit.iterations;
  j["converged"] = fit.converged;
  j["rank_deficient"] = fit.rank_deficient;

  json config = config_common(o.common);
  config["relative_file"] = o.relative_file;
  config["r"] = o.r;
  config["u_splitting"] = o.u_splitting;
  config["active"] = o.active;
  j["manifest"] = make_manifest("strengths-fit", config, sp);

  write_output(o.common.out, j.dump(2) + "\n");
  return 0;
}

// ---------------------------------------------------------------------------
// levels

struct levels_opts {
  common_opts common;
  std::string j_range = "0";
  std::string model = "full";
  std::string blocks;  // comma list; the species' physical blocks when empty
  int points = 0;      // 0: species default grid
  double r_min = 0.0, r_max = 0.0;
  int max_levels = 20;
};

int cmd_levels(const levels_opts& o) {
  const species_params sp = resolve_species(o.common);
  const rovib::model_kind model = rovib::model_from_string(o.model);
  const auto [j_lo, j_hi] = parse_j_range(o.j_range);
  if (o.max_levels < 1) throw std::invalid_argument("--max-levels must be at least 1");

  rovib::dvr_grid grid = rovib::default_grid(sp);
  if (o.points > 0) grid.n = o.points;
  if (o.r_min > 0.0) grid.r_min = o.r_min;
  if (o.r_max > 0.0) grid.r_max = o.r_max;
  grid.validate();

  std::vector<rovib::block_spec> blocks;
  if (o.blocks.empty()) {
    blocks = rovib::physical_blocks(sp);
  } else {
    for (const auto& name : split_list(o.blocks)) {
      bool found = false;
      for (const int sigma : {+1, -1})
        for (const int lp : {0, 1})
          if (rovib::block_name(sigma, lp) == name) {
            blocks.push_back({sigma, lp});
            found = true;
          }
      if (!found)
        throw std::invalid_argument("unknown block '" + name +
                                    "' (expected g_even, g_odd, u_even, u_odd)");
    }
  }

  const auto cs = assemble(o.common, sp);

  std::vector<rovib::block_result> results;
  for (int J = j_lo; J <= j_hi; ++J)
    for (const auto& b : blocks)
      results.push_back(
          rovib::bound_levels_block(J, b.sigma, b.ell_parity, sp, model, cs, grid, o.max_levels));

  // convergence delta on the first block with any levels: same solve on a
  // finer, wider grid, compared level by level
  rovib::dvr_grid fine = grid;
  fine.n += 100;
  fine.r_max += 5.0;
  json convergence;
  for (const auto& res : results) {
    if (res.levels.empty()) continue;
    const int count = std::min(o.max_levels, 10);
    const double delta =
        rovib::convergence_delta(res.J, res.sigma, res.ell_parity, sp, model, cs, grid, fine, count);
    convergence = json{{"J", res.J},
                       {"block", rovib::block_name(res.sigma, res.ell_parity)},
                       {"levels_compared", std::min<int>(count, static_cast<int>(res.levels.size()))},
                       {"fine_grid", json{{"n", fine.n}, {"r_min", fine.r_min}, {"r_max", fine.r_max}}},
                       {"max_delta_cm", delta}};
    break;
  }

  json config = config_common(o.common);
  config["J"] = o.j_range;
  config["model"] = o.model;
  json block_names = json::array();
  for (const auto& b : blocks) block_names.push_back(rovib::block_name(b.sigma, b.ell_parity));
  config["blocks"] = block_names;
  config["grid"] = json{{"n", grid.n}, {"r_min", grid.r_min}, {"r_max", grid.r_max}};
  config["max_levels"] = o.max_levels;
  json manifest = make_manifest("levels", config, sp);
  if (!convergence.is_null()) manifest["convergence"] = convergence;

  std::ostringstream out;
  out << "# manifest: " << manifest.dump() << "\n";
  out << "J,block,index,energy_cm,v,omega_label,top3_channels\n";
  for (const auto& res : results) {
    const std::string bname = rovib::block_name(res.sigma, res.ell_parity);
    for (const auto& lev : res.levels) {
      out << lev.J << "," << bname << "," << lev.index << "," << fmt(lev.energy_cm) << ","
          << lev.v << "," << lev.omega_label << ",";
      // top channels as j_el:ell:weight triplets, semicolon separated
      for (std::size_t t = 0; t < lev.top_channels.size(); ++t) {
        const auto& ch = res.channels[lev.top_channels[t].first];
        char w[16];
        std::snprintf(w, sizeof w, "%.4f", lev.top_channels[t].second);
        out << (t ? ";" : "") << ch.j_el << ":" << ch.ell << ":" << w;
      }
      out << "\n";
    }
  }

  write_output(o.common.out, out.str());
  return 0;
}

// ---------------------------------------------------------------------------
// constants

struct constants_opts {
  common_opts common;
  std::string model = "full";
  int points = 0;
  double r_min = 0.0, r_max = 0.0;
};

int cmd_constants(const constants_opts& o) {
  const species_params sp = resolve_species(o.common);
  const rovib::model_kind model = rovib::model_from_string(o.model);

  rovib::dvr_grid grid = rovib::default_grid(sp);
  if (o.points > 0) grid.n = o.points;
  if (o.r_min > 0.0) grid.r_min = o.r_min;
  if (o.r_max > 0.0) grid.r_max = o.r_max;
  grid.validate();

  const auto cs = assemble(o.common, sp);
  const auto ad = rovib::spectroscopic_constants(sp, cs, grid, model);

  const auto pack = [](const rovib::spectro_constants& c) {
    return json{{"r_e", c.r_e},         {"d_e", c.d_e},
                {"b_e", c.b_e},         {"omega_curv", c.omega_curv},
                {"omega_dvr", c.omega_dvr}, {"e0", c.e0},
                {"e1", c.e1}};
  };

  // same constants for the spin-stretched curve alone, a single-channel well
  const auto& vss = *cs.vss;
  rovib::spectro_constants ss;
  ss.r_e = curves::minimize([&](double r) { return vss(r); }, 7.4, 10.2);
  ss.d_e = -vss(ss.r_e);
  ss.b_e = constants::hartree_to_invcm / (2.0 * grid.mu_me * ss.r_e * ss.r_e);
  const double h = 1e-3;
  const double curv = (vss(ss.r_e + h) - 2.0 * vss(ss.r_e) + vss(ss.r_e - h)) / (h * h);
  if (curv <= 0.0) throw std::runtime_error("spin-stretched curve is not convex at its minimum");
  ss.omega_curv = std::sqrt(curv * constants::hartree_to_invcm / grid.mu_me);
  const Eigen::VectorXd e_ss = rovib::dvr_levels_1d([&](double r) { return vss(r); }, grid, 2);
  ss.e0 = e_ss(0);
  ss.e1 = e_ss(1);
  ss.omega_dvr = ss.e1 - ss.e0;

  json j;
  j["species"] = sp.name;
  j["model"] = o.model;
  j["adiabat"] = pack(ad);
  j["spin_stretched"] = pack(ss);
  // quadrupole-tensor splitting scale sqrt(6) V_2^(1) at both minima
  j["sqrt6_v2_1"] = json{{"at_adiabat_re", std::sqrt(6.0) * (*cs.curve[1])(ad.r_e)},
                         {"at_spin_stretched_re", std::sqrt(6.0) * (*cs.curve[1])(ss.r_e)}};

  json config = config_common(o.common);
  config["model"] = o.model;
  config["grid"] = json{{"n", grid.n}, {"r_min", grid.r_min}, {"r_max", grid.r_max}};
  j["manifest"] = make_manifest("constants", config, sp);

  write_output(o.common.out, j.dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lanthanide dimer interactions: dispersion, potentials, bound levels"};
  app.require_subcommand(1);

  dispersion_opts d_opt;
  auto* d_cmd = app.add_subcommand("dispersion",
                                   "van der Waals coefficients from an atomic line list (JSON)");
  add_common(d_cmd, d_opt.common, true);
  d_cmd->add_option("--montecarlo", d_opt.montecarlo,
                    "Monte Carlo samples for uncertainty cross-check (0: off)");
  d_cmd->add_option("--seed", d_opt.seed, "Monte Carlo seed");

  curves_opts c_opt;
  auto* c_cmd = app.add_subcommand("curves", "sampled interaction strengths V(R) (CSV)");
  add_common(c_cmd, c_opt.common, true);
  c_cmd->add_option("--grid", c_opt.grid, "sampling grid lo:hi:step in bohr");
  c_cmd->add_option("--which", c_opt.which,
                    "single strength (v0_1..v4_1, v_ss; v0/v2/v4 are rank aliases)");

  adiabats_opts a_opt;
  auto* a_cmd =
      app.add_subcommand("adiabats", "labeled adiabatic potentials at one distance (CSV)");
  add_common(a_cmd, a_opt.common, true);
  a_cmd->add_option("--r", a_opt.r, "internuclear distance in bohr")->required();
  a_cmd->add_option("--model", a_opt.model, "two_tensor or full");
  a_cmd->add_flag("--relative", a_opt.relative,
                  "emit r,n,omega,sigma,reflection,u_rel rows for strengths-fit");

  fit_opts f_opt;
  auto* f_cmd = app.add_subcommand("strengths-fit",
                                   "strengths from observed adiabat positions (JSON)");
  add_common(f_cmd, f_opt.common, true);
  f_cmd->add_option("--relative", f_opt.relative_file,
                    "CSV of relative adiabat depths (r,n,omega,sigma,reflection,u_rel)")
      ->required();
  f_cmd->add_option("--r", f_opt.r, "anchor distance in bohr")->required();
  f_cmd->add_option("--u", f_opt.u_splitting, "one-sigma splitting uncertainty, cm^-1");
  f_cmd->add_option("--active", f_opt.active, "comma list of strengths to fit");

  levels_opts l_opt;
  auto* l_cmd = app.add_subcommand("levels", "coupled-channel bound levels over a J range (CSV)");
  add_common(l_cmd, l_opt.common, true);
  l_cmd->add_option("--J", l_opt.j_range, "total angular momentum, 'a' or 'a:b'");
  l_cmd->add_option("--model", l_opt.model, "two_tensor or full");
  l_cmd->add_option("--blocks", l_opt.blocks,
                    "comma list of g_even,g_odd,u_even,u_odd (default: physical blocks)");
  l_cmd->add_option("--points", l_opt.points, "radial DVR points (default: species grid)");
  l_cmd->add_option("--rmin", l_opt.r_min, "grid start, bohr");
  l_cmd->add_option("--rmax", l_opt.r_max, "grid end, bohr");
  l_cmd->add_option("--max-levels", l_opt.max_levels, "levels per block");

  constants_opts k_opt;
  auto* k_cmd =
      app.add_subcommand("constants", "spectroscopic constants of the lowest well (JSON)");
  add_common(k_cmd, k_opt.common, false);
  k_cmd->add_option("--model", k_opt.model, "two_tensor or full");
  k_cmd->add_option("--points", k_opt.points, "radial DVR points (default: species grid)");
  k_cmd->add_option("--rmin", k_opt.r_min, "grid start, bohr");
  k_cmd->add_option("--rmax", k_opt.r_max, "grid end, bohr");

  int rc = 0;
  d_cmd->callback([&] { rc = cmd_dispersion(d_opt); });
  c_cmd->callback([&] { rc = cmd_curves(c_opt); });
  a_cmd->callback([&] { rc = cmd_adiabats(a_opt); });
  f_cmd->callback([&] { rc = cmd_strengths_fit(f_opt); });
  l_cmd->callback([&] { rc = cmd_levels(l_opt); });
  k_cmd->callback([&] { rc = cmd_constants(k_opt); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const csv::parse_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    for (const auto& row : e.offending_rows) std::cerr << "  " << row << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return rc;
}
