#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

#include "lndimer/constants.hpp"
#include "lndimer/lines.hpp"

using namespace lndimer;

TEST_CASE("bundled line lists load and validate", "[lines]") {
  const auto er = lines::load_linelist(species_by_name("er"));
  REQUIRE(er.records.size() == 48);
  REQUIRE(er.warnings.empty());
  for (const auto& r : er.records) {
    REQUIRE(r.delta_e_cm > 0.0);
    REQUIRE((r.two_j >= 10 && r.two_j <= 14));
    REQUIRE(r.strength > 0.0);
  }
  const auto tm = lines::load_linelist(species_by_name("tm"));
  REQUIRE(tm.records.size() == 65);
  REQUIRE(tm.warnings.empty());
  int n_f = 0;
  for (const auto& r : tm.records) n_f += (r.kind == lines::strength_kind::oscillator_f);
  REQUIRE(n_f == 6);
}

TEST_CASE("reduced dipole conversion matches frozen references", "[lines]") {
  const auto er = lines::load_linelist(species_by_name("er"));
  const auto tm = lines::load_linelist(species_by_name("tm"));
  // first row of each bundled table, frozen from the independent
  // python evaluation of the same closed forms
  REQUIRE(er.records.front().delta_e_cm == Catch::Approx(11401.197));
  REQUIRE(lines::reduced_dipole_sq(er.records.front(), 12) ==
          Catch::Approx(2.336098295098396e-02).epsilon(1e-12));
  REQUIRE(tm.records.front().delta_e_cm == Catch::Approx(38342.570));
  REQUIRE(tm.records.front().kind == lines::strength_kind::oscillator_f);
  REQUIRE(lines::reduced_dipole_sq(tm.records.front(), 7) ==
          Catch::Approx(1.160836512535726e-01).epsilon(1e-12));
  // conversion is linear in the strength
  auto rec = er.records.front();
  const double base = lines::reduced_dipole_sq(rec, 12);
  rec.strength *= 3.0;
  REQUIRE(lines::reduced_dipole_sq(rec, 12) == Catch::Approx(3.0 * base).epsilon(1e-14));
}

TEST_CASE("parser accepts the fraction spelling of two_j", "[lines]") {
  std::istringstream in(
      "delta_e_cm,kind,strength,u_strength,two_j,source\n"
      "38342.570, f, 0.00169, 0.00338, 7/2, Penkin1976\n"
      "25000.0, A, 10.0, 1.0, 9, Test\n");
  const auto list = lines::parse_linelist(in, "tm", 7);
  REQUIRE(list.records.size() == 2);
  REQUIRE(list.records[0].two_j == 7);
  REQUIRE(list.records[1].two_j == 9);
}

TEST_CASE("parser reports every offending row", "[lines]") {
  std::istringstream in(
      "delta_e_cm,kind,strength,u_strength,two_j,source\n"
      "11401.197, A, 0.006377, 0.00159425, 10, Meggers1975\n"
      "-5.0, A, 1.0, 0.1, 12, BadEnergy\n"
      "12000.0, X, 1.0, 0.1, 12, BadKind\n"
      "13000.0, A, 1.0, 0.1, 4, BadSelection\n"
      "14000.0, A, oops, 0.1, 12, BadNumber\n");
  try {
    lines::parse_linelist(in, "er", 12);
    FAIL("expected parse_error");
  } catch (const lines::parse_error& e) {
    REQUIRE(e.offending_rows.size() == 4);
    REQUIRE(e.offending_rows[0].find("line 3") != std::string::npos);
    REQUIRE(e.offending_rows[1].find("line 4") != std::string::npos);
    REQUIRE(e.offending_rows[2].find("line 5") != std::string::npos);
    REQUIRE(e.offending_rows[3].find("line 6") != std::string::npos);
  }
}

TEST_CASE("empty file yields empty list with warning", "[lines]") {
  std::istringstream in("delta_e_cm,kind,strength,u_strength,two_j,source\n");
  const auto list = lines::parse_linelist(in, "er", 12);
  REQUIRE(list.records.empty());
  REQUIRE_FALSE(list.warnings.empty());
}

TEST_CASE("missing branch produces a warning", "[lines]") {
  std::istringstream in(
      "delta_e_cm,kind,strength,u_strength,two_j,source\n"
      "11401.197, A, 0.006377, 0.00159425, 10, OnlyLowBranch\n");
  const auto list = lines::parse_linelist(in, "er", 12);
  REQUIRE(list.records.size() == 1);
  REQUIRE(list.warnings.size() == 2);  // two_j = 12 and 14 both absent
}

TEST_CASE("species constants resolve and can be overridden", "[lines]") {
  const auto er = species_by_name("er");
  REQUIRE(er.two_j == 12);
  REQUIRE(er.g_j == Catch::Approx(1.163801));
  REQUIRE(er.quadrupole_ea02 == Catch::Approx(0.029));
  const auto tm = species_by_name("tm");
  REQUIRE(tm.two_j == 7);
  REQUIRE(tm.quadrupole_ea02 == 0.0);
  REQUIRE_THROWS_AS(species_by_name("dy"), std::invalid_argument);

  // JSON override of a single field
  const std::string path = "/tmp/lndimer_constants_test.json";
  {
    std::ofstream out(path);
    out << R"({"er": {"g_j": 1.25}})";
  }
  const auto er2 = species_by_name("er", path);
  REQUIRE(er2.g_j == Catch::Approx(1.25));
  REQUIRE(er2.mass_u == Catch::Approx(er.mass_u));
}
