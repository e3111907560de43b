#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <tuple>
#include <vector>

#include "lndimer/angmom.hpp"

using namespace lndimer;

// Reference values in this file were frozen from an independent
// exact-rational (Fraction arithmetic) evaluation of the Racah sum
// formulas; agreement is required at the 1e-12 level up to tj ~ 30.

TEST_CASE("clebsch_gordan reproduces exact-rational references", "[angmom]") {
  using row = std::tuple<int, int, int, int, int, int, double>;
  const std::vector<row> cases{
      {4, 0, 4, 0, 4, 0, -0.5345224838248487931},
      {4, 0, 4, 0, 0, 0, +0.4472135954999579277},
      {4, 0, 4, 0, 8, 0, +0.7171371656006362283},
      {12, 4, 12, -2, 12, 2, +0.3438167584792832798},
      {12, 12, 12, 2, 24, 14, +0.1365047265579870106},
      {7, 3, 4, -2, 7, 1, +0.3086066999241838249},
      {7, 7, 7, 5, 14, 12, +0.7071067811865475727},
      {30, 10, 24, -6, 18, 4, +0.2304571729118020385},
      {3, 1, 3, 1, 6, 2, +0.7745966692414834043},
      {12, 2, 4, 0, 12, 2, -0.4684874806016906534},
      {5, -3, 8, 4, 9, 1, +0.5117663157191589818},
      {20, 0, 20, 0, 40, 0, +0.4976232163355030491},
  };
  for (const auto& [tj1, tm1, tj2, tm2, tj, tm, ref] : cases) {
    CAPTURE(tj1, tm1, tj2, tm2, tj, tm);
    REQUIRE(std::abs(angmom::clebsch_gordan(tj1, tm1, tj2, tm2, tj, tm) - ref) < 1e-13);
  }
}

TEST_CASE("clebsch_gordan selection rules and special values", "[angmom]") {
  REQUIRE(angmom::clebsch_gordan(4, 0, 4, 1, 4, 1) == 0.0);   // m parity broken
  REQUIRE(angmom::clebsch_gordan(4, 2, 4, 2, 4, 2) == 0.0);   // m1+m2 != m
  REQUIRE(angmom::clebsch_gordan(4, 0, 2, 0, 12, 0) == 0.0);  // triangle broken
  REQUIRE(angmom::clebsch_gordan(3, 1, 4, 0, 8, 1) == 0.0);   // half-int + int -> int only
  REQUIRE(angmom::clebsch_gordan(9, 3, 0, 0, 9, 3) == 1.0);
  // stretched state is always coefficient one
  for (int tj : {3, 8, 12})
    REQUIRE(angmom::clebsch_gordan(tj, tj, tj, tj, 2 * tj, 2 * tj) == Catch::Approx(1.0));
  REQUIRE_THROWS_AS(angmom::clebsch_gordan(-2, 0, 2, 0, 2, 0), std::invalid_argument);
}

TEST_CASE("clebsch_gordan orthogonality over random momenta", "[angmom]") {
  std::mt19937_64 rng(902213u);
  std::uniform_int_distribution<int> pick(0, 30);
  for (int trial = 0; trial < 40; ++trial) {
    const int tj1 = pick(rng);
    const int tj2 = pick(rng);
    // two random admissible (j, m) pairs
    std::uniform_int_distribution<int> dj(0, (2 * std::min(tj1, tj2)) / 2);
    const int tja = std::abs(tj1 - tj2) + 2 * dj(rng);
    const int tjb = std::abs(tj1 - tj2) + 2 * dj(rng);
    std::uniform_int_distribution<int> dm(0, std::min(tja, tjb));
    const int tm = std::min(tja, tjb) - 2 * (dm(rng) / 2) * 0;  // stay representative
    double acc = 0.0;
    for (int tm1 = -tj1; tm1 <= tj1; tm1 += 2) {
      const int tm2 = tm - tm1;
      if (std::abs(tm2) > tj2) continue;
      acc += angmom::clebsch_gordan(tj1, tm1, tj2, tm2, tja, tm) *
             angmom::clebsch_gordan(tj1, tm1, tj2, tm2, tjb, tm);
    }
    const double expect = (tja == tjb) ? 1.0 : 0.0;
    CAPTURE(tj1, tj2, tja, tjb, tm);
    REQUIRE(std::abs(acc - expect) < 1e-12);
  }
}

TEST_CASE("wigner_3j matches clebsch_gordan conversion", "[angmom]") {
  std::mt19937_64 rng(403031u);
  std::uniform_int_distribution<int> pick(0, 15);
  int checked = 0;
  while (checked < 60) {
    const int tj1 = pick(rng), tj2 = pick(rng);
    std::uniform_int_distribution<int> dj(std::abs(tj1 - tj2), tj1 + tj2);
    int tj3 = dj(rng);
    if ((tj1 + tj2 + tj3) % 2 != 0) continue;
    std::uniform_int_distribution<int> dm1(0, tj1), dm2(0, tj2);
    const int tm1 = tj1 - 2 * dm1(rng);
    const int tm2 = tj2 - 2 * dm2(rng);
    const int tm3 = -tm1 - tm2;
    if (std::abs(tm3) > tj3) continue;
    ++checked;
    const double lhs = angmom::wigner_3j(tj1, tj2, tj3, tm1, tm2, tm3);
    const int sign = ((tj1 - tj2 - tm3) / 2) % 2 == 0 ? 1 : -1;
    const double rhs = sign * angmom::clebsch_gordan(tj1, tm1, tj2, tm2, tj3, -tm3) /
                       std::sqrt(tj3 + 1.0);
    REQUIRE(std::abs(lhs - rhs) < 1e-13);
  }
}

TEST_CASE("wigner_6j reproduces exact-rational references", "[angmom]") {
  using row = std::tuple<int, int, int, int, int, int, double>;
  const std::vector<row> cases{
      {12, 2, 12, 2, 12, 2, +0.01747141394536530501},
      {2, 2, 4, 7, 7, 7, -0.1259881576697424177},
      {2, 2, 4, 12, 12, 12, +0.1003656319327491386},
      {4, 4, 4, 4, 4, 4, -0.04285714285714285754},
      {12, 2, 12, 2, 12, 4, +0.1003656319327491386},
      {12, 4, 12, 4, 12, 4, -0.06092620358623090232},
      {7, 7, 4, 7, 7, 4, -0.05833333333333333426},
      {30, 20, 24, 16, 14, 22, +0.001905137957906141233},
      {16, 16, 16, 16, 16, 16, -0.01265208072315354530},
      {12, 12, 12, 12, 12, 12, +0.02843209422156790442},
      {6, 8, 10, 8, 6, 4, -0.06590082689751418366},
      {5, 7, 4, 7, 5, 6, +0.007208691319279742112},
  };
  for (const auto& [ta, tb, tc, td, te, tf, ref] : cases) {
    CAPTURE(ta, tb, tc, td, te, tf);
    REQUIRE(std::abs(angmom::wigner_6j(ta, tb, tc, td, te, tf) - ref) < 1e-13);
  }
}

TEST_CASE("wigner_6j orthogonality over random momenta", "[angmom]") {
  std::mt19937_64 rng(77120u);
  std::uniform_int_distribution<int> pick(0, 14);
  int checked = 0;
  while (checked < 40) {
    const int ta = pick(rng), tb = pick(rng), tc = pick(rng), td = pick(rng);
    // sum_x (2x+1) {a b x; c d p}{a b x; c d q} = delta_pq / (2p+1);
    // p must close triangles with both (a d) and (b c), which also
    // requires the two pair sums to share parity
    if ((ta + td) % 2 != (tb + tc) % 2) continue;
    const int tpmin = std::max(std::abs(ta - td), std::abs(tb - tc));
    const int tpmax = std::min(ta + td, tb + tc);
    if (tpmin > tpmax || (ta + td - tpmin) % 2 != 0) continue;
    std::uniform_int_distribution<int> dp(0, (tpmax - tpmin) / 2);
    const int tp = tpmin + 2 * dp(rng);
    const int tq = tpmin + 2 * dp(rng);
    ++checked;
    double acc = 0.0;
    for (int tx = std::max(std::abs(ta - tb), std::abs(tc - td)); tx <= std::min(ta + tb, tc + td);
         tx += 2)
      acc += (tx + 1.0) * angmom::wigner_6j(ta, tb, tx, tc, td, tp) *
             angmom::wigner_6j(ta, tb, tx, tc, td, tq);
    const double expect = (tp == tq) ? 1.0 / (tp + 1.0) : 0.0;
    CAPTURE(ta, tb, tc, td, tp, tq);
    REQUIRE(std::abs(acc - expect) < 1e-12);
  }
}

TEST_CASE("racah_w phase relation against 6j", "[angmom]") {
  using row = std::tuple<int, int, int, int, int, int, double>;
  const std::vector<row> cases{
      {12, 2, 12, 2, 12, 2, +0.01747141394536530501},
      {12, 2, 12, 2, 12, 4, +0.1003656319327491386},
      {12, 2, 12, 2, 10, 4, +0.06386903850265854277},
      {12, 2, 12, 2, 14, 4, +0.04014625277309965407},
      {7, 2, 7, 2, 7, 4, +0.1259881576697424177},
      {7, 2, 7, 2, 5, 4, +0.09449111825230681327},
      {7, 2, 7, 2, 9, 4, +0.04409585518440984481},
  };
  for (const auto& [ta, tb, tc, td, te, tf, ref] : cases) {
    CAPTURE(ta, tb, tc, td, te, tf);
    REQUIRE(std::abs(angmom::racah_w(ta, tb, tc, td, te, tf) - ref) < 1e-13);
  }
}

TEST_CASE("wigner_9j reproduces exact-rational references", "[angmom]") {
  using row = std::tuple<int, int, int, int, int, int, int, int, int, double>;
  const std::vector<row> cases{
      {2, 2, 0, 2, 2, 0, 4, 4, 0, +0.1490711984999859852},
      {2, 2, 2, 2, 2, 2, 4, 4, 4, +0.05091750772173155720},
      {2, 2, 4, 2, 2, 0, 4, 4, 4, +0.03944053188733077225},
      {2, 2, 0, 2, 2, 2, 4, 4, 4, 0.0},
      {2, 2, 4, 2, 2, 4, 4, 4, 0, +0.006666666666666667095},
      {2, 2, 4, 2, 2, 4, 4, 4, 4, -0.006666666666666667095},
      {2, 2, 4, 2, 2, 4, 4, 4, 8, +0.04000000000000000083},
      {4, 4, 4, 4, 4, 4, 4, 4, 4, +0.01673469387755101984},
      {4, 4, 8, 12, 12, 8, 12, 12, 4, -0.003120841777214365415},
      {7, 7, 6, 7, 7, 6, 6, 6, 8, +0.004474241487228500062},
      {12, 12, 24, 12, 12, 24, 24, 24, 48, +0.001600000000000000077},
  };
  for (const auto& [ta, tb, tc, td, te, tf, tg, th, ti, ref] : cases) {
    CAPTURE(ta, tb, tc, td, te, tf, tg, th, ti);
    REQUIRE(std::abs(angmom::wigner_9j(ta, tb, tc, td, te, tf, tg, th, ti) - ref) < 1e-13);
  }
}

namespace {

// dense CG-built coupled state |(j1 j2) j m> in the |m1>|m2> product basis
Eigen::VectorXd coupled_state(int tj1, int tj2, int tj, int tm) {
  const int d1 = tj1 + 1, d2 = tj2 + 1;
  Eigen::VectorXd v = Eigen::VectorXd::Zero(d1 * d2);
  for (int i1 = 0; i1 < d1; ++i1) {
    const int tm1 = -tj1 + 2 * i1;
    const int tm2 = tm - tm1;
    if (std::abs(tm2) > tj2) continue;
    const int i2 = (tm2 + tj2) / 2;
    v(i1 * d2 + i2) = angmom::clebsch_gordan(tj1, tm1, tj2, tm2, tj, tm);
  }
  return v;
}

}  // namespace

TEST_CASE("wigner_9j equals the four-spin recoupling bracket", "[angmom]") {
  // <((j1 j2) j12, (j3 j4) j34) J M | ((j1 j3) j13, (j2 j4) j24) J M>
  //   = sqrt((2j12+1)(2j34+1)(2j13+1)(2j24+1)) {j1 j2 j12; j3 j4 j34; j13 j24 J}
  using row = std::tuple<int, int, int, int, int, int, int, int, int>;
  const std::vector<row> cases{
      {2, 2, 2, 2, 2, 2, 4, 4, 4}, {2, 2, 4, 2, 2, 4, 4, 4, 8}, {2, 2, 4, 2, 2, 0, 4, 4, 4},
      {1, 1, 2, 1, 1, 2, 2, 2, 4}, {2, 1, 3, 1, 2, 3, 3, 3, 6}, {3, 3, 4, 3, 3, 2, 4, 4, 2},
      {2, 2, 0, 2, 2, 2, 4, 4, 4},
  };
  for (const auto& [tj1, tj2, tj12, tj3, tj4, tj34, tj13, tj24, tJ] : cases) {
    const int d1 = tj1 + 1, d2 = tj2 + 1, d3 = tj3 + 1, d4 = tj4 + 1;
    const int tM = tJ % 2;
    // bra: ((j1 j2) j12, (j3 j4) j34) J M in the (m1 m2 m3 m4) basis
    Eigen::VectorXd bra = Eigen::VectorXd::Zero(d1 * d2 * d3 * d4);
    Eigen::VectorXd ket = bra;
    for (int tm12 = -tj12; tm12 <= tj12; tm12 += 2) {
      const int tm34 = tM - tm12;
      if (std::abs(tm34) > tj34) continue;
      const double c = angmom::clebsch_gordan(tj12, tm12, tj34, tm34, tJ, tM);
      if (c == 0.0) continue;
      const Eigen::VectorXd a = coupled_state(tj1, tj2, tj12, tm12);
      const Eigen::VectorXd b = coupled_state(tj3, tj4, tj34, tm34);
      for (int p = 0; p < a.size(); ++p)
        for (int q = 0; q < b.size(); ++q) bra(p * b.size() + q) += c * a(p) * b(q);
    }
    for (int tm13 = -tj13; tm13 <= tj13; tm13 += 2) {
      const int tm24 = tM - tm13;
      if (std::abs(tm24) > tj24) continue;
      const double c = angmom::clebsch_gordan(tj13, tm13, tj24, tm24, tJ, tM);
      if (c == 0.0) continue;
      const Eigen::VectorXd a = coupled_state(tj1, tj3, tj13, tm13);
      const Eigen::VectorXd b = coupled_state(tj2, tj4, tj24, tm24);
      // reorder (m1 m3)(m2 m4) -> (m1 m2 m3 m4)
      for (int i1 = 0; i1 < d1; ++i1)
        for (int i3 = 0; i3 < d3; ++i3)
          for (int i2 = 0; i2 < d2; ++i2)
            for (int i4 = 0; i4 < d4; ++i4)
              ket(((i1 * d2 + i2) * d3 + i3) * d4 + i4) +=
                  c * a(i1 * d3 + i3) * b(i2 * d4 + i4);
    }
    const double bracket = bra.dot(ket);
    const double nine =
        std::sqrt((tj12 + 1.0) * (tj34 + 1.0) * (tj13 + 1.0) * (tj24 + 1.0)) *
        angmom::wigner_9j(tj1, tj2, tj12, tj3, tj4, tj34, tj13, tj24, tJ);
    CAPTURE(tj1, tj2, tj12, tj3, tj4, tj34, tj13, tj24, tJ);
    REQUIRE(std::abs(bracket - nine) < 1e-12);
  }
}

namespace {

// spherical components of j in the |j m> basis, m ascending; real here
std::array<Eigen::MatrixXd, 3> j_spherical(int tj) {
  const int dim = tj + 1;
  const double j = 0.5 * tj;
  Eigen::MatrixXd jz = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::MatrixXd jp = Eigen::MatrixXd::Zero(dim, dim);
  for (int i = 0; i < dim; ++i) {
    const double m = -j + i;
    jz(i, i) = m;
    if (i + 1 < dim) jp(i + 1, i) = std::sqrt(j * (j + 1) - m * (m + 1));
  }
  const Eigen::MatrixXd jm = jp.transpose();
  return {-jp / std::sqrt(2.0), jz, jm / std::sqrt(2.0)};  // q = +1, 0, -1
}

}  // namespace

TEST_CASE("reduced_j and reduced_jj2 match Wigner-Eckart extraction", "[angmom]") {
  REQUIRE(angmom::reduced_jj2(1) == 0.0);  // no rank-2 tensor in a spin-1/2 space
  for (int tj = 2; tj <= 14; ++tj) {
    const auto [jp1, j0, jm1] = j_spherical(tj);
    const int dim = tj + 1;
    // [j x j]_20 = sum_q <1 q 1 -q|2 0> j_q j_-q
    Eigen::MatrixXd t20 = Eigen::MatrixXd::Zero(dim, dim);
    const Eigen::MatrixXd* sph[3] = {&jp1, &j0, &jm1};  // q = +1, 0, -1
    for (int qa = -1; qa <= 1; ++qa)
      for (int qb = -1; qb <= 1; ++qb) {
        if (qa + qb != 0) continue;
        t20 += angmom::clebsch_gordan(2, 2 * qa, 2, 2 * qb, 4, 0) * (*sph[1 - qa]) * (*sph[1 - qb]);
      }
    // extract <j||.||j> from the m = j diagonal element
    const double cg2 = angmom::clebsch_gordan(tj, tj, 4, 0, tj, tj);
    const double red2 = t20(dim - 1, dim - 1) * std::sqrt(tj + 1.0) / cg2;
    CAPTURE(tj);
    REQUIRE(std::abs(red2 - angmom::reduced_jj2(tj)) < 1e-10 * std::abs(red2));
    const double cg1 = angmom::clebsch_gordan(tj, tj, 2, 0, tj, tj);
    const double red1 = j0(dim - 1, dim - 1) * std::sqrt(tj + 1.0) / cg1;
    REQUIRE(std::abs(red1 - angmom::reduced_j(tj)) < 1e-12 * std::abs(red1));
  }
  // frozen references from the matrix-level oracle
  REQUIRE(std::abs(angmom::reduced_jj2(12) - 122.5357090810675) < 1e-10);
  REQUIRE(std::abs(angmom::reduced_jj2(7) - 35.49647869859770) < 1e-11);
  REQUIRE(std::abs(angmom::reduced_jj2(2) - 2.236067977499789) < 1e-13);
  REQUIRE(std::abs(angmom::reduced_jj2(4) - 10.24695076595960) < 1e-12);
}

TEST_CASE("reduced_c and c_tensor_element are mutually consistent", "[angmom]") {
  // identity: C_0 has <l||C_0||l> = sqrt(2l+1)
  for (int tl : {0, 2, 4, 8})
    REQUIRE(angmom::reduced_c(tl, 0, tl) == Catch::Approx(std::sqrt(tl + 1.0)));
  // Wigner-Eckart: <l' m'|C_kq|l m> = <l m k q|l' m'> <l'||C_k||l>/sqrt(2l'+1)
  for (int tl = 0; tl <= 8; tl += 2)
    for (int tlp = 0; tlp <= 8; tlp += 2)
      for (int k : {2, 4})
        for (int tm = -tl; tm <= tl; tm += 2)
          for (int q = -k; q <= k; ++q) {
            const int tmp = tm + 2 * q;
            if (std::abs(tmp) > tlp) continue;
            const double lhs = angmom::c_tensor_element(tlp, tmp, k, q, tl, tm);
            const double rhs = angmom::clebsch_gordan(tl, tm, 2 * k, 2 * q, tlp, tmp) *
                               angmom::reduced_c(tlp, k, tl) / std::sqrt(tlp + 1.0);
            REQUIRE(std::abs(lhs - rhs) < 1e-14);
          }
}
