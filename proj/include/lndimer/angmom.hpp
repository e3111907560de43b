#pragma once

// Angular momentum algebra: Clebsch-Gordan coefficients, Wigner 3j, 6j
// and 9j symbols, Racah W functions and a few reduced matrix elements.
//
// Every angular momentum argument is passed as TWICE its value so that
// half-integer momenta stay exact integers, e.g. j = 7/2 is tj = 7.
// Symbols are evaluated with the Racah finite-sum formulas (see Brink &
// Satchler, "Angular Momentum") using cached long-double log
// factorials; the alternating sums keep 12+ significant digits for
// arguments up to tj ~ 30, which covers everything this project needs.
//
// Reduced matrix elements follow the convention
//   <j' m'|T_kq|j m> = <j m k q|j' m'> <j'||T_k||j> / sqrt(2j'+1)
// with Condon-Shortley phases, so that <j||j||j> = sqrt(j(j+1)(2j+1)).

#include <array>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace lndimer::angmom {

namespace detail {

inline long double log_factorial(int n) {
  if (n < 0) throw std::invalid_argument("log_factorial: negative argument");
  static const std::array<long double, 512> table = [] {
    std::array<long double, 512> t{};
    t[0] = 0.0L;
    for (std::size_t i = 1; i < t.size(); ++i)
      t[i] = t[i - 1] + std::log(static_cast<long double>(i));
    return t;
  }();
  return table.at(static_cast<std::size_t>(n));
}

// log of the squared triangle coefficient Delta(abc)^2
inline long double log_delta2(int ta, int tb, int tc) {
  return log_factorial((ta + tb - tc) / 2) + log_factorial((ta - tb + tc) / 2) +
         log_factorial((-ta + tb + tc) / 2) - log_factorial((ta + tb + tc) / 2 + 1);
}

inline int parity(int twice_phase) {
  // (-1)^(twice_phase/2); caller guarantees twice_phase is even
  return (twice_phase / 2) % 2 == 0 ? 1 : -1;
}

}  // namespace detail

// True when (j1 j2 j3) satisfy the triangle rule and couple to integer
// total parity (tj1 + tj2 + tj3 even).
inline bool triangle_ok(int tj1, int tj2, int tj3) {
  if ((tj1 + tj2 + tj3) % 2 != 0) return false;
  return std::abs(tj1 - tj2) <= tj3 && tj3 <= tj1 + tj2;
}

// <j1 m1 j2 m2 | j m>
inline double clebsch_gordan(int tj1, int tm1, int tj2, int tm2, int tj, int tm) {
  if (tj1 < 0 || tj2 < 0 || tj < 0)
    throw std::invalid_argument("clebsch_gordan: negative angular momentum");
  if (tm1 + tm2 != tm) return 0.0;
  if (!triangle_ok(tj1, tj2, tj)) return 0.0;
  if ((tj1 + tm1) % 2 != 0 || (tj2 + tm2) % 2 != 0) return 0.0;
  if (std::abs(tm1) > tj1 || std::abs(tm2) > tj2 || std::abs(tm) > tj) return 0.0;

  const int kmin = std::max({0, (tj2 - tj - tm1) / 2, (tj1 - tj + tm2) / 2});
  const int kmax = std::min({(tj1 + tj2 - tj) / 2, (tj1 - tm1) / 2, (tj2 + tm2) / 2});
  if (kmin > kmax) return 0.0;

  const long double half_log_pre =
      0.5L * (std::log(static_cast<long double>(tj + 1)) + detail::log_delta2(tj1, tj2, tj) +
              detail::log_factorial((tj1 + tm1) / 2) + detail::log_factorial((tj1 - tm1) / 2) +
              detail::log_factorial((tj2 + tm2) / 2) + detail::log_factorial((tj2 - tm2) / 2) +
              detail::log_factorial((tj + tm) / 2) + detail::log_factorial((tj - tm) / 2));

  long double sum = 0.0L;
  for (int k = kmin; k <= kmax; ++k) {
    const long double log_den =
        detail::log_factorial(k) + detail::log_factorial((tj1 + tj2 - tj) / 2 - k) +
        detail::log_factorial((tj1 - tm1) / 2 - k) + detail::log_factorial((tj2 + tm2) / 2 - k) +
        detail::log_factorial((tj - tj2 + tm1) / 2 + k) +
        detail::log_factorial((tj - tj1 - tm2) / 2 + k);
    const long double term = std::exp(half_log_pre - log_den);
    sum += (k % 2 == 0) ? term : -term;
  }
  return static_cast<double>(sum);
}

// Wigner 3j symbol (j1 j2 j3; m1 m2 m3)
inline double wigner_3j(int tj1, int tj2, int tj3, int tm1, int tm2, int tm3) {
  if (tm1 + tm2 + tm3 != 0) return 0.0;
  const double c = clebsch_gordan(tj1, tm1, tj2, tm2, tj3, -tm3);
  if (c == 0.0) return 0.0;
  const int tphase = tj1 - tj2 - tm3;  // (-1)^(j1-j2-m3)
  return detail::parity(tphase) * c / std::sqrt(static_cast<double>(tj3 + 1));
}

// {a b c; d e f}
inline double wigner_6j(int ta, int tb, int tc, int td, int te, int tf) {
  if (ta < 0 || tb < 0 || tc < 0 || td < 0 || te < 0 || tf < 0)
    throw std::invalid_argument("wigner_6j: negative angular momentum");
  if (!triangle_ok(ta, tb, tc) || !triangle_ok(ta, te, tf) || !triangle_ok(td, tb, tf) ||
      !triangle_ok(td, te, tc))
    return 0.0;

  const long double half_log_pre =
      0.5L * (detail::log_delta2(ta, tb, tc) + detail::log_delta2(ta, te, tf) +
              detail::log_delta2(td, tb, tf) + detail::log_delta2(td, te, tc));

  const int tmin =
      std::max({ta + tb + tc, ta + te + tf, td + tb + tf, td + te + tc}) / 2;
  const int tmax =
      std::min({ta + tb + td + te, tb + tc + te + tf, ta + tc + td + tf}) / 2;

  long double sum = 0.0L;
  for (int t = tmin; t <= tmax; ++t) {
    const long double log_term =
        detail::log_factorial(t + 1) - detail::log_factorial(t - (ta + tb + tc) / 2) -
        detail::log_factorial(t - (ta + te + tf) / 2) -
        detail::log_factorial(t - (td + tb + tf) / 2) -
        detail::log_factorial(t - (td + te + tc) / 2) -
        detail::log_factorial((ta + tb + td + te) / 2 - t) -
        detail::log_factorial((tb + tc + te + tf) / 2 - t) -
        detail::log_factorial((ta + tc + td + tf) / 2 - t);
    const long double term = std::exp(half_log_pre + log_term);
    sum += (t % 2 == 0) ? term : -term;
  }
  return static_cast<double>(sum);
}

// Racah W(a b c d; e f) = (-1)^(a+b+c+d) {a b e; d c f}
inline double racah_w(int ta, int tb, int tc, int td, int te, int tf) {
  return detail::parity(ta + tb + tc + td) * wigner_6j(ta, tb, te, td, tc, tf);
}

// {a b c; d e f; g h i} by contraction over three 6j symbols
inline double wigner_9j(int ta, int tb, int tc, int td, int te, int tf, int tg, int th,
                        int ti) {
  if (!triangle_ok(ta, tb, tc) || !triangle_ok(td, te, tf) || !triangle_ok(tg, th, ti) ||
      !triangle_ok(ta, td, tg) || !triangle_ok(tb, te, th) || !triangle_ok(tc, tf, ti))
    return 0.0;
  const int xmin = std::max({std::abs(ta - ti), std::abs(td - th), std::abs(tb - tf)});
  const int xmax = std::min({ta + ti, td + th, tb + tf});
  long double sum = 0.0L;
  for (int tx = xmin; tx <= xmax; tx += 2) {
    const long double term = static_cast<long double>(wigner_6j(ta, tb, tc, tf, ti, tx)) *
                             wigner_6j(td, te, tf, tb, tx, th) *
                             wigner_6j(tg, th, ti, tx, ta, td);
    const long double w = (tx + 1) * term;
    sum += (tx % 2 == 0) ? w : -w;  // (-1)^(2x)
  }
  return static_cast<double>(sum);
}

// <j||j||j> = sqrt(j(j+1)(2j+1))
inline double reduced_j(int tj) {
  const double j = 0.5 * tj;
  return std::sqrt(j * (j + 1.0) * (tj + 1.0));
}

// <j||[j x j]_2||j> for the rank-2 self-coupling of one angular
// momentum, [j x j]_2q = sum_{q1 q2} <1 q1 1 q2|2 q> j_q1 j_q2.
// Closed form: (-1)^(2j) sqrt(5) {1 1 2; j j j} j(j+1)(2j+1); the
// (-1)^(2j) keeps the result positive for half-integer j as well.
inline double reduced_jj2(int tj) {
  const double j = 0.5 * tj;
  const int sign = (tj % 2 == 0) ? 1 : -1;
  return sign * std::sqrt(5.0) * wigner_6j(2, 2, 4, tj, tj, tj) * j * (j + 1.0) * (tj + 1.0);
}

// <l'||C_k||l> for the Racah spherical tensor C_kq = sqrt(4pi/(2k+1)) Y_kq,
// equal to sqrt(2l+1) <l 0 k 0|l' 0> in the convention above.
inline double reduced_c(int tlp, int k, int tl) {
  return std::sqrt(tl + 1.0) * clebsch_gordan(tl, 0, 2 * k, 0, tlp, 0);
}

// <l' m'|C_kq|l m> = sqrt((2l+1)/(2l'+1)) <l 0 k 0|l' 0> <l m k q|l' m'>
inline double c_tensor_element(int tlp, int tmp, int k, int q, int tl, int tm) {
  return std::sqrt((tl + 1.0) / (tlp + 1.0)) * clebsch_gordan(tl, 0, 2 * k, 0, tlp, 0) *
         clebsch_gordan(tl, tm, 2 * k, 2 * q, tlp, tmp);
}

}  // namespace lndimer::angmom
