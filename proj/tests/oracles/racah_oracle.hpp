#pragma once

// Exact-rational reference values for Clebsch-Gordan, 3-j and 6-j symbols.
// Every quantity is held as sign * sqrt(rational) and rounded once at the end.
// Arguments are doubled so half-integers are exact.

#include <cstdlib>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

namespace oracle {

using boost::multiprecision::cpp_int;
using boost::multiprecision::cpp_rational;
using float50 = boost::multiprecision::cpp_bin_float_50;

struct SignedRoot {
  int sign = 0;
  cpp_rational square = 0;

  float50 value50() const {
    if (sign == 0) return 0;
    float50 num(boost::multiprecision::numerator(square));
    float50 den(boost::multiprecision::denominator(square));
    return sign * sqrt(num / den);
  }
  double value() const { return static_cast<double>(value50()); }
};

inline cpp_int factorial(int n) {
  static std::vector<cpp_int> table{1};
  if (n < 0) std::abort();
  while (static_cast<int>(table.size()) <= n) table.push_back(table.back() * static_cast<int>(table.size()));
  return table[static_cast<std::size_t>(n)];
}

// n given doubled; returns n! for integral n.
inline cpp_int fact2(int twice) {
  if (twice & 1) std::abort();
  return factorial(twice / 2);
}

inline bool triad(int a, int b, int c) {
  return c <= a + b && c >= std::abs(a - b) && ((a + b + c) & 1) == 0;
}

/// <j1 m1 j2 m2 | J M> from Racah's closed form (doubled arguments).
inline SignedRoot clebsch_gordan2(int j1, int m1, int j2, int m2, int J, int M) {
  if (m1 + m2 != M || !triad(j1, j2, J)) return {};
  if (std::abs(m1) > j1 || std::abs(m2) > j2 || std::abs(M) > J) return {};
  if (((j1 + m1) & 1) || ((j2 + m2) & 1) || ((J + M) & 1)) return {};

  cpp_rational pre(cpp_int(J + 1) * fact2(J + j1 - j2) * fact2(J - j1 + j2) * fact2(j1 + j2 - J),
                   fact2(j1 + j2 + J + 2));
  pre *= cpp_rational(fact2(J + M) * fact2(J - M) * fact2(j1 - m1) * fact2(j1 + m1) * fact2(j2 - m2) * fact2(j2 + m2));

  cpp_rational sum = 0;
  for (int k = 0;; k += 2) {
    const int a = j1 + j2 - J - k;
    const int b = j1 - m1 - k;
    const int c = j2 + m2 - k;
    const int d = J - j2 + m1 + k;
    const int e = J - j1 - m2 + k;
    if (a < 0 || b < 0 || c < 0) break;
    if (d < 0 || e < 0) continue;
    cpp_rational term(1, fact2(k) * fact2(a) * fact2(b) * fact2(c) * fact2(d) * fact2(e));
    if ((k / 2) & 1) term = -term;
    sum += term;
  }
  if (sum == 0) return {};
  return {sum > 0 ? 1 : -1, pre * sum * sum};
}

/// (j1 j2 j3; m1 m2 m3) = (-1)^(j1-j2-m3) / sqrt(2 j3 + 1) <j1 m1 j2 m2 | j3 -m3>.
inline SignedRoot three_j2(int j1, int j2, int j3, int m1, int m2, int m3) {
  auto cg = clebsch_gordan2(j1, m1, j2, m2, j3, -m3);
  if (cg.sign == 0) return {};
  const int phase = (j1 - j2 - m3) / 2;
  if (phase & 1) cg.sign = -cg.sign;
  cg.square /= (j3 + 1);
  return cg;
}

inline cpp_rational triangle_delta2(int a, int b, int c) {
  return cpp_rational(fact2(a + b - c) * fact2(a - b + c) * fact2(-a + b + c), fact2(a + b + c + 2));
}

/// {j1 j2 j3; j4 j5 j6} from Racah's single sum (doubled arguments).
inline SignedRoot six_j2(int j1, int j2, int j3, int j4, int j5, int j6) {
  if (!triad(j1, j2, j3) || !triad(j1, j5, j6) || !triad(j4, j2, j6) || !triad(j4, j5, j3)) return {};
  const cpp_rational pre =
      triangle_delta2(j1, j2, j3) * triangle_delta2(j1, j5, j6) * triangle_delta2(j4, j2, j6) * triangle_delta2(j4, j5, j3);
  const int a1 = j1 + j2 + j3, a2 = j1 + j5 + j6, a3 = j4 + j2 + j6, a4 = j4 + j5 + j3;
  const int b1 = j1 + j2 + j4 + j5, b2 = j2 + j3 + j5 + j6, b3 = j3 + j1 + j6 + j4;
  const int lo = std::max({a1, a2, a3, a4});
  const int hi = std::min({b1, b2, b3});
  cpp_rational sum = 0;
  for (int t = lo; t <= hi; t += 2) {
    cpp_rational term(fact2(t + 2), fact2(t - a1) * fact2(t - a2) * fact2(t - a3) * fact2(t - a4) * fact2(b1 - t) *
                                        fact2(b2 - t) * fact2(b3 - t));
    if ((t / 2) & 1) term = -term;
    sum += term;
  }
  if (sum == 0) return {};
  return {sum > 0 ? 1 : -1, pre * sum * sum};
}

inline double three_j(int j1, int j2, int j3, int m1, int m2, int m3) {
  return three_j2(2 * j1, 2 * j2, 2 * j3, 2 * m1, 2 * m2, 2 * m3).value();
}

inline double six_j(int j1, int j2, int j3, int j4, int j5, int j6) {
  return six_j2(2 * j1, 2 * j2, 2 * j3, 2 * j4, 2 * j5, 2 * j6).value();
}

inline double clebsch_gordan(int j1, int m1, int j2, int m2, int J, int M) {
  return clebsch_gordan2(2 * j1, 2 * m1, 2 * j2, 2 * m2, 2 * J, 2 * M).value();
}

} // namespace oracle
