#pragma once

// Angular-momentum algebra: exact Wigner 3-j / 6-j symbols and the matrix
// elements of cos^2(beta) in the linear-rotor and Hund's case (b) bases.
//
// Symbols are evaluated from Racah's single-sum formulas over exact big
// integers; the only floating-point step is the final square root. Results
// are memoized in a process-wide cache that is safe to share between threads.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <mutex>
#include <shared_mutex>
#include <unordered_map>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include "chiral/basis.hpp"
#include "chiral/error.hpp"

namespace chiral {

/// Angular momentum quantum number stored as twice its value so that
/// half-integers are exact.
struct HalfInt {
  int twice = 0;

  static constexpr HalfInt integer(int v) { return HalfInt{2 * v}; }
  static constexpr HalfInt half(int twice_value) { return HalfInt{twice_value}; }

  constexpr bool is_integer() const { return (twice & 1) == 0; }
  constexpr double value() const { return 0.5 * twice; }

  friend constexpr HalfInt operator-(HalfInt a) { return HalfInt{-a.twice}; }
  friend constexpr bool operator==(HalfInt, HalfInt) = default;
};

namespace literals {
constexpr HalfInt operator""_j(unsigned long long v) { return HalfInt::integer(static_cast<int>(v)); }
} // namespace literals

namespace detail {

using boost::multiprecision::cpp_int;
using boost::multiprecision::cpp_rational;

inline constexpr int max_factorial = 600;

inline const std::vector<cpp_int> &factorial_table() {
  static const std::vector<cpp_int> table = [] {
    std::vector<cpp_int> t(max_factorial + 1);
    t[0] = 1;
    for (int i = 1; i <= max_factorial; ++i)
      t[i] = t[i - 1] * i;
    return t;
  }();
  return table;
}

inline const cpp_int &factorial(int n) {
  if (n < 0 || n > max_factorial)
    throw ConfigError("factorial argument out of range: " + std::to_string(n));
  return factorial_table()[static_cast<std::size_t>(n)];
}

// sign * sqrt(r) evaluated in 50-digit binary floating point, then rounded.
inline double signed_sqrt(int sign, const cpp_rational &r) {
  using boost::multiprecision::cpp_bin_float_50;
  if (sign == 0 || r == 0)
    return 0.0;
  cpp_bin_float_50 v = cpp_bin_float_50(boost::multiprecision::numerator(r)) /
                       cpp_bin_float_50(boost::multiprecision::denominator(r));
  return sign * static_cast<double>(boost::multiprecision::sqrt(v));
}

// All arguments are doubled.
inline bool triangle(int ta, int tb, int tc) {
  return tc >= std::abs(ta - tb) && tc <= ta + tb && ((ta + tb + tc) & 1) == 0;
}

inline cpp_rational triangle_coefficient(int ta, int tb, int tc) {
  return cpp_rational(factorial((ta + tb - tc) / 2) * factorial((ta - tb + tc) / 2) * factorial((-ta + tb + tc) / 2),
                      factorial((ta + tb + tc) / 2 + 1));
}

inline bool valid_projection(int tj, int tm) { return tj >= 0 && std::abs(tm) <= tj && ((tj + tm) & 1) == 0; }

inline int phase(int exponent) { return (exponent & 1) ? -1 : 1; }

/// Uncached Racah evaluation of the 3-j symbol; doubled arguments.
inline double three_j_exact(int tj1, int tj2, int tj3, int tm1, int tm2, int tm3) {
  if (tm1 + tm2 + tm3 != 0) return 0.0;
  if (!valid_projection(tj1, tm1) || !valid_projection(tj2, tm2) || !valid_projection(tj3, tm3)) return 0.0;
  if (!triangle(tj1, tj2, tj3)) return 0.0;

  const int j1pj2mj3 = (tj1 + tj2 - tj3) / 2;
  const int j1mm1 = (tj1 - tm1) / 2;
  const int j2pm2 = (tj2 + tm2) / 2;
  const int j3mj2pm1 = (tj3 - tj2 + tm1) / 2;
  const int j3mj1mm2 = (tj3 - tj1 - tm2) / 2;

  const int kmin = std::max({0, -j3mj2pm1, -j3mj1mm2});
  const int kmax = std::min({j1pj2mj3, j1mm1, j2pm2});
  if (kmin > kmax) return 0.0;

  cpp_rational sum = 0;
  for (int k = kmin; k <= kmax; ++k) {
    cpp_int den = factorial(k) * factorial(j3mj2pm1 + k) * factorial(j3mj1mm2 + k) * factorial(j1pj2mj3 - k) *
                  factorial(j1mm1 - k) * factorial(j2pm2 - k);
    sum += cpp_rational(cpp_int(phase(k)), den);
  }
  if (sum == 0) return 0.0;

  cpp_rational sq = sum * sum * triangle_coefficient(tj1, tj2, tj3);
  sq *= cpp_rational(factorial((tj1 + tm1) / 2) * factorial((tj1 - tm1) / 2) * factorial((tj2 + tm2) / 2) *
                     factorial((tj2 - tm2) / 2) * factorial((tj3 + tm3) / 2) * factorial((tj3 - tm3) / 2));

  const int sign = (sum > 0 ? 1 : -1) * phase((tj1 - tj2 - tm3) / 2);
  return signed_sqrt(sign, sq);
}

/// Uncached Racah evaluation of the 6-j symbol; doubled arguments.
inline double six_j_exact(int tj1, int tj2, int tj3, int tj4, int tj5, int tj6) {
  if (!triangle(tj1, tj2, tj3) || !triangle(tj1, tj5, tj6) || !triangle(tj4, tj2, tj6) || !triangle(tj4, tj5, tj3))
    return 0.0;

  const int a1 = (tj1 + tj2 + tj3) / 2;
  const int a2 = (tj1 + tj5 + tj6) / 2;
  const int a3 = (tj4 + tj2 + tj6) / 2;
  const int a4 = (tj4 + tj5 + tj3) / 2;
  const int b1 = (tj1 + tj2 + tj4 + tj5) / 2;
  const int b2 = (tj2 + tj3 + tj5 + tj6) / 2;
  const int b3 = (tj3 + tj1 + tj6 + tj4) / 2;

  const int tmin = std::max({a1, a2, a3, a4});
  const int tmax = std::min({b1, b2, b3});
  if (tmin > tmax) return 0.0;

  cpp_rational sum = 0;
  for (int t = tmin; t <= tmax; ++t) {
    cpp_int den = factorial(t - a1) * factorial(t - a2) * factorial(t - a3) * factorial(t - a4) *
                  factorial(b1 - t) * factorial(b2 - t) * factorial(b3 - t);
    sum += cpp_rational(phase(t) * factorial(t + 1), den);
  }
  if (sum == 0) return 0.0;

  cpp_rational sq = sum * sum * triangle_coefficient(tj1, tj2, tj3) * triangle_coefficient(tj1, tj5, tj6) *
                    triangle_coefficient(tj4, tj2, tj6) * triangle_coefficient(tj4, tj5, tj3);
  return signed_sqrt(sum > 0 ? 1 : -1, sq);
}

struct SymbolKeyHash {
  std::size_t operator()(const std::array<int, 6> &k) const noexcept {
    std::uint64_t h = 1469598103934665603ull;
    for (int v : k) {
      h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(v));
      h *= 1099511628211ull;
    }
    return static_cast<std::size_t>(h);
  }
};

// Canonical 3-j key under column permutations and m -> -m. Returns the sign
// relating the original symbol to the canonical one.
inline int canonicalize_3j(std::array<int, 6> &k) {
  const int odd_phase = phase((k[0] + k[1] + k[2]) / 2);
  auto sorted = [](std::array<int, 6> v, int &swaps) {
    auto col_less = [&](int a, int b) { return std::pair(v[a], v[a + 3]) < std::pair(v[b], v[b + 3]); };
    auto swap_cols = [&](int a, int b) {
      std::swap(v[a], v[b]);
      std::swap(v[a + 3], v[b + 3]);
      ++swaps;
    };
    if (col_less(0, 1)) swap_cols(0, 1);
    if (col_less(1, 2)) swap_cols(1, 2);
    if (col_less(0, 1)) swap_cols(0, 1);
    return v;
  };

  int swaps_a = 0, swaps_b = 0;
  std::array<int, 6> flipped = k;
  for (int i = 3; i < 6; ++i) flipped[i] = -flipped[i];
  auto a = sorted(k, swaps_a);
  auto b = sorted(flipped, swaps_b);

  int sign = 1;
  if (b > a) {
    k = b;
    sign = odd_phase * ((swaps_b & 1) ? odd_phase : 1);
  } else {
    k = a;
    sign = (swaps_a & 1) ? odd_phase : 1;
  }
  return sign;
}

// Canonical 6-j key: minimum over the 24 tetrahedral images (no phase).
inline void canonicalize_6j(std::array<int, 6> &k) {
  static constexpr std::array<std::array<int, 3>, 6> perms{{{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
  static constexpr std::array<std::array<bool, 3>, 4> swaps{{{false, false, false}, {true, true, false}, {true, false, true}, {false, true, true}}};
  std::array<int, 6> best = k;
  for (const auto &p : perms) {
    for (const auto &s : swaps) {
      std::array<int, 6> v{};
      for (int c = 0; c < 3; ++c) {
        int up = k[p[c]], lo = k[p[c] + 3];
        if (s[c]) std::swap(up, lo);
        v[c] = up;
        v[c + 3] = lo;
      }
      best = std::min(best, v);
    }
  }
  k = best;
}

} // namespace detail

/// Memo cache for 3-j and 6-j symbols keyed on canonicalized doubled
/// arguments. Read-mostly; concurrent lookups take a shared lock and inserts
/// are idempotent.
class SymbolCache {
public:
  double three_j(int tj1, int tj2, int tj3, int tm1, int tm2, int tm3) {
    if (tm1 + tm2 + tm3 != 0) return 0.0;
    std::array<int, 6> key{tj1, tj2, tj3, tm1, tm2, tm3};
    const int sign = detail::canonicalize_3j(key);
    return sign * lookup(three_j_, key, [&] {
      return detail::three_j_exact(key[0], key[1], key[2], key[3], key[4], key[5]);
    });
  }

  double six_j(int tj1, int tj2, int tj3, int tj4, int tj5, int tj6) {
    std::array<int, 6> key{tj1, tj2, tj3, tj4, tj5, tj6};
    detail::canonicalize_6j(key);
    return lookup(six_j_, key, [&] { return detail::six_j_exact(key[0], key[1], key[2], key[3], key[4], key[5]); });
  }

  std::size_t size() const {
    std::shared_lock lock(mutex_);
    return three_j_.size() + six_j_.size();
  }

  void clear() {
    std::unique_lock lock(mutex_);
    three_j_.clear();
    six_j_.clear();
  }

private:
  using Map = std::unordered_map<std::array<int, 6>, double, detail::SymbolKeyHash>;

  template <class Compute>
  double lookup(Map &map, const std::array<int, 6> &key, Compute &&compute) {
    {
      std::shared_lock lock(mutex_);
      if (auto it = map.find(key); it != map.end()) return it->second;
    }
    const double v = compute();
    std::unique_lock lock(mutex_);
    map.emplace(key, v);
    return v;
  }

  mutable std::shared_mutex mutex_;
  Map three_j_;
  Map six_j_;
};

inline SymbolCache &symbol_cache() {
  static SymbolCache cache;
  return cache;
}

/// Wigner 3-j symbol (j1 j2 j3; m1 m2 m3). Zero whenever the coupling is not
/// allowed.
inline double wigner_3j(HalfInt j1, HalfInt j2, HalfInt j3, HalfInt m1, HalfInt m2, HalfInt m3) {
  return symbol_cache().three_j(j1.twice, j2.twice, j3.twice, m1.twice, m2.twice, m3.twice);
}

/// Wigner 6-j symbol {j1 j2 j3; l1 l2 l3}.
inline double wigner_6j(HalfInt j1, HalfInt j2, HalfInt j3, HalfInt l1, HalfInt l2, HalfInt l3) {
  return symbol_cache().six_j(j1.twice, j2.twice, j3.twice, l1.twice, l2.twice, l3.twice);
}

/// Integer-argument conveniences.
inline double wigner_3j(int j1, int j2, int j3, int m1, int m2, int m3) {
  return symbol_cache().three_j(2 * j1, 2 * j2, 2 * j3, 2 * m1, 2 * m2, 2 * m3);
}
inline double wigner_6j(int j1, int j2, int j3, int l1, int l2, int l3) {
  return symbol_cache().six_j(2 * j1, 2 * j2, 2 * j3, 2 * l1, 2 * l2, 2 * l3);
}

/// Clebsch-Gordan coefficient <j1 m1 j2 m2 | J M>.
inline double clebsch_gordan(HalfInt j1, HalfInt m1, HalfInt j2, HalfInt m2, HalfInt j, HalfInt m) {
  const int ph = detail::phase((j1.twice - j2.twice + m.twice) / 2);
  return ph * std::sqrt(j.twice + 1.0) * wigner_3j(j1, j2, j, m1, m2, -m);
}

/// Wigner small-d element d^j_{m' m}(pi/2), exact up to the final rounding.
inline double wigner_d_half_pi(int j, int mp, int m) {
  using detail::cpp_int;
  using detail::cpp_rational;
  using detail::factorial;
  if (j < 0 || std::abs(m) > j || std::abs(mp) > j) return 0.0;
  const int kmin = std::max(0, m - mp);
  const int kmax = std::min(j + m, j - mp);
  cpp_rational sum = 0;
  for (int k = kmin; k <= kmax; ++k) {
    cpp_int den = factorial(j + m - k) * factorial(k) * factorial(j - k - mp) * factorial(k - m + mp);
    sum += cpp_rational(cpp_int(detail::phase(k - m + mp)), den);
  }
  if (sum == 0) return 0.0;
  // cos(pi/4)^a sin(pi/4)^b with a + b = 2j contributes 2^-j.
  cpp_rational sq = sum * sum * cpp_rational(factorial(j + mp) * factorial(j - mp) * factorial(j + m) * factorial(j - m),
                                             cpp_int(1) << (2 * j));
  return detail::signed_sqrt(sum > 0 ? 1 : -1, sq);
}

/// <J,M| D^{(2)*}_{M0 0} |J',M'> for the linear rotor.
inline double rotmat_element_linear(int j, int m, int jp, int mp, int m0) {
  if (j < 0 || jp < 0 || std::abs(m) > j || std::abs(mp) > jp) return 0.0;
  if (m != mp + m0) return 0.0;
  const double a = wigner_3j(j, 2, jp, 0, 0, 0);
  if (a == 0.0) return 0.0;
  return detail::phase(m) * std::sqrt((2.0 * j + 1.0) * (2.0 * jp + 1.0)) * a * wigner_3j(j, 2, jp, -m, m0, mp);
}

inline double rotmat_element_linear(HalfInt j, HalfInt m, HalfInt jp, HalfInt mp, HalfInt m0) {
  if (!j.is_integer() || !m.is_integer() || !jp.is_integer() || !mp.is_integer() || !m0.is_integer()) return 0.0;
  return rotmat_element_linear(j.twice / 2, m.twice / 2, jp.twice / 2, mp.twice / 2, m0.twice / 2);
}

/// <J N M| D^{(2)*}_{M0 0} |J' N' M'> in Hund's case (b) with S = 1, Lambda = 0.
inline double rotmat_element_caseb(int j, int n, int m, int jp, int np, int mp, int m0) {
  if (m != mp + m0) return 0.0;
  const double a = wigner_3j(n, 2, np, 0, 0, 0);
  if (a == 0.0) return 0.0;
  const double b = wigner_6j(np, jp, 1, j, n, 2);
  if (b == 0.0) return 0.0;
  const double c = wigner_3j(j, 2, jp, -m, m0, mp);
  return detail::phase(j + jp - m + 1) *
         std::sqrt((2.0 * j + 1.0) * (2.0 * jp + 1.0) * (2.0 * n + 1.0) * (2.0 * np + 1.0)) * a * b * c;
}

/// Sparse Hermitian operator on a basis, stored as row-sorted COO triplets.
template <class Basis>
class CouplingMatrix {
public:
  struct Entry {
    std::size_t row;
    std::size_t col;
    std::complex<double> value;
  };

  CouplingMatrix(Basis basis, std::vector<Entry> entries) : basis_(std::move(basis)), entries_(std::move(entries)) {
    std::sort(entries_.begin(), entries_.end(),
              [](const Entry &a, const Entry &b) { return a.row != b.row ? a.row < b.row : a.col < b.col; });
    row_ptr_.assign(basis_.size() + 1, 0);
    for (const auto &e : entries_) ++row_ptr_[e.row + 1];
    for (std::size_t i = 0; i < basis_.size(); ++i) row_ptr_[i + 1] += row_ptr_[i];
  }

  const Basis &basis() const { return basis_; }
  std::size_t size() const { return basis_.size(); }
  std::span<const Entry> entries() const { return entries_; }
  std::span<const Entry> row(std::size_t r) const {
    return std::span<const Entry>(entries_).subspan(row_ptr_[r], row_ptr_[r + 1] - row_ptr_[r]);
  }

  std::complex<double> at(std::size_t r, std::size_t c) const {
    for (const auto &e : row(r))
      if (e.col == c) return e.value;
    return {};
  }

private:
  Basis basis_;
  std::vector<Entry> entries_;
  std::vector<std::size_t> row_ptr_;
};

namespace detail {

// cos^2(beta) = 1/3 - 1/3 D00* + e^{2i chi}/sqrt6 D_{-2,0}* + e^{-2i chi}/sqrt6 D_{2,0}*
template <class Element>
std::complex<double> cos2beta_combine(int dm, double angle, Element &&d_element, bool diagonal) {
  static const double inv_sqrt6 = 1.0 / std::sqrt(6.0);
  switch (dm) {
  case 0:
    return (diagonal ? 1.0 / 3.0 : 0.0) - d_element(0) / 3.0;
  case 2:
    return std::polar(inv_sqrt6 * d_element(2), -2.0 * angle);
  case -2:
    return std::polar(inv_sqrt6 * d_element(-2), 2.0 * angle);
  default:
    return {};
  }
}

} // namespace detail

/// Matrix of cos^2(beta) for a pulse polarized at `pulse_angle` in the lab XY
/// plane, on a linear-rotor basis.
inline CouplingMatrix<RotorBasis> cos2beta_matrix_linear(const RotorBasis &basis, double pulse_angle) {
  if (basis.empty()) throw ConfigError("cos2beta_matrix_linear: empty basis");
  using Entry = CouplingMatrix<RotorBasis>::Entry;
  std::vector<Entry> entries;
  entries.reserve(basis.size() * 9);
  for (std::size_t r = 0; r < basis.size(); ++r) {
    const auto [j, m] = basis[r];
    for (int dj = -2; dj <= 2; dj += 2) {
      for (int dm = -2; dm <= 2; dm += 2) {
        const int jp = j + dj, mp = m - dm;
        const auto c = basis.find(jp, mp);
        if (c < 0) continue;
        auto d = [&](int m0) { return rotmat_element_linear(j, m, jp, mp, m0); };
        const auto v = detail::cos2beta_combine(dm, pulse_angle, d, dj == 0 && dm == 0);
        if (v != std::complex<double>{}) entries.push_back({r, static_cast<std::size_t>(c), v});
      }
    }
  }
  return CouplingMatrix<RotorBasis>(basis, std::move(entries));
}

/// Matrix of cos^2(beta) on a Hund's case (b) basis.
inline CouplingMatrix<CaseBBasis> cos2beta_matrix_caseb(const CaseBBasis &basis, double pulse_angle) {
  if (basis.empty()) throw ConfigError("cos2beta_matrix_caseb: empty basis");
  using Entry = CouplingMatrix<CaseBBasis>::Entry;
  std::vector<Entry> entries;
  entries.reserve(basis.size() * 27);
  for (std::size_t r = 0; r < basis.size(); ++r) {
    const auto [j, n, m] = basis[r];
    for (int dn = -2; dn <= 2; dn += 2) {
      const int np = n + dn;
      for (int jp = np - 1; jp <= np + 1; ++jp) {
        if (std::abs(jp - j) > 2) continue;
        for (int dm = -2; dm <= 2; dm += 2) {
          const int mp = m - dm;
          const auto c = basis.find(jp, np, mp);
          if (c < 0) continue;
          auto d = [&](int m0) { return rotmat_element_caseb(j, n, m, jp, np, mp, m0); };
          const bool diag = static_cast<std::size_t>(c) == r;
          const auto v = detail::cos2beta_combine(dm, pulse_angle, d, diag);
          if (v != std::complex<double>{}) entries.push_back({r, static_cast<std::size_t>(c), v});
        }
      }
    }
  }
  return CouplingMatrix<CaseBBasis>(basis, std::move(entries));
}

/// Dispatch helper used by the propagator.
inline CouplingMatrix<RotorBasis> cos2beta_matrix(const RotorBasis &b, double angle) { return cos2beta_matrix_linear(b, angle); }
inline CouplingMatrix<CaseBBasis> cos2beta_matrix(const CaseBBasis &b, double angle) { return cos2beta_matrix_caseb(b, angle); }

} // namespace chiral
