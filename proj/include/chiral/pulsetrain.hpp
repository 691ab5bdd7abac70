#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "chiral/error.hpp"
#include "chiral/units.hpp"

namespace chiral {

enum class PulseShape { gaussian, delta };

inline const char *to_string(PulseShape s) { return s == PulseShape::gaussian ? "gaussian" : "delta"; }

/// One linearly polarized pulse. `strength` is the effective pulse strength P
/// (typical angular momentum transfer in units of hbar); `sigma` is the width
/// of the Gaussian field envelope exp(-(t-t_c)^2 / (2 sigma^2)) in ps.
struct PulseSpec {
  double center_time = 0.0;
  double polarization_angle = 0.0;
  double strength = 0.0;
  double sigma = 0.0;
  PulseShape shape = PulseShape::delta;
};

struct TrainSpec {
  std::vector<PulseSpec> pulses;
  double tau = 0.0;
  double delta = 0.0;
  double total_p = 0.0;

  /// Period with which the polarization pattern of the train rotates.
  double rotation_period() const {
    return delta == 0.0 ? std::numeric_limits<double>::infinity() : 2.0 * units::pi * tau / std::abs(delta);
  }
};

namespace detail {

inline PulseSpec make_pulse(int n, double tau, double delta, double strength, double sigma, PulseShape shape) {
  if (shape == PulseShape::gaussian && !(sigma > 0))
    throw ConfigError("gaussian pulses need sigma > 0");
  // n * delta, never an accumulated sum.
  return PulseSpec{n * tau, n * delta, strength, sigma, shape};
}

} // namespace detail

/// Train of `count` equally strong pulses at t = n tau with polarization n delta,
/// n = 0 .. count-1.
inline TrainSpec equal_train(int count, double tau, double delta, double total_p, double sigma,
                             PulseShape shape = PulseShape::gaussian) {
  if (count < 1) throw ConfigError("equal_train: pulse count must be >= 1");
  if (total_p < 0) throw ConfigError("equal_train: total strength must be >= 0");
  TrainSpec t{{}, tau, delta, 0.0};
  const double each = total_p / count;
  for (int n = 0; n < count; ++n) {
    t.pulses.push_back(detail::make_pulse(n, tau, delta, each, sigma, shape));
    t.total_p += each;
  }
  return t;
}

/// J_n(x) from its power series, summed in extended precision.
inline double bessel_j_series(int n, double x) {
  if (n < 0) return ((-n) & 1 ? -1.0 : 1.0) * bessel_j_series(-n, x);
  if (x == 0.0) return n == 0 ? 1.0 : 0.0;
  const long double h = 0.5L * x;
  long double term = 1.0L;
  for (int k = 1; k <= n; ++k) term *= h / k;
  long double sum = term;
  const long double h2 = h * h;
  for (int k = 1; k < 500; ++k) {
    term *= -h2 / (static_cast<long double>(k) * (k + n));
    sum += term;
    if (std::abs(term) < 1e-22L * std::abs(sum) && k > h) break;
  }
  return static_cast<double>(sum);
}

/// J_0(x) .. J_{n_max}(x) by Miller's backward recurrence, normalized with
/// J_0 + 2 sum J_{2k} = 1.
inline std::vector<double> bessel_j_recurrence(int n_max, double x) {
  if (n_max < 0) throw ConfigError("bessel_j_recurrence: negative order");
  std::vector<double> out(static_cast<std::size_t>(n_max) + 1, 0.0);
  if (x == 0.0) {
    out[0] = 1.0;
    return out;
  }
  const double ax = std::abs(x);
  int start = static_cast<int>(std::max<double>(n_max, ax)) + 30 + static_cast<int>(std::sqrt(40.0 * std::max<double>(n_max, ax)));
  start += start & 1;

  std::vector<double> j(static_cast<std::size_t>(start) + 2, 0.0);
  j[start + 1] = 0.0;
  j[start] = 1e-300;
  for (int k = start; k >= 1; --k) {
    j[k - 1] = 2.0 * k / ax * j[k] - j[k + 1];
    if (std::abs(j[k - 1]) > 1e250) {
      for (int i = k - 1; i <= start; ++i) j[i] *= 1e-250;
    }
  }
  double norm = j[0];
  for (int k = 2; k <= start; k += 2) norm += 2.0 * j[k];
  for (int n = 0; n <= n_max; ++n) {
    double v = j[n] / norm;
    if (x < 0 && (n & 1)) v = -v;
    out[n] = v;
  }
  return out;
}

/// Default half-width of the Bessel-train index range.
inline int bessel_default_range(double a) {
  return std::max(10, static_cast<int>(std::ceil(2.0 * std::abs(a))) + 5);
}

inline constexpr double bessel_tail_tolerance = 1e-6;

/// Train with strengths P_n = P_tot J_n(A)^2 for n = -half_range .. half_range.
inline TrainSpec bessel_train(double a, double tau, double delta, double total_p, int half_range, double sigma = 0.0,
                              PulseShape shape = PulseShape::delta) {
  if (total_p < 0) throw ConfigError("bessel_train: total strength must be >= 0");
  if (half_range < 0) throw ConfigError("bessel_train: negative index range");
  const auto jn = bessel_j_recurrence(half_range, a);
  double captured = jn[0] * jn[0];
  for (int n = 1; n <= half_range; ++n) captured += 2.0 * jn[n] * jn[n];
  const double tail = std::max(0.0, 1.0 - captured);
  if (tail >= bessel_tail_tolerance)
    throw TruncationError("bessel_train: index range |n| <= " + std::to_string(half_range) +
                              " omits Bessel tail mass " + std::to_string(tail),
                          tail);

  TrainSpec t{{}, tau, delta, 0.0};
  for (int n = -half_range; n <= half_range; ++n) {
    const double jv = jn[static_cast<std::size_t>(std::abs(n))];
    const double p = total_p * jv * jv;
    t.pulses.push_back(detail::make_pulse(n, tau, delta, p, sigma, shape));
    t.total_p += p;
  }
  return t;
}

inline TrainSpec bessel_train(double a, double tau, double delta, double total_p) {
  return bessel_train(a, tau, delta, total_p, bessel_default_range(a));
}

/// Effective pulse strength P = delta_alpha I_peak sigma sqrt(pi) / (2 c eps0 hbar)
/// with delta_alpha in SI units, I_peak in W/cm^2 and sigma in ps.
inline double strength_from_intensity(double delta_alpha, double intensity_w_cm2, double sigma_ps) {
  const double intensity = intensity_w_cm2 * 1e4;
  const double sigma = sigma_ps * 1e-12;
  return delta_alpha * intensity * sigma * std::sqrt(units::pi) /
         (2.0 * units::speed_of_light * units::vacuum_permittivity * units::hbar_si);
}

/// Peak intensity (W/cm^2) that produces strength P.
inline double intensity_from_strength(double delta_alpha, double strength, double sigma_ps) {
  return strength / strength_from_intensity(delta_alpha, 1.0, sigma_ps);
}

} // namespace chiral
