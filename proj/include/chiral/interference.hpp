#pragma once

// First-order (weak pulse) interference model of excitation by a periodic
// chiral train: the pulse-pair sum Phi and the resonance lines where it peaks.

#include <cmath>
#include <numeric>
#include <vector>

#include "chiral/angmom.hpp"
#include "chiral/error.hpp"
#include "chiral/molecule.hpp"
#include "chiral/units.hpp"

namespace chiral {

namespace detail {

// phase reduced to (-pi, pi]
inline double wrap_phase(double phase) {
  const double two_pi = 2.0 * units::pi;
  double r = std::remainder(phase, two_pi);
  if (r <= -units::pi) r += two_pi;
  return r;
}

} // namespace detail

/// Sum over pulse pairs of cos[phase (n - n')] for `count` pulses, evaluated
/// in closed form sin^2(N phase/2) / sin^2(phase/2).
inline double phi_sum(int count, double phase) {
  if (count < 1) throw ConfigError("phi_sum: pulse count must be >= 1");
  const double n = count;
  const double eps = detail::wrap_phase(phase);
  const double s = std::sin(0.5 * eps);
  if (std::abs(s) < 1e-6) {
    // Series about the removable singularity.
    return n * n * (1.0 - (n * n - 1.0) * eps * eps / 12.0);
  }
  const double a = std::sin(0.5 * n * eps) / s;
  return a * a;
}

/// Signed amplitude sin(N phase/2) / sin(phase/2) whose square is phi_sum.
inline double phi_amplitude(int count, double phase) {
  const double eps = detail::wrap_phase(phase);
  const double s = std::sin(0.5 * eps);
  if (std::abs(s) < 1e-12) return count;
  return std::sin(0.5 * count * eps) / s;
}

/// Phi as a function of the detuning x from resonance, in units of t_exc.
inline double phi_of_detuning(int count, double x_over_texc) { return phi_sum(count, 2.0 * units::pi * x_over_texc); }

/// Full width at half maximum of the main peak of Phi(x), in units of t_exc.
inline double phi_main_peak_width(int count) {
  if (count < 2) throw ConfigError("phi_main_peak_width: needs at least two pulses");
  const double half = 0.5 * count * count;
  double lo = 0.0, hi = 1.0 / count; // first zero
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (phi_of_detuning(count, mid) > half ? lo : hi) = mid;
  }
  return lo + hi;
}

/// Zeros of Phi(x) between main peaks, x/t_exc in (0, 1), located by bisection
/// on the sign change of the amplitude. Only m coprime with N are returned.
inline std::vector<double> phi_side_band_minima(int count) {
  std::vector<double> out;
  for (int m = 1; m < count; ++m) {
    if (std::gcd(m, count) != 1) continue;
    double lo = (m - 0.5) / count, hi = (m + 0.5) / count;
    auto f = [&](double x) { return phi_amplitude(count, 2.0 * units::pi * x); };
    double flo = f(lo);
    for (int it = 0; it < 200 && hi - lo > 0; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid == lo || mid == hi) break;
      const double fm = f(mid);
      if ((fm > 0) == (flo > 0)) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
      }
    }
    out.push_back(0.5 * (lo + hi));
  }
  return out;
}

/// Line in the (delta, tau) plane on which excitation into level `j_to` with
/// projection change `delta_m` is constructive: tau = t_exc (m + dM delta / 2pi).
struct ResonanceLine {
  int j_to = 0;
  int delta_m = 0;
  int m = 0;
  double t_exc = 0.0;

  double tau_at(double delta) const { return t_exc * (m + delta_m * delta / (2.0 * units::pi)); }
  double slope() const { return t_exc * delta_m / (2.0 * units::pi); }
};

/// Beat period of the (J_to - 2) -> J_to transition for either kind of species.
inline double transition_period(const MoleculeSpec &molecule, int j_to) {
  return molecule.is_case_b() ? excitation_period_rotational(molecule, j_to) : excitation_period(molecule, j_to);
}

inline std::vector<ResonanceLine> resonance_lines(const MoleculeSpec &molecule, int j_to, int delta_m, int m_min,
                                                  int m_max) {
  if (j_to < 2) throw ConfigError("resonance_lines: J must be >= 2");
  if (delta_m != 0 && delta_m != 2 && delta_m != -2) throw ConfigError("resonance_lines: delta M must be 0 or +-2");
  const double t_exc = transition_period(molecule, j_to);
  std::vector<ResonanceLine> out;
  for (int m = m_min; m <= m_max; ++m) out.push_back({j_to, delta_m, m, t_exc});
  return out;
}

/// <J M| V |J' M'> with V = e^{-i Jy pi/2} cos^2(theta) e^{i Jy pi/2}, i.e.
/// cos^2 of the angle to a pulse polarized along X, built from the Z-axis
/// operator and Wigner d(pi/2).
inline double rotated_cos2_element(int j, int m, int jp, int mp) {
  if (std::abs(j - jp) > 2 || ((j - jp) & 1)) return 0.0;
  if (std::abs(m - mp) > 2 || ((m - mp) & 1)) return 0.0;
  double s = 0.0;
  for (int k = -std::min(j, jp); k <= std::min(j, jp); ++k) {
    const double c = (j == jp ? 1.0 / 3.0 : 0.0) + (2.0 / 3.0) * rotmat_element_linear(j, k, jp, k, 0);
    if (c == 0.0) continue;
    s += wigner_d_half_pi(j, m, k) * c * wigner_d_half_pi(jp, mp, k);
  }
  return s;
}

struct TransitionEstimate {
  double probability = 0.0;
  bool weak_field = true; // P N < 1
};

/// First-order probability of |J' M'> -> |J M> after `count` delta pulses of
/// strength p each, period tau and polarization step delta.
inline TransitionEstimate first_order_transition_prob(double p, int j, int m, int jp, int mp, int count, double tau,
                                                      double delta, const MoleculeSpec &molecule) {
  if (molecule.is_case_b()) throw ConfigError("first_order_transition_prob: linear rotor only");
  const double v = rotated_cos2_element(j, m, jp, mp);
  const double de = energy_linear(molecule, j) - energy_linear(molecule, jp);
  const double phase = de * tau - (m - mp) * delta;
  return {p * p * v * v * phi_sum(count, phase), p * count < 1.0};
}

} // namespace chiral
