#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "chiral/basis.hpp"
#include "chiral/error.hpp"
#include "chiral/units.hpp"

namespace chiral {

/// Spin-spin (lambda) and spin-rotation (gamma) constants of a 3-Sigma state,
/// both in rad/ps.
struct FineStructure {
  double lambda = 0.0;
  double gamma = 0.0;
};

enum class RotationalParity { even, odd, both };

/// Spectroscopic data of a diatomic species. B and D are in rad/ps,
/// delta_alpha in SI units (C m^2 / V). Spin weights multiply the Boltzmann
/// factor of levels with even / odd rotational quantum number (J for a rigid
/// rotor, N for case (b)).
struct MoleculeSpec {
  std::string name;
  double b = 0.0;
  double d = 0.0;
  double delta_alpha = 0.0;
  double spin_weight_even = 1.0;
  double spin_weight_odd = 1.0;
  std::optional<FineStructure> fine_structure;

  bool is_case_b() const { return fine_structure.has_value(); }

  double spin_weight(int rot) const { return detail::is_even(rot) ? spin_weight_even : spin_weight_odd; }

  RotationalParity allowed_rot_parity() const {
    if (spin_weight_even > 0 && spin_weight_odd > 0) return RotationalParity::both;
    return spin_weight_even > 0 ? RotationalParity::even : RotationalParity::odd;
  }

  void validate() const {
    if (!(b > 0)) throw ConfigError(name + ": rotational constant must be positive");
    if (d < 0) throw ConfigError(name + ": centrifugal distortion must be non-negative");
    if (spin_weight_even < 0 || spin_weight_odd < 0) throw ConfigError(name + ": negative spin weight");
    if (spin_weight_even == 0 && spin_weight_odd == 0) throw ConfigError(name + ": all spin weights are zero");
    if (is_case_b() && spin_weight_even != 0) throw ConfigError(name + ": case (b) species must restrict N to odd values");
  }
};

// Presets. B for the nitrogen isotopologues is fixed by their revival times
// (8.38 ps and 8.98 ps). D, delta_alpha and all oxygen constants are
// literature defaults for the vibronic ground state.
namespace presets {

inline MoleculeSpec n14() {
  MoleculeSpec s;
  s.name = "14N2";
  s.b = units::pi / 8.38;
  s.d = units::from_wavenumber(5.76e-6);
  s.delta_alpha = 0.70 * units::si_per_cubic_angstrom;
  s.spin_weight_even = 6.0;
  s.spin_weight_odd = 3.0;
  return s;
}

inline MoleculeSpec n15() {
  MoleculeSpec s;
  s.name = "15N2";
  s.b = units::pi / 8.98;
  s.d = units::from_wavenumber(5.02e-6);
  s.delta_alpha = 0.70 * units::si_per_cubic_angstrom;
  s.spin_weight_even = 1.0;
  s.spin_weight_odd = 3.0;
  return s;
}

/// 15N2 with total nuclear spin I = 1 (odd J only).
inline MoleculeSpec n15_ortho() {
  auto s = n15();
  s.name = "15N2-ortho";
  s.spin_weight_even = 0.0;
  return s;
}

/// 15N2 with total nuclear spin I = 0 (even J only).
inline MoleculeSpec n15_para() {
  auto s = n15();
  s.name = "15N2-para";
  s.spin_weight_odd = 0.0;
  return s;
}

inline MoleculeSpec o16() {
  MoleculeSpec s;
  s.name = "16O2";
  s.b = units::from_wavenumber(1.437676);
  s.d = units::from_wavenumber(4.839e-6);
  s.delta_alpha = 1.10 * units::si_per_cubic_angstrom;
  s.spin_weight_even = 0.0;
  s.spin_weight_odd = 1.0;
  s.fine_structure = FineStructure{units::from_wavenumber(1.984751), units::from_wavenumber(-0.008425)};
  return s;
}

inline std::vector<std::string> names() { return {"14N2", "15N2", "15N2-ortho", "15N2-para", "16O2"}; }

inline MoleculeSpec by_name(const std::string &name) {
  if (name == "14N2") return n14();
  if (name == "15N2") return n15();
  if (name == "15N2-ortho") return n15_ortho();
  if (name == "15N2-para") return n15_para();
  if (name == "16O2") return o16();
  throw ConfigError("unknown molecule preset '" + name + "'");
}

} // namespace presets

/// Rigid-rotor level energy B J(J+1) - D J^2 (J+1)^2 in rad/ps.
inline double energy_linear(const MoleculeSpec &spec, int j) {
  if (j < 0) throw ConfigError("energy_linear: negative J");
  const double x = static_cast<double>(j) * (j + 1);
  return spec.b * x - spec.d * x * x;
}

/// Case (b) level energy: rotational term plus the diagonal spin-rotation and
/// spin-spin contributions for S = 1.
inline double energy_caseb(const MoleculeSpec &spec, int j, int n) {
  if (!spec.is_case_b()) throw ConfigError("energy_caseb: " + spec.name + " has no fine structure");
  if (n < 1 || detail::is_even(n)) throw ConfigError("energy_caseb: N must be odd, got " + std::to_string(n));
  if (j < 0 || std::abs(j - n) > 1) throw ConfigError("energy_caseb: J must be N-1, N or N+1");
  const auto &fs = *spec.fine_structure;
  const double x = static_cast<double>(n) * (n + 1);
  const double n_dot_s = 0.5 * (static_cast<double>(j) * (j + 1) - x - 2.0);
  double spin_spin = 0.0;
  if (j == n - 1)
    spin_spin = -2.0 * (n + 1) / (3.0 * (2 * n - 1));
  else if (j == n)
    spin_spin = 2.0 / 3.0;
  else
    spin_spin = -2.0 * n / (3.0 * (2 * n + 3));
  return spec.b * x - spec.d * x * x + fs.gamma * n_dot_s + fs.lambda * spin_spin;
}

inline double energy(const MoleculeSpec &spec, const RotorLabel &l) { return energy_linear(spec, l.j); }
inline double energy(const MoleculeSpec &spec, const CaseBLabel &l) { return energy_caseb(spec, l.j, l.n); }

/// Field-free energies of every basis state.
template <class Basis>
std::vector<double> basis_energies(const MoleculeSpec &spec, const Basis &basis) {
  std::vector<double> e(basis.size());
  for (std::size_t i = 0; i < basis.size(); ++i) e[i] = energy(spec, basis[i]);
  return e;
}

struct LevelEntry {
  int j = 0;
  int n = -1; // -1 for linear-rotor levels
  double energy = 0.0;
};

/// Level energies up to a maximum rotational quantum number.
inline std::vector<LevelEntry> level_scheme(const MoleculeSpec &spec, int max_rot) {
  std::vector<LevelEntry> out;
  if (spec.is_case_b()) {
    for (int n = 1; n <= max_rot; n += 2)
      for (int j = n - 1; j <= n + 1; ++j) out.push_back({j, n, energy_caseb(spec, j, n)});
  } else {
    for (int j = 0; j <= max_rot; ++j) out.push_back({j, -1, energy_linear(spec, j)});
  }
  return out;
}

/// Rotational revival time pi / B (ps).
inline double revival_time(const MoleculeSpec &spec) {
  if (spec.is_case_b()) throw ConfigError("revival_time: case (b) species have no clean revival");
  return units::pi / spec.b;
}

/// Beat period 2 pi / (E_J - E_{J-2}) of the J-2 -> J Raman transition (ps).
inline double excitation_period(const MoleculeSpec &spec, int j) {
  if (spec.is_case_b()) throw ConfigError("excitation_period: linear rotor only");
  if (j < 2) throw ConfigError("excitation_period: J must be >= 2");
  return 2.0 * units::pi / (energy_linear(spec, j) - energy_linear(spec, j - 2));
}

/// Excitation period of the N-2 -> N transition of a case (b) species using
/// the rotational part of the energy only.
inline double excitation_period_rotational(const MoleculeSpec &spec, int n) {
  if (n < 2) throw ConfigError("excitation_period_rotational: N must be >= 2");
  auto rot = [&](int k) {
    const double x = static_cast<double>(k) * (k + 1);
    return spec.b * x - spec.d * x * x;
  };
  return 2.0 * units::pi / (rot(n) - rot(n - 2));
}

template <class Label>
struct WeightedState {
  Label label;
  double weight = 0.0;
};

inline constexpr double thermal_tail_tolerance = 1e-6;

namespace detail {

struct Level {
  int rot = 0; // J (linear) or N (case b)
  int j = 0;
  double energy = 0.0;
  double spin = 0.0;
};

inline std::vector<Level> thermal_levels(const MoleculeSpec &spec, int max_rot) {
  std::vector<Level> out;
  if (spec.is_case_b()) {
    for (int n = 1; n <= max_rot; n += 2)
      for (int j = n - 1; j <= n + 1; ++j) out.push_back({n, j, energy_caseb(spec, j, n), spec.spin_weight(n)});
  } else {
    for (int j = 0; j <= max_rot; ++j) out.push_back({j, j, energy_linear(spec, j), spec.spin_weight(j)});
  }
  return out;
}

// Largest J (or N) for which the level energies still increase. Beyond it
// the D term dominates and the Boltzmann sum is meaningless.
inline int distortion_turnover(const MoleculeSpec &spec) {
  if (spec.d <= 0) return 1 << 14;
  return static_cast<int>(std::floor(std::sqrt(spec.b / (2.0 * spec.d)) - 0.5));
}

struct ThermalSums {
  double e_min = 0.0;
  double kept = 0.0;
  double tail = 0.0;
};

inline ThermalSums thermal_sums(const MoleculeSpec &spec, double kt, int cutoff) {
  const int far = std::min(distortion_turnover(spec), cutoff + 400);
  const auto levels = thermal_levels(spec, std::max(far, cutoff));
  ThermalSums s;
  s.e_min = 1e300;
  for (const auto &l : levels)
    if (l.spin > 0 && l.rot <= cutoff) s.e_min = std::min(s.e_min, l.energy);
  for (const auto &l : levels) {
    if (l.spin <= 0) continue;
    const double w = l.spin * (2 * l.j + 1) * std::exp(-(l.energy - s.e_min) / kt);
    (l.rot <= cutoff ? s.kept : s.tail) += w;
  }
  return s;
}

} // namespace detail

/// Smallest cutoff (in J or N) whose neglected Boltzmann tail is below the
/// tolerance.
inline int thermal_cutoff(const MoleculeSpec &spec, double temperature_k) {
  spec.validate();
  if (temperature_k <= 0) return spec.is_case_b() ? 1 : (spec.spin_weight_even > 0 ? 0 : 1);
  const double kt = units::kelvin_to_rad_per_ps(temperature_k);
  for (int c = 0; c < detail::distortion_turnover(spec); ++c) {
    const auto s = detail::thermal_sums(spec, kt, c);
    if (s.kept > 0 && s.tail / (s.kept + s.tail) < thermal_tail_tolerance) return c;
  }
  throw TruncationError("thermal_cutoff: no cutoff captures the Boltzmann distribution", 1.0);
}

namespace detail {

template <class Label>
std::vector<WeightedState<Label>> thermal_weights_impl(const MoleculeSpec &spec, double temperature_k, int cutoff) {
  spec.validate();
  if (temperature_k < 0) throw ConfigError("thermal_weights: negative temperature");
  if (cutoff < 0) throw ConfigError("thermal_weights: negative cutoff");

  const auto levels = thermal_levels(spec, cutoff);
  std::vector<double> level_weight(levels.size(), 0.0);

  if (temperature_k == 0) {
    double e_min = 1e300;
    for (const auto &l : levels)
      if (l.spin > 0) e_min = std::min(e_min, l.energy);
    for (std::size_t i = 0; i < levels.size(); ++i)
      if (levels[i].spin > 0 && levels[i].energy <= e_min + 1e-12 * std::max(1.0, std::abs(e_min)))
        level_weight[i] = 2 * levels[i].j + 1;
  } else {
    const double kt = units::kelvin_to_rad_per_ps(temperature_k);
    const auto sums = thermal_sums(spec, kt, cutoff);
    const double tail = sums.tail / (sums.kept + sums.tail);
    if (!(sums.kept > 0) || tail >= thermal_tail_tolerance)
      throw TruncationError("thermal_weights: cutoff " + std::to_string(cutoff) + " leaves Boltzmann tail mass " +
                                std::to_string(tail),
                            tail);
    for (std::size_t i = 0; i < levels.size(); ++i)
      if (levels[i].spin > 0)
        level_weight[i] = levels[i].spin * (2 * levels[i].j + 1) * std::exp(-(levels[i].energy - sums.e_min) / kt);
  }

  double total = 0.0;
  for (double w : level_weight) total += w;

  std::vector<WeightedState<Label>> out;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (level_weight[i] <= 0) continue;
    const auto &l = levels[i];
    const double per_sublevel = level_weight[i] / total / (2 * l.j + 1);
    for (int m = -l.j; m <= l.j; ++m) {
      if constexpr (std::is_same_v<Label, RotorLabel>)
        out.push_back({RotorLabel{l.j, m}, per_sublevel});
      else
        out.push_back({CaseBLabel{l.j, l.rot, m}, per_sublevel});
    }
  }
  return out;
}

} // namespace detail

/// Normalized Boltzmann x nuclear-spin weights of the initial |J0, M0> states
/// with J0 <= cutoff. Each M0 sublevel carries an equal share of its level.
inline std::vector<WeightedState<RotorLabel>> thermal_weights_rotor(const MoleculeSpec &spec, double temperature_k,
                                                                    int cutoff) {
  if (spec.is_case_b()) throw ConfigError("thermal_weights_rotor: " + spec.name + " is a case (b) species");
  return detail::thermal_weights_impl<RotorLabel>(spec, temperature_k, cutoff);
}

/// Case (b) analogue; the cutoff applies to N.
inline std::vector<WeightedState<CaseBLabel>> thermal_weights_caseb(const MoleculeSpec &spec, double temperature_k,
                                                                    int cutoff) {
  if (!spec.is_case_b()) throw ConfigError("thermal_weights_caseb: " + spec.name + " is not a case (b) species");
  return detail::thermal_weights_impl<CaseBLabel>(spec, temperature_k, cutoff);
}

template <class Basis>
auto thermal_weights(const MoleculeSpec &spec, double temperature_k, int cutoff) {
  if constexpr (std::is_same_v<Basis, RotorBasis>)
    return thermal_weights_rotor(spec, temperature_k, cutoff);
  else
    return thermal_weights_caseb(spec, temperature_k, cutoff);
}

} // namespace chiral
