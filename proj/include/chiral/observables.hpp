#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "chiral/molecule.hpp"
#include "chiral/propagator.hpp"

namespace chiral {

/// Populations below this threshold have no defined directionality.
inline constexpr double directionality_floor = 1e-6;

/// Final state of one member of the thermal ensemble.
template <class Basis>
struct WeightedFinal {
  QuantumState<Basis> state;
  double weight = 0.0;
  typename Basis::Label initial;
};

/// Observables of a single propagated initial state, indexed by level (J for
/// a rigid rotor, N for case (b)).
struct StateSummary {
  std::vector<double> population;
  std::vector<double> left;  // M > 0 plus half of M = 0
  std::vector<double> right; // M < 0 plus half of M = 0
  double jz = 0.0;
  double energy = 0.0;
  double initial_energy = 0.0;
};

template <class Basis>
StateSummary summarize(const Basis &basis, std::span<const cplx> coeffs, std::span<const double> energies,
                       double initial_energy) {
  StateSummary s;
  const auto levels = static_cast<std::size_t>(basis.max_shell() + 1);
  s.population.assign(levels, 0.0);
  s.left.assign(levels, 0.0);
  s.right.assign(levels, 0.0);
  s.initial_energy = initial_energy;
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const double p = std::norm(coeffs[i]);
    if (p == 0.0) continue;
    const auto lvl = static_cast<std::size_t>(basis.level_of(i));
    const int m = basis.m_of(i);
    s.population[lvl] += p;
    if (m > 0)
      s.left[lvl] += p;
    else if (m < 0)
      s.right[lvl] += p;
    else {
      s.left[lvl] += 0.5 * p;
      s.right[lvl] += 0.5 * p;
    }
    s.jz += m * p;
    s.energy += energies[i] * p;
  }
  return s;
}

/// Ensemble-averaged observables.
struct LevelReport {
  std::vector<double> q;     // population per level
  std::vector<double> q_left;
  std::vector<double> q_right;
  double jz = 0.0;              // <J_z> in units of hbar
  double energy_absorbed = 0.0; // rad/ps

  std::size_t levels() const { return q.size(); }

  double population(int level) const {
    return level >= 0 && static_cast<std::size_t>(level) < q.size() ? q[static_cast<std::size_t>(level)] : 0.0;
  }

  /// (Q_L - Q_R) / (Q_L + Q_R), or NaN where the population is below the floor.
  double directionality(int level) const {
    if (level < 0 || static_cast<std::size_t>(level) >= q.size()) return std::numeric_limits<double>::quiet_NaN();
    const auto l = static_cast<std::size_t>(level);
    if (q[l] < directionality_floor) return std::numeric_limits<double>::quiet_NaN();
    return (q_left[l] - q_right[l]) / (q_left[l] + q_right[l]);
  }

  double total_population() const {
    double s = 0.0;
    for (double v : q) s += v;
    return s;
  }
};

/// Fixed-order weighted reduction of per-state summaries.
class EnsembleAccumulator {
public:
  void add(const StateSummary &s, double weight) {
    if (s.population.size() > report_.q.size()) {
      report_.q.resize(s.population.size(), 0.0);
      report_.q_left.resize(s.population.size(), 0.0);
      report_.q_right.resize(s.population.size(), 0.0);
    }
    for (std::size_t l = 0; l < s.population.size(); ++l) {
      report_.q[l] += weight * s.population[l];
      report_.q_left[l] += weight * s.left[l];
      report_.q_right[l] += weight * s.right[l];
    }
    report_.jz += weight * s.jz;
    energy_final_ += weight * s.energy;
    energy_initial_ += weight * s.initial_energy;
  }

  LevelReport report() const {
    LevelReport r = report_;
    r.energy_absorbed = energy_final_ - energy_initial_;
    return r;
  }

private:
  LevelReport report_;
  double energy_final_ = 0.0;
  double energy_initial_ = 0.0;
};

template <class Basis>
LevelReport ensemble_report(std::span<const WeightedFinal<Basis>> finals, const MoleculeSpec &molecule) {
  EnsembleAccumulator acc;
  for (const auto &f : finals) {
    const auto e = basis_energies(molecule, *f.state.basis);
    acc.add(summarize(*f.state.basis, std::span<const cplx>(f.state.coeffs), e, energy(molecule, f.initial)), f.weight);
  }
  return acc.report();
}

/// Q per level (J or N).
template <class Basis>
std::vector<double> population(std::span<const WeightedFinal<Basis>> finals, const MoleculeSpec &molecule) {
  return ensemble_report(finals, molecule).q;
}

/// Directionality per level; NaN where undefined.
template <class Basis>
std::vector<double> directionality(std::span<const WeightedFinal<Basis>> finals, const MoleculeSpec &molecule) {
  const auto r = ensemble_report(finals, molecule);
  std::vector<double> eps(r.levels());
  for (std::size_t l = 0; l < eps.size(); ++l) eps[l] = r.directionality(static_cast<int>(l));
  return eps;
}

template <class Basis>
double jz_expect(std::span<const WeightedFinal<Basis>> finals, const MoleculeSpec &molecule) {
  return ensemble_report(finals, molecule).jz;
}

/// Mean rotational energy gained relative to the thermal ensemble (rad/ps).
template <class Basis>
double absorbed_energy(std::span<const WeightedFinal<Basis>> finals, const MoleculeSpec &molecule) {
  return ensemble_report(finals, molecule).energy_absorbed;
}

} // namespace chiral
