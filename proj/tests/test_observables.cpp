#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "chiral/observables.hpp"
#include "chiral/sweep.hpp"

using namespace chiral;

namespace {

constexpr double t8 = 8.0;

LevelReport thermal_run(const MoleculeSpec &mol, const TrainSpec &train, double temperature = t8, int truncation = 0) {
  const int cut = thermal_cutoff(mol, temperature);
  const int t = truncation > 0 ? truncation : default_truncation(train.total_p, cut);
  SpeciesModel<RotorBasis> model(mol, temperature, t);
  Workspace ws;
  return model.run(train, Engine::sudden, ws);
}

TrainSpec delta_train(int count, double tau, double delta, double total_p) {
  return equal_train(count, tau, delta, total_p, 0.0, PulseShape::delta);
}

} // namespace

TEST(Population, ThermalValuesWithoutPulses) {
  const auto r = thermal_run(presets::n14(), TrainSpec{});
  EXPECT_NEAR(r.population(2), 0.25, 0.02);
  EXPECT_NEAR(r.population(3), 0.02, 0.01);
  EXPECT_NEAR(r.total_population(), 1.0, 1e-9);
  EXPECT_NEAR(r.energy_absorbed, 0.0, 1e-15);
  EXPECT_NEAR(r.jz, 0.0, 1e-15);
}

TEST(Population, GroundStateAtZeroTemperature) {
  const auto r = thermal_run(presets::n14(), delta_train(4, 1.0, 0.3, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(r.population(0), 1.0);
}

TEST(Population, WeakPulseFirstOrder) {
  const double p = 0.01;
  const auto mol = presets::n14();
  const auto r = thermal_run(mol, delta_train(1, 1.0, 0.0, p), 0.0);
  const double expect_q2 = p * p * (1.0 / 45.0 + 2.0 / 30.0);
  EXPECT_NEAR(r.population(2) / expect_q2, 1.0, 1e-3);
  EXPECT_NEAR(r.energy_absorbed / (energy_linear(mol, 2) * expect_q2), 1.0, 1e-3);
  EXPECT_NEAR(energy_linear(mol, 2), 6.0 * mol.b - 36.0 * mol.d, 1e-15);
}

TEST(Directionality, LinearTrainIsSymmetric) {
  const auto r = thermal_run(presets::n14(), delta_train(8, 1.9, 0.0, 5.0));
  for (int j = 0; j < static_cast<int>(r.levels()); ++j) {
    const double e = r.directionality(j);
    if (!std::isnan(e)) EXPECT_NEAR(e, 0.0, 1e-12) << "J=" << j;
  }
  EXPECT_NEAR(r.jz, 0.0, 1e-12);
}

TEST(Directionality, PureProjectionStates) {
  auto basis = std::make_shared<const RotorBasis>(RotorBasis::full(4));
  const std::vector<double> e(basis->size(), 0.0);
  for (int m : {2, -2}) {
    const auto s = basis_state(basis, RotorLabel{2, m});
    EnsembleAccumulator acc;
    acc.add(summarize(*basis, std::span<const cplx>(s.coeffs), e, 0.0), 1.0);
    const auto r = acc.report();
    EXPECT_DOUBLE_EQ(r.directionality(2), m > 0 ? 1.0 : -1.0);
    EXPECT_DOUBLE_EQ(r.jz, m);
    EXPECT_TRUE(std::isnan(r.directionality(3)));
  }
}

TEST(Directionality, ZeroProjectionSplitsEvenly) {
  auto basis = std::make_shared<const RotorBasis>(RotorBasis::full(2));
  const std::vector<double> e(basis->size(), 0.0);
  auto s = basis_state(basis, RotorLabel{2, 0});
  EnsembleAccumulator acc;
  acc.add(summarize(*basis, std::span<const cplx>(s.coeffs), e, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(acc.report().directionality(2), 0.0);
}

TEST(Directionality, PositiveDiagonalGivesCounterClockwise) {
  const auto mol = presets::n14();
  const double delta = std::numbers::pi / 4;
  const double tau = excitation_period(mol, 2) * (1.0 + delta / std::numbers::pi);
  const auto r = thermal_run(mol, delta_train(8, tau, delta, 5.0));
  EXPECT_GT(r.directionality(2), 0.0);
  EXPECT_GT(r.jz, 0.0);
  const auto mirror = thermal_run(mol, delta_train(8, tau, -delta, 5.0));
  EXPECT_NEAR(mirror.directionality(2), -r.directionality(2), 1e-10);
}

TEST(Observables, RangesAndSum) {
  const auto mol = presets::n14();
  for (double tau : {0.7, 2.1, 3.3, 4.6}) {
    const auto r = thermal_run(mol, delta_train(8, tau, 0.9, 5.0));
    EXPECT_NEAR(r.total_population(), 1.0, 1e-9);
    int max_j = 0;
    for (int j = 0; j < static_cast<int>(r.levels()); ++j) {
      EXPECT_GE(r.population(j), 0.0);
      EXPECT_LE(r.population(j), 1.0 + 1e-12);
      if (r.population(j) > 0) max_j = j;
      const double e = r.directionality(j);
      if (!std::isnan(e)) {
        EXPECT_GE(e, -1.0 - 1e-12);
        EXPECT_LE(e, 1.0 + 1e-12);
      }
    }
    EXPECT_LE(std::abs(r.jz), max_j);
  }
}

TEST(Observables, InvariantUnderPostDelay) {
  const auto mol = presets::n14();
  const auto train = delta_train(8, 2.3, 0.7, 5.0);
  SpeciesModel<RotorBasis> model(mol, t8, default_truncation(5.0, thermal_cutoff(mol, t8)));
  Workspace ws;
  std::vector<std::vector<cplx>> finals;
  for (const auto &s : model.initial_states()) finals.push_back(model.propagate(s, train, Engine::sudden, ws));

  auto reduce = [&](double delay) {
    EnsembleAccumulator acc;
    for (std::size_t k = 0; k < finals.size(); ++k) {
      const auto &s = model.initial_states()[k];
      const auto &dyn = model.block(s.block);
      auto c = finals[k];
      dyn.free_evolve(c, delay);
      acc.add(summarize(dyn.basis(), std::span<const cplx>(c), dyn.energies(), s.energy), s.weight);
    }
    return acc.report();
  };
  const auto base = reduce(0.0);
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> delay(0.0, 50.0);
  for (int k = 0; k < 5; ++k) {
    const auto r = reduce(delay(rng));
    for (int j = 0; j < static_cast<int>(base.levels()); ++j) {
      EXPECT_NEAR(r.population(j), base.population(j), 1e-12);
      if (!std::isnan(base.directionality(j))) EXPECT_NEAR(r.directionality(j), base.directionality(j), 1e-9);
    }
    EXPECT_NEAR(r.jz, base.jz, 1e-11);
    EXPECT_NEAR(r.energy_absorbed, base.energy_absorbed, 1e-11);
  }
}

TEST(Observables, MatchesWeightedFinalStates) {
  const auto mol = presets::n14();
  const auto train = delta_train(4, 1.3, 0.5, 2.0);
  SpeciesModel<RotorBasis> model(mol, t8, 24);
  Workspace ws;
  std::vector<WeightedFinal<RotorBasis>> finals;
  for (const auto &s : model.initial_states()) {
    const auto &dyn = model.block(s.block);
    finals.push_back({RotorState{dyn.basis_ptr(), model.propagate(s, train, Engine::sudden, ws), 0.0}, s.weight,
                      dyn.basis()[s.index]});
  }
  const auto r = model.run(train, Engine::sudden, ws);
  const std::span<const WeightedFinal<RotorBasis>> view(finals);
  const auto q = population(view, mol);
  for (std::size_t j = 0; j < q.size(); ++j) EXPECT_NEAR(q[j], r.population(static_cast<int>(j)), 1e-14);
  EXPECT_NEAR(jz_expect(view, mol), r.jz, 1e-14);
  EXPECT_NEAR(absorbed_energy(view, mol), r.energy_absorbed, 1e-14);
  const auto eps = directionality(view, mol);
  EXPECT_NEAR(eps[4], r.directionality(4), 1e-12);
}

TEST(Observables, SpinWeightsEnterOnlyThroughReweighting) {
  auto a = presets::n15();
  a.name = "15N2-as-14N2-weights";
  a.spin_weight_even = 6.0;
  a.spin_weight_odd = 3.0;
  const auto b = presets::n15();
  const auto train = delta_train(8, 2.2, std::numbers::pi / 4, 5.0);
  const int t = default_truncation(5.0, thermal_cutoff(a, t8));

  SpeciesModel<RotorBasis> model(a, t8, t);
  Workspace ws;
  const double kt = units::kelvin_to_rad_per_ps(t8);
  EnsembleAccumulator acc;
  double z = 0.0;
  std::vector<double> w;
  for (const auto &s : model.initial_states()) {
    const int j = model.block(s.block).basis()[s.index].j;
    w.push_back(b.spin_weight(j) * std::exp(-s.energy / kt));
    z += w.back();
  }
  for (std::size_t k = 0; k < w.size(); ++k) {
    const auto &s = model.initial_states()[k];
    const auto &dyn = model.block(s.block);
    const auto c = model.propagate(s, train, Engine::sudden, ws);
    acc.add(summarize(dyn.basis(), std::span<const cplx>(c), dyn.energies(), s.energy), w[k] / z);
  }
  const auto reweighted = acc.report();
  const auto direct = SpeciesModel<RotorBasis>(b, t8, t).run(train, Engine::sudden, ws);
  for (int j = 0; j < static_cast<int>(direct.levels()); ++j)
    EXPECT_NEAR(reweighted.population(j), direct.population(j), 1e-6);
  EXPECT_NEAR(reweighted.jz, direct.jz, 1e-6);
}

TEST(Jz, OrthoAndParaNitrogen15RotateOppositely) {
  const double tau = revival_time(presets::n15()) / 4;
  const auto train = delta_train(8, tau, std::numbers::pi / 4, 5.0);
  const auto ortho = thermal_run(presets::n15_ortho(), train);
  const auto para = thermal_run(presets::n15_para(), train);
  EXPECT_GT(ortho.jz, 0.0);
  EXPECT_LT(para.jz, 0.0);
}

// Levels that gain population carry opposite directionality for even and odd
// J; the odd (ortho) levels follow the sign of <J_z> of ortho-nitrogen.
TEST(Directionality, Nitrogen15EvenOddSignRule) {
  const auto mol = presets::n15();
  const double trev = revival_time(mol);
  const auto thermal = thermal_run(mol, TrainSpec{});
  for (double frac : {0.25, 0.75}) {
    const auto train = delta_train(8, frac * trev, std::numbers::pi / 4, 5.0);
    const auto r = thermal_run(mol, train);
    const double sign_odd = thermal_run(presets::n15_ortho(), train).jz > 0 ? 1.0 : -1.0;
    EXPECT_EQ(sign_odd, frac < 0.5 ? 1.0 : -1.0);
    int checked = 0;
    for (int j = 2; j < static_cast<int>(r.levels()); ++j) {
      const double e = r.directionality(j);
      if (std::isnan(e) || r.population(j) - thermal.population(j) < 1e-3) continue;
      const double expect = (j % 2 == 1) ? sign_odd : -sign_odd;
      EXPECT_GT(expect * e, 0.0) << "tau=" << frac << " t_rev, J=" << j << " eps=" << e;
      ++checked;
    }
    EXPECT_GE(checked, 4);
  }
}

TEST(AbsorbedEnergy, IsotopologueSelectivityAtRevivals) {
  const auto n14 = presets::n14();
  const auto n15 = presets::n15();
  for (double tau : {8.38, 8.98}) {
    const auto train = delta_train(8, tau, 0.0, 5.0);
    const double e14 = thermal_run(n14, train).energy_absorbed;
    const double e15 = thermal_run(n15, train).energy_absorbed;
    if (tau < 8.5)
      EXPECT_GT(e14, e15);
    else
      EXPECT_GT(e15, e14);
  }
}

TEST(AbsorbedEnergy, CaseBSpecies) {
  const auto o2 = presets::o16();
  SpeciesModel<CaseBBasis> model(o2, t8, 21);
  Workspace ws;
  EXPECT_EQ(model.run(TrainSpec{}, Engine::sudden, ws).energy_absorbed, 0.0);
  const auto r = model.run(bessel_train(2.0, 1.5, 0.3, 2.0), Engine::sudden, ws);
  EXPECT_GT(r.energy_absorbed, 0.0);
  EXPECT_NEAR(r.total_population(), 1.0, 1e-9);
  for (int n = 0; n < static_cast<int>(r.levels()); n += 2) EXPECT_EQ(r.population(n), 0.0);
}
