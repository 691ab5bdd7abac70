#pragma once

// Quick comparison of the library against the reference implementations used
// by the test suite.

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "chiral/chiral.hpp"
#include "dense_oracle.hpp"
#include "quadrature_oracle.hpp"
#include "racah_oracle.hpp"

namespace chiral_tools {

inline bool report(std::ostream &out, const std::string &name, double error, double tol) {
  const bool ok = error <= tol;
  char buf[200];
  std::snprintf(buf, sizeof buf, "%s %-34s max error %.3e (tolerance %.1e)\n", ok ? "PASS" : "FAIL", name.c_str(), error,
                tol);
  out << buf;
  return ok;
}

inline bool selfcheck(std::ostream &out) {
  using namespace chiral;
  bool ok = true;

  double e3 = 0.0, e6 = 0.0;
  for (int a = 0; a <= 4; ++a)
    for (int b = 0; b <= 4; ++b)
      for (int c = std::abs(a - b); c <= a + b && c <= 4; ++c) {
        for (int ma = -a; ma <= a; ++ma)
          for (int mb = -b; mb <= b; ++mb) {
            const int mc = -ma - mb;
            if (std::abs(mc) > c) continue;
            e3 = std::max(e3, std::abs(wigner_3j(a, b, c, ma, mb, mc) - oracle::three_j(a, b, c, ma, mb, mc)));
          }
        for (int d = 0; d <= 4; ++d)
          for (int e = 0; e <= 4; ++e)
            for (int f = 0; f <= 4; ++f)
              e6 = std::max(e6, std::abs(wigner_6j(a, b, c, d, e, f) - oracle::six_j(a, b, c, d, e, f)));
      }
  ok &= report(out, "3-j symbols, j <= 4", e3, 1e-12);
  ok &= report(out, "6-j symbols, j <= 4", e6, 1e-12);

  {
    const double chi = 0.37;
    const auto basis = RotorBasis::full(4);
    const auto m = cos2beta_matrix_linear(basis, chi);
    double err = 0.0;
    for (std::size_t r = 0; r < basis.size(); ++r)
      for (std::size_t c = 0; c < basis.size(); ++c) {
        const auto ref = oracle::cos2beta_linear(basis[r].j, basis[r].m, basis[c].j, basis[c].m, chi);
        err = std::max(err, std::abs(m.at(r, c) - ref));
      }
    ok &= report(out, "cos^2 beta, rigid rotor J <= 4", err, 1e-8);
  }
  {
    const double chi = 0.81;
    const auto basis = CaseBBasis::full(3);
    const auto m = cos2beta_matrix_caseb(basis, chi);
    double err = 0.0;
    for (std::size_t r = 0; r < basis.size(); ++r)
      for (std::size_t c = 0; c < basis.size(); ++c) {
        const auto &a = basis[r];
        const auto &b = basis[c];
        const auto ref = oracle::cos2beta_caseb(a.j, a.n, a.m, b.j, b.n, b.m, chi);
        err = std::max(err, std::abs(m.at(r, c) - ref));
      }
    ok &= report(out, "cos^2 beta, case (b) N <= 3", err, 1e-10);
  }
  {
    const auto mol = presets::n14();
    const auto w = thermal_weights_rotor(mol, 8.0, thermal_cutoff(mol, 8.0));
    double q2 = 0.0;
    for (const auto &s : w)
      if (s.label.j == 2) q2 += s.weight;
    ok &= report(out, "thermal Q(2) of 14N2 at 8 K vs 0.25", std::abs(q2 - 0.25), 0.02);
  }
  {
    const auto mol = presets::n14();
    const int jmax = 10;
    const auto train = equal_train(4, revival_time(mol) / 4, units::pi / 4, 2.0, 0.0, PulseShape::delta);
    Dynamics<RotorBasis> dyn(std::make_shared<const RotorBasis>(RotorBasis::full(jmax)), mol, 0.0);
    auto state = basis_state(dyn.basis_ptr(), RotorLabel{2, 1});
    state = dyn.run_train(state, train, Engine::sudden);

    oracle::DenseRotor dense(jmax);
    Eigen::MatrixXcd c0 = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(dense.size()), 1);
    c0(dense.index(2, 1), 0) = 1.0;
    std::vector<oracle::DenseRotor::Pulse> pulses;
    for (const auto &p : train.pulses) pulses.push_back({p.center_time, p.polarization_angle, p.strength});
    const auto ref = dense.propagate(c0, pulses, mol.b, mol.d);
    double err = 0.0;
    for (std::size_t i = 0; i < dyn.basis().size(); ++i) {
      const auto &l = dyn.basis()[i];
      err = std::max(err, std::abs(std::norm(state.coeffs[i]) - std::norm(ref(dense.index(l.j, l.m), 0))));
    }
    ok &= report(out, "4-pulse train vs dense exponential", err, 1e-8);
  }
  out << (ok ? "selfcheck passed\n" : "selfcheck FAILED\n");
  return ok;
}

} // namespace chiral_tools
