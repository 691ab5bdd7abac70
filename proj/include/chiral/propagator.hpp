#pragma once

// Wave-packet propagation through a pulse train.
//
// States hold Schroedinger-picture amplitudes a = C exp(-i E t) together with
// their time; free evolution multiplies each amplitude by its phase. A pulse
// is applied as the interaction-picture propagator referred to its center
// time t_c. In the sudden limit that operator is exp(i P cos^2 beta); for a
// Gaussian pulse it is obtained by integrating
//
//   dc/dt = i P g(t) e^{i H0 (t - t_c)} cos^2(beta) e^{-i H0 (t - t_c)} c
//
// over t_c +- 5 sigma, with g the normalized intensity envelope.
//
// Polarization angles enter only through R_z(chi) = diag(e^{-i M chi}):
// cos^2(beta_chi) = R_z cos^2(beta_0) R_z^dagger, and cos^2(beta_0) is real
// symmetric, so every kick runs on one real sparse matrix per basis.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "chiral/angmom.hpp"
#include "chiral/basis.hpp"
#include "chiral/error.hpp"
#include "chiral/molecule.hpp"
#include "chiral/pulsetrain.hpp"

namespace chiral {

using cplx = std::complex<double>;

enum class Engine { sudden, ode };

inline const char *to_string(Engine e) { return e == Engine::sudden ? "sudden" : "ode"; }

/// Complex coefficient vector over a truncated basis at a given time.
template <class Basis>
struct QuantumState {
  std::shared_ptr<const Basis> basis;
  std::vector<cplx> coeffs;
  double time = 0.0;

  double norm() const {
    double s = 0.0;
    for (const auto &c : coeffs) s += std::norm(c);
    return std::sqrt(s);
  }

  double population(std::size_t i) const { return std::norm(coeffs[i]); }
};

using RotorState = QuantumState<RotorBasis>;
using CaseBState = QuantumState<CaseBBasis>;

/// Basis eigenstate |label> at time t.
template <class Basis>
QuantumState<Basis> basis_state(std::shared_ptr<const Basis> basis, const typename Basis::Label &label, double t = 0.0) {
  const auto idx = basis->find(label);
  if (idx < 0) throw ConfigError("basis_state: label not in basis");
  QuantumState<Basis> s{basis, std::vector<cplx>(basis->size()), t};
  s.coeffs[static_cast<std::size_t>(idx)] = 1.0;
  return s;
}

/// Default truncation 4 ceil(P_tot) + thermal cutoff + 8.
inline int default_truncation(double total_p, int thermal_cutoff) {
  return 4 * static_cast<int>(std::ceil(total_p)) + thermal_cutoff + 8;
}

inline constexpr double default_truncation_threshold = 1e-6;

/// Real CSR matrix.
struct RealCsr {
  std::vector<std::size_t> row_ptr;
  std::vector<std::uint32_t> col;
  std::vector<double> val;

  std::size_t rows() const { return row_ptr.empty() ? 0 : row_ptr.size() - 1; }

  template <class In, class Out>
  void multiply(const In &x, Out &y) const {
    const std::size_t n = rows();
    for (std::size_t r = 0; r < n; ++r) {
      cplx acc{};
      for (std::size_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) acc += val[k] * x[col[k]];
      y[r] = acc;
    }
  }

  /// Y = A X for a row-major block with `width` doubles per row.
  void multiply_block(const double *x, double *y, std::size_t width) const {
    std::size_t c0 = 0;
    for (; c0 + 8 <= width; c0 += 8) multiply_strip<8>(x, y, width, c0);
    for (; c0 + 2 <= width; c0 += 2) multiply_strip<2>(x, y, width, c0);
  }

private:
  template <std::size_t W>
  void multiply_strip(const double *x, double *y, std::size_t width, std::size_t c0) const {
    const std::size_t n = rows();
    for (std::size_t r = 0; r < n; ++r) {
      double acc[W] = {};
      for (std::size_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) {
        const double v = val[k];
        const double *xr = x + static_cast<std::size_t>(col[k]) * width + c0;
        for (std::size_t c = 0; c < W; ++c) acc[c] += v * xr[c];
      }
      std::copy(acc, acc + W, y + r * width + c0);
    }
  }
};

/// Scratch buffers reused across kicks.
struct Workspace {
  std::vector<cplx> a, b, c;

  void resize(std::size_t n) {
    a.resize(n);
    b.resize(n);
    c.resize(n);
  }
};

/// Per-basis propagation context: the angle-zero interaction matrix, M values
/// and field-free energies. Immutable after construction and safe to share
/// between threads.
///
/// Kernels act on a block of `columns` states stored row-major, entry (i, k)
/// at c[i * columns + k]; every column evolves independently.
template <class Basis>
class Dynamics {
public:
  Dynamics(std::shared_ptr<const Basis> basis, const MoleculeSpec &molecule,
           double truncation_threshold = default_truncation_threshold)
      : basis_(std::move(basis)), molecule_(molecule), threshold_(truncation_threshold) {
    if (!basis_ || basis_->empty()) throw ConfigError("Dynamics: empty basis");
    if constexpr (std::is_same_v<Basis, CaseBBasis>) {
      if (!molecule_.is_case_b()) throw ConfigError("Dynamics: case (b) basis needs a case (b) molecule");
    } else {
      if (molecule_.is_case_b()) throw ConfigError("Dynamics: rotor basis needs a linear-rotor molecule");
    }
    build();
  }

  const Basis &basis() const { return *basis_; }
  std::shared_ptr<const Basis> basis_ptr() const { return basis_; }
  const MoleculeSpec &molecule() const { return molecule_; }
  std::span<const double> energies() const { return energies_; }
  std::span<const int> m_values() const { return m_; }
  double truncation_threshold() const { return threshold_; }
  std::size_t size() const { return basis_->size(); }

  /// cos^2(beta_0) - 1/2, the shifted angle-zero interaction matrix.
  const RealCsr &shifted_interaction() const { return v_; }

  /// Population in the two outermost shells present in the basis, for
  /// column `column` of a block.
  double outer_population(std::span<const cplx> c, std::size_t columns = 1, std::size_t column = 0) const {
    double s = 0.0;
    for (auto i : outer_) s += std::norm(c[i * columns + column]);
    return s;
  }

  /// Sudden kick exp(i P cos^2 beta_chi) by Taylor expansion of the shifted
  /// sparse matrix, with substeps keeping each exponent norm <= 2.
  void kick_sudden(std::span<cplx> c, std::size_t columns, const PulseSpec &pulse, Workspace &ws) const {
    const double p = pulse.strength;
    if (p == 0.0) return;
    check_block(c, columns);
    ws.resize(c.size());
    rotate_in(c, columns, pulse.polarization_angle);

    const double r = 0.5 * std::abs(p);
    const int substeps = std::max(1, static_cast<int>(std::ceil(r / 2.0)));
    const double theta = p / substeps;
    const int terms = taylor_terms(std::abs(theta) * 0.5);
    const std::size_t width = 2 * columns;
    const std::size_t len = 2 * c.size();
    double *cd = reinterpret_cast<double *>(c.data());
    double *term = reinterpret_cast<double *>(ws.a.data());
    double *next = reinterpret_cast<double *>(ws.b.data());
    for (int s = 0; s < substeps; ++s) {
      std::copy(cd, cd + len, term);
      for (int k = 1; k <= terms; ++k) {
        v_.multiply_block(term, next, width);
        const double f = theta / k;
        for (std::size_t i = 0; i < len; i += 2) {
          // term = i f next
          term[i] = -f * next[i + 1];
          term[i + 1] = f * next[i];
          cd[i] += term[i];
          cd[i + 1] += term[i + 1];
        }
      }
    }
    // Global phase from the 1/2 shift.
    const cplx global = std::polar(1.0, 0.5 * p);
    for (auto &x : c) x *= global;

    rotate_out(c, columns, pulse.polarization_angle);
    check_truncation(c, columns, pulse);
  }

  void kick_sudden(std::span<cplx> c, const PulseSpec &pulse, Workspace &ws) const { kick_sudden(c, 1, pulse, ws); }

  /// Sudden kick obtained by integrating dC/dxi = i P cos^2(beta) C over
  /// xi in [0, 1] with an adaptive Dormand-Prince pair.
  void kick_sudden_xi(std::span<cplx> c, std::size_t columns, const PulseSpec &pulse, double rel_tol = 1e-13) const {
    const double p = pulse.strength;
    if (p == 0.0) return;
    check_block(c, columns);
    rotate_in(c, columns, pulse.polarization_angle);
    std::vector<cplx> x(c.begin(), c.end());
    std::vector<cplx> tmp(x.size());
    const std::size_t width = 2 * columns;
    auto rhs = [&](const std::vector<cplx> &y, std::vector<cplx> &dy, double) {
      v_.multiply_block(reinterpret_cast<const double *>(y.data()), reinterpret_cast<double *>(tmp.data()), width);
      for (std::size_t i = 0; i < y.size(); ++i) {
        const cplx vy = tmp[i] + 0.5 * y[i];
        dy[i] = cplx(-p * vy.imag(), p * vy.real());
      }
    };
    integrate(rhs, x, 0.0, 1.0, 1.0 / 64.0, 1.0, rel_tol, rel_tol * 1e-2);
    std::copy(x.begin(), x.end(), c.begin());
    rotate_out(c, columns, pulse.polarization_angle);
    check_truncation(c, columns, pulse);
  }

  void kick_sudden_xi(std::span<cplx> c, const PulseSpec &pulse, double rel_tol = 1e-13) const {
    kick_sudden_xi(c, 1, pulse, rel_tol);
  }

  /// Gaussian pulse: interaction-picture propagator about the pulse center,
  /// integrated over +-5 sigma with relative tolerance 1e-10 and steps no
  /// longer than sigma/20.
  void kick_ode(std::span<cplx> c, std::size_t columns, const PulseSpec &pulse, double rel_tol = 1e-10) const {
    if constexpr (std::is_same_v<Basis, CaseBBasis>) {
      throw ConfigError("kick_ode: the ODE engine supports linear rotors only");
    } else {
      if (pulse.shape != PulseShape::gaussian || !(pulse.sigma > 0))
        throw ConfigError("kick_ode: pulse must be gaussian with sigma > 0");
      const double p = pulse.strength;
      if (p == 0.0) return;
      check_block(c, columns);
      const double sigma = pulse.sigma;
      const double norm = 1.0 / (sigma * std::sqrt(units::pi));
      const std::size_t n = size();
      const std::size_t width = 2 * columns;

      rotate_in(c, columns, pulse.polarization_angle);
      std::vector<cplx> x(c.begin(), c.end());
      std::vector<cplx> u(c.size()), w(c.size()), phase(n);
      auto rhs = [&](const std::vector<cplx> &y, std::vector<cplx> &dy, double s) {
        for (std::size_t i = 0; i < n; ++i) {
          phase[i] = std::polar(1.0, energies_[i] * s);
          const cplx back = std::conj(phase[i]);
          for (std::size_t k = 0; k < columns; ++k) u[i * columns + k] = y[i * columns + k] * back;
        }
        v_.multiply_block(reinterpret_cast<const double *>(u.data()), reinterpret_cast<double *>(w.data()), width);
        const double amp = p * norm * std::exp(-(s * s) / (sigma * sigma));
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t k = 0; k < columns; ++k) {
            const std::size_t j = i * columns + k;
            const cplx z = (w[j] + 0.5 * u[j]) * phase[i];
            dy[j] = cplx(-amp * z.imag(), amp * z.real());
          }
        }
      };
      integrate(rhs, x, -5.0 * sigma, 5.0 * sigma, sigma / 50.0, sigma / 20.0, rel_tol, 1e-12);
      std::copy(x.begin(), x.end(), c.begin());
      rotate_out(c, columns, pulse.polarization_angle);
      check_truncation(c, columns, pulse);
    }
  }

  void kick_ode(std::span<cplx> c, const PulseSpec &pulse, double rel_tol = 1e-10) const {
    kick_ode(c, 1, pulse, rel_tol);
  }

  void free_evolve(std::span<cplx> c, std::size_t columns, double duration) const {
    if (duration < 0) throw ConfigError("free_evolve: negative duration");
    if (duration == 0) return;
    check_block(c, columns);
    for (std::size_t i = 0; i < size(); ++i) {
      const cplx ph = std::polar(1.0, -energies_[i] * duration);
      for (std::size_t k = 0; k < columns; ++k) c[i * columns + k] *= ph;
    }
  }

  void free_evolve(std::span<cplx> c, double duration) const { free_evolve(c, 1, duration); }

  // State-level wrappers.

  QuantumState<Basis> kick_sudden(QuantumState<Basis> s, const PulseSpec &pulse) const {
    Workspace ws;
    kick_sudden(std::span<cplx>(s.coeffs), pulse, ws);
    return s;
  }

  QuantumState<Basis> kick_ode(QuantumState<Basis> s, const PulseSpec &pulse) const {
    kick_ode(std::span<cplx>(s.coeffs), pulse);
    return s;
  }

  QuantumState<Basis> free_evolve(QuantumState<Basis> s, double duration) const {
    free_evolve(std::span<cplx>(s.coeffs), duration);
    s.time += duration;
    return s;
  }

  /// Alternating free evolution and kicks over the whole train for a block of
  /// states sharing the time `time`. On return the block is referred to the
  /// center time of the last pulse.
  void run_train(std::span<cplx> c, std::size_t columns, double &time, const TrainSpec &train, Engine engine,
                 Workspace &ws) const {
    if (engine == Engine::ode) validate_ode_train(train);
    for (const auto &pulse : train.pulses) {
      const double gap = pulse.center_time - time;
      if (gap < -1e-12 * std::max(1.0, std::abs(time)))
        throw ConfigError("run_train: pulse at t=" + std::to_string(pulse.center_time) + " precedes the state time");
      free_evolve(c, columns, std::max(0.0, gap));
      time = pulse.center_time;
      if (engine == Engine::sudden)
        kick_sudden(c, columns, pulse, ws);
      else
        kick_ode(c, columns, pulse);
    }
  }

  void run_train(QuantumState<Basis> &s, const TrainSpec &train, Engine engine, Workspace &ws) const {
    run_train(std::span<cplx>(s.coeffs), 1, s.time, train, engine, ws);
  }

  QuantumState<Basis> run_train(QuantumState<Basis> s, const TrainSpec &train, Engine engine) const {
    Workspace ws;
    run_train(s, train, engine, ws);
    return s;
  }

  void validate_ode_train(const TrainSpec &train) const {
    if constexpr (std::is_same_v<Basis, CaseBBasis>) {
      throw ConfigError("engine=ode is not available for case (b) species");
    } else {
      for (std::size_t k = 0; k < train.pulses.size(); ++k) {
        const auto &p = train.pulses[k];
        if (p.shape != PulseShape::gaussian || !(p.sigma > 0))
          throw ConfigError("engine=ode needs gaussian pulses with sigma > 0");
        if (k > 0) {
          const auto &q = train.pulses[k - 1];
          if (p.center_time - q.center_time < 5.0 * (p.sigma + q.sigma))
            throw ConfigError("engine=ode: integration windows of consecutive pulses overlap");
        }
      }
    }
  }

private:
  void build() {
    const auto matrix = cos2beta_matrix(*basis_, 0.0);
    const std::size_t n = basis_->size();
    v_.row_ptr.assign(n + 1, 0);
    for (std::size_t r = 0; r < n; ++r) {
      bool has_diag = false;
      for (const auto &e : matrix.row(r)) {
        if (std::abs(e.value.imag()) > 1e-15)
          throw Error("cos^2(beta_0) is expected to be real");
        if (e.col == r) has_diag = true;
      }
      if (!has_diag) {
        v_.col.push_back(static_cast<std::uint32_t>(r));
        v_.val.push_back(-0.5);
      }
      for (const auto &e : matrix.row(r)) {
        v_.col.push_back(static_cast<std::uint32_t>(e.col));
        v_.val.push_back(e.value.real() - (e.col == r ? 0.5 : 0.0));
      }
      v_.row_ptr[r + 1] = v_.col.size();
    }

    m_.resize(n);
    int m_max = 0;
    for (std::size_t i = 0; i < n; ++i) {
      m_[i] = basis_->m_of(i);
      m_max = std::max(m_max, std::abs(m_[i]));
    }
    m_offset_ = m_max;

    energies_ = basis_energies(molecule_, *basis_);

    std::vector<int> shells;
    for (std::size_t i = 0; i < n; ++i) shells.push_back(basis_->shell_of(i));
    std::sort(shells.begin(), shells.end());
    shells.erase(std::unique(shells.begin(), shells.end()), shells.end());
    const int cut = shells.size() >= 2 ? shells[shells.size() - 2] : shells.back();
    for (std::size_t i = 0; i < n; ++i)
      if (basis_->shell_of(i) >= cut) outer_.push_back(i);
  }

  void check_block(std::span<const cplx> c, std::size_t columns) const {
    if (columns == 0 || c.size() != size() * columns)
      throw ConfigError("coefficient block does not match the basis size");
  }

  static int taylor_terms(double r) {
    // Remainder of the exponential of a skew-Hermitian matrix of norm r after
    // K terms is bounded by r^(K+1) / (K+1)!.
    double bound = r;
    int k = 1;
    while (bound > 1e-17 && k < 200) {
      ++k;
      bound *= r / k;
    }
    return k;
  }

  // c <- R_z^dagger c, i.e. multiply by e^{i M chi}.
  void rotate_in(std::span<cplx> c, std::size_t columns, double chi) const { apply_m_phase(c, columns, chi); }
  void rotate_out(std::span<cplx> c, std::size_t columns, double chi) const { apply_m_phase(c, columns, -chi); }

  void apply_m_phase(std::span<cplx> c, std::size_t columns, double chi) const {
    if (chi == 0.0) return;
    std::vector<cplx> table(static_cast<std::size_t>(2 * m_offset_ + 1));
    for (int m = -m_offset_; m <= m_offset_; ++m) table[static_cast<std::size_t>(m + m_offset_)] = std::polar(1.0, m * chi);
    for (std::size_t i = 0; i < size(); ++i) {
      const cplx ph = table[static_cast<std::size_t>(m_[i] + m_offset_)];
      for (std::size_t k = 0; k < columns; ++k) c[i * columns + k] *= ph;
    }
  }

  void check_truncation(std::span<const cplx> c, std::size_t columns, const PulseSpec &pulse) const {
    if (!(threshold_ > 0)) return;
    double leaked = 0.0;
    for (std::size_t k = 0; k < columns; ++k) leaked = std::max(leaked, outer_population(c, columns, k));
    if (leaked > threshold_)
      throw TruncationError("basis truncated too early: population " + std::to_string(leaked) +
                                " in the outermost two shells (max shell " + std::to_string(basis_->max_shell()) +
                                ") after the pulse at t=" + std::to_string(pulse.center_time) + " ps",
                            leaked);
  }

  template <class Rhs>
  static void integrate(Rhs &rhs, std::vector<cplx> &x, double t0, double t1, double dt0, double dt_max, double rel_tol,
                        double abs_tol) {
    namespace ode = boost::numeric::odeint;
    using state_type = std::vector<cplx>;
    auto stepper = ode::make_controlled(abs_tol, rel_tol, ode::runge_kutta_dopri5<state_type>());
    double t = t0;
    double dt = std::min(dt0, dt_max);
    const double dt_min = 1e-14 * std::max(1.0, std::abs(t1 - t0));
    while (t < t1) {
      if (t + dt > t1) dt = t1 - t;
      const auto result = stepper.try_step(rhs, x, t, dt);
      if (result == ode::fail) {
        if (dt < dt_min) throw IntegrationError("adaptive integrator step size underflow");
        continue;
      }
      dt = std::min(dt, dt_max);
      if (t1 - t < dt_min) break;
    }
  }

  std::shared_ptr<const Basis> basis_;
  MoleculeSpec molecule_;
  double threshold_;
  RealCsr v_;
  std::vector<int> m_;
  int m_offset_ = 0;
  std::vector<double> energies_;
  std::vector<std::size_t> outer_;
};

// Free-function forms operating directly on states. Each call builds its own
// propagation context; sweeps share a Dynamics instead.

template <class Basis>
QuantumState<Basis> kick_sudden(const QuantumState<Basis> &state, const PulseSpec &pulse, const MoleculeSpec &molecule) {
  return Dynamics<Basis>(state.basis, molecule).kick_sudden(state, pulse);
}

inline RotorState kick_ode(const RotorState &state, const PulseSpec &pulse, const MoleculeSpec &molecule) {
  return Dynamics<RotorBasis>(state.basis, molecule).kick_ode(state, pulse);
}

template <class Basis>
QuantumState<Basis> free_evolve(const QuantumState<Basis> &state, double duration, const MoleculeSpec &molecule) {
  QuantumState<Basis> out = state;
  const auto e = basis_energies(molecule, *state.basis);
  if (duration < 0) throw ConfigError("free_evolve: negative duration");
  for (std::size_t i = 0; i < out.coeffs.size(); ++i) out.coeffs[i] *= std::polar(1.0, -e[i] * duration);
  out.time += duration;
  return out;
}

template <class Basis>
QuantumState<Basis> run_train(const QuantumState<Basis> &initial, const TrainSpec &train, const MoleculeSpec &molecule,
                              Engine engine) {
  return Dynamics<Basis>(initial.basis, molecule).run_train(initial, train, engine);
}

} // namespace chiral
