#pragma once

// Dense reference propagation on the full |J M> basis, J <= j_max.
// cos^2(beta_chi) is assembled on a sphere grid from spherical harmonics and
// each pulse is applied as a dense matrix exponential.

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss.hpp>
#include <unsupported/Eigen/MatrixFunctions>

#include "quadrature_oracle.hpp"

namespace oracle {

class DenseRotor {
public:
  struct Label {
    int j, m;
  };

  DenseRotor(int j_max) : j_max_(j_max) {
    for (int j = 0; j <= j_max; ++j)
      for (int m = -j; m <= j; ++m) labels_.push_back({j, m});
    build();
  }

  std::size_t size() const { return labels_.size(); }
  const std::vector<Label> &labels() const { return labels_; }
  int index(int j, int m) const { return j * j + (m + j); }

  /// cos^2(beta_chi) = S + e^{-2i chi} P + e^{2i chi} P^dagger with
  /// S = <sin^2 theta / 2> and P = <sin^2 theta e^{2i phi} / 4>.
  Eigen::MatrixXcd cos2beta(double chi) const {
    const std::complex<double> e = std::polar(1.0, -2.0 * chi);
    return s_ + e * p_ + std::conj(e) * p_.adjoint();
  }

  /// Final amplitudes (columns) of the given initial states after pulses
  /// (time, angle, strength) with free evolution E_J = B J(J+1) - D J^2(J+1)^2.
  struct Pulse {
    double time, angle, strength;
  };

  Eigen::MatrixXcd propagate(const Eigen::MatrixXcd &initial, const std::vector<Pulse> &pulses, double b,
                             double d) const {
    Eigen::MatrixXcd c = initial;
    double t = pulses.empty() ? 0.0 : pulses.front().time;
    const std::complex<double> i(0.0, 1.0);
    for (const auto &p : pulses) {
      const double dt = p.time - t;
      for (std::size_t k = 0; k < size(); ++k) {
        const double jj = labels_[k].j * (labels_[k].j + 1.0);
        c.row(static_cast<Eigen::Index>(k)) *= std::polar(1.0, -(b * jj - d * jj * jj) * dt);
      }
      t = p.time;
      const Eigen::MatrixXcd gen = i * p.strength * cos2beta(p.angle);
      const Eigen::MatrixXcd u = gen.exp();
      c = u * c;
    }
    return c;
  }

private:
  void build() {
    constexpr int ntheta = 60;
    const int nphi = 4 * j_max_ + 16;
    using rule = boost::math::quadrature::gauss<double, ntheta>;
    const auto &abscissa = rule::abscissa();
    const auto &weight = rule::weights();
    std::vector<double> xs, ws;
    for (std::size_t k = 0; k < abscissa.size(); ++k) {
      xs.push_back(abscissa[k]);
      ws.push_back(weight[k]);
      if (abscissa[k] != 0.0) {
        xs.push_back(-abscissa[k]);
        ws.push_back(weight[k]);
      }
    }
    const std::size_t g = xs.size() * static_cast<std::size_t>(nphi);
    const std::size_t n = size();
    Eigen::MatrixXcd y(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(n));
    Eigen::VectorXcd ws_s(static_cast<Eigen::Index>(g)), ws_p(static_cast<Eigen::Index>(g));
    const double dphi = 2.0 * std::numbers::pi / nphi;
    std::size_t row = 0;
    for (std::size_t a = 0; a < xs.size(); ++a) {
      const double theta = std::acos(xs[a]);
      const double sin2 = 1.0 - xs[a] * xs[a];
      for (int k = 0; k < nphi; ++k, ++row) {
        const double phi = k * dphi;
        for (std::size_t s = 0; s < n; ++s)
          y(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(s)) = ylm(labels_[s].j, labels_[s].m, theta, phi);
        const double w = ws[a] * dphi;
        ws_s(static_cast<Eigen::Index>(row)) = w * sin2 / 2.0;
        ws_p(static_cast<Eigen::Index>(row)) = w * sin2 / 4.0 * std::polar(1.0, 2.0 * phi);
      }
    }
    s_ = y.adjoint() * ws_s.asDiagonal() * y;
    p_ = y.adjoint() * ws_p.asDiagonal() * y;
  }

  int j_max_;
  std::vector<Label> labels_;
  Eigen::MatrixXcd s_, p_;
};

} // namespace oracle
