// SPDX-License-Identifier: Apache-2.0
//
// uavfd: energy-aware trajectory and wireless power transfer planning for a
// full-duplex MIMO UAV.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <complex>
#include <cstdint>
#include <limits>
#include <random>

#include <Eigen/Dense>

#include "uavfd/uavfd.hpp"

// Shared fixtures for the test binaries: random matrices and dense,
// formula-by-formula reference evaluations that do not reuse library code.

namespace uavfd::testing {

using cd = std::complex<double>;

inline Eigen::MatrixXcd random_complex(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::MatrixXcd A(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) A(i, j) = cd(g(rng), g(rng));
    return A;
}

/// G G^H with G of `rank` columns, scaled to unit trace.
inline Eigen::MatrixXcd random_psd(Eigen::Index m, Eigen::Index rank, std::mt19937_64& rng) {
    const Eigen::MatrixXcd G = random_complex(m, rank, rng);
    Eigen::MatrixXcd X = G * G.adjoint();
    return X / X.trace().real();
}

/// Hermitian matrix with at least one eigenvalue <= -0.1.
inline Eigen::MatrixXcd random_indefinite(Eigen::Index m, std::mt19937_64& rng) {
    const Eigen::MatrixXcd A = random_complex(m, m, rng);
    Eigen::MatrixXcd X = 0.5 * (A + A.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(X);
    const double lmin = es.eigenvalues()[0];
    if (lmin > -0.1) X -= (lmin + 0.5) * Eigen::MatrixXcd::Identity(m, m);
    return X;
}

/// Interference-plus-noise with every covariance written out densely.
inline double dense_interference(const Eigen::RowVectorXcd& z, const Eigen::MatrixXcd& Hu, const Eigen::MatrixXcd& X,
                                 double kappa, double beta, double sigma2) {
    const Eigen::Index m = X.rows();
    Eigen::MatrixXcd dX = Eigen::MatrixXcd::Zero(m, m);
    for (Eigen::Index i = 0; i < m; ++i) dX(i, i) = X(i, i);
    const Eigen::MatrixXcd E_out = kappa * dX;
    const Eigen::MatrixXcd S = Hu * (X + kappa * dX) * Hu.adjoint();
    Eigen::MatrixXcd E_in = Eigen::MatrixXcd::Zero(m, m);
    for (Eigen::Index i = 0; i < m; ++i) E_in(i, i) = beta * S(i, i);
    const Eigen::MatrixXcd C = Hu * E_out * Hu.adjoint() + sigma2 * Eigen::MatrixXcd::Identity(m, m) + E_in;
    return (z * C * z.adjoint())(0, 0).real();
}

inline double dense_sinr(double P, double r, const Eigen::VectorXcd& h, const Eigen::RowVectorXcd& z,
                         const Eigen::MatrixXcd& Hu, const Eigen::MatrixXcd& X, double kappa, double beta,
                         double sigma2) {
    const cd zh = (z * h)(0, 0);
    return P * r * std::norm(zh) / dense_interference(z, Hu, X, kappa, beta, sigma2);
}

inline double dense_harvest(double r, const Eigen::VectorXcd& h, const Eigen::MatrixXcd& X, double kappa, double eta) {
    Eigen::MatrixXcd W = X;
    for (Eigen::Index i = 0; i < X.rows(); ++i) W(i, i) += kappa * X(i, i);
    cd acc = 0.0;
    for (Eigen::Index i = 0; i < W.rows(); ++i)
        for (Eigen::Index j = 0; j < W.cols(); ++j) acc += h(i) * W(i, j) * std::conj(h(j));
    return eta * r * acc.real();
}

/// Small instance used where the full experiment would be slow: two devices,
/// two antennas, three slots.
inline SystemConfig small_config() {
    SystemConfig c;
    c.K = 2;
    c.M = 2;
    c.N = 3;
    c.T = 30.0;
    c.R = {64.0, 64.0};
    c.seed = 11;
    return c;
}

inline DeviceLayout small_layout() { return {{Point{-0.4, 0.3}, Point{0.5, -0.2}}}; }

/// Single-device instance with no hardware impairments, one antenna per
/// entry of `h` (real), one slot and the device directly below the only
/// hovering point. The WPT-optimal beam then has the closed form
/// trace X = (2^{R/(T B)} - 1) sigma2 / (eta r^2 |h|^4) with r = 1 / L^2.
struct ToyInstance {
    SystemConfig cfg;
    DeviceLayout layout;
    ChannelSet chans;
    Trajectory trajectory;
};

inline ToyInstance toy_instance(const Eigen::VectorXd& h) {
    ToyInstance t;
    auto& c = t.cfg;
    c.K = 1;
    c.M = static_cast<int>(h.size());
    c.N = 1;
    c.T = 1.0;
    c.B = 1.0;
    c.R = {2.0};
    c.sigma2 = 1.0;
    c.eta = 0.6;
    c.L = 1.0;
    c.kappa = 0.0;
    c.beta = 0.0;
    c.q_ui = {-0.5, 0.0};
    c.q_uf = {0.5, 0.0};
    t.layout = {{Point{0.0, 0.0}}};
    t.chans.H.push_back(h.cast<cd>());
    t.chans.H_u.push_back(0.3 * Eigen::MatrixXcd::Identity(c.M, c.M));
    t.trajectory = straight_line(c);
    return t;
}

inline double toy_closed_form(const ToyInstance& t) {
    const auto& c = t.cfg;
    const double h2 = t.chans.H[0].col(0).squaredNorm();
    const double r = 1.0 / (c.L * c.L);
    return (std::exp2(c.R[0] / (c.T * c.B)) - 1.0) * c.sigma2 / (c.eta * r * r * h2 * h2);
}

/// Brute force over `points` beam powers x on [0, P_max]: the beam is x times
/// the unit matched direction, the device spends everything it harvests, and
/// the smallest x meeting the rate is returned as WPT energy. Written from the
/// model formulas without the optimizer's linear maps.
inline double toy_grid_oracle(const ToyInstance& t, int points) {
    const auto& c = t.cfg;
    const Eigen::VectorXd h = t.chans.H[0].col(0).real();
    const double h2 = h.squaredNorm();
    const double r = 1.0 / (c.L * c.L);
    const Eigen::MatrixXd dir = h * h.transpose() / h2;
    for (int i = 0; i <= points; ++i) {
        const double x = c.P_max * i / points;
        const Eigen::MatrixXd X = x * dir;
        const double harvested = c.eta * r * (h.transpose() * X * h)(0, 0);
        const double snr = harvested * r * h2 / c.sigma2; // ZF gain 1, noise sigma2 / |h|^2
        if (c.T / c.N * c.B * std::log2(1.0 + snr) >= c.R[0]) return c.T / c.N * (1.0 + c.kappa) * x;
    }
    return std::numeric_limits<double>::infinity();
}

} // namespace uavfd::testing
