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

#include <cmath>
#include <complex>
#include <cstdint>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "uavfd/model.hpp"

namespace uavfd {

using cd = std::complex<double>;

/// Small-scale fading for every slot: device channels H[n] (M x K, column k
/// is h_k[n]) and self-interference matrices H_u[n] (M x M).
struct ChannelSet {
    std::vector<Eigen::MatrixXcd> H;
    std::vector<Eigen::MatrixXcd> H_u;
    std::uint64_t seed = 0;

    [[nodiscard]] std::size_t slots() const { return H.size(); }
    [[nodiscard]] Eigen::VectorXcd h(std::size_t k, std::size_t n) const {
        return H[n].col(static_cast<Eigen::Index>(k));
    }
};

class ChannelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Free-space path loss 1 / (L^2 + |q_u - q_k|^2).
inline double path_loss(const Point& q_u, const Point& q_k, double L) {
    return 1.0 / (L * L + (q_u - q_k).squaredNorm());
}

/// K x N path-loss table for the hovering points q[1..N] of a trajectory.
inline Eigen::MatrixXd path_losses(const SystemConfig& cfg, const DeviceLayout& layout, const Trajectory& traj) {
    Eigen::MatrixXd r(cfg.K, cfg.N);
    for (int k = 0; k < cfg.K; ++k) {
        for (int n = 0; n < cfg.N; ++n) {
            r(k, n) = path_loss(traj.points[static_cast<std::size_t>(n) + 1], layout[static_cast<std::size_t>(k)], cfg.L);
        }
    }
    return r;
}

/// Mean and variance of a unit-power Rician element with K-factor `k_factor`:
/// mu^2 / nu^2 = K and mu^2 + nu^2 = 1.
struct RicianParams {
    double mu;
    double nu2;
};

inline RicianParams rician_params(double k_factor) {
    if (!(k_factor >= 0.0)) throw std::invalid_argument("Rician K-factor must be nonnegative");
    return {std::sqrt(k_factor / (k_factor + 1.0)), 1.0 / (k_factor + 1.0)};
}

/// Draws one complex element mu + nu * CN(0, 1).
template <class Rng>
cd draw_rician(Rng& rng, const RicianParams& p) {
    std::normal_distribution<double> g(0.0, 1.0);
    const double s = std::sqrt(p.nu2 / 2.0);
    const double re = g(rng);
    const double im = g(rng);
    return {p.mu + s * re, s * im};
}

/// Samples H[n] and H_u[n] for every slot from the config's seed. The draw
/// order (per slot: H column-major, then H_u column-major) is part of the
/// reproducibility contract.
inline ChannelSet sample_channels(const SystemConfig& cfg) {
    std::mt19937_64 rng(cfg.seed);
    const auto dev = rician_params(cfg.rician_K_dev);
    const auto si = rician_params(cfg.rician_K_si);
    ChannelSet cs;
    cs.seed = cfg.seed;
    for (int n = 0; n < cfg.N; ++n) {
        Eigen::MatrixXcd H(cfg.M, cfg.K);
        for (int k = 0; k < cfg.K; ++k)
            for (int m = 0; m < cfg.M; ++m) H(m, k) = draw_rician(rng, dev);
        Eigen::MatrixXcd Hu(cfg.M, cfg.M);
        for (int j = 0; j < cfg.M; ++j)
            for (int m = 0; m < cfg.M; ++m) Hu(m, j) = draw_rician(rng, si);
        cs.H.push_back(std::move(H));
        cs.H_u.push_back(std::move(Hu));
    }
    return cs;
}

inline void check_channels(const ChannelSet& cs, const SystemConfig& cfg) {
    if (cs.H.size() != static_cast<std::size_t>(cfg.N) || cs.H_u.size() != static_cast<std::size_t>(cfg.N)) {
        throw ChannelError("channel set has the wrong number of slots");
    }
    for (std::size_t n = 0; n < cs.H.size(); ++n) {
        if (cs.H[n].rows() != cfg.M || cs.H[n].cols() != cfg.K || cs.H_u[n].rows() != cfg.M ||
            cs.H_u[n].cols() != cfg.M) {
            throw ChannelError("channel dimensions do not match (M, K) in slot " + std::to_string(n + 1));
        }
        if (!cs.H[n].allFinite() || !cs.H_u[n].allFinite()) {
            throw ChannelError("non-finite channel entry in slot " + std::to_string(n + 1));
        }
    }
}

/// Zero-forcing receiver (H^H H)^{-1} H^H; rows are z_k. `slot` only labels errors.
inline Eigen::MatrixXcd zf_receiver(const Eigen::MatrixXcd& H, int slot = 0) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(H);
    const auto& s = svd.singularValues();
    const double smax = s.size() > 0 ? s[0] : 0.0;
    const double smin = s.size() > 0 ? s[s.size() - 1] : 0.0;
    if (H.cols() > H.rows() || !(smin > 0.0) || smax / smin > 1e12) {
        throw ChannelError("rank-deficient channel matrix in slot " + std::to_string(slot) +
                           " (condition number above 1e12)");
    }
    const Eigen::MatrixXcd G = H.adjoint() * H;
    return G.ldlt().solve(H.adjoint());
}

/// One ZF matrix per slot (K x M).
struct ZfReceiver {
    std::vector<Eigen::MatrixXcd> Z;
};

inline ZfReceiver zf_receivers(const ChannelSet& cs) {
    ZfReceiver zf;
    for (std::size_t n = 0; n < cs.H.size(); ++n) zf.Z.push_back(zf_receiver(cs.H[n], static_cast<int>(n) + 1));
    return zf;
}

struct Distortion {
    Eigen::MatrixXcd E_out;
    Eigen::MatrixXcd E_in;
};

/// Transmit-side distortion kappa diag(X) and receive-side distortion
/// beta diag(H_u (X + kappa diag X) H_u^H).
inline Distortion distortion_covariances(const Eigen::MatrixXcd& X, const Eigen::MatrixXcd& H_u, double kappa,
                                         double beta) {
    const Eigen::MatrixXcd dX = X.diagonal().asDiagonal();
    Distortion d;
    d.E_out = kappa * dX;
    const Eigen::MatrixXcd S = H_u * (X + kappa * dX) * H_u.adjoint();
    d.E_in = Eigen::MatrixXcd(beta * S.diagonal().asDiagonal());
    return d;
}

/// Interference-plus-noise power seen by receiver row z:
/// z (H_u E_out H_u^H + sigma2 I + E_in) z^H.
inline double interference(const Eigen::RowVectorXcd& z, const Eigen::MatrixXcd& H_u, const Eigen::MatrixXcd& X,
                           double kappa, double beta, double sigma2) {
    // Both distortion terms are diagonal-weighted sums, so this avoids
    // forming the M x M covariance.
    const Eigen::VectorXd xd = X.diagonal().real();
    const Eigen::RowVectorXcd zH = z * H_u;
    double out = 0.0;
    for (Eigen::Index m = 0; m < xd.size(); ++m) out += std::norm(zH[m]) * kappa * xd[m];
    const Eigen::MatrixXcd W = X + kappa * Eigen::MatrixXcd(X.diagonal().asDiagonal());
    double in = 0.0;
    for (Eigen::Index m = 0; m < H_u.rows(); ++m) {
        const Eigen::RowVectorXcd row = H_u.row(m);
        in += std::norm(z[m]) * beta * (row * W * row.adjoint())(0, 0).real();
    }
    return out + in + sigma2 * z.squaredNorm();
}

/// Uplink SINR of one device in one slot.
inline double sinr(double P, double r, const Eigen::VectorXcd& h, const Eigen::RowVectorXcd& z,
                   const Eigen::MatrixXcd& H_u, const Eigen::MatrixXcd& X, double kappa, double beta, double sigma2) {
    const double gain = std::norm((z * h)(0, 0));
    return P * r * gain / interference(z, H_u, X, kappa, beta, sigma2);
}

/// Receive power gain h^T W conj(h) with W = X + kappa diag(X). The imaginary
/// part is rounding noise for Hermitian X and is checked before discarding.
inline double harvest_gain(const Eigen::VectorXcd& h, const Eigen::MatrixXcd& X, double kappa) {
    const Eigen::MatrixXcd W = X + kappa * Eigen::MatrixXcd(X.diagonal().asDiagonal());
    const cd v = (h.transpose() * W * h.conjugate())(0, 0);
    const double scale = std::max(1.0, h.squaredNorm() * W.norm());
    if (std::abs(v.imag()) > 1e-9 * scale) {
        throw std::logic_error("harvested power has a non-negligible imaginary part; is X Hermitian?");
    }
    return v.real();
}

/// Power harvested by a device, eta r h^T (X + kappa diag X) conj(h).
inline double harvested_power(double r, const Eigen::VectorXcd& h, const Eigen::MatrixXcd& X, double kappa,
                              double eta) {
    return eta * r * harvest_gain(h, X, kappa);
}

/// CSV dump: slot,row,col,re,im,kind with kind "dev" for H[n], "si" for H_u[n].
/// Slots are numbered from 1.
inline void write_channels_csv(std::ostream& os, const ChannelSet& cs) {
    const auto old = os.precision(17);
    os << "slot,row,col,re,im,kind\n";
    auto dump = [&](std::size_t n, const Eigen::MatrixXcd& A, const char* kind) {
        for (Eigen::Index i = 0; i < A.rows(); ++i)
            for (Eigen::Index j = 0; j < A.cols(); ++j)
                os << n + 1 << ',' << i << ',' << j << ',' << A(i, j).real() << ',' << A(i, j).imag() << ',' << kind
                   << '\n';
    };
    for (std::size_t n = 0; n < cs.slots(); ++n) {
        dump(n, cs.H[n], "dev");
        dump(n, cs.H_u[n], "si");
    }
    os.precision(old);
}

} // namespace uavfd
