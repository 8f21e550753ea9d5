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

#include <catch_amalgamated.hpp>

#include <sstream>

#include "support.hpp"

using namespace uavfd;
using Catch::Approx;
using testing::cd;

TEST_CASE("path loss examples", "[channel]") {
    CHECK(path_loss({0.3, -0.2}, {0.3, -0.2}, 2.0) == 0.25);
    CHECK(path_loss({-1, -1}, {1, -1}, 2.0) == Approx(0.125).epsilon(1e-15));
    CHECK(path_loss({5, 5}, {-5, 3}, 2.0) < 0.25);
}

TEST_CASE("Rician parameters have unit power and the requested K-factor", "[channel]") {
    const auto p = rician_params(0.1);
    CHECK(p.mu == Approx(0.301511).margin(1e-6));
    CHECK(p.nu2 == Approx(0.909091).margin(1e-6));
    CHECK(p.mu * p.mu / p.nu2 == Approx(0.1).epsilon(1e-12));
    CHECK(p.mu * p.mu + p.nu2 == Approx(1.0).epsilon(1e-12));
    const auto rayleigh = rician_params(0.0);
    CHECK(rayleigh.mu == 0.0);
    CHECK(rayleigh.nu2 == 1.0);
    CHECK_THROWS(rician_params(-1.0));
}

TEST_CASE("Rician draws match mean and variance over 1e5 samples", "[channel]") {
    for (double kf : {0.1, 1.0}) {
        const auto p = rician_params(kf);
        std::mt19937_64 rng(2024);
        constexpr int n = 100000;
        cd sum = 0.0;
        double sq = 0.0;
        std::vector<cd> xs;
        xs.reserve(n);
        for (int i = 0; i < n; ++i) {
            xs.push_back(draw_rician(rng, p));
            sum += xs.back();
        }
        const cd mean = sum / static_cast<double>(n);
        for (const auto& x : xs) sq += std::norm(x - mean);
        const double var = sq / (n - 1);
        // 3 sigma bands: each mean component has variance nu2/2/n; the
        // variance estimate has std about nu2/sqrt(n).
        const double se = std::sqrt(p.nu2 / 2.0 / n);
        CHECK(std::abs(mean.real() - p.mu) <= 3.0 * se);
        CHECK(std::abs(mean.imag()) <= 3.0 * se);
        CHECK(std::abs(var - p.nu2) <= 3.0 * p.nu2 / std::sqrt(static_cast<double>(n)));
    }
}

TEST_CASE("sample_channels is deterministic and follows the draw order", "[channel]") {
    SystemConfig c;
    c.seed = 99;
    const auto a = sample_channels(c);
    const auto b = sample_channels(c);
    REQUIRE(a.slots() == static_cast<std::size_t>(c.N));
    for (std::size_t n = 0; n < a.slots(); ++n) {
        CHECK(a.H[n] == b.H[n]);
        CHECK(a.H_u[n] == b.H_u[n]);
        CHECK(a.H[n].rows() == c.M);
        CHECK(a.H[n].cols() == c.K);
    }
    CHECK(a.seed == 99);

    // Replays the documented order: per slot, H column-major then H_u column-major.
    std::mt19937_64 rng(99);
    const auto dev = rician_params(c.rician_K_dev);
    const auto si = rician_params(c.rician_K_si);
    for (std::size_t n = 0; n < 2; ++n) {
        for (int k = 0; k < c.K; ++k)
            for (int m = 0; m < c.M; ++m) CHECK(draw_rician(rng, dev) == a.H[n](m, k));
        for (int j = 0; j < c.M; ++j)
            for (int m = 0; m < c.M; ++m) CHECK(draw_rician(rng, si) == a.H_u[n](m, j));
    }

    c.seed = 100;
    CHECK(sample_channels(c).H[0] != a.H[0]);
    CHECK_NOTHROW(check_channels(a, SystemConfig{}));
    SystemConfig wrong;
    wrong.N = 3;
    CHECK_THROWS_AS(check_channels(a, wrong), ChannelError);
}

TEST_CASE("ZF receiver inverts the channel", "[channel]") {
    SECTION("orthonormal columns give the conjugate transpose") {
        std::mt19937_64 rng(1);
        const Eigen::MatrixXcd Q = Eigen::HouseholderQR<Eigen::MatrixXcd>(testing::random_complex(4, 4, rng))
                                       .householderQ() *
                                   Eigen::MatrixXcd::Identity(4, 2);
        CHECK((zf_receiver(Q) - Q.adjoint()).norm() <= 1e-12);
    }
    SECTION("single device with h = [1; 1]") {
        Eigen::MatrixXcd h(2, 1);
        h << 1.0, 1.0;
        const auto Z = zf_receiver(h);
        CHECK(Z(0, 0).real() == Approx(0.5));
        CHECK(Z(0, 1).real() == Approx(0.5));
        CHECK(std::abs((Z * h)(0, 0) - 1.0) <= 1e-15);
    }
    SECTION("sampled slots satisfy Z H = I") {
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            SystemConfig c;
            c.seed = seed;
            const auto cs = sample_channels(c);
            const auto zf = zf_receivers(cs);
            for (std::size_t n = 0; n < cs.slots(); ++n) {
                const Eigen::MatrixXcd E = zf.Z[n] * cs.H[n] - Eigen::MatrixXcd::Identity(c.K, c.K);
                CHECK(E.norm() / std::sqrt(static_cast<double>(c.K)) <= 1e-10);
            }
        }
    }
    SECTION("rank deficiency names the slot") {
        Eigen::MatrixXcd H(3, 2);
        H << 1, 2, 2, 4, 3, 6;
        try {
            zf_receiver(H, 7);
            FAIL("expected ChannelError");
        } catch (const ChannelError& e) {
            CHECK(std::string(e.what()).find("slot 7") != std::string::npos);
        }
    }
}

TEST_CASE("distortion covariance examples", "[channel]") {
    const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(4, 4);
    const auto zero = distortion_covariances(Eigen::MatrixXcd::Zero(4, 4), I, 0.005, 0.01);
    CHECK(zero.E_out.norm() == 0.0);
    CHECK(zero.E_in.norm() == 0.0);
    const auto id = distortion_covariances(I, I, 0.005, 0.01);
    CHECK((id.E_in - 0.01005 * I).norm() <= 1e-15);
    Eigen::MatrixXcd X = Eigen::MatrixXcd::Zero(4, 4);
    X(0, 0) = 2.0;
    const auto d = distortion_covariances(X, I, 0.005, 0.01);
    CHECK(d.E_out(0, 0).real() == Approx(0.01));
    CHECK(d.E_out.norm() == Approx(0.01));
}

TEST_CASE("SINR examples", "[channel]") {
    Eigen::RowVectorXcd z(2);
    z << 0.5, 0.5;
    Eigen::VectorXcd h(2);
    h << 1.0, 1.0;
    const Eigen::MatrixXcd Hu = Eigen::MatrixXcd::Identity(2, 2);
    const Eigen::MatrixXcd X0 = Eigen::MatrixXcd::Zero(2, 2);
    CHECK(sinr(1.0, 0.125, h, z, Hu, X0, 0.005, 0.01, 0.01) == Approx(25.0).epsilon(1e-14));
    CHECK(sinr(0.0, 0.125, h, z, Hu, X0, 0.005, 0.01, 0.01) == 0.0);

    std::mt19937_64 rng(3);
    const Eigen::MatrixXcd X = testing::random_psd(2, 2, rng) * 5.0;
    const Eigen::MatrixXcd Hr = testing::random_complex(2, 2, rng);
    double prev = std::numeric_limits<double>::infinity();
    for (double beta : {0.0, 0.01, 0.1, 1.0}) {
        const double g = sinr(1.0, 0.125, h, z, Hr, X, 0.005, beta, 0.01);
        CHECK(g < prev);
        prev = g;
    }
}

TEST_CASE("harvested power examples", "[channel]") {
    Eigen::VectorXcd h(2);
    h << 1.0, 0.0;
    const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(2, 2);
    CHECK(harvested_power(0.25, h, I, 0.005, 0.6) == Approx(0.15075).epsilon(1e-14));
    CHECK(harvested_power(0.25, h, Eigen::MatrixXcd::Zero(2, 2), 0.005, 0.6) == 0.0);

    std::mt19937_64 rng(4);
    const Eigen::VectorXcd g = testing::random_complex(3, 1, rng);
    const Eigen::MatrixXcd X = testing::random_psd(3, 2, rng);
    CHECK(harvested_power(0.2, g, 2.0 * X, 0.005, 0.6) == Approx(2.0 * harvested_power(0.2, g, X, 0.005, 0.6)));
    CHECK(harvested_power(0.2, g, X, 0.005, 0.6) >= 0.0);

    Eigen::MatrixXcd skew = Eigen::MatrixXcd::Zero(2, 2);
    skew(0, 1) = cd(0.0, 1.0);
    skew(1, 0) = cd(0.0, 1.0); // not Hermitian
    Eigen::VectorXcd h2(2);
    h2 << 1.0, 1.0;
    CHECK_THROWS_AS(harvest_gain(h2, skew, 0.0), std::logic_error);
}

TEST_CASE("channel dump CSV", "[channel]") {
    SystemConfig c = testing::small_config();
    const auto cs = sample_channels(c);
    std::ostringstream os;
    write_channels_csv(os, cs);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "slot,row,col,re,im,kind");
    int dev = 0, si = 0;
    while (std::getline(is, line)) {
        if (line.ends_with(",dev")) ++dev;
        if (line.ends_with(",si")) ++si;
    }
    CHECK(dev == c.N * c.M * c.K);
    CHECK(si == c.N * c.M * c.M);
    CHECK(os.str().find("\n1,0,0,") != std::string::npos);
}

TEST_CASE("interference, SINR and harvest agree with dense oracles", "[channel]") {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(0.01, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        const Eigen::Index m = 2 + trial % 4;
        const Eigen::Index k = 1 + trial % static_cast<int>(m);
        const Eigen::MatrixXcd H = testing::random_complex(m, k, rng);
        const Eigen::MatrixXcd Hu = testing::random_complex(m, m, rng);
        const Eigen::MatrixXcd X = testing::random_psd(m, 1 + trial % static_cast<int>(m), rng) * (10.0 * u(rng));
        const Eigen::MatrixXcd Z = zf_receiver(H);
        const double kappa = 0.02 * u(rng), beta = 0.05 * u(rng), sigma2 = u(rng), r = u(rng), P = 5.0 * u(rng);
        for (Eigen::Index j = 0; j < k; ++j) {
            const Eigen::RowVectorXcd z = Z.row(j);
            const Eigen::VectorXcd h = H.col(j);
            const double ref_i = testing::dense_interference(z, Hu, X, kappa, beta, sigma2);
            CHECK(std::abs(interference(z, Hu, X, kappa, beta, sigma2) - ref_i) <= 1e-10 * ref_i);
            const double ref_s = testing::dense_sinr(P, r, h, z, Hu, X, kappa, beta, sigma2);
            CHECK(std::abs(sinr(P, r, h, z, Hu, X, kappa, beta, sigma2) - ref_s) <= 1e-10 * std::max(1.0, ref_s));
            const double ref_h = testing::dense_harvest(r, h, X, kappa, 0.6);
            CHECK(std::abs(harvested_power(r, h, X, kappa, 0.6) - ref_h) <= 1e-10 * std::max(1.0, ref_h));
        }
    }
}
