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

#include <algorithm>
#include <sstream>

#include "support.hpp"

using namespace uavfd;
using Catch::Approx;

namespace {

// Straight-line solution on the small config with an isotropic full-power
// beam and devices transmitting a fixed fraction of what they harvest.
Solution harvest_fraction_solution(const SystemConfig& c, const ChannelSet& cs, const DeviceLayout& layout,
                                   double fraction) {
    Solution s;
    s.trajectory = straight_line(c);
    const double p = c.P_max / ((1.0 + c.kappa) * c.M);
    for (int n = 0; n < c.N; ++n) s.beams.covariances.push_back(p * Eigen::MatrixXcd::Identity(c.M, c.M));
    const Eigen::MatrixXd r = path_losses(c, layout, s.trajectory);
    s.powers.powers = Eigen::MatrixXd::Zero(c.K, c.N);
    for (int k = 0; k < c.K; ++k)
        for (int n = 0; n < c.N; ++n)
            s.powers.powers(k, n) = fraction * harvested_power(r(k, n), cs.h(static_cast<std::size_t>(k), static_cast<std::size_t>(n)),
                                                               s.beams.covariances[static_cast<std::size_t>(n)], c.kappa, c.eta);
    return s;
}

} // namespace

TEST_CASE("propulsion energy examples", "[energy]") {
    CHECK(propulsion_energy({0.2, 0.3}, {0.2, 0.3}, 1.0, 0.6) == 0.0);
    CHECK(propulsion_energy({0, 0}, {2, 0}, 1.0, 0.6) == Approx(2.4).epsilon(1e-15));
    const double e1 = propulsion_energy({-1, -1}, {0.3, 0.4}, 1.0, 0.6);
    CHECK(propulsion_energy({-1, -1}, {0.3, 0.4}, 0.5, 0.6) == Approx(4.0 * e1).epsilon(1e-14));
    CHECK(propulsion_energy({-1, -1}, {0.3, 0.4}, 2.0, 0.6) == Approx(e1 / 4.0).epsilon(1e-14));
}

TEST_CASE("WPT power examples", "[energy]") {
    CHECK(wpt_power(Eigen::MatrixXcd::Identity(4, 4), 0.005) == Approx(4.02).epsilon(1e-15));
    Eigen::MatrixXcd D = Eigen::MatrixXcd::Zero(4, 4);
    D.diagonal() << 1.0, 2.0, 3.0, 4.0;
    CHECK(wpt_power(D, 0.005) == Approx(10.05).epsilon(1e-15));
    CHECK(wpt_power(D, 0.005) > SystemConfig{}.P_max);
    CHECK(wpt_power(Eigen::MatrixXcd::Zero(4, 4), 0.005) == 0.0);

    std::mt19937_64 rng(8);
    for (int i = 0; i < 50; ++i) {
        const Eigen::MatrixXcd X = testing::random_psd(4, 1 + i % 4, rng) * (1.0 + i);
        const double tr = X.trace().real();
        CHECK(std::abs(wpt_power(X, 0.005) - 1.005 * tr) <= 1e-14 * tr);
    }
}

TEST_CASE("total energy sums every leg and slot", "[energy]") {
    SystemConfig c;
    SECTION("stationary at a common endpoint") {
        c.q_uf = c.q_ui;
        Solution s;
        s.trajectory.points.assign(static_cast<std::size_t>(c.N) + 2, c.q_ui);
        s.beams.covariances.assign(static_cast<std::size_t>(c.N), Eigen::MatrixXcd::Zero(c.M, c.M));
        s.powers.powers = Eigen::MatrixXd::Zero(c.K, c.N);
        const auto e = total_energy(s, c);
        CHECK(e.total == 0.0);
        CHECK(e.propulsion.size() == static_cast<std::size_t>(c.N) + 1);
        CHECK(e.wpt.size() == static_cast<std::size_t>(c.N));
    }
    SECTION("benchmark-1 path with no beam") {
        Solution s;
        s.trajectory = benchmark1_trajectory(c);
        s.beams.covariances.assign(static_cast<std::size_t>(c.N), Eigen::MatrixXcd::Zero(c.M, c.M));
        s.powers.powers = Eigen::MatrixXd::Zero(c.K, c.N);
        const auto e = total_energy(s, c);
        CHECK(e.total == Approx(2.4).epsilon(1e-14));
        c.t_move = 0.5;
        CHECK(total_energy(s, c).propulsion_total() == Approx(9.6).epsilon(1e-14));
    }
    SECTION("breakdown adds up and WPT energy is scaled by the slot time") {
        std::mt19937_64 rng(2);
        Solution s;
        s.trajectory = straight_line(c);
        for (int n = 0; n < c.N; ++n) s.beams.covariances.push_back(testing::random_psd(c.M, 2, rng) * 2.0);
        s.powers.powers = Eigen::MatrixXd::Zero(c.K, c.N);
        const auto e = total_energy(s, c);
        CHECK(std::abs(e.total - (e.propulsion_total() + e.wpt_total())) <= 1e-12 * e.total);
        for (double w : e.wpt) CHECK(w == Approx(7.5 * 2.0 * 1.005).epsilon(1e-12));
        for (double p : e.propulsion) CHECK(p >= 0.0);
    }
}

TEST_CASE("verify_feasibility flags each constraint family", "[energy]") {
    const SystemConfig c = testing::small_config();
    const auto cs = sample_channels(c);
    const auto layout = testing::small_layout();

    SECTION("zero powers miss the rate by R") {
        auto s = harvest_fraction_solution(c, cs, layout, 0.0);
        const auto rep = verify_feasibility(s, cs, c, layout, 1e-6);
        CHECK_FALSE(rep.passed("rate"));
        CHECK(rep.worst_slack("rate") == Approx(-64.0));
        CHECK(rep.passed("energy_causality"));
        CHECK(rep.passed("speed"));
    }
    SECTION("transmitting more than harvested breaks causality at the first prefix") {
        auto s = harvest_fraction_solution(c, cs, layout, 0.5);
        s.powers.powers(1, 0) *= 3.0;
        const auto rep = verify_feasibility(s, cs, c, layout, 1e-6);
        CHECK_FALSE(rep.passed("energy_causality"));
        const auto it = std::find_if(rep.checks.begin(), rep.checks.end(),
                                     [](const ConstraintCheck& x) { return !x.pass; });
        REQUIRE(it != rep.checks.end());
        CHECK(it->constraint == "energy_causality");
        CHECK(it->index == "2:1");
        CHECK(rep.failed_constraints() == std::vector<std::string>{"energy_causality"});
    }
    SECTION("a 20 m leg in one second is too fast") {
        auto s = harvest_fraction_solution(c, cs, layout, 0.5);
        s.trajectory.points[1] = {19.0, -1.0};
        const auto rep = verify_feasibility(s, cs, c, layout, 1e-6);
        CHECK_FALSE(rep.passed("speed"));
        CHECK(rep.worst_slack("speed") == Approx(10.0 - 20.0));
    }
    SECTION("moved endpoints, excess WPT and an indefinite beam") {
        auto s = harvest_fraction_solution(c, cs, layout, 0.5);
        s.trajectory.points.back() = {1.0, -0.9};
        s.beams.covariances[0] *= 2.0;
        s.beams.covariances[1](0, 0) = -0.5;
        s.powers.powers(0, 2) = -1e-3;
        const auto rep = verify_feasibility(s, cs, c, layout, 1e-6);
        CHECK_FALSE(rep.passed("endpoint"));
        CHECK_FALSE(rep.passed("wpt_power"));
        CHECK_FALSE(rep.passed("psd_beam"));
        CHECK_FALSE(rep.passed("power_nonneg"));
    }
    SECTION("shape mismatches throw") {
        auto s = harvest_fraction_solution(c, cs, layout, 0.5);
        s.beams.covariances.pop_back();
        CHECK_THROWS_AS(verify_feasibility(s, cs, c, layout, 1e-6), std::invalid_argument);
    }
}

TEST_CASE("objective ignores the order of devices", "[energy]") {
    SystemConfig c = testing::small_config();
    const auto cs = sample_channels(c);
    auto s = harvest_fraction_solution(c, cs, testing::small_layout(), 0.4);
    const double before = total_energy(s, c).total;
    s.powers.powers.row(0).swap(s.powers.powers.row(1));
    CHECK(total_energy(s, c).total == before);
}

TEST_CASE("feasibility report CSV", "[energy]") {
    const SystemConfig c = testing::small_config();
    const auto cs = sample_channels(c);
    const auto s = harvest_fraction_solution(c, cs, testing::small_layout(), 0.0);
    const auto rep = verify_feasibility(s, cs, c, testing::small_layout(), 1e-6);
    std::ostringstream os;
    write_feasibility_csv(os, rep);
    const std::string text = os.str();
    CHECK(text.rfind("constraint,index,slack,status\n", 0) == 0);
    CHECK(text.find("\nrate,1,-64,fail\n") != std::string::npos);
    CHECK(std::count(text.begin(), text.end(), '\n') == static_cast<long>(rep.checks.size()) + 1);
    for (const auto& name : constraint_names()) CHECK(std::string(describe_constraint(name)).size() > 0);
}
