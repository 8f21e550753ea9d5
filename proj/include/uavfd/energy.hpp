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

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "uavfd/channel.hpp"
#include "uavfd/model.hpp"

namespace uavfd {

/// Propulsion energy of one leg: tau (|q_b - q_a| / t_move)^2.
inline double propulsion_energy(const Point& q_a, const Point& q_b, double t_move, double tau) {
    return tau * (q_b - q_a).squaredNorm() / (t_move * t_move);
}

/// Transmit power of the energy beam, trace(X + kappa diag X) = (1 + kappa) trace X.
inline double wpt_power(const Eigen::MatrixXcd& X, double kappa) {
    return (1.0 + kappa) * X.trace().real();
}

struct EnergyBreakdown {
    std::vector<double> propulsion; // legs 0..N
    std::vector<double> wpt;        // slots 1..N, already multiplied by T/N
    double total = 0.0;

    [[nodiscard]] double propulsion_total() const { return std::accumulate(propulsion.begin(), propulsion.end(), 0.0); }
    [[nodiscard]] double wpt_total() const { return std::accumulate(wpt.begin(), wpt.end(), 0.0); }
};

inline void check_solution_shape(const Solution& s, const SystemConfig& cfg) {
    const auto N = static_cast<std::size_t>(cfg.N);
    if (s.trajectory.points.size() != N + 2) {
        throw std::invalid_argument("trajectory must have N+2=" + std::to_string(N + 2) + " points");
    }
    if (s.beams.covariances.size() != N) throw std::invalid_argument("beam plan must have N covariances");
    for (const auto& X : s.beams.covariances) {
        if (X.rows() != cfg.M || X.cols() != cfg.M) throw std::invalid_argument("beam covariance must be M x M");
    }
    if (s.powers.powers.rows() != cfg.K || s.powers.powers.cols() != cfg.N) {
        throw std::invalid_argument("power schedule must be K x N");
    }
}

/// Objective of the master problem: propulsion over all N+1 legs plus WPT energy over N slots.
inline EnergyBreakdown total_energy(const Solution& s, const SystemConfig& cfg) {
    EnergyBreakdown e;
    const auto& q = s.trajectory.points;
    for (std::size_t n = 0; n + 1 < q.size(); ++n) e.propulsion.push_back(propulsion_energy(q[n], q[n + 1], cfg.t_move, cfg.tau));
    for (const auto& X : s.beams.covariances) e.wpt.push_back(cfg.slot_time() * wpt_power(X, cfg.kappa));
    e.total = e.propulsion_total() + e.wpt_total();
    return e;
}

// ---------------------------------------------------------------------------
// Feasibility verification
// ---------------------------------------------------------------------------

struct ConstraintCheck {
    std::string constraint;
    std::string index;
    double slack = 0.0; // >= 0 means satisfied exactly; units of the constraint
    bool pass = true;
};

struct FeasibilityReport {
    std::vector<ConstraintCheck> checks;

    [[nodiscard]] bool passed() const {
        return std::all_of(checks.begin(), checks.end(), [](const ConstraintCheck& c) { return c.pass; });
    }
    [[nodiscard]] bool passed(const std::string& constraint) const {
        return std::all_of(checks.begin(), checks.end(),
                           [&](const ConstraintCheck& c) { return c.constraint != constraint || c.pass; });
    }
    /// Most negative slack of one constraint family (+inf if absent).
    [[nodiscard]] double worst_slack(const std::string& constraint) const {
        double w = std::numeric_limits<double>::infinity();
        for (const auto& c : checks)
            if (c.constraint == constraint) w = std::min(w, c.slack);
        return w;
    }
    [[nodiscard]] std::vector<std::string> failed_constraints() const {
        std::vector<std::string> out;
        for (const auto& c : checks)
            if (!c.pass && std::find(out.begin(), out.end(), c.constraint) == out.end()) out.push_back(c.constraint);
        return out;
    }
};

/// Constraint families, in report order.
inline const std::vector<std::string>& constraint_names() {
    static const std::vector<std::string> names{"rate",  "energy_causality", "endpoint",   "speed",
                                                "wpt_power", "psd_beam",     "power_nonneg"};
    return names;
}

inline const char* describe_constraint(const std::string& name) {
    if (name == "rate") return "uploaded bits per device >= R_k";
    if (name == "energy_causality") return "cumulative transmit energy <= cumulative harvested energy";
    if (name == "endpoint") return "trajectory starts at q_ui and ends at q_uf";
    if (name == "speed") return "leg speed <= V_max";
    if (name == "wpt_power") return "WPT transmit power <= P_max";
    if (name == "psd_beam") return "beam covariance is positive semidefinite";
    if (name == "power_nonneg") return "device transmit power >= 0";
    return "";
}

/// Recomputes every constraint of the master problem from scratch (exact
/// path loss and SINR). `tol` is relative to each constraint's natural scale;
/// the PSD check always allows 1e-8 of the trace for solver roundoff.
inline FeasibilityReport verify_feasibility(const Solution& s, const ChannelSet& chans, const SystemConfig& cfg,
                                            const DeviceLayout& layout, double tol) {
    check_solution_shape(s, cfg);
    check_channels(chans, cfg);
    check_layout(layout, cfg);
    FeasibilityReport rep;
    const auto zf = zf_receivers(chans);
    const Eigen::MatrixXd r = path_losses(cfg, layout, s.trajectory);
    const Eigen::MatrixXd& P = s.powers.powers;
    const double coeff = cfg.slot_time() * cfg.B;

    for (int k = 0; k < cfg.K; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        double bits = 0.0;
        double sent = 0.0, harvested = 0.0;
        for (int n = 0; n < cfg.N; ++n) {
            const auto nu = static_cast<std::size_t>(n);
            const auto& X = s.beams.covariances[nu];
            const Eigen::RowVectorXcd z = zf.Z[nu].row(k);
            const double g = sinr(P(k, n), r(k, n), chans.h(ku, nu), z, chans.H_u[nu], X, cfg.kappa, cfg.beta,
                                  cfg.sigma2);
            bits += coeff * std::log2(1.0 + g);
            sent += P(k, n);
            harvested += harvested_power(r(k, n), chans.h(ku, nu), X, cfg.kappa, cfg.eta);
            const double slack = harvested - sent;
            const double scale = std::max({std::abs(harvested), std::abs(sent), 1e-300});
            rep.checks.push_back({"energy_causality", std::to_string(k + 1) + ":" + std::to_string(n + 1), slack,
                                  slack >= -tol * scale});
            const double pn = P(k, n);
            rep.checks.push_back({"power_nonneg", std::to_string(k + 1) + ":" + std::to_string(n + 1), pn,
                                  pn >= -tol * std::max(1e-300, P.cwiseAbs().maxCoeff())});
        }
        const double req = cfg.R[ku];
        rep.checks.push_back({"rate", std::to_string(k + 1), bits - req, bits - req >= -tol * req});
    }

    const auto& q = s.trajectory.points;
    const double d0 = (q.front() - cfg.q_ui).norm();
    const double d1 = (q.back() - cfg.q_uf).norm();
    rep.checks.push_back({"endpoint", "start", -d0, d0 <= tol * std::max(1.0, cfg.q_ui.norm())});
    rep.checks.push_back({"endpoint", "end", -d1, d1 <= tol * std::max(1.0, cfg.q_uf.norm())});
    for (std::size_t n = 0; n + 1 < q.size(); ++n) {
        const double v = (q[n + 1] - q[n]).norm() / cfg.t_move;
        rep.checks.push_back({"speed", std::to_string(n), cfg.V_max - v, v <= cfg.V_max * (1.0 + tol)});
    }
    for (std::size_t n = 0; n < s.beams.covariances.size(); ++n) {
        const auto& X = s.beams.covariances[n];
        const double pw = wpt_power(X, cfg.kappa);
        rep.checks.push_back({"wpt_power", std::to_string(n + 1), cfg.P_max - pw, pw <= cfg.P_max * (1.0 + tol)});
        const Eigen::MatrixXcd Xh = 0.5 * (X + X.adjoint());
        const double herm_err = (X - X.adjoint()).norm();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(Xh, Eigen::EigenvaluesOnly);
        const double lmin = es.eigenvalues().size() > 0 ? es.eigenvalues()[0] : 0.0;
        const double tr = std::abs(X.trace().real());
        const double psd_tol = std::max(tol, 1e-8) * tr;
        rep.checks.push_back({"psd_beam", std::to_string(n + 1), lmin,
                              lmin >= -psd_tol && herm_err <= std::max(tol, 1e-8) * std::max(tr, 1e-300)});
    }
    return rep;
}

inline void write_feasibility_csv(std::ostream& os, const FeasibilityReport& rep) {
    const auto old = os.precision(17);
    os << "constraint,index,slack,status\n";
    for (const auto& c : rep.checks) os << c.constraint << ',' << c.index << ',' << c.slack << ',' << (c.pass ? "pass" : "fail") << '\n';
    os.precision(old);
}

} // namespace uavfd
