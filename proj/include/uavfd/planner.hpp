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
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "uavfd/channel.hpp"
#include "uavfd/energy.hpp"
#include "uavfd/model.hpp"
#include "uavfd/sca.hpp"

namespace uavfd {

enum class SchemeKind { optimized, benchmark1, benchmark2 };

inline const char* to_string(SchemeKind s) {
    switch (s) {
    case SchemeKind::optimized: return "optimized";
    case SchemeKind::benchmark1: return "benchmark1";
    case SchemeKind::benchmark2: return "benchmark2";
    }
    return "?";
}

inline SchemeKind scheme_from_string(const std::string& s) {
    if (s == "optimized") return SchemeKind::optimized;
    if (s == "benchmark1") return SchemeKind::benchmark1;
    if (s == "benchmark2") return SchemeKind::benchmark2;
    throw std::invalid_argument("unknown scheme '" + s + "' (expected optimized, benchmark1 or benchmark2)");
}

class PlannerError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct PlannerSettings {
    ScaSettings sca{};
    double eps_outer = 1e-3;
    int max_outer = 20;
    /// Tolerance of the final feasibility check.
    double feasibility_tol = 1e-6;
};

// ---------------------------------------------------------------------------
// Layouts and fixed trajectories
// ---------------------------------------------------------------------------

/// Fixed four-device layout inside the [-1, 1]^2 area used by the regression
/// and acceptance suites.
inline DeviceLayout reference_layout() {
    return {{Point{0.0, 0.6}, Point{0.0, -0.6}, Point{-0.4, 0.3}, Point{0.4, -0.3}}};
}

/// K devices drawn uniformly on [-half, half]^2, which is a Poisson point
/// process conditioned on its count.
inline DeviceLayout random_layout(int K, std::uint64_t seed, double half = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-half, half);
    DeviceLayout layout;
    for (int k = 0; k < K; ++k) {
        const double x = u(rng);
        const double y = u(rng);
        layout.positions.emplace_back(x, y);
    }
    return layout;
}

/// Fly to the centre, hover there for all N slots, fly to the end point.
inline Trajectory benchmark1_trajectory(const SystemConfig& cfg) {
    Trajectory tr;
    tr.points.push_back(cfg.q_ui);
    for (int n = 0; n < cfg.N; ++n) tr.points.emplace_back(0.0, 0.0);
    tr.points.push_back(cfg.q_uf);
    return tr;
}

/// Hover at N equally spaced points from [-0.7778, 0] to [0.7778, 0], both included.
inline Trajectory benchmark2_trajectory(const SystemConfig& cfg) {
    constexpr double edge = 0.7778;
    Trajectory tr;
    tr.points.push_back(cfg.q_ui);
    for (int n = 0; n < cfg.N; ++n) {
        const double a = cfg.N == 1 ? 0.0 : static_cast<double>(n) / (cfg.N - 1);
        tr.points.emplace_back(-edge + 2.0 * edge * a, 0.0);
    }
    tr.points.push_back(cfg.q_uf);
    return tr;
}

inline bool speed_feasible(const Trajectory& tr, const SystemConfig& cfg) {
    for (std::size_t n = 0; n + 1 < tr.points.size(); ++n) {
        if (tr.leg_length(n) > cfg.V_max * cfg.t_move) return false;
    }
    return true;
}

inline void require_speed_feasible(const Trajectory& tr, const SystemConfig& cfg, const char* what) {
    for (std::size_t n = 0; n + 1 < tr.points.size(); ++n) {
        if (tr.leg_length(n) > cfg.V_max * cfg.t_move) {
            throw PlannerError(std::string(what) + ": leg " + std::to_string(n) + " needs speed " +
                               std::to_string(tr.leg_length(n) / cfg.t_move) + " m/s > V_max");
        }
    }
}

// ---------------------------------------------------------------------------
// Fixed-trajectory solves
// ---------------------------------------------------------------------------

/// Beams and powers for a fixed trajectory; independent of the moving time.
struct FixedTrajectoryPlan {
    Trajectory trajectory;
    PowerSchedule powers;
    BeamPlan beams;
    double wpt_energy = 0.0;
    int iterations = 0;
};

inline Solution compose_solution(const SystemConfig& cfg, const Trajectory& tr, const PowerSchedule& P,
                                 const BeamPlan& X) {
    Solution s;
    s.trajectory = tr;
    s.powers = P;
    s.beams = X;
    s.objective = total_energy(s, cfg).total;
    return s;
}

/// Runs the initialization and the first loop on a fixed trajectory.
inline FixedTrajectoryPlan plan_fixed_trajectory(const SystemConfig& cfg, const SlotModel& sm,
                                                 const DeviceLayout& layout, const Trajectory& tr,
                                                 const ScaSettings& settings) {
    const Eigen::MatrixXd r = path_losses(cfg, layout, tr);
    LinearizationState lin;
    lin.t_bar = init_t_matrix(cfg);
    InitResult init;
    try {
        init = init_e(cfg, sm, r, lin.t_bar, settings);
    } catch (const ScaError& e) {
        throw PlannerError(e.what());
    }
    lin.e_bar = init.e_bar;
    auto fl = run_first_loop(cfg, sm, r, lin, settings);
    if (!fl.has_iterate) throw PlannerError(fl.report.message);
    return {tr, fl.powers, fl.beams, fl.objective, fl.report.iterations};
}

/// Re-optimizes beams and powers on an existing solution's trajectory,
/// starting from that solution's own operating point.
inline FixedTrajectoryPlan replan_from(const SystemConfig& cfg, const SlotModel& sm, const ChannelSet& chans,
                                       const DeviceLayout& layout, const Solution& from, const ScaSettings& settings) {
    const auto lin = restore_linearization(cfg, chans, layout, from.trajectory, from.powers, from.beams);
    auto fl = run_first_loop(cfg, sm, path_losses(cfg, layout, from.trajectory), lin, settings);
    if (!fl.has_iterate) throw PlannerError(fl.report.message);
    return {from.trajectory, fl.powers, fl.beams, fl.objective, fl.report.iterations};
}

inline Solution fixed_solution(const SystemConfig& cfg, const FixedTrajectoryPlan& plan) {
    auto s = compose_solution(cfg, plan.trajectory, plan.powers, plan.beams);
    s.trace.push_back({s.objective, plan.iterations, 0});
    return s;
}

inline void require_feasible(const Solution& s, const ChannelSet& chans, const SystemConfig& cfg,
                             const DeviceLayout& layout, double tol, const char* what) {
    const auto rep = verify_feasibility(s, chans, cfg, layout, tol);
    if (!rep.passed()) {
        std::string names;
        for (const auto& n : rep.failed_constraints()) names += (names.empty() ? "" : ", ") + n;
        throw PlannerError(std::string(what) + " returned an infeasible solution (" + names + ")");
    }
}

inline Solution benchmark1(const SystemConfig& cfg, const DeviceLayout& layout, const ChannelSet& chans,
                           const PlannerSettings& settings = {}) {
    validate_config(cfg);
    check_layout(layout, cfg);
    const auto tr = benchmark1_trajectory(cfg);
    require_speed_feasible(tr, cfg, "benchmark1");
    auto s = fixed_solution(cfg, plan_fixed_trajectory(cfg, make_slot_model(cfg, chans), layout, tr, settings.sca));
    require_feasible(s, chans, cfg, layout, settings.feasibility_tol, "benchmark1");
    return s;
}

inline Solution benchmark2(const SystemConfig& cfg, const DeviceLayout& layout, const ChannelSet& chans,
                           const PlannerSettings& settings = {}) {
    validate_config(cfg);
    check_layout(layout, cfg);
    const auto tr = benchmark2_trajectory(cfg);
    require_speed_feasible(tr, cfg, "benchmark2");
    auto s = fixed_solution(cfg, plan_fixed_trajectory(cfg, make_slot_model(cfg, chans), layout, tr, settings.sca));
    require_feasible(s, chans, cfg, layout, settings.feasibility_tol, "benchmark2");
    return s;
}

// ---------------------------------------------------------------------------
// Alternating optimization
// ---------------------------------------------------------------------------

struct OptimizeOptions {
    /// Previously solved plans tried as additional starting points.
    std::vector<Solution> warm_starts;
    /// Fixed-trajectory plans already computed for this (config, channels);
    /// they are moving-time independent, so sweeps compute them once.
    std::vector<FixedTrajectoryPlan> precomputed_starts;
    /// Whether to add the straight line and both benchmark trajectories as starts.
    bool default_starts = true;
};

struct OptimizeReport {
    Solution solution;
    std::string start; // label of the chosen starting point
    std::vector<InnerLoopReport> first_loops, second_loops;
    std::vector<std::string> warnings;
};

/// Alternating optimization of beams/powers (first loop) and trajectory
/// (second loop). Every candidate start is planned with the first loop; the
/// cheapest is refined until the total energy settles. Returns the best
/// feasible iterate, so the objective never exceeds the chosen start's.
inline OptimizeReport optimize_detailed(const SystemConfig& cfg, const DeviceLayout& layout, const ChannelSet& chans,
                                        const PlannerSettings& settings = {}, const OptimizeOptions& options = {}) {
    validate_config(cfg);
    check_layout(layout, cfg);
    check_channels(chans, cfg);
    const auto sm = make_slot_model(cfg, chans);
    const auto& sca = settings.sca;

    struct Candidate {
        FixedTrajectoryPlan plan;
        std::string label;
        double energy;
    };
    std::vector<Candidate> candidates;
    OptimizeReport rep;
    auto consider = [&](const std::string& label, auto&& make) {
        try {
            FixedTrajectoryPlan plan = make();
            if (!speed_feasible(plan.trajectory, cfg)) return;
            const double e = compose_solution(cfg, plan.trajectory, plan.powers, plan.beams).objective;
            candidates.push_back({std::move(plan), label, e});
        } catch (const PlannerError& e) {
            rep.warnings.push_back("start " + label + " skipped: " + e.what());
        }
    };
    for (std::size_t i = 0; i < options.precomputed_starts.size(); ++i) {
        consider("precomputed" + std::to_string(i + 1), [&] { return options.precomputed_starts[i]; });
    }
    if (options.default_starts) {
        consider("straight_line", [&] { return plan_fixed_trajectory(cfg, sm, layout, straight_line(cfg), sca); });
        for (const auto& [label, tr] : {std::pair{"benchmark1", benchmark1_trajectory(cfg)},
                                        std::pair{"benchmark2", benchmark2_trajectory(cfg)}}) {
            if (!speed_feasible(tr, cfg)) continue;
            consider(label, [&] { return plan_fixed_trajectory(cfg, sm, layout, tr, sca); });
        }
    }
    for (std::size_t i = 0; i < options.warm_starts.size(); ++i) {
        const auto& ws = options.warm_starts[i];
        if (!speed_feasible(ws.trajectory, cfg)) continue;
        consider("warm" + std::to_string(i + 1), [&] { return replan_from(cfg, sm, chans, layout, ws, sca); });
    }
    if (candidates.empty()) {
        std::string msg = "initialization infeasible at every starting trajectory";
        for (const auto& w : rep.warnings) msg += "; " + w;
        throw PlannerError(msg);
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < candidates.size(); ++i) {
        if (candidates[i].energy < candidates[best].energy) best = i;
    }
    rep.start = candidates[best].label;

    // Current accepted iterate.
    Trajectory traj = candidates[best].plan.trajectory;
    PowerSchedule P = candidates[best].plan.powers;
    BeamPlan X = candidates[best].plan.beams;
    int first_iters = candidates[best].plan.iterations;
    double current = candidates[best].energy;
    Solution best_sol = compose_solution(cfg, traj, P, X);
    int failures = 0;

    for (int outer = 1; outer <= settings.max_outer; ++outer) {
        if (outer > 1) {
            const auto lin = restore_linearization(cfg, chans, layout, traj, P, X);
            auto fl = run_first_loop(cfg, sm, path_losses(cfg, layout, traj), lin, sca);
            rep.first_loops.push_back(fl.report);
            if (!fl.has_iterate) {
                rep.warnings.push_back("outer iteration " + std::to_string(outer) + ": " + fl.report.message);
                if (++failures >= 2) break;
                continue;
            }
            const double e = compose_solution(cfg, traj, fl.powers, fl.beams).objective;
            if (e <= current) {
                P = fl.powers;
                X = fl.beams;
                current = e;
            }
            first_iters = fl.report.iterations;
        }
        auto lin = restore_linearization(cfg, chans, layout, traj, P, X);
        auto sl = run_second_loop(cfg, sm, layout, P, X, lin, traj, sca);
        rep.second_loops.push_back(sl.report);
        int second_iters = sl.report.iterations;
        if (!sl.has_iterate) {
            rep.warnings.push_back("outer iteration " + std::to_string(outer) + ": " + sl.report.message);
            second_iters = 0;
            if (++failures >= 2) {
                auto trace = std::move(best_sol.trace);
                best_sol = compose_solution(cfg, traj, P, X);
                trace.push_back({best_sol.objective, first_iters, second_iters});
                best_sol.trace = std::move(trace);
                break;
            }
        } else {
            failures = 0;
            const double e = compose_solution(cfg, sl.trajectory, P, X).objective;
            if (e <= current && speed_feasible(sl.trajectory, cfg)) {
                traj = sl.trajectory;
                current = e;
            }
        }
        const double previous = best_sol.trace.empty() ? std::numeric_limits<double>::infinity()
                                                       : best_sol.trace.back().objective;
        auto trace = std::move(best_sol.trace);
        best_sol = compose_solution(cfg, traj, P, X);
        trace.push_back({best_sol.objective, first_iters, second_iters});
        best_sol.trace = std::move(trace);
        if (std::isfinite(previous) && objective_converged(previous, best_sol.objective, settings.eps_outer)) break;
    }
    const auto fr = verify_feasibility(best_sol, chans, cfg, layout, settings.feasibility_tol);
    if (!fr.passed()) {
        std::string names;
        for (const auto& n : fr.failed_constraints()) names += (names.empty() ? "" : ", ") + n;
        throw PlannerError("optimized solution failed the feasibility check (" + names + ")");
    }
    rep.solution = std::move(best_sol);
    return rep;
}

inline Solution optimize(const SystemConfig& cfg, const DeviceLayout& layout, const ChannelSet& chans,
                         const PlannerSettings& settings = {}, const OptimizeOptions& options = {}) {
    return optimize_detailed(cfg, layout, chans, settings, options).solution;
}

inline Solution run_scheme(SchemeKind scheme, const SystemConfig& cfg, const DeviceLayout& layout,
                           const ChannelSet& chans, const PlannerSettings& settings = {}) {
    switch (scheme) {
    case SchemeKind::optimized: return optimize(cfg, layout, chans, settings);
    case SchemeKind::benchmark1: return benchmark1(cfg, layout, chans, settings);
    case SchemeKind::benchmark2: return benchmark2(cfg, layout, chans, settings);
    }
    throw std::invalid_argument("unknown scheme");
}

// ---------------------------------------------------------------------------
// Moving-time sweep
// ---------------------------------------------------------------------------

struct SweepRow {
    double t_move = 0.0;
    SchemeKind scheme = SchemeKind::optimized;
    EnergyBreakdown breakdown;
    std::string status = "ok"; // "ok" or "failed: <reason>"
    std::optional<Solution> solution;

    [[nodiscard]] bool ok() const { return status == "ok"; }
};

/// Runs all three schemes for every moving time on one channel realization.
/// Rows follow the input order of `t_values`, schemes in enum order. Each
/// optimized cell is also started from the previous cell's optimized plan.
inline std::vector<SweepRow> sweep_moving_time(const SystemConfig& base, const DeviceLayout& layout,
                                               const ChannelSet& chans, const std::vector<double>& t_values,
                                               const PlannerSettings& settings = {}) {
    validate_config(base);
    check_layout(layout, base);
    const auto sm = make_slot_model(base, chans);
    // Beams and powers on a fixed trajectory do not depend on the moving time.
    std::optional<FixedTrajectoryPlan> b1, b2;
    std::string b1_err, b2_err;
    try {
        b1 = plan_fixed_trajectory(base, sm, layout, benchmark1_trajectory(base), settings.sca);
    } catch (const std::exception& e) {
        b1_err = e.what();
    }
    try {
        b2 = plan_fixed_trajectory(base, sm, layout, benchmark2_trajectory(base), settings.sca);
    } catch (const std::exception& e) {
        b2_err = e.what();
    }
    std::optional<FixedTrajectoryPlan> line;
    try {
        line = plan_fixed_trajectory(base, sm, layout, straight_line(base), settings.sca);
    } catch (const std::exception&) {
    }

    std::vector<SweepRow> rows;
    std::optional<Solution> previous;
    for (double t : t_values) {
        SystemConfig cfg = base;
        cfg.t_move = t;
        // Optimized.
        {
            SweepRow row{t, SchemeKind::optimized, {}, "ok", std::nullopt};
            try {
                validate_config(cfg);
                OptimizeOptions opts;
                opts.default_starts = false;
                for (const auto* p : {&line, &b1, &b2}) {
                    if (*p && speed_feasible((*p)->trajectory, cfg)) opts.precomputed_starts.push_back(**p);
                }
                if (previous) opts.warm_starts.push_back(*previous);
                auto sol = optimize(cfg, layout, chans, settings, opts);
                row.breakdown = total_energy(sol, cfg);
                previous = sol;
                row.solution = std::move(sol);
            } catch (const std::exception& e) {
                row.status = std::string("failed: ") + e.what();
            }
            rows.push_back(std::move(row));
        }
        for (auto [scheme, plan, err] : {std::tuple{SchemeKind::benchmark1, &b1, &b1_err},
                                         std::tuple{SchemeKind::benchmark2, &b2, &b2_err}}) {
            SweepRow row{t, scheme, {}, "ok", std::nullopt};
            try {
                if (!*plan) throw PlannerError(*err);
                validate_config(cfg);
                require_speed_feasible((*plan)->trajectory, cfg, to_string(scheme));
                auto sol = fixed_solution(cfg, **plan);
                require_feasible(sol, chans, cfg, layout, settings.feasibility_tol, to_string(scheme));
                row.breakdown = total_energy(sol, cfg);
                row.solution = std::move(sol);
            } catch (const std::exception& e) {
                row.status = std::string("failed: ") + e.what();
            }
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

} // namespace uavfd
