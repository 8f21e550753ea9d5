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
#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "uavfd/channel.hpp"
#include "uavfd/conic/barrier.hpp"
#include "uavfd/conic/program.hpp"
#include "uavfd/conic/solver.hpp"
#include "uavfd/energy.hpp"
#include "uavfd/model.hpp"

namespace uavfd {

namespace cn = conic;

// ---------------------------------------------------------------------------
// Bilinear surrogates
// ---------------------------------------------------------------------------

/// First-order expansion of a*b around (a_bar, b_bar).
inline double taylor_bilinear(double a_bar, double b_bar, double a, double b) {
    return a_bar * b_bar + b_bar * (a - a_bar) + a_bar * (b - b_bar);
}

/// Scale s of the difference-of-squares split a*b = ((s a + b/s)^2 - (s a - b/s)^2) / 4.
/// Any s > 0 gives a bound that is tight at the expansion point; s^2 =
/// b_bar / a_bar balances the two squares. The clamp keeps the cone rows
/// well scaled when one factor is near zero.
inline double majorizer_scale(double a_bar, double b_bar) {
    const double floor = 1e-12;
    const double a = std::max(std::abs(a_bar), floor);
    const double b = std::max(std::abs(b_bar), floor);
    return std::clamp(std::sqrt(b / a), 1e-2, 1e2);
}

/// Convex upper bound of a*b that touches it (value and gradient) at
/// (a_bar, b_bar): the concave part -(s a - b/s)^2 / 4 is replaced by its
/// tangent. Valid for every real (a, b).
inline double majorize_bilinear(double a_bar, double b_bar, double a, double b) {
    const double s = majorizer_scale(a_bar, b_bar);
    const double d_bar = s * a_bar - b_bar / s;
    const double p = s * a + b / s;
    const double d = s * a - b / s;
    return 0.25 * p * p - 0.25 * d_bar * d_bar - 0.5 * d_bar * (d - d_bar);
}

/// How the non-convex couplings are convexified around the expansion point.
enum class SurrogateMode {
    /// Rate as log(e + P r g) - log(e) with -log(e) replaced by its tangent,
    /// and r <= 1/f with 1/f replaced by its tangent. Both are inner
    /// approximations, so every subproblem solution is feasible.
    tangent,
    /// t e <= P r g and r f <= 1 with the products replaced by a convex
    /// majorizer; also an inner approximation.
    majorizer,
    /// Plain first-order expansion of the products; not a bound, relies on
    /// restoration.
    taylor
};

inline const char* to_string(SurrogateMode m) {
    switch (m) {
    case SurrogateMode::tangent: return "tangent";
    case SurrogateMode::majorizer: return "majorizer";
    case SurrogateMode::taylor: return "taylor";
    }
    return "?";
}

inline SurrogateMode surrogate_from_string(const std::string& s) {
    if (s == "tangent") return SurrogateMode::tangent;
    if (s == "majorizer") return SurrogateMode::majorizer;
    if (s == "taylor") return SurrogateMode::taylor;
    throw std::invalid_argument("unknown surrogate '" + s + "' (expected tangent, majorizer or taylor)");
}

/// Adds a*b <= rhs, with a*b replaced by the selected surrogate around (a_bar, b_bar).
inline void add_bilinear_le(cn::ConicProgram& prog, SurrogateMode mode, double a_bar, double b_bar,
                            const cn::AffineExpr& a, const cn::AffineExpr& b, const cn::AffineExpr& rhs,
                            const std::string& label) {
    if (mode == SurrogateMode::taylor) {
        prog.add_nonnegative(rhs - (a_bar * b_bar + b_bar * (a - a_bar) + a_bar * (b - b_bar)), label);
        return;
    }
    const double s = majorizer_scale(a_bar, b_bar);
    const double d_bar = s * a_bar - b_bar / s;
    // (p/2)^2 <= rhs + d_bar^2/4 + d_bar (d - d_bar) / 2
    const cn::AffineExpr half_p = (a * s + b * (1.0 / s)) * 0.5;
    const cn::AffineExpr v = rhs + cn::AffineExpr(0.25 * d_bar * d_bar) + (a * s - b * (1.0 / s) - d_bar) * (0.5 * d_bar);
    const double w_bar = 0.5 * std::abs(s * a_bar + b_bar / s);
    prog.add_squared_norm_le({half_p}, v, std::max(w_bar, 1e-6), label);
}

// ---------------------------------------------------------------------------
// Per-slot linear maps of X
// ---------------------------------------------------------------------------

/// Precomputed channel-dependent quantities that do not depend on the trajectory.
struct SlotModel {
    int K = 0, M = 0, N = 0;
    ZfReceiver zf;
    Eigen::MatrixXd gain;  // |z_k h_k|^2, K x N
    Eigen::MatrixXd noise; // sigma2 |z_k|^2, K x N
    // Coefficients on the Hermitian parameter vector of X[n] (length M^2):
    // interference(X) = noise + dot(interf[k][n], params(X)),
    // harvest_gain(X) = dot(harvest[k][n], params(X)).
    std::vector<std::vector<Eigen::VectorXd>> interf;
    std::vector<std::vector<Eigen::VectorXd>> harvest;
};

inline SlotModel make_slot_model(const SystemConfig& cfg, const ChannelSet& chans) {
    check_channels(chans, cfg);
    SlotModel sm;
    sm.K = cfg.K;
    sm.M = cfg.M;
    sm.N = cfg.N;
    sm.zf = zf_receivers(chans);
    sm.gain.resize(cfg.K, cfg.N);
    sm.noise.resize(cfg.K, cfg.N);
    const cn::HermitianVar shape("X", 0, static_cast<cn::Index>(cfg.M));
    const auto np = static_cast<Eigen::Index>(shape.num_params());
    std::vector<Eigen::MatrixXcd> basis;
    for (cn::Index p = 0; p < shape.num_params(); ++p) basis.push_back(shape.basis(p));
    const Eigen::MatrixXcd zero = Eigen::MatrixXcd::Zero(cfg.M, cfg.M);
    sm.interf.assign(static_cast<std::size_t>(cfg.K), std::vector<Eigen::VectorXd>(static_cast<std::size_t>(cfg.N)));
    sm.harvest = sm.interf;
    for (int k = 0; k < cfg.K; ++k) {
        for (int n = 0; n < cfg.N; ++n) {
            const auto ku = static_cast<std::size_t>(k);
            const auto nu = static_cast<std::size_t>(n);
            const Eigen::RowVectorXcd z = sm.zf.Z[nu].row(k);
            const Eigen::VectorXcd h = chans.h(ku, nu);
            sm.gain(k, n) = std::norm((z * h)(0, 0));
            const double d0 = interference(z, chans.H_u[nu], zero, cfg.kappa, cfg.beta, cfg.sigma2);
            sm.noise(k, n) = d0;
            Eigen::VectorXd ci(np), ch(np);
            for (Eigen::Index p = 0; p < np; ++p) {
                const auto& Bp = basis[static_cast<std::size_t>(p)];
                ci[p] = interference(z, chans.H_u[nu], Bp, cfg.kappa, cfg.beta, cfg.sigma2) - d0;
                ch[p] = harvest_gain(h, Bp, cfg.kappa);
            }
            sm.interf[ku][nu] = std::move(ci);
            sm.harvest[ku][nu] = std::move(ch);
        }
    }
    return sm;
}

inline cn::AffineExpr param_functional(const cn::HermitianVar& X, const Eigen::VectorXd& coef, double constant = 0.0) {
    cn::AffineExpr e(constant);
    for (Eigen::Index p = 0; p < coef.size(); ++p) {
        if (coef[p] != 0.0) e.add_term(X.offset() + static_cast<cn::Index>(p), coef[p]);
    }
    return e;
}

// ---------------------------------------------------------------------------
// Linearization state
// ---------------------------------------------------------------------------

struct LinearizationState {
    Eigen::MatrixXd t_bar, e_bar; // first loop, K x N
    Eigen::MatrixXd r_bar, f_bar; // second loop, K x N
};

/// Closed-form SINR target that meets R with the same SINR in every slot:
/// N (T/N) B log2(1 + t) = R.
inline double init_t(double R, double T, double B) {
    if (!(T > 0.0) || !(B > 0.0)) throw std::invalid_argument("init_t requires positive T and B");
    return std::exp2(R / (T * B)) - 1.0;
}

/// Exact expansion points at a given operating point: t_bar is the SINR,
/// e_bar the interference-plus-noise power, f_bar = L^2 + d^2 and r_bar = 1/f_bar.
inline LinearizationState restore_linearization(const SystemConfig& cfg, const ChannelSet& chans,
                                                const DeviceLayout& layout, const Trajectory& traj,
                                                const PowerSchedule& P, const BeamPlan& X) {
    LinearizationState lin;
    lin.t_bar.resize(cfg.K, cfg.N);
    lin.e_bar.resize(cfg.K, cfg.N);
    lin.r_bar.resize(cfg.K, cfg.N);
    lin.f_bar.resize(cfg.K, cfg.N);
    const auto zf = zf_receivers(chans);
    for (int k = 0; k < cfg.K; ++k) {
        for (int n = 0; n < cfg.N; ++n) {
            const auto ku = static_cast<std::size_t>(k);
            const auto nu = static_cast<std::size_t>(n);
            const Point& q = traj.points[nu + 1];
            const double f = cfg.L * cfg.L + (q - layout[ku]).squaredNorm();
            const double r = path_loss(q, layout[ku], cfg.L);
            const Eigen::RowVectorXcd z = zf.Z[nu].row(k);
            lin.f_bar(k, n) = f;
            lin.r_bar(k, n) = r;
            lin.e_bar(k, n) = interference(z, chans.H_u[nu], X.covariances[nu], cfg.kappa, cfg.beta, cfg.sigma2);
            lin.t_bar(k, n) = sinr(P.powers(k, n), r, chans.h(ku, nu), z, chans.H_u[nu], X.covariances[nu], cfg.kappa,
                                   cfg.beta, cfg.sigma2);
        }
    }
    return lin;
}

// ---------------------------------------------------------------------------
// Loop settings and reports
// ---------------------------------------------------------------------------

struct ScaSettings {
    double eps_inner = 1e-4;
    int max_inner = 50;
    SurrogateMode mode = SurrogateMode::tangent;
    cn::SolverSettings solver{};
    /// Backend used for every subproblem; the barrier backend when null.
    const cn::Backend* backend = nullptr;
};

inline cn::SolverResult solve_with(const ScaSettings& s, const cn::ConicProgram& prog) {
    if (s.backend != nullptr) return s.backend->solve(prog, s.solver);
    return cn::BarrierBackend{}.solve(prog, s.solver);
}

enum class LoopTermination { converged, max_iters, infeasible };

inline const char* to_string(LoopTermination t) {
    switch (t) {
    case LoopTermination::converged: return "converged";
    case LoopTermination::max_iters: return "max_iters";
    case LoopTermination::infeasible: return "infeasible";
    }
    return "?";
}

struct InnerLoopReport {
    int iterations = 0;
    std::vector<double> objectives;
    LoopTermination reason = LoopTermination::max_iters;
    std::string message;
};

class ScaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline bool objective_converged(double prev, double cur, double eps) {
    return std::abs(cur - prev) <= eps * std::max(1.0, std::abs(cur));
}

// ---------------------------------------------------------------------------
// First loop: powers and beams for a fixed trajectory
// ---------------------------------------------------------------------------

struct FirstLoopProgram {
    cn::ConicProgram prog;
    cn::VarBlock P, t, e;
    cn::VarBlock u; // log-rate bounds, tangent mode only (t is then unused)
    std::vector<cn::HermitianVar> X;
};

namespace detail {

/// Shared part of the first-loop and initialization programs: P, e, X with
/// interference, power cap, causality and PSD constraints.
inline FirstLoopProgram first_loop_skeleton(const SystemConfig& cfg, const SlotModel& sm, const Eigen::MatrixXd& r) {
    FirstLoopProgram fp;
    auto& prog = fp.prog;
    const auto K = static_cast<cn::Index>(cfg.K);
    const auto N = static_cast<cn::Index>(cfg.N);
    fp.P = prog.add_variables("P", K, N);
    fp.e = prog.add_variables("e", K, N);
    for (cn::Index n = 0; n < N; ++n) fp.X.push_back(prog.add_hermitian("X" + std::to_string(n + 1), static_cast<cn::Index>(cfg.M)));

    cn::AffineExpr objective;
    for (cn::Index n = 0; n < N; ++n) {
        const auto& X = fp.X[n];
        objective += X.trace() * (cfg.slot_time() * (1.0 + cfg.kappa));
        prog.add_nonnegative(cn::AffineExpr(cfg.P_max) - X.trace() * (1.0 + cfg.kappa), "wpt_power");
        prog.add_hermitian_psd(X, "psd_beam");
    }
    prog.minimize(objective);

    for (cn::Index k = 0; k < K; ++k) {
        cn::AffineExpr prefix;
        for (cn::Index n = 0; n < N; ++n) {
            const auto& X = fp.X[n];
            prog.add_nonnegative(fp.P(k, n), "power_nonneg");
            prog.add_nonnegative(fp.e(k, n) - param_functional(X, sm.interf[k][n], sm.noise(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(n))),
                                 "interference");
            const double rk = r(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(n));
            prefix += param_functional(X, sm.harvest[k][n] * (cfg.eta * rk)) - fp.P(k, n);
            prog.add_nonnegative(prefix, "energy_causality");
        }
    }
    return fp;
}

inline BeamPlan extract_beams(const FirstLoopProgram& fp, const cn::SolverResult& res) {
    BeamPlan b;
    for (const auto& X : fp.X) {
        Eigen::MatrixXcd v = res.value(X);
        b.covariances.push_back(0.5 * (v + v.adjoint()));
    }
    return b;
}

} // namespace detail

inline FirstLoopProgram build_first_loop(const SystemConfig& cfg, const SlotModel& sm, const Eigen::MatrixXd& r,
                                         const LinearizationState& lin, SurrogateMode mode = SurrogateMode::tangent) {
    auto fp = detail::first_loop_skeleton(cfg, sm, r);
    auto& prog = fp.prog;
    const auto K = static_cast<cn::Index>(cfg.K);
    const auto N = static_cast<cn::Index>(cfg.N);
    const double coeff = cfg.slot_time() * cfg.B;
    if (mode == SurrogateMode::tangent) {
        // u <= log(e + P r g) - log(e_bar) - (e - e_bar) / e_bar, with
        // sum_n coeff u / ln 2 >= R. u is a lower bound on log(1 + SINR).
        fp.u = prog.add_variables("u", K, N);
        for (cn::Index k = 0; k < K; ++k) {
            cn::AffineExpr bits;
            for (cn::Index n = 0; n < N; ++n) {
                const auto ki = static_cast<Eigen::Index>(k);
                const auto ni = static_cast<Eigen::Index>(n);
                const double eb = lin.e_bar(ki, ni);
                if (!(eb > 0.0)) throw ScaError("expansion point e_bar must be positive");
                prog.add_exponential(fp.u(k, n) + cn::AffineExpr(std::log(eb) - 1.0) + fp.e(k, n) * (1.0 / eb),
                                     cn::AffineExpr(1.0), fp.e(k, n) + fp.P(k, n) * (r(ki, ni) * sm.gain(ki, ni)),
                                     "sinr");
                bits += fp.u(k, n) * (coeff / std::numbers::ln2);
            }
            const double req = cfg.R[k];
            if (req > 0.0) {
                prog.add_nonnegative(bits * (1.0 / req) - cn::AffineExpr(1.0), "rate" + std::to_string(k + 1));
            } else {
                for (cn::Index n = 0; n < N; ++n)
                    prog.add_nonnegative(fp.u(k, n) + cn::AffineExpr(1.0), "rate" + std::to_string(k + 1) + ".floor");
            }
        }
        return fp;
    }
    fp.t = prog.add_variables("t", K, N);
    for (cn::Index k = 0; k < K; ++k) {
        std::vector<cn::AffineExpr> tk;
        for (cn::Index n = 0; n < N; ++n) {
            const auto ki = static_cast<Eigen::Index>(k);
            const auto ni = static_cast<Eigen::Index>(n);
            prog.add_nonnegative(fp.t(k, n), "sinr_nonneg");
            // t e <= P r |z h|^2
            add_bilinear_le(prog, mode, lin.t_bar(ki, ni), lin.e_bar(ki, ni), fp.t(k, n), fp.e(k, n),
                            fp.P(k, n) * (r(ki, ni) * sm.gain(ki, ni)), "sinr");
            tk.push_back(fp.t(k, n));
        }
        cn::add_log_rate_constraint(prog, tk, coeff, cfg.R[k], "rate" + std::to_string(k + 1));
    }
    return fp;
}

inline FirstLoopProgram build_first_loop(const SystemConfig& cfg, const ChannelSet& chans, const DeviceLayout& layout,
                                         const Trajectory& traj, const LinearizationState& lin,
                                         SurrogateMode mode = SurrogateMode::tangent) {
    return build_first_loop(cfg, make_slot_model(cfg, chans), path_losses(cfg, layout, traj), lin, mode);
}

struct InitResult {
    Eigen::MatrixXd e_bar;
    PowerSchedule powers;
    BeamPlan beams;
};

/// Feasibility start for the first loop: with t frozen at t_bar the SINR
/// coupling is linear in (P, e). Returns the least-WPT feasible point, which
/// is one particular feasible point.
///
/// A uniform per-slot SINR target can be stricter than the rate constraint
/// itself. When it is infeasible the start is instead taken from the tangent
/// restriction expanded at the interference of a full-power isotropic beam;
/// that restriction is an inner approximation, so its points are feasible.
inline InitResult init_e(const SystemConfig& cfg, const SlotModel& sm, const Eigen::MatrixXd& r,
                         const Eigen::MatrixXd& t_bar, const ScaSettings& settings = {}) {
    auto fp = detail::first_loop_skeleton(cfg, sm, r);
    for (int k = 0; k < cfg.K; ++k) {
        for (int n = 0; n < cfg.N; ++n) {
            const auto ku = static_cast<cn::Index>(k);
            const auto nu = static_cast<cn::Index>(n);
            fp.prog.add_nonnegative(fp.P(ku, nu) * (r(k, n) * sm.gain(k, n)) - fp.e(ku, nu) * t_bar(k, n), "sinr");
        }
    }
    auto res = solve_with(settings, fp.prog);
    if (!res.ok()) {
        const std::string first = std::string(cn::to_string(res.status)) + (res.message.empty() ? "" : ": " + res.message);
        const cn::HermitianVar shape("X", 0, static_cast<cn::Index>(cfg.M));
        const Eigen::MatrixXcd iso =
            Eigen::MatrixXcd::Identity(cfg.M, cfg.M) * (cfg.P_max / ((1.0 + cfg.kappa) * cfg.M));
        const Eigen::VectorXd theta = shape.params(iso);
        LinearizationState lin;
        lin.e_bar.resize(cfg.K, cfg.N);
        for (int k = 0; k < cfg.K; ++k) {
            for (int n = 0; n < cfg.N; ++n) {
                const auto ku = static_cast<std::size_t>(k);
                const auto nu = static_cast<std::size_t>(n);
                lin.e_bar(k, n) = sm.noise(k, n) + sm.interf[ku][nu].dot(theta);
            }
        }
        fp = build_first_loop(cfg, sm, r, lin, SurrogateMode::tangent);
        res = solve_with(settings, fp.prog);
        if (!res.ok()) {
            throw ScaError(std::string("initialization infeasible at given trajectory (") + first + "; " +
                           cn::to_string(res.status) + (res.message.empty() ? "" : ": " + res.message) + ")");
        }
    }
    InitResult out;
    out.e_bar = res.values(fp.e);
    out.powers.powers = res.values(fp.P).cwiseMax(0.0);
    out.beams = detail::extract_beams(fp, res);
    return out;
}

inline InitResult init_e(const SystemConfig& cfg, const ChannelSet& chans, const DeviceLayout& layout,
                         const Trajectory& traj, const Eigen::MatrixXd& t_bar, const ScaSettings& settings = {}) {
    return init_e(cfg, make_slot_model(cfg, chans), path_losses(cfg, layout, traj), t_bar, settings);
}

/// init_t for every device and slot.
inline Eigen::MatrixXd init_t_matrix(const SystemConfig& cfg) {
    Eigen::MatrixXd t(cfg.K, cfg.N);
    for (int k = 0; k < cfg.K; ++k) t.row(k).setConstant(init_t(cfg.R[static_cast<std::size_t>(k)], cfg.T, cfg.B));
    return t;
}

struct FirstLoopResult {
    PowerSchedule powers;
    BeamPlan beams;
    LinearizationState lin;
    InnerLoopReport report;
    /// WPT energy of the last accepted iterate [J].
    double objective = 0.0;
    bool has_iterate = false;
};

/// Repeats the first-loop subproblem, moving (t_bar, e_bar) to each solution,
/// until the objective settles.
inline FirstLoopResult run_first_loop(const SystemConfig& cfg, const SlotModel& sm, const Eigen::MatrixXd& r,
                                      LinearizationState lin, const ScaSettings& settings = {}) {
    FirstLoopResult out;
    out.lin = lin;
    for (int it = 0; it < settings.max_inner; ++it) {
        const auto fp = build_first_loop(cfg, sm, r, out.lin, settings.mode);
        const auto res = solve_with(settings, fp.prog);
        if (!res.ok()) {
            out.report.reason = LoopTermination::infeasible;
            out.report.message = std::string("first loop iteration ") + std::to_string(it + 1) + ": " +
                                 cn::to_string(res.status) + (res.message.empty() ? "" : " (" + res.message + ")");
            return out;
        }
        out.powers.powers = res.values(fp.P).cwiseMax(0.0);
        out.beams = detail::extract_beams(fp, res);
        out.lin.e_bar = res.values(fp.e);
        if (settings.mode == SurrogateMode::tangent) {
            // SINR lower bound implied by the solution.
            out.lin.t_bar = (out.powers.powers.array() * r.array() * sm.gain.array() / out.lin.e_bar.array()).matrix();
        } else {
            out.lin.t_bar = res.values(fp.t);
        }
        out.objective = res.objective;
        out.has_iterate = true;
        out.report.objectives.push_back(res.objective);
        out.report.iterations = it + 1;
        const auto& obj = out.report.objectives;
        if (obj.size() >= 2 && objective_converged(obj[obj.size() - 2], obj.back(), settings.eps_inner)) {
            out.report.reason = LoopTermination::converged;
            return out;
        }
    }
    out.report.reason = LoopTermination::max_iters;
    return out;
}

inline FirstLoopResult run_first_loop(const SystemConfig& cfg, const ChannelSet& chans, const DeviceLayout& layout,
                                      const Trajectory& traj, const LinearizationState& lin,
                                      const ScaSettings& settings = {}) {
    return run_first_loop(cfg, make_slot_model(cfg, chans), path_losses(cfg, layout, traj), lin, settings);
}

// ---------------------------------------------------------------------------
// Second loop: trajectory for fixed powers and beams
// ---------------------------------------------------------------------------

struct SecondLoopProgram {
    cn::ConicProgram prog;
    cn::VarBlock q;     // N x 2, hovering points 1..N
    cn::VarBlock r, f;  // K x N
    cn::VarBlock sigma; // N+1 leg epigraphs
};

/// Per-slot coefficients once P and X are fixed: SINR = c r, harvest = d r.
struct SecondLoopCoefficients {
    Eigen::MatrixXd c, d;
};

inline SecondLoopCoefficients second_loop_coefficients(const SystemConfig& cfg, const SlotModel& sm,
                                                       const PowerSchedule& P, const BeamPlan& X) {
    SecondLoopCoefficients co;
    co.c.resize(cfg.K, cfg.N);
    co.d.resize(cfg.K, cfg.N);
    const cn::HermitianVar shape("X", 0, static_cast<cn::Index>(cfg.M));
    for (int n = 0; n < cfg.N; ++n) {
        const auto nu = static_cast<std::size_t>(n);
        const Eigen::VectorXd x = shape.params(X.covariances[nu]);
        for (int k = 0; k < cfg.K; ++k) {
            const auto ku = static_cast<std::size_t>(k);
            const double denom = sm.noise(k, n) + sm.interf[ku][nu].dot(x);
            co.c(k, n) = P.powers(k, n) * sm.gain(k, n) / denom;
            co.d(k, n) = cfg.eta * sm.harvest[ku][nu].dot(x);
        }
    }
    return co;
}

inline SecondLoopProgram build_second_loop(const SystemConfig& cfg, const DeviceLayout& layout,
                                           const SecondLoopCoefficients& co, const PowerSchedule& P,
                                           const LinearizationState& lin, const Trajectory& around,
                                           SurrogateMode mode = SurrogateMode::tangent) {
    SecondLoopProgram sp;
    auto& prog = sp.prog;
    const auto K = static_cast<cn::Index>(cfg.K);
    const auto N = static_cast<cn::Index>(cfg.N);
    sp.q = prog.add_variables("q", N, 2);
    sp.r = prog.add_variables("r", K, N);
    sp.f = prog.add_variables("f", K, N);
    sp.sigma = prog.add_variables("leg", N + 1);

    auto point = [&](cn::Index n) -> std::array<cn::AffineExpr, 2> {
        // n indexes q[0..N+1]; the endpoints are constants.
        if (n == 0) return {cn::AffineExpr(cfg.q_ui.x()), cn::AffineExpr(cfg.q_ui.y())};
        if (n == N + 1) return {cn::AffineExpr(cfg.q_uf.x()), cn::AffineExpr(cfg.q_uf.y())};
        return {sp.q(n - 1, 0), sp.q(n - 1, 1)};
    };

    cn::AffineExpr objective;
    const double w = cfg.tau / (cfg.t_move * cfg.t_move);
    for (cn::Index n = 0; n <= N; ++n) {
        const auto a = point(n);
        const auto b = point(n + 1);
        std::vector<cn::AffineExpr> diff{b[0] - a[0], b[1] - a[1]};
        const double len = around.leg_length(n);
        prog.add_squared_norm_le(diff, sp.sigma(n), std::max(len, 1e-3), "leg");
        prog.add_second_order({cn::AffineExpr(cfg.V_max * cfg.t_move), diff[0], diff[1]}, "speed");
        objective += sp.sigma(n) * w;
    }
    prog.minimize(objective);

    for (cn::Index k = 0; k < K; ++k) {
        const Point& qk = layout[k];
        std::vector<cn::AffineExpr> sinr_terms;
        cn::AffineExpr prefix;
        for (cn::Index n = 0; n < N; ++n) {
            const auto ki = static_cast<Eigen::Index>(k);
            const auto ni = static_cast<Eigen::Index>(n);
            const auto p = point(n + 1);
            prog.add_squared_norm_le({p[0] - qk.x(), p[1] - qk.y()}, sp.f(k, n) - cn::AffineExpr(cfg.L * cfg.L),
                                     std::max(std::sqrt(std::max(lin.f_bar(ki, ni) - cfg.L * cfg.L, 0.0)), 1e-3),
                                     "distance");
            prog.add_nonnegative(sp.r(k, n), "path_loss_nonneg");
            if (mode == SurrogateMode::tangent) {
                // r <= 1/f, with the convex 1/f replaced by its tangent at f_bar.
                const double fb = lin.f_bar(ki, ni);
                prog.add_nonnegative(cn::AffineExpr(2.0 / fb) - sp.f(k, n) * (1.0 / (fb * fb)) - sp.r(k, n),
                                     "path_loss");
            } else {
                // r f <= 1
                add_bilinear_le(prog, mode, lin.r_bar(ki, ni), lin.f_bar(ki, ni), sp.r(k, n), sp.f(k, n),
                                cn::AffineExpr(1.0), "path_loss");
            }
            sinr_terms.push_back(sp.r(k, n) * co.c(ki, ni));
            prefix += sp.r(k, n) * co.d(ki, ni) - cn::AffineExpr(P.powers(ki, ni));
            prog.add_nonnegative(prefix, "energy_causality");
        }
        cn::add_log_rate_constraint(prog, sinr_terms, cfg.slot_time() * cfg.B, cfg.R[k], "rate" + std::to_string(k + 1));
    }
    return sp;
}

inline SecondLoopProgram build_second_loop(const SystemConfig& cfg, const ChannelSet& chans, const DeviceLayout& layout,
                                           const PowerSchedule& P, const BeamPlan& X, const LinearizationState& lin,
                                           const Trajectory& around, SurrogateMode mode = SurrogateMode::tangent) {
    const auto sm = make_slot_model(cfg, chans);
    return build_second_loop(cfg, layout, second_loop_coefficients(cfg, sm, P, X), P, lin, around, mode);
}

struct SecondLoopResult {
    Trajectory trajectory;
    LinearizationState lin;
    InnerLoopReport report;
    /// Propulsion energy of the last accepted iterate [J].
    double objective = 0.0;
    bool has_iterate = false;
};

inline SecondLoopResult run_second_loop(const SystemConfig& cfg, const SlotModel& sm, const DeviceLayout& layout,
                                        const PowerSchedule& P, const BeamPlan& X, LinearizationState lin,
                                        const Trajectory& start, const ScaSettings& settings = {}) {
    SecondLoopResult out;
    out.lin = std::move(lin);
    out.trajectory = start;
    const auto co = second_loop_coefficients(cfg, sm, P, X);
    for (int it = 0; it < settings.max_inner; ++it) {
        const auto sp = build_second_loop(cfg, layout, co, P, out.lin, out.trajectory, settings.mode);
        const auto res = solve_with(settings, sp.prog);
        if (!res.ok()) {
            out.report.reason = LoopTermination::infeasible;
            out.report.message = std::string("second loop iteration ") + std::to_string(it + 1) + ": " +
                                 cn::to_string(res.status) + (res.message.empty() ? "" : " (" + res.message + ")");
            return out;
        }
        Trajectory tr;
        tr.points.push_back(cfg.q_ui);
        for (int n = 0; n < cfg.N; ++n) {
            tr.points.emplace_back(res.value(sp.q, static_cast<cn::Index>(n), 0), res.value(sp.q, static_cast<cn::Index>(n), 1));
        }
        tr.points.push_back(cfg.q_uf);
        out.trajectory = std::move(tr);
        out.lin.r_bar = res.values(sp.r);
        out.lin.f_bar = res.values(sp.f);
        double prop = 0.0;
        for (std::size_t n = 0; n + 1 < out.trajectory.points.size(); ++n) {
            prop += propulsion_energy(out.trajectory.points[n], out.trajectory.points[n + 1], cfg.t_move, cfg.tau);
        }
        out.objective = prop;
        out.has_iterate = true;
        out.report.objectives.push_back(prop);
        out.report.iterations = it + 1;
        const auto& obj = out.report.objectives;
        if (obj.size() >= 2 && objective_converged(obj[obj.size() - 2], obj.back(), settings.eps_inner)) {
            out.report.reason = LoopTermination::converged;
            return out;
        }
    }
    out.report.reason = LoopTermination::max_iters;
    return out;
}

inline SecondLoopResult run_second_loop(const SystemConfig& cfg, const ChannelSet& chans, const DeviceLayout& layout,
                                        const PowerSchedule& P, const BeamPlan& X, const LinearizationState& lin,
                                        const Trajectory& start, const ScaSettings& settings = {}) {
    return run_second_loop(cfg, make_slot_model(cfg, chans), layout, P, X, lin, start, settings);
}

} // namespace uavfd
