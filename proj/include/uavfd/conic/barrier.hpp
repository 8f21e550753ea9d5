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

// Primal log-barrier interior-point method for programs over products of
// the zero, nonnegative, second-order, exponential and PSD cones.
//
// Every cone carries a standard self-concordant barrier:
//   nonnegative   -log s                                    nu = 1
//   second-order  -log(t^2 - ||u||^2)                       nu = 2
//   exponential   -log(y log(z/y) - x) - log y - log z      nu = 3
//   psd (order d) -log det S                                nu = d
// A phase-I problem (minimize a common shift s of all cones) finds a
// strictly feasible start; phase II follows the central path
//   minimize t c'x + Phi(x)   s.t. Ax = b
// with damped Newton centering until nu / t meets the gap target. A ball
// ||x|| <= R keeps every centering problem bounded; hitting it signals an
// unbounded program.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "uavfd/conic/program.hpp"
#include "uavfd/conic/solver.hpp"

namespace uavfd::conic {

namespace detail {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using EIndex = Eigen::Index;

struct CompiledCone {
    Cone kind = Cone::nonnegative;
    std::vector<EIndex> vars;
    // Slack s = G x[vars] + h for the vector cones.
    MatrixXd G;
    VectorXd h;
    // Slack S = S0 + sum_k x[vars[k]] Sk[k] for psd.
    EIndex order = 0;
    MatrixXd S0;
    std::vector<MatrixXd> Sk;
    double nu = 0.0;
};

struct Compiled {
    EIndex n = 0; // includes the phase-I shift when present
    VectorXd c;
    double c0 = 0.0;
    MatrixXd A;
    VectorXd b;
    std::vector<CompiledCone> cones;
    double nu = 0.0;
    std::string trivially_infeasible; // non-empty if a constant row is violated
};

inline bool exp_interior(double x, double y, double z) {
    if (!(y > 0.0) || !(z > 0.0)) return false;
    const double psi = y * std::log(z / y) - x;
    return psi > 0.0 && std::isfinite(psi);
}

/// Constant-only cone rows are checked once and dropped.
inline bool constant_member(const ConeConstraint& c) {
    std::vector<double> v;
    for (const auto& r : c.rows) v.push_back(r.constant());
    switch (c.cone) {
    case Cone::zero: return std::all_of(v.begin(), v.end(), [](double a) { return a == 0.0; });
    case Cone::nonnegative: return std::all_of(v.begin(), v.end(), [](double a) { return a >= 0.0; });
    case Cone::second_order: {
        double s = 0.0;
        for (std::size_t i = 1; i < v.size(); ++i) s += v[i] * v[i];
        return v[0] >= std::sqrt(s);
    }
    case Cone::exponential:
        return (v[1] > 0.0 && v[1] * std::exp(v[0] / v[1]) <= v[2]) || (v[1] == 0.0 && v[0] <= 0.0 && v[2] >= 0.0);
    case Cone::psd: {
        const auto d = static_cast<EIndex>(c.order);
        MatrixXd S(d, d);
        for (EIndex i = 0; i < d; ++i)
            for (EIndex j = i; j < d; ++j)
                S(i, j) = S(j, i) = v[packed_index(c.order, static_cast<Index>(i), static_cast<Index>(j))];
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(S, Eigen::EigenvaluesOnly);
        return es.eigenvalues().minCoeff() >= -1e-14 * std::max(1.0, S.cwiseAbs().maxCoeff());
    }
    }
    return false;
}

/// Lowers the program. With `shift` set, every cone slack gets an extra
/// `s * e` term (e interior to the cone) on variable index n.
inline Compiled compile(const ConicProgram& prog, bool shift) {
    Compiled out;
    const auto n = static_cast<EIndex>(prog.num_variables());
    out.n = n + (shift ? 1 : 0);
    out.c = VectorXd::Zero(out.n);
    const auto obj = prog.objective();
    out.c0 = obj.constant();
    for (const auto& t : obj.terms()) out.c[static_cast<EIndex>(t.var)] += t.coef;

    std::vector<const AffineExpr*> eq_rows;
    auto add_vector_cone = [&](Cone kind, const std::vector<const AffineExpr*>& rows, double nu) {
        CompiledCone cc;
        cc.kind = kind;
        for (const auto* r : rows)
            for (const auto& t : r->terms()) cc.vars.push_back(static_cast<EIndex>(t.var));
        std::sort(cc.vars.begin(), cc.vars.end());
        cc.vars.erase(std::unique(cc.vars.begin(), cc.vars.end()), cc.vars.end());
        const auto dim = static_cast<EIndex>(rows.size());
        const auto nv = static_cast<EIndex>(cc.vars.size()) + (shift ? 1 : 0);
        cc.G = MatrixXd::Zero(dim, nv);
        cc.h = VectorXd::Zero(dim);
        for (EIndex i = 0; i < dim; ++i) {
            cc.h[i] = rows[static_cast<std::size_t>(i)]->constant();
            for (const auto& t : rows[static_cast<std::size_t>(i)]->terms()) {
                const auto pos = std::lower_bound(cc.vars.begin(), cc.vars.end(), static_cast<EIndex>(t.var)) -
                                 cc.vars.begin();
                cc.G(i, pos) += t.coef;
            }
        }
        if (shift) {
            cc.vars.push_back(n);
            switch (kind) {
            case Cone::nonnegative: cc.G(0, nv - 1) = 1.0; break;
            case Cone::second_order: cc.G(0, nv - 1) = 1.0; break;
            case Cone::exponential:
                cc.G(0, nv - 1) = -1.0;
                cc.G(1, nv - 1) = 1.0;
                cc.G(2, nv - 1) = 1.0;
                break;
            default: break;
            }
        }
        cc.nu = nu;
        out.nu += nu;
        out.cones.push_back(std::move(cc));
    };

    for (const auto& c : prog.constraints()) {
        const bool all_constant =
            std::all_of(c.rows.begin(), c.rows.end(), [](const AffineExpr& r) { return r.is_constant(); });
        if (all_constant && c.cone != Cone::zero && c.cone != Cone::nonnegative) {
            if (!constant_member(c)) out.trivially_infeasible = "constant constraint '" + c.label + "' violated";
            continue;
        }
        switch (c.cone) {
        case Cone::zero:
            for (const auto& r : c.rows) {
                if (r.is_constant()) {
                    if (r.constant() != 0.0) out.trivially_infeasible = "constant equality '" + c.label + "' violated";
                } else {
                    eq_rows.push_back(&r);
                }
            }
            break;
        case Cone::nonnegative:
            for (const auto& r : c.rows) {
                if (r.is_constant()) {
                    if (r.constant() < 0.0) out.trivially_infeasible = "constant row '" + c.label + "' violated";
                } else {
                    add_vector_cone(Cone::nonnegative, {&r}, 1.0);
                }
            }
            break;
        case Cone::second_order: {
            std::vector<const AffineExpr*> rows;
            for (const auto& r : c.rows) rows.push_back(&r);
            add_vector_cone(Cone::second_order, rows, 2.0);
            break;
        }
        case Cone::exponential: {
            std::vector<const AffineExpr*> rows;
            for (const auto& r : c.rows) rows.push_back(&r);
            add_vector_cone(Cone::exponential, rows, 3.0);
            break;
        }
        case Cone::psd: {
            CompiledCone cc;
            cc.kind = Cone::psd;
            cc.order = static_cast<EIndex>(c.order);
            for (const auto& r : c.rows)
                for (const auto& t : r.terms()) cc.vars.push_back(static_cast<EIndex>(t.var));
            std::sort(cc.vars.begin(), cc.vars.end());
            cc.vars.erase(std::unique(cc.vars.begin(), cc.vars.end()), cc.vars.end());
            cc.S0 = MatrixXd::Zero(cc.order, cc.order);
            cc.Sk.assign(cc.vars.size() + (shift ? 1 : 0), MatrixXd::Zero(cc.order, cc.order));
            for (Index i = 0; i < c.order; ++i) {
                for (Index j = i; j < c.order; ++j) {
                    const auto& r = c.rows[packed_index(c.order, i, j)];
                    const auto ii = static_cast<EIndex>(i);
                    const auto jj = static_cast<EIndex>(j);
                    cc.S0(ii, jj) = cc.S0(jj, ii) = r.constant();
                    for (const auto& t : r.terms()) {
                        const auto pos = static_cast<std::size_t>(
                            std::lower_bound(cc.vars.begin(), cc.vars.end(), static_cast<EIndex>(t.var)) -
                            cc.vars.begin());
                        cc.Sk[pos](ii, jj) += t.coef;
                        if (ii != jj) cc.Sk[pos](jj, ii) += t.coef;
                    }
                }
            }
            if (shift) {
                cc.vars.push_back(n);
                cc.Sk.back() = MatrixXd::Identity(cc.order, cc.order);
            }
            cc.nu = static_cast<double>(c.order);
            out.nu += cc.nu;
            out.cones.push_back(std::move(cc));
            break;
        }
        }
    }

    out.A = MatrixXd::Zero(static_cast<EIndex>(eq_rows.size()), out.n);
    out.b = VectorXd::Zero(static_cast<EIndex>(eq_rows.size()));
    for (std::size_t i = 0; i < eq_rows.size(); ++i) {
        out.b[static_cast<EIndex>(i)] = -eq_rows[i]->constant();
        for (const auto& t : eq_rows[i]->terms()) out.A(static_cast<EIndex>(i), static_cast<EIndex>(t.var)) += t.coef;
    }
    return out;
}

inline VectorXd gather(const VectorXd& x, const std::vector<EIndex>& vars) {
    VectorXd v(static_cast<EIndex>(vars.size()));
    for (std::size_t i = 0; i < vars.size(); ++i) v[static_cast<EIndex>(i)] = x[vars[i]];
    return v;
}

/// Barrier value of one cone at x; nullopt outside the open cone. When
/// grad/hess are given they receive derivatives in the cone's local
/// variable ordering.
inline std::optional<double> cone_barrier(const CompiledCone& cc, const VectorXd& x, VectorXd* grad,
                                          MatrixXd* hess) {
    const VectorXd xl = gather(x, cc.vars);
    if (cc.kind == Cone::psd) {
        MatrixXd S = cc.S0;
        for (std::size_t k = 0; k < cc.Sk.size(); ++k) S.noalias() += xl[static_cast<EIndex>(k)] * cc.Sk[k];
        Eigen::LLT<MatrixXd> llt(S);
        if (llt.info() != Eigen::Success) return std::nullopt;
        const MatrixXd L = llt.matrixL();
        double value = 0.0;
        for (EIndex i = 0; i < cc.order; ++i) {
            if (!(L(i, i) > 0.0)) return std::nullopt;
            value -= 2.0 * std::log(L(i, i));
        }
        if (!std::isfinite(value)) return std::nullopt;
        if (grad != nullptr || hess != nullptr) {
            const auto nv = static_cast<EIndex>(cc.Sk.size());
            const auto d2 = cc.order * cc.order;
            MatrixXd V(d2, nv);
            VectorXd g(nv);
            const auto Lv = L.triangularView<Eigen::Lower>();
            for (EIndex k = 0; k < nv; ++k) {
                MatrixXd T = Lv.solve(cc.Sk[static_cast<std::size_t>(k)]);
                MatrixXd W = Lv.solve(T.transpose());
                g[k] = -W.trace();
                V.col(k) = Eigen::Map<const VectorXd>(W.data(), d2);
            }
            if (grad != nullptr) *grad = g;
            if (hess != nullptr) *hess = V.transpose() * V;
        }
        return value;
    }

    const VectorXd s = cc.G * xl + cc.h;
    const auto dim = s.size();
    VectorXd gs;
    MatrixXd Hs;
    double value = 0.0;
    switch (cc.kind) {
    case Cone::nonnegative: {
        if (!(s[0] > 0.0)) return std::nullopt;
        value = -std::log(s[0]);
        gs = VectorXd::Constant(1, -1.0 / s[0]);
        Hs = MatrixXd::Constant(1, 1, 1.0 / (s[0] * s[0]));
        break;
    }
    case Cone::second_order: {
        const double tt = s[0];
        const double uu = s.tail(dim - 1).squaredNorm();
        const double d = tt * tt - uu;
        if (!(tt > 0.0) || !(d > 0.0)) return std::nullopt;
        value = -std::log(d);
        gs.resize(dim);
        gs[0] = -2.0 * tt / d;
        gs.tail(dim - 1) = 2.0 * s.tail(dim - 1) / d;
        Hs = gs * gs.transpose();
        Hs(0, 0) -= 2.0 / d;
        for (EIndex i = 1; i < dim; ++i) Hs(i, i) += 2.0 / d;
        break;
    }
    case Cone::exponential: {
        const double ex = s[0], ey = s[1], ez = s[2];
        if (!exp_interior(ex, ey, ez)) return std::nullopt;
        const double lzy = std::log(ez / ey);
        const double psi = ey * lzy - ex;
        value = -std::log(psi) - std::log(ey) - std::log(ez);
        Eigen::Vector3d dpsi(-1.0, lzy - 1.0, ey / ez);
        Eigen::Matrix3d d2psi = Eigen::Matrix3d::Zero();
        d2psi(1, 1) = -1.0 / ey;
        d2psi(1, 2) = d2psi(2, 1) = 1.0 / ez;
        d2psi(2, 2) = -ey / (ez * ez);
        gs = -dpsi / psi;
        gs[1] -= 1.0 / ey;
        gs[2] -= 1.0 / ez;
        Hs = -d2psi / psi + dpsi * dpsi.transpose() / (psi * psi);
        Hs(1, 1) += 1.0 / (ey * ey);
        Hs(2, 2) += 1.0 / (ez * ez);
        break;
    }
    default: return std::nullopt;
    }
    if (!std::isfinite(value)) return std::nullopt;
    if (grad != nullptr) *grad = cc.G.transpose() * gs;
    if (hess != nullptr) *hess = cc.G.transpose() * Hs * cc.G;
    return value;
}

/// Smallest shift s (approximately) making slack + s e interior, for x fixed.
inline double required_shift(const CompiledCone& cc, const VectorXd& x) {
    const VectorXd xl = gather(x, cc.vars);
    // The shift coefficient is the last local variable; evaluate at shift 0.
    VectorXd base = xl;
    base[base.size() - 1] = 0.0;
    if (cc.kind == Cone::psd) {
        MatrixXd S = cc.S0;
        for (std::size_t k = 0; k + 1 < cc.Sk.size(); ++k) S += base[static_cast<EIndex>(k)] * cc.Sk[k];
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(S, Eigen::EigenvaluesOnly);
        return -es.eigenvalues().minCoeff();
    }
    const VectorXd s = cc.G * base + cc.h;
    switch (cc.kind) {
    case Cone::nonnegative: return -s[0];
    case Cone::second_order: return s.tail(s.size() - 1).norm() - s[0];
    case Cone::exponential: {
        double shift = std::max({0.0, -s[1], -s[2]}) + 1.0;
        for (int i = 0; i < 200 && !exp_interior(s[0] - shift, s[1] + shift, s[2] + shift); ++i) shift *= 2.0;
        return shift;
    }
    default: return 0.0;
    }
}

class Newton {
public:
    Newton(const Compiled& prog, double radius) : p_(prog), radius_(radius) {
        if (p_.A.rows() > 0) {
            // Orthonormal basis of null(A) from a full QR of A'.
            Eigen::ColPivHouseholderQR<MatrixXd> qr(p_.A.transpose());
            const EIndex rank = qr.rank();
            const MatrixXd Q = qr.householderQ();
            Z_ = Q.rightCols(p_.n - rank);
        }
    }

    /// f(x) = t c'x + Phi(x) + ball barrier; nullopt outside the domain.
    std::optional<double> value(const VectorXd& x, double t) const {
        double f = t * p_.c.dot(x);
        const double d = radius_ * radius_ - x.head(ball_dim()).squaredNorm();
        if (!(d > 0.0)) return std::nullopt;
        f -= std::log(d);
        for (const auto& cc : p_.cones) {
            auto v = cone_barrier(cc, x, nullptr, nullptr);
            if (!v) return std::nullopt;
            f += *v;
        }
        return f;
    }

    /// Barrier gradient and Hessian (without the t c term).
    bool derivatives(const VectorXd& x, VectorXd& g, MatrixXd& H) const {
        const EIndex n = p_.n;
        g = VectorXd::Zero(n);
        H = MatrixXd::Zero(n, n);
        const EIndex m = ball_dim();
        const double d = radius_ * radius_ - x.head(m).squaredNorm();
        if (!(d > 0.0)) return false;
        g.head(m) += 2.0 * x.head(m) / d;
        H.topLeftCorner(m, m) += (4.0 / (d * d)) * x.head(m) * x.head(m).transpose();
        H.topLeftCorner(m, m).diagonal().array() += 2.0 / d;
        VectorXd gl;
        MatrixXd Hl;
        // Only the lower triangle is accumulated (cone variables are sorted),
        // then mirrored once.
        for (const auto& cc : p_.cones) {
            const auto nv = static_cast<EIndex>(cc.vars.size());
            if (cc.kind == Cone::nonnegative) {
                double sl = cc.h[0];
                for (EIndex a = 0; a < nv; ++a) sl += cc.G(0, a) * x[cc.vars[static_cast<std::size_t>(a)]];
                if (!(sl > 0.0)) return false;
                const double inv = 1.0 / sl;
                for (EIndex b = 0; b < nv; ++b) {
                    const EIndex gb = cc.vars[static_cast<std::size_t>(b)];
                    const double wb = cc.G(0, b) * inv * inv;
                    g[gb] -= cc.G(0, b) * inv;
                    for (EIndex a = b; a < nv; ++a) H(cc.vars[static_cast<std::size_t>(a)], gb) += cc.G(0, a) * wb;
                }
                continue;
            }
            if (!cone_barrier(cc, x, &gl, &Hl)) return false;
            for (EIndex b = 0; b < nv; ++b) {
                const EIndex gb = cc.vars[static_cast<std::size_t>(b)];
                g[gb] += gl[b];
                for (EIndex a = b; a < nv; ++a) H(cc.vars[static_cast<std::size_t>(a)], gb) += Hl(a, b);
            }
        }
        H.triangularView<Eigen::StrictlyUpper>() = H.transpose();
        return true;
    }

    /// Newton direction for t c'x + Phi(x) subject to A dx = 0, computed in
    /// a basis of the null space so the equalities hold to rounding.
    std::optional<VectorXd> direction(const VectorXd& grad, const MatrixXd& H) const {
        const bool reduced = p_.A.rows() > 0;
        if (reduced && Z_.cols() == 0) return VectorXd::Zero(p_.n);
        const MatrixXd Hz = reduced ? MatrixXd(Z_.transpose() * H * Z_) : H;
        const VectorXd gz = reduced ? VectorXd(Z_.transpose() * grad) : grad;
        double reg = 0.0;
        const double scale = std::max(1.0, Hz.diagonal().cwiseAbs().maxCoeff());
        for (int attempt = 0; attempt < 8; ++attempt) {
            MatrixXd Hr = Hz;
            if (reg > 0.0) Hr.diagonal().array() += reg;
            Eigen::LLT<MatrixXd> llt(Hr);
            if (llt.info() == Eigen::Success) {
                const VectorXd w = llt.solve(-gz);
                if (w.allFinite()) return reduced ? VectorXd(Z_ * w) : w;
            }
            reg = (reg == 0.0) ? 1e-14 * scale : reg * 100.0;
        }
        return std::nullopt;
    }

    [[nodiscard]] EIndex ball_dim() const { return ball_dim_ < 0 ? p_.n : ball_dim_; }
    void set_ball_dim(EIndex m) { ball_dim_ = m; }

private:
    const Compiled& p_;
    double radius_;
    MatrixXd Z_;
    EIndex ball_dim_ = -1;
};

enum class CenterOutcome { centered, stopped_early, failed, iteration_cap };

/// Damped-Newton centering at parameter t. `stop` is polled after every
/// accepted step.
template <class Stop>
CenterOutcome center(const Newton& newton, const Compiled& p, VectorXd& x, double t, int& iterations, int cap,
                     Stop&& stop, double lambda_tol = 1e-7) {
    VectorXd g;
    MatrixXd H;
    double previous_lambda = std::numeric_limits<double>::infinity();
    double best_lambda = previous_lambda;
    int since_best = 0;
    for (;;) {
        if (iterations >= cap) return CenterOutcome::iteration_cap;
        if (!newton.derivatives(x, g, H)) return CenterOutcome::failed;
        const VectorXd grad = t * p.c + g;
        auto dx = newton.direction(grad, H);
        if (!dx) return CenterOutcome::failed;
        const double lambda2 = std::max(0.0, -grad.dot(*dx));
        const double lambda = std::sqrt(lambda2);
        // Inside the quadratic region lambda squares each step; when it stops
        // shrinking the iterate sits at the rounding floor.
        if (lambda < lambda_tol || (lambda < 1e-2 && lambda > 0.25 * previous_lambda)) return CenterOutcome::centered;
        // Near the center but no longer improving: rounding in the Newton
        // system has taken over.
        if (lambda < 0.5 * best_lambda) {
            best_lambda = lambda;
            since_best = 0;
        } else if (++since_best >= 10 && best_lambda < 0.25) {
            return CenterOutcome::centered;
        }
        previous_lambda = lambda;
        const auto f0 = newton.value(x, t);
        if (!f0) return CenterOutcome::failed;
        const double damped = 1.0 / (1.0 + lambda);
        double alpha = 1.0;
        bool accepted = false;
        for (int k = 0; k < 60; ++k) {
            const VectorXd trial = x + alpha * *dx;
            const auto f1 = newton.value(trial, t);
            const bool quadratic_region = lambda < 0.2;
            if (f1 && (quadratic_region || *f1 <= *f0 - 0.01 * alpha * lambda2 || alpha <= damped)) {
                x = trial;
                accepted = true;
                ++iterations;
                break;
            }
            alpha = (alpha > damped && alpha * 0.5 < damped) ? damped : alpha * 0.5;
        }
        if (!accepted) return lambda < 1e-4 ? CenterOutcome::centered : CenterOutcome::failed;
        if (stop(x)) return CenterOutcome::stopped_early;
    }
}

/// Starting t balancing the objective against the barrier gradient.
inline double initial_t(const Newton& newton, const Compiled& p, const VectorXd& x) {
    VectorXd g;
    MatrixXd H;
    if (!newton.derivatives(x, g, H)) return 1.0;
    Eigen::LLT<MatrixXd> llt(H + 1e-12 * MatrixXd::Identity(H.rows(), H.cols()));
    const VectorXd hc = llt.solve(p.c);
    const double chc = p.c.dot(hc);
    if (!(chc > 0.0)) return 1.0;
    const double t = -g.dot(hc) / chc;
    if (!std::isfinite(t) || t <= 0.0) return p.nu / std::max(1.0, std::abs(p.c.dot(x)));
    return std::clamp(t, 1e-10, 1e10);
}

/// Tangent of the central path at a centered x: moves x to approximately
/// x(t_next). Keeps x when the extrapolation leaves the domain or does not
/// lower the barrier objective at t_next.
inline void predict(const Newton& newton, const Compiled& p, VectorXd& x, double t, double t_next) {
    VectorXd g;
    MatrixXd H;
    if (!newton.derivatives(x, g, H)) return;
    auto d = newton.direction(p.c, H); // -H^{-1} c, projected onto A dx = 0
    if (!d) return;
    const auto f0 = newton.value(x, t_next);
    if (!f0) return;
    double step = t_next - t;
    for (int k = 0; k < 30; ++k, step *= 0.5) {
        const VectorXd trial = x + step * *d;
        const auto f1 = newton.value(trial, t_next);
        if (f1 && *f1 < *f0) {
            x = trial;
            return;
        }
    }
}

} // namespace detail

/// Default backend: primal barrier interior-point method.
class BarrierBackend final : public Backend {
public:
    struct Options {
        double barrier_growth = 20.0;
        /// Newton decrement accepted as centered before the final stage.
        double path_tolerance = 0.25;
        /// Radius of the bounding ball, relative to max(1, ||x0||).
        double ball_radius = 1e6;
        /// Radius of the first phase I ball, relative to the start's reach.
        double phase1_radius = 1e2;
    };

    BarrierBackend() = default;
    explicit BarrierBackend(Options opts) : opts_(opts) {}

    [[nodiscard]] std::string_view name() const override { return "barrier"; }

    [[nodiscard]] SolverResult solve(const ConicProgram& prog, const SolverSettings& settings) const override {
        using namespace detail;
        prog.validate();
        SolverResult res;
        const auto n = static_cast<EIndex>(prog.num_variables());

        // Equality-feasible start.
        Compiled phase2 = compile(prog, false);
        if (!phase2.trivially_infeasible.empty()) {
            res.status = SolverStatus::infeasible;
            res.message = phase2.trivially_infeasible;
            res.x = VectorXd::Zero(n);
            return res;
        }
        VectorXd x = VectorXd::Zero(n);
        if (phase2.A.rows() > 0) {
            x = phase2.A.completeOrthogonalDecomposition().solve(phase2.b);
            if ((phase2.A * x - phase2.b).norm() > 1e-9 * (1.0 + phase2.b.norm())) {
                res.status = SolverStatus::infeasible;
                res.message = "inconsistent equality constraints";
                res.x = x;
                return res;
            }
        }
        const double radius = opts_.ball_radius * std::max(1.0, x.norm());

        // Phase I: minimize the common shift s until it turns negative. A
        // small bounding ball is tried first so loosely constrained variables
        // do not drift far out before phase II; the full ball is the fallback.
        double needed = -std::numeric_limits<double>::infinity();
        {
            Compiled probe = compile(prog, true);
            VectorXd xs(n + 1);
            xs << x, 0.0;
            for (const auto& cc : probe.cones) needed = std::max(needed, required_shift(cc, xs));
        }
        if (needed >= 0.0) {
            const double scale = std::max(1.0, x.norm());
            const double reach = scale + std::abs(needed);
            std::optional<SolverResult> failure;
            int phase1_iters = 0;
            const double first = std::min(opts_.phase1_radius * reach, radius);
            failure = phase_one(prog, settings, x, needed, first, phase1_iters);
            if (failure && failure->status == SolverStatus::infeasible && first < radius) {
                failure = phase_one(prog, settings, x, needed, radius, phase1_iters);
            }
            res.phase1_iterations = phase1_iters;
            if (failure) {
                failure->phase1_iterations = phase1_iters;
                return *failure;
            }
        }

        // Phase II.
        Newton newton(phase2, radius);
        if (phase2.c.squaredNorm() == 0.0) {
            res.status = SolverStatus::optimal;
            res.x = x;
            res.objective = phase2.c0;
            res.gap = 0.0;
            return res;
        }
        double t = initial_t(newton, phase2, x);
        int iters = 0;
        auto scale = [&] { return std::max(1.0, std::abs(phase2.c.dot(x) + phase2.c0)); };
        auto gap_met = [&](double tt) { return phase2.nu / tt <= settings.tol * scale(); };
        // Last centered iterate, kept in case Newton stalls further along
        // the path.
        VectorXd x_centered;
        double t_centered = 0.0;
        auto stalled = [&](const std::string& why) {
            if (x_centered.size() > 0 &&
                phase2.nu / t_centered <=
                    settings.acceptable_tol * std::max(1.0, std::abs(phase2.c.dot(x_centered) + phase2.c0))) {
                res.status = SolverStatus::inaccurate;
                res.x = x_centered;
                res.objective = phase2.c.dot(x_centered) + phase2.c0;
                res.gap = phase2.nu / t_centered;
            } else {
                res.status = SolverStatus::numerical_failure;
            }
            res.message = why;
            return res;
        };
        bool final_stage = false;
        for (;;) {
            // Loose centering along the path, one tight centering at the end.
            final_stage = final_stage || gap_met(t);
            auto outcome = center(newton, phase2, x, t, iters, settings.max_iterations,
                                  [](const VectorXd&) { return false; },
                                  final_stage ? 1e-7 : opts_.path_tolerance);
            res.x = x;
            res.iterations = iters;
            res.objective = phase2.c.dot(x) + phase2.c0;
            res.gap = phase2.nu / t;
            if (outcome == CenterOutcome::failed) return stalled("Newton failure at t=" + std::to_string(t));
            if (outcome == CenterOutcome::iteration_cap) {
                return stalled("iteration limit with gap " + std::to_string(res.gap));
            }
            x_centered = x;
            t_centered = t;
            if (final_stage) {
                if (x.norm() >= 0.5 * radius) {
                    res.status = SolverStatus::unbounded;
                    res.message = "iterate reached the bounding ball";
                } else {
                    res.status = SolverStatus::optimal;
                }
                return res;
            }
            if (gap_met(t)) {
                final_stage = true;
                continue;
            }
            const double t_next = t * opts_.barrier_growth;
            predict(newton, phase2, x, t, t_next);
            t = t_next;
        }
    }

private:
    /// Moves `x` to a strictly feasible point inside a ball of `radius`.
    /// Returns the failure result when none is found.
    std::optional<SolverResult> phase_one(const ConicProgram& prog, const SolverSettings& settings, detail::VectorXd& x,
                                          double needed, double radius, int& iters) const {
        using namespace detail;
        const auto n = x.size();
        SolverResult res;
        Compiled phase1 = compile(prog, true);
        phase1.c = VectorXd::Zero(n + 1);
        phase1.c[n] = 1.0;
        phase1.c0 = 0.0;
        Newton newton(phase1, radius);
        newton.set_ball_dim(n);
        VectorXd xs(n + 1);
        xs << x, needed + 1.0 + 0.1 * std::abs(needed);
        if (!newton.value(xs, 1.0)) {
            res.status = SolverStatus::infeasible;
            res.message = "start outside the phase I ball";
            res.x = x;
            return res;
        }
        double t = initial_t(newton, phase1, xs);
        for (;;) {
            auto outcome = center(newton, phase1, xs, t, iters, settings.max_phase1_iterations,
                                  [&](const VectorXd& v) { return v[n] < 0.0; });
            if (outcome == CenterOutcome::stopped_early || xs[n] < 0.0) break;
            if (outcome == CenterOutcome::failed || outcome == CenterOutcome::iteration_cap) {
                res.phase1_iterations = iters;
                res.status = SolverStatus::numerical_failure;
                res.message = outcome == CenterOutcome::failed ? "phase I Newton failure" : "phase I iteration limit";
                res.x = xs.head(n);
                return res;
            }
            const double bound = phase1.nu / t;
            if (xs[n] - bound > 0.0 || bound < 1e-13 * std::max(1.0, std::abs(xs[n]))) {
                res.phase1_iterations = iters;
                res.status = SolverStatus::infeasible;
                res.message = "no strictly feasible point (minimal cone shift " + std::to_string(xs[n]) + ")";
                res.x = xs.head(n);
                return res;
            }
            t *= opts_.barrier_growth;
        }
        x = xs.head(n);
        return std::nullopt;
    }

    Options opts_{};
};

/// Solves with the default backend.
inline SolverResult solve(const ConicProgram& prog, const SolverSettings& settings = {}) {
    return BarrierBackend{}.solve(prog, settings);
}

} // namespace uavfd::conic
