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
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "uavfd/conic/program.hpp"
#include "uavfd/conic/solver.hpp"

namespace uavfd::conic {

/// Dense two-phase tableau simplex with Bland's rule. Accepts only zero and
/// nonnegative cones; it exists to cross-check the default backend on LPs.
class SimplexBackend final : public Backend {
public:
    [[nodiscard]] std::string_view name() const override { return "simplex"; }

    [[nodiscard]] SolverResult solve(const ConicProgram& prog, const SolverSettings& settings) const override {
        using Eigen::Index;
        using Eigen::MatrixXd;
        using Eigen::VectorXd;
        prog.validate();
        SolverResult res;
        const auto n = static_cast<Index>(prog.num_variables());
        res.x = VectorXd::Zero(n);

        struct Row {
            const AffineExpr* expr;
            bool equality;
        };
        std::vector<Row> rows;
        for (const auto& c : prog.constraints()) {
            if (c.cone != Cone::zero && c.cone != Cone::nonnegative) {
                res.status = SolverStatus::numerical_failure;
                res.message = std::string("simplex backend does not support cone ") + to_string(c.cone);
                return res;
            }
            for (const auto& r : c.rows) rows.push_back({&r, c.cone == Cone::zero});
        }

        // Columns: x+ (n), x- (n), one surplus per inequality, then artificials.
        const auto m = static_cast<Index>(rows.size());
        Index n_surplus = 0;
        for (const auto& r : rows) n_surplus += r.equality ? 0 : 1;
        const Index n_struct = 2 * n + n_surplus;
        const Index n_cols = n_struct + m;
        MatrixXd T = MatrixXd::Zero(m + 1, n_cols + 1); // last column is the rhs
        Index surplus = 2 * n;
        for (Index i = 0; i < m; ++i) {
            const auto& r = rows[static_cast<std::size_t>(i)];
            for (const auto& t : r.expr->terms()) {
                T(i, static_cast<Index>(t.var)) += t.coef;
                T(i, n + static_cast<Index>(t.var)) -= t.coef;
            }
            if (!r.equality) T(i, surplus++) = -1.0;
            T(i, n_cols) = -r.expr->constant();
            if (T(i, n_cols) < 0.0) T.row(i) *= -1.0;
            T(i, n_struct + i) = 1.0;
        }
        std::vector<Index> basis(static_cast<std::size_t>(m));
        for (Index i = 0; i < m; ++i) basis[static_cast<std::size_t>(i)] = n_struct + i;

        const double eps = 1e-11;
        int iterations = 0;
        // Objective row holds reduced costs; T(m, n_cols) = -objective.
        auto pivot = [&](Index row, Index col) {
            T.row(row) /= T(row, col);
            for (Index i = 0; i <= m; ++i) {
                if (i != row && T(i, col) != 0.0) T.row(i) -= T(i, col) * T.row(row);
            }
            basis[static_cast<std::size_t>(row)] = col;
            ++iterations;
        };
        auto run = [&](Index allowed_cols) -> SolverStatus {
            for (;;) {
                if (iterations > 50 * (m + n_cols) + settings.max_iterations) return SolverStatus::numerical_failure;
                Index enter = -1;
                for (Index j = 0; j < allowed_cols; ++j) {
                    if (T(m, j) < -eps) {
                        enter = j;
                        break;
                    }
                }
                if (enter < 0) return SolverStatus::optimal;
                Index leave = -1;
                double best = std::numeric_limits<double>::infinity();
                for (Index i = 0; i < m; ++i) {
                    if (T(i, enter) > eps) {
                        const double ratio = T(i, n_cols) / T(i, enter);
                        if (ratio < best - eps ||
                            (std::abs(ratio - best) <= eps && leave >= 0 &&
                             basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(leave)])) {
                            best = ratio;
                            leave = i;
                        }
                    }
                }
                if (leave < 0) return SolverStatus::unbounded;
                pivot(leave, enter);
            }
        };

        // Phase 1: minimize the sum of artificials.
        T.row(m).setZero();
        for (Index i = 0; i < m; ++i) T.row(m) -= T.row(i);
        for (Index i = 0; i < m; ++i) T(m, n_struct + i) = 0.0;
        if (run(n_cols) != SolverStatus::optimal) {
            res.status = SolverStatus::numerical_failure;
            res.message = "phase 1 did not terminate";
            return res;
        }
        const double infeas = -T(m, n_cols);
        if (infeas > 1e-9 * (1.0 + T.col(n_cols).head(m).cwiseAbs().maxCoeff())) {
            res.status = SolverStatus::infeasible;
            res.message = "artificial variables remain positive";
            res.iterations = iterations;
            return res;
        }
        // Drive zero-level artificials out of the basis where possible.
        for (Index i = 0; i < m; ++i) {
            if (basis[static_cast<std::size_t>(i)] < n_struct) continue;
            for (Index j = 0; j < n_struct; ++j) {
                if (std::abs(T(i, j)) > 1e-9) {
                    pivot(i, j);
                    break;
                }
            }
        }

        // Phase 2.
        VectorXd cost = VectorXd::Zero(n_cols);
        const auto obj = prog.objective();
        for (const auto& t : obj.terms()) {
            cost[static_cast<Index>(t.var)] += t.coef;
            cost[n + static_cast<Index>(t.var)] -= t.coef;
        }
        T.row(m).setZero();
        T.row(m).head(n_cols) = cost.transpose();
        for (Index i = 0; i < m; ++i) {
            const Index b = basis[static_cast<std::size_t>(i)];
            if (T(m, b) != 0.0) T.row(m) -= T(m, b) * T.row(i);
        }
        const SolverStatus st = run(n_struct);
        res.iterations = iterations;
        if (st != SolverStatus::optimal) {
            res.status = st;
            res.message = st == SolverStatus::unbounded ? "unbounded ray found" : "phase 2 did not terminate";
            return res;
        }
        VectorXd y = VectorXd::Zero(n_cols);
        for (Index i = 0; i < m; ++i) y[basis[static_cast<std::size_t>(i)]] = T(i, n_cols);
        res.x = y.head(n) - y.segment(n, n);
        res.objective = obj.evaluate(res.x);
        res.status = SolverStatus::optimal;
        res.gap = 0.0;
        return res;
    }
};

} // namespace uavfd::conic
