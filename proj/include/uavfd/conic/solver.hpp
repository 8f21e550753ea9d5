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

#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "uavfd/conic/program.hpp"

namespace uavfd::conic {

/// `inaccurate` means the solver stalled after reaching a strictly feasible
/// point whose gap bound meets SolverSettings::acceptable_tol but not tol.
enum class SolverStatus { optimal, inaccurate, infeasible, unbounded, numerical_failure };

inline const char* to_string(SolverStatus s) {
    switch (s) {
    case SolverStatus::optimal: return "optimal";
    case SolverStatus::inaccurate: return "inaccurate";
    case SolverStatus::infeasible: return "infeasible";
    case SolverStatus::unbounded: return "unbounded";
    case SolverStatus::numerical_failure: return "numerical_failure";
    }
    return "?";
}

struct SolverSettings {
    /// Target duality gap, relative to max(1, |objective|).
    double tol = 1e-8;
    /// Relative gap still reported as usable when progress stalls.
    double acceptable_tol = 1e-6;
    /// Cap on Newton steps of the optimality phase.
    int max_iterations = 500;
    /// Cap on Newton steps spent finding a strictly feasible point.
    int max_phase1_iterations = 500;
};

struct SolverResult {
    SolverStatus status = SolverStatus::numerical_failure;
    Eigen::VectorXd x;
    double objective = 0.0;
    /// Upper bound on the duality gap at the returned point.
    double gap = 0.0;
    int iterations = 0;
    int phase1_iterations = 0;
    std::string message;

    [[nodiscard]] bool ok() const { return status == SolverStatus::optimal || status == SolverStatus::inaccurate; }

    [[nodiscard]] double value(const AffineExpr& e) const { return e.evaluate(x); }
    [[nodiscard]] double value(const VarBlock& b, Index i, Index j = 0) const {
        return x[static_cast<Eigen::Index>(b.index(i, j))];
    }
    [[nodiscard]] Eigen::MatrixXd values(const VarBlock& b) const {
        Eigen::MatrixXd m(static_cast<Eigen::Index>(b.rows), static_cast<Eigen::Index>(b.cols));
        for (Index i = 0; i < b.rows; ++i) {
            for (Index j = 0; j < b.cols; ++j) {
                m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = value(b, i, j);
            }
        }
        return m;
    }
    [[nodiscard]] Eigen::MatrixXcd value(const HermitianVar& h) const { return h.value(x); }
};

/// Solver backend contract. Implementations must be re-entrant: solve() may
/// run concurrently on different programs and must hold no global mutable
/// state.
class Backend {
public:
    virtual ~Backend() = default;
    [[nodiscard]] virtual std::string_view name() const = 0;
    [[nodiscard]] virtual SolverResult solve(const ConicProgram& prog, const SolverSettings& settings) const = 0;
};

} // namespace uavfd::conic
