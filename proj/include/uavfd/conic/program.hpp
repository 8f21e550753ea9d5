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
#include <complex>
#include <cstddef>
#include <numbers>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace uavfd::conic {

using Index = std::size_t;

/// Raised when a program is structurally malformed (dimension mismatch,
/// unknown variable, unused variable).
class ProgramError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

struct Term {
    Index var;
    double coef;
};

/// Sparse affine expression `constant + sum coef * x[var]` over the real
/// decision vector of a ConicProgram.
class AffineExpr {
public:
    AffineExpr() = default;
    AffineExpr(double constant) : constant_(constant) {} // NOLINT(google-explicit-constructor)

    static AffineExpr variable(Index var, double coef = 1.0) {
        AffineExpr e;
        e.terms_.push_back({var, coef});
        return e;
    }

    AffineExpr& add_term(Index var, double coef) {
        if (coef != 0.0) terms_.push_back({var, coef});
        return *this;
    }

    AffineExpr& operator+=(const AffineExpr& other) {
        terms_.insert(terms_.end(), other.terms_.begin(), other.terms_.end());
        constant_ += other.constant_;
        return *this;
    }
    AffineExpr& operator-=(const AffineExpr& other) {
        for (const auto& t : other.terms_) terms_.push_back({t.var, -t.coef});
        constant_ -= other.constant_;
        return *this;
    }
    AffineExpr& operator*=(double s) {
        for (auto& t : terms_) t.coef *= s;
        constant_ *= s;
        return *this;
    }

    friend AffineExpr operator+(AffineExpr a, const AffineExpr& b) { return a += b; }
    friend AffineExpr operator-(AffineExpr a, const AffineExpr& b) { return a -= b; }
    friend AffineExpr operator-(AffineExpr a) { return a *= -1.0; }
    friend AffineExpr operator*(AffineExpr a, double s) { return a *= s; }
    friend AffineExpr operator*(double s, AffineExpr a) { return a *= s; }

    [[nodiscard]] double constant() const { return constant_; }
    void set_constant(double c) { constant_ = c; }
    [[nodiscard]] const std::vector<Term>& terms() const { return terms_; }
    [[nodiscard]] bool is_constant() const { return terms_.empty(); }

    /// Merge duplicate variables, drop exact zeros, sort by variable index.
    void canonicalize() {
        std::sort(terms_.begin(), terms_.end(),
                  [](const Term& a, const Term& b) { return a.var < b.var; });
        std::vector<Term> merged;
        merged.reserve(terms_.size());
        for (const auto& t : terms_) {
            if (!merged.empty() && merged.back().var == t.var) {
                merged.back().coef += t.coef;
            } else {
                merged.push_back(t);
            }
        }
        std::erase_if(merged, [](const Term& t) { return t.coef == 0.0; });
        terms_ = std::move(merged);
    }

    [[nodiscard]] AffineExpr canonical() const {
        AffineExpr copy = *this;
        copy.canonicalize();
        return copy;
    }

    [[nodiscard]] double evaluate(const Eigen::VectorXd& x) const {
        double v = constant_;
        for (const auto& t : terms_) v += t.coef * x[static_cast<Eigen::Index>(t.var)];
        return v;
    }

private:
    std::vector<Term> terms_;
    double constant_ = 0.0;
};

/// A named, contiguous block of scalar variables stored row-major.
struct VarBlock {
    std::string name;
    Index offset = 0;
    Index rows = 0;
    Index cols = 0;

    [[nodiscard]] Index size() const { return rows * cols; }
    [[nodiscard]] Index index(Index i, Index j = 0) const {
        if (i >= rows || j >= cols) throw ProgramError("variable index out of range in block " + name);
        return offset + i * cols + j;
    }
    [[nodiscard]] AffineExpr operator()(Index i, Index j = 0) const {
        return AffineExpr::variable(index(i, j));
    }
};

/// Complex Hermitian matrix variable parameterized by dim^2 real scalars:
/// the diagonal first, then (Re, Im) of each strictly-upper entry in
/// row-major order. Hermitian symmetry is structural, so no tie rows are
/// needed.
class HermitianVar {
public:
    HermitianVar() = default;
    HermitianVar(std::string name, Index offset, Index dim)
        : name_(std::move(name)), offset_(offset), dim_(dim) {}

    [[nodiscard]] const std::string& name() const { return name_; }
    [[nodiscard]] Index dim() const { return dim_; }
    [[nodiscard]] Index offset() const { return offset_; }
    [[nodiscard]] Index num_params() const { return dim_ * dim_; }

    [[nodiscard]] AffineExpr real(Index i, Index j) const {
        check(i, j);
        if (i == j) return AffineExpr::variable(offset_ + i);
        auto [a, b] = std::minmax(i, j);
        return AffineExpr::variable(pair_offset(a, b));
    }

    [[nodiscard]] AffineExpr imag(Index i, Index j) const {
        check(i, j);
        if (i == j) return AffineExpr{};
        if (i < j) return AffineExpr::variable(pair_offset(i, j) + 1);
        return AffineExpr::variable(pair_offset(j, i) + 1, -1.0);
    }

    /// Basis matrix B_p with X = sum_p x_p B_p.
    [[nodiscard]] Eigen::MatrixXcd basis(Index p) const {
        using C = std::complex<double>;
        const auto d = static_cast<Eigen::Index>(dim_);
        Eigen::MatrixXcd B = Eigen::MatrixXcd::Zero(d, d);
        if (p < dim_) {
            B(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p)) = 1.0;
            return B;
        }
        Index q = (p - dim_) / 2;
        const bool imaginary = ((p - dim_) % 2) == 1;
        for (Index i = 0; i < dim_; ++i) {
            for (Index j = i + 1; j < dim_; ++j, --q) {
                if (q != 0) continue;
                const auto ii = static_cast<Eigen::Index>(i);
                const auto jj = static_cast<Eigen::Index>(j);
                if (imaginary) {
                    B(ii, jj) = C(0.0, 1.0);
                    B(jj, ii) = C(0.0, -1.0);
                } else {
                    B(ii, jj) = 1.0;
                    B(jj, ii) = 1.0;
                }
                return B;
            }
        }
        throw ProgramError("Hermitian basis index out of range");
    }

    /// Real-valued linear functional of X as an affine expression. `f` must be
    /// real-linear on Hermitian matrices; it is sampled on the basis.
    template <class F>
    [[nodiscard]] AffineExpr functional(F&& f) const {
        const auto d = static_cast<Eigen::Index>(dim_);
        const double at_zero = f(Eigen::MatrixXcd::Zero(d, d));
        AffineExpr e(at_zero);
        for (Index p = 0; p < num_params(); ++p) {
            e.add_term(offset_ + p, f(basis(p)) - at_zero);
        }
        return e;
    }

    [[nodiscard]] AffineExpr trace() const {
        AffineExpr e;
        for (Index i = 0; i < dim_; ++i) e.add_term(offset_ + i, 1.0);
        return e;
    }

    [[nodiscard]] Eigen::MatrixXcd value(const Eigen::VectorXd& x) const {
        const auto d = static_cast<Eigen::Index>(dim_);
        Eigen::MatrixXcd X(d, d);
        for (Index i = 0; i < dim_; ++i) {
            for (Index j = 0; j < dim_; ++j) {
                X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = {
                    real(i, j).evaluate(x), imag(i, j).evaluate(x)};
            }
        }
        return X;
    }

    /// Parameter vector for a given Hermitian matrix (inverse of value()).
    [[nodiscard]] Eigen::VectorXd params(const Eigen::MatrixXcd& X) const {
        Eigen::VectorXd p(static_cast<Eigen::Index>(num_params()));
        Eigen::Index k = 0;
        for (Eigen::Index i = 0; i < X.rows(); ++i) p[k++] = X(i, i).real();
        for (Eigen::Index i = 0; i < X.rows(); ++i) {
            for (Eigen::Index j = i + 1; j < X.cols(); ++j) {
                p[k++] = X(i, j).real();
                p[k++] = X(i, j).imag();
            }
        }
        return p;
    }

private:
    void check(Index i, Index j) const {
        if (i >= dim_ || j >= dim_) throw ProgramError("Hermitian index out of range in " + name_);
    }
    [[nodiscard]] Index pair_offset(Index i, Index j) const {
        // Number of strictly-upper entries preceding (i, j) in row-major order.
        const Index before = i * dim_ - i * (i + 1) / 2 + (j - i - 1);
        return offset_ + dim_ + 2 * before;
    }

    std::string name_;
    Index offset_ = 0;
    Index dim_ = 0;
};

enum class Cone { zero, nonnegative, second_order, exponential, psd };

inline const char* to_string(Cone c) {
    switch (c) {
    case Cone::zero: return "zero";
    case Cone::nonnegative: return "nonneg";
    case Cone::second_order: return "soc";
    case Cone::exponential: return "exp";
    case Cone::psd: return "psd";
    }
    return "?";
}

/// Membership constraint `rows(x) in cone`.
///
/// Row conventions:
///   zero / nonnegative: every row is constrained independently;
///   second_order: (t, u_1..u_m) with ||u|| <= t;
///   exponential: (x, y, z) with y * exp(x / y) <= z, y > 0;
///   psd: packed upper triangle, row-major over i <= j, of a symmetric
///        matrix of the given order.
struct ConeConstraint {
    Cone cone = Cone::nonnegative;
    std::vector<AffineExpr> rows;
    Index order = 0;
    std::string label;
};

inline Index packed_size(Index order) { return order * (order + 1) / 2; }

inline Index packed_index(Index order, Index i, Index j) {
    if (i > j) std::swap(i, j);
    return i * order - i * (i + 1) / 2 + j;
}

/// Real symmetric matrix whose entries are affine expressions.
struct SymmetricExpr {
    Index order = 0;
    std::vector<AffineExpr> packed;

    [[nodiscard]] const AffineExpr& at(Index i, Index j) const { return packed[packed_index(order, i, j)]; }

    [[nodiscard]] Eigen::MatrixXd evaluate(const Eigen::VectorXd& x) const {
        const auto d = static_cast<Eigen::Index>(order);
        Eigen::MatrixXd S(d, d);
        for (Index i = 0; i < order; ++i) {
            for (Index j = i; j < order; ++j) {
                const double v = at(i, j).evaluate(x);
                S(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
                S(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
            }
        }
        return S;
    }

    [[nodiscard]] AffineExpr trace() const {
        AffineExpr e;
        for (Index i = 0; i < order; ++i) e += at(i, i);
        return e;
    }
};

/// Real block form [[Re X, -Im X], [Im X, Re X]] of a Hermitian variable.
/// The block matrix is PSD iff X is, and its trace is 2 trace(X).
inline SymmetricExpr hermitian_embed(const HermitianVar& X) {
    const Index m = X.dim();
    SymmetricExpr S{2 * m, std::vector<AffineExpr>(packed_size(2 * m))};
    for (Index i = 0; i < 2 * m; ++i) {
        for (Index j = i; j < 2 * m; ++j) {
            const Index a = i % m;
            const Index b = j % m;
            const bool top = i < m;
            const bool left = j < m;
            AffineExpr e;
            if (top == left) {
                e = X.real(a, b);
            } else if (top) { // top-right block: -Im X
                e = -X.imag(a, b);
            } else { // bottom-left block: Im X
                e = X.imag(a, b);
            }
            S.packed[packed_index(2 * m, i, j)] = std::move(e);
        }
    }
    return S;
}

/// Numeric counterpart of hermitian_embed.
inline Eigen::MatrixXd hermitian_embed(const Eigen::MatrixXcd& X) {
    const Eigen::Index m = X.rows();
    Eigen::MatrixXd S(2 * m, 2 * m);
    S.topLeftCorner(m, m) = X.real();
    S.topRightCorner(m, m) = -X.imag();
    S.bottomLeftCorner(m, m) = X.imag();
    S.bottomRightCorner(m, m) = X.real();
    return S;
}

inline Eigen::MatrixXcd hermitian_extract(const Eigen::MatrixXd& S) {
    const Eigen::Index m = S.rows() / 2;
    Eigen::MatrixXcd X(m, m);
    X.real() = S.topLeftCorner(m, m);
    X.imag() = S.bottomLeftCorner(m, m);
    return X;
}

/// Cone-structured convex program: minimize a linear objective subject to
/// affine maps lying in products of cones.
class ConicProgram {
public:
    VarBlock add_variables(std::string name, Index rows, Index cols = 1) {
        VarBlock b{std::move(name), num_vars_, rows, cols};
        num_vars_ += rows * cols;
        blocks_.push_back(b);
        return b;
    }

    HermitianVar add_hermitian(std::string name, Index dim) {
        HermitianVar h(name, num_vars_, dim);
        blocks_.push_back(VarBlock{std::move(name), num_vars_, dim * dim, 1});
        num_vars_ += dim * dim;
        return h;
    }

    void minimize(AffineExpr objective) { objective_ = std::move(objective); }

    void add_zero(AffineExpr row, std::string label = {}) {
        add(ConeConstraint{Cone::zero, {std::move(row)}, 0, std::move(label)});
    }
    /// row >= 0
    void add_nonnegative(AffineExpr row, std::string label = {}) {
        add(ConeConstraint{Cone::nonnegative, {std::move(row)}, 0, std::move(label)});
    }
    /// ||rows[1..]|| <= rows[0]
    void add_second_order(std::vector<AffineExpr> rows, std::string label = {}) {
        add(ConeConstraint{Cone::second_order, std::move(rows), 0, std::move(label)});
    }
    /// y exp(x / y) <= z
    void add_exponential(AffineExpr x, AffineExpr y, AffineExpr z, std::string label = {}) {
        add(ConeConstraint{Cone::exponential, {std::move(x), std::move(y), std::move(z)}, 0, std::move(label)});
    }
    void add_psd(SymmetricExpr S, std::string label = {}) {
        add(ConeConstraint{Cone::psd, std::move(S.packed), S.order, std::move(label)});
    }
    void add_hermitian_psd(const HermitianVar& X, std::string label = {}) {
        add_psd(hermitian_embed(X), std::move(label));
    }

    /// ||a||^2 <= v, written as a rotated cone with scale `lambda` > 0:
    /// (v/lambda + lambda, 2a, v/lambda - lambda) in SOC.
    void add_squared_norm_le(const std::vector<AffineExpr>& a, const AffineExpr& v, double lambda,
                             std::string label = {}) {
        if (!(lambda > 0.0)) throw ProgramError("rotated cone scale must be positive");
        std::vector<AffineExpr> rows;
        rows.reserve(a.size() + 2);
        rows.push_back(v * (1.0 / lambda) + AffineExpr(lambda));
        for (const auto& ai : a) rows.push_back(ai * 2.0);
        rows.push_back(v * (1.0 / lambda) - AffineExpr(lambda));
        add_second_order(std::move(rows), std::move(label));
    }

    void add(ConeConstraint c) {
        for (auto& r : c.rows) r.canonicalize();
        check_dims(c);
        constraints_.push_back(std::move(c));
    }

    [[nodiscard]] Index num_variables() const { return num_vars_; }
    [[nodiscard]] const std::vector<VarBlock>& blocks() const { return blocks_; }
    [[nodiscard]] const std::vector<ConeConstraint>& constraints() const { return constraints_; }
    [[nodiscard]] AffineExpr objective() const { return objective_.canonical(); }

    /// Throws ProgramError if a term references an unknown variable or a
    /// variable is referenced nowhere.
    void validate() const {
        std::vector<bool> used(num_vars_, false);
        auto mark = [&](const AffineExpr& e) {
            for (const auto& t : e.terms()) {
                if (t.var >= num_vars_) throw ProgramError("term references unknown variable " + std::to_string(t.var));
                used[t.var] = true;
            }
        };
        mark(objective_);
        for (const auto& c : constraints_) {
            check_dims(c);
            for (const auto& r : c.rows) mark(r);
        }
        for (Index i = 0; i < num_vars_; ++i) {
            if (!used[i]) throw ProgramError("variable " + describe(i) + " appears in no constraint or objective");
        }
    }

    [[nodiscard]] std::string describe(Index var) const {
        for (const auto& b : blocks_) {
            if (var >= b.offset && var < b.offset + b.size()) {
                return b.name + "[" + std::to_string(var - b.offset) + "]";
            }
        }
        return "#" + std::to_string(var);
    }

private:
    static void check_dims(const ConeConstraint& c) {
        const Index n = c.rows.size();
        bool ok = true;
        switch (c.cone) {
        case Cone::zero:
        case Cone::nonnegative: ok = n >= 1; break;
        case Cone::second_order: ok = n >= 1; break;
        case Cone::exponential: ok = n == 3; break;
        case Cone::psd: ok = c.order >= 1 && n == packed_size(c.order); break;
        }
        if (!ok) {
            throw ProgramError(std::string("constraint '") + c.label + "': " + std::to_string(n) +
                               " rows do not match cone " + to_string(c.cone));
        }
    }

    Index num_vars_ = 0;
    std::vector<VarBlock> blocks_;
    AffineExpr objective_;
    std::vector<ConeConstraint> constraints_;
};

/// Adds auxiliary variables u[n] with (u[n], 1, 1 + t[n]) in the exponential
/// cone, i.e. u[n] <= ln(1 + t[n]), and the row
///   sum_n coeff * u[n] / ln 2 >= required,
/// normalized by `required`. Returns the block of u. When required <= 0 the
/// aggregate row is omitted and each u[n] only gets the floor u[n] >= -1.
inline VarBlock add_log_rate_constraint(ConicProgram& prog, std::span<const AffineExpr> t, double coeff,
                                        double required, const std::string& label) {
    auto u = prog.add_variables(label + ".u", t.size());
    AffineExpr sum;
    for (Index n = 0; n < t.size(); ++n) {
        prog.add_exponential(u(n), AffineExpr(1.0), AffineExpr(1.0) + t[n], label + ".log");
        sum += u(n) * (coeff / std::numbers::ln2);
    }
    if (required > 0.0) {
        prog.add_nonnegative(sum * (1.0 / required) - AffineExpr(1.0), label);
    } else {
        // Nothing is required, so u only needs a finite floor. A floor below
        // ln(1 + 0) keeps the feasible set with a nonempty interior.
        for (Index n = 0; n < t.size(); ++n) prog.add_nonnegative(u(n) + AffineExpr(1.0), label + ".floor");
    }
    return u;
}

/// Sparse-triplet text dump of a program.
///
///   uavfd-conic 1
///   variables <n>
///   block <name> <offset> <rows> <cols>          (one per block)
///   objective <constant>
///   o <var> <coef>                                (objective terms)
///   constraint <id> <cone> <rows> <order> <label> (order is 0 unless psd)
///   a <row> <var> <coef>                          (row terms)
///   b <row> <constant>                            (row constants, all rows)
///   end
///
/// Numbers use 17 significant digits; labels have spaces replaced by '_'.
inline void write_program(std::ostream& os, const ConicProgram& prog) {
    const auto old_precision = os.precision(17);
    auto clean = [](std::string s) {
        std::replace(s.begin(), s.end(), ' ', '_');
        return s.empty() ? std::string("-") : s;
    };
    os << "uavfd-conic 1\n";
    os << "variables " << prog.num_variables() << '\n';
    for (const auto& b : prog.blocks()) {
        os << "block " << clean(b.name) << ' ' << b.offset << ' ' << b.rows << ' ' << b.cols << '\n';
    }
    const auto obj = prog.objective();
    os << "objective " << obj.constant() << '\n';
    for (const auto& t : obj.terms()) os << "o " << t.var << ' ' << t.coef << '\n';
    Index id = 0;
    for (const auto& c : prog.constraints()) {
        os << "constraint " << id++ << ' ' << to_string(c.cone) << ' ' << c.rows.size() << ' ' << c.order << ' '
           << clean(c.label) << '\n';
        for (Index r = 0; r < c.rows.size(); ++r) {
            for (const auto& t : c.rows[r].terms()) os << "a " << r << ' ' << t.var << ' ' << t.coef << '\n';
        }
        for (Index r = 0; r < c.rows.size(); ++r) os << "b " << r << ' ' << c.rows[r].constant() << '\n';
    }
    os << "end\n";
    os.precision(old_precision);
}

} // namespace uavfd::conic
