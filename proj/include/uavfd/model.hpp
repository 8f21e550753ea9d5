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
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

namespace uavfd {

using Point = Eigen::Vector2d;

/// Scalar parameters of one planning scenario (SI units throughout).
struct SystemConfig {
    int K = 4;                    // IoT devices
    int M = 4;                    // UAV antennas
    double L = 2.0;               // flight altitude [m]
    double T = 60.0;              // mission time [s]
    int N = 8;                    // hovering slots
    double B = 10.0;              // bandwidth [Hz]
    std::vector<double> R{256.0, 256.0, 256.0, 256.0}; // upload requirement per device [bit]
    double kappa = 0.005;         // transmit distortion
    double beta = 0.01;           // receive distortion
    double eta = 0.6;             // harvesting efficiency
    double tau = 0.6;             // propulsion coefficient [J s^2 / m^2]
    double sigma2 = 0.01;         // noise variance [W]
    double V_max = 10.0;          // speed limit [m/s]
    double P_max = 10.0;          // WPT power limit [W]
    double t_move = 1.0;          // time per leg [s]
    Point q_ui{-1.0, -1.0};
    Point q_uf{1.0, -1.0};
    double rician_K_dev = 0.1;
    double rician_K_si = 1.0;
    std::uint64_t seed = 1;

    /// Slot duration T/N.
    [[nodiscard]] double slot_time() const { return T / static_cast<double>(N); }

    bool operator==(const SystemConfig& o) const {
        return K == o.K && M == o.M && L == o.L && T == o.T && N == o.N && B == o.B && R == o.R &&
               kappa == o.kappa && beta == o.beta && eta == o.eta && tau == o.tau && sigma2 == o.sigma2 &&
               V_max == o.V_max && P_max == o.P_max && t_move == o.t_move && q_ui == o.q_ui && q_uf == o.q_uf &&
               rician_K_dev == o.rician_K_dev && rician_K_si == o.rician_K_si && seed == o.seed;
    }
};

class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& what, std::vector<std::string> violations)
        : std::runtime_error(what), violations_(std::move(violations)) {}
    [[nodiscard]] const std::vector<std::string>& violations() const { return violations_; }

private:
    std::vector<std::string> violations_;
};

/// Lists every violated invariant; empty means the config is valid.
inline std::vector<std::string> config_violations(const SystemConfig& c) {
    std::vector<std::string> v;
    auto positive = [&](const char* name, double x) {
        if (!(x > 0.0) || !std::isfinite(x)) v.push_back(std::string(name) + " must be positive");
    };
    if (c.K < 1) v.emplace_back("K must be at least 1");
    if (c.M < 1) v.emplace_back("M must be at least 1");
    if (c.K > c.M) v.emplace_back("K <= M violated (K=" + std::to_string(c.K) + ", M=" + std::to_string(c.M) + ")");
    if (c.N < 1) v.emplace_back("N must be at least 1");
    positive("L", c.L);
    positive("T", c.T);
    positive("B", c.B);
    positive("kappa", c.kappa);
    positive("beta", c.beta);
    positive("eta", c.eta);
    if (c.eta > 1.0) v.emplace_back("eta must not exceed 1");
    positive("tau", c.tau);
    positive("sigma2", c.sigma2);
    positive("V_max", c.V_max);
    positive("P_max", c.P_max);
    positive("t_move", c.t_move);
    if (c.K >= 1 && c.R.size() != static_cast<std::size_t>(c.K)) {
        v.push_back("R must have K=" + std::to_string(c.K) + " entries, got " + std::to_string(c.R.size()));
    }
    for (std::size_t k = 0; k < c.R.size(); ++k) {
        if (!(c.R[k] > 0.0) || !std::isfinite(c.R[k])) v.push_back("R[" + std::to_string(k) + "] must be positive");
    }
    if (!c.q_ui.allFinite()) v.emplace_back("q_ui must be finite");
    if (!c.q_uf.allFinite()) v.emplace_back("q_uf must be finite");
    if (!(c.rician_K_dev >= 0.0) || !std::isfinite(c.rician_K_dev)) v.emplace_back("rician_K_dev must be nonnegative");
    if (!(c.rician_K_si >= 0.0) || !std::isfinite(c.rician_K_si)) v.emplace_back("rician_K_si must be nonnegative");
    return v;
}

/// Returns `c` unchanged when valid, throws ConfigError listing all violations otherwise.
inline const SystemConfig& validate_config(const SystemConfig& c) {
    auto v = config_violations(c);
    if (!v.empty()) {
        std::string msg = "invalid configuration:";
        for (const auto& s : v) msg += "\n  " + s;
        throw ConfigError(msg, std::move(v));
    }
    return c;
}

/// Ground positions of the IoT devices.
struct DeviceLayout {
    std::vector<Point> positions;

    [[nodiscard]] std::size_t size() const { return positions.size(); }
    [[nodiscard]] const Point& operator[](std::size_t k) const { return positions[k]; }
};

inline void check_layout(const DeviceLayout& layout, const SystemConfig& cfg) {
    if (layout.size() != static_cast<std::size_t>(cfg.K)) {
        throw std::invalid_argument("device layout has " + std::to_string(layout.size()) + " entries, expected K=" +
                                    std::to_string(cfg.K));
    }
    for (const auto& p : layout.positions) {
        if (!p.allFinite()) throw std::invalid_argument("device layout contains a non-finite coordinate");
    }
}

/// UAV positions q[0..N+1]; q[0] and q[N+1] are the fixed endpoints.
struct Trajectory {
    std::vector<Point> points;

    [[nodiscard]] std::size_t legs() const { return points.empty() ? 0 : points.size() - 1; }
    [[nodiscard]] double leg_length(std::size_t n) const { return (points[n + 1] - points[n]).norm(); }
};

/// Equal spacing from q_ui to q_uf over N+1 legs.
inline Trajectory straight_line(const SystemConfig& cfg) {
    Trajectory tr;
    const int legs = cfg.N + 1;
    tr.points.reserve(static_cast<std::size_t>(legs) + 1);
    for (int n = 0; n <= legs; ++n) {
        const double a = static_cast<double>(n) / legs;
        tr.points.emplace_back((1.0 - a) * cfg.q_ui + a * cfg.q_uf);
    }
    tr.points.back() = cfg.q_uf;
    return tr;
}

/// Energy-beam covariances X[1..N], stored zero-based.
struct BeamPlan {
    std::vector<Eigen::MatrixXcd> covariances;
};

inline BeamPlan zero_beams(const SystemConfig& cfg) {
    return {std::vector<Eigen::MatrixXcd>(static_cast<std::size_t>(cfg.N), Eigen::MatrixXcd::Zero(cfg.M, cfg.M))};
}

/// Device transmit powers, K x N.
struct PowerSchedule {
    Eigen::MatrixXd powers;
};

/// One complete-loop iteration of the planner.
struct IterationRecord {
    double objective = 0.0;
    int first_loop_iters = 0;
    int second_loop_iters = 0;
};

struct Solution {
    Trajectory trajectory;
    BeamPlan beams;
    PowerSchedule powers;
    double objective = 0.0;
    std::vector<IterationRecord> trace;
};

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

using Json = nlohmann::json;

inline Json to_json(const Point& p) { return Json::array({p.x(), p.y()}); }

inline Point point_from_json(const Json& j, const std::string& key) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
        throw std::invalid_argument(key + " must be a two-element numeric array");
    }
    return {j[0].get<double>(), j[1].get<double>()};
}

inline Json to_json(const SystemConfig& c) {
    Json j;
    j["K"] = c.K;
    j["M"] = c.M;
    j["L"] = c.L;
    j["T"] = c.T;
    j["N"] = c.N;
    j["B"] = c.B;
    j["R"] = c.R;
    j["kappa"] = c.kappa;
    j["beta"] = c.beta;
    j["eta"] = c.eta;
    j["tau"] = c.tau;
    j["sigma2"] = c.sigma2;
    j["V_max"] = c.V_max;
    j["P_max"] = c.P_max;
    j["t_move"] = c.t_move;
    j["q_ui"] = to_json(c.q_ui);
    j["q_uf"] = to_json(c.q_uf);
    j["rician_K_dev"] = c.rician_K_dev;
    j["rician_K_si"] = c.rician_K_si;
    j["seed"] = c.seed;
    return j;
}

/// Reads a config object. Missing keys keep their defaults; unknown keys are
/// rejected. R may be a scalar (applied to every device) or a length-K array.
inline SystemConfig config_from_json(const Json& j) {
    if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
    static const char* known[] = {"K",   "M",   "L",      "T",     "N",     "B",     "R",
                                  "kappa", "beta", "eta", "tau", "sigma2", "V_max", "P_max",
                                  "t_move", "q_ui", "q_uf", "rician_K_dev", "rician_K_si", "seed"};
    for (const auto& [key, _] : j.items()) {
        bool ok = false;
        for (const char* k : known) ok = ok || key == k;
        if (!ok) throw std::invalid_argument("unknown config key '" + key + "'");
    }
    SystemConfig c;
    auto num = [&](const char* key, double& out) {
        if (!j.contains(key)) return;
        if (!j[key].is_number()) throw std::invalid_argument(std::string(key) + " must be a number");
        out = j[key].get<double>();
    };
    auto integer = [&](const char* key, int& out) {
        if (!j.contains(key)) return;
        if (!j[key].is_number_integer()) throw std::invalid_argument(std::string(key) + " must be an integer");
        out = j[key].get<int>();
    };
    integer("K", c.K);
    integer("M", c.M);
    integer("N", c.N);
    num("L", c.L);
    num("T", c.T);
    num("B", c.B);
    num("kappa", c.kappa);
    num("beta", c.beta);
    num("eta", c.eta);
    num("tau", c.tau);
    num("sigma2", c.sigma2);
    num("V_max", c.V_max);
    num("P_max", c.P_max);
    num("t_move", c.t_move);
    num("rician_K_dev", c.rician_K_dev);
    num("rician_K_si", c.rician_K_si);
    if (j.contains("q_ui")) c.q_ui = point_from_json(j["q_ui"], "q_ui");
    if (j.contains("q_uf")) c.q_uf = point_from_json(j["q_uf"], "q_uf");
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned()) throw std::invalid_argument("seed must be a nonnegative integer");
        c.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("R")) {
        const auto& r = j["R"];
        if (r.is_number()) {
            c.R.assign(static_cast<std::size_t>(std::max(c.K, 0)), r.get<double>());
        } else if (r.is_array()) {
            c.R.clear();
            for (const auto& x : r) {
                if (!x.is_number()) throw std::invalid_argument("R entries must be numbers");
                c.R.push_back(x.get<double>());
            }
        } else {
            throw std::invalid_argument("R must be a number or an array");
        }
    } else {
        c.R.assign(static_cast<std::size_t>(std::max(c.K, 0)), 256.0);
    }
    return c;
}

inline Json complex_matrix_to_json(const Eigen::MatrixXcd& m) {
    Json re = Json::array(), im = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Json rr = Json::array(), ir = Json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            rr.push_back(m(i, j).real());
            ir.push_back(m(i, j).imag());
        }
        re.push_back(rr);
        im.push_back(ir);
    }
    return Json{{"re", re}, {"im", im}};
}

inline Eigen::MatrixXcd complex_matrix_from_json(const Json& j) {
    const auto& re = j.at("re");
    const auto& im = j.at("im");
    if (!re.is_array() || !im.is_array() || re.size() != im.size()) throw std::invalid_argument("malformed complex matrix");
    const auto rows = static_cast<Eigen::Index>(re.size());
    const auto cols = rows == 0 ? Eigen::Index{0} : static_cast<Eigen::Index>(re[0].size());
    Eigen::MatrixXcd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const auto& rr = re[static_cast<std::size_t>(i)];
        const auto& ir = im[static_cast<std::size_t>(i)];
        if (static_cast<Eigen::Index>(rr.size()) != cols || static_cast<Eigen::Index>(ir.size()) != cols) {
            throw std::invalid_argument("ragged complex matrix");
        }
        for (Eigen::Index c = 0; c < cols; ++c) {
            m(i, c) = {rr[static_cast<std::size_t>(c)].get<double>(), ir[static_cast<std::size_t>(c)].get<double>()};
        }
    }
    return m;
}

inline Json to_json(const Solution& s) {
    Json j;
    Json traj = Json::array();
    for (const auto& p : s.trajectory.points) traj.push_back(to_json(p));
    j["trajectory"] = traj;
    Json beams = Json::array();
    for (const auto& X : s.beams.covariances) beams.push_back(complex_matrix_to_json(X));
    j["beams"] = beams;
    Json powers = Json::array();
    for (Eigen::Index k = 0; k < s.powers.powers.rows(); ++k) {
        Json row = Json::array();
        for (Eigen::Index n = 0; n < s.powers.powers.cols(); ++n) row.push_back(s.powers.powers(k, n));
        powers.push_back(row);
    }
    j["powers"] = powers;
    j["objective"] = s.objective;
    Json trace = Json::array();
    for (const auto& r : s.trace) {
        trace.push_back({{"objective", r.objective},
                         {"first_loop_iters", r.first_loop_iters},
                         {"second_loop_iters", r.second_loop_iters}});
    }
    j["trace"] = trace;
    return j;
}

inline Solution solution_from_json(const Json& j) {
    Solution s;
    for (const auto& p : j.at("trajectory")) s.trajectory.points.push_back(point_from_json(p, "trajectory point"));
    for (const auto& b : j.at("beams")) s.beams.covariances.push_back(complex_matrix_from_json(b));
    const auto& powers = j.at("powers");
    const auto K = static_cast<Eigen::Index>(powers.size());
    const auto N = K == 0 ? Eigen::Index{0} : static_cast<Eigen::Index>(powers[0].size());
    s.powers.powers.resize(K, N);
    for (Eigen::Index k = 0; k < K; ++k) {
        const auto& row = powers[static_cast<std::size_t>(k)];
        if (static_cast<Eigen::Index>(row.size()) != N) throw std::invalid_argument("ragged power schedule");
        for (Eigen::Index n = 0; n < N; ++n) s.powers.powers(k, n) = row[static_cast<std::size_t>(n)].get<double>();
    }
    s.objective = j.at("objective").get<double>();
    if (j.contains("trace")) {
        for (const auto& r : j["trace"]) {
            s.trace.push_back({r.at("objective").get<double>(), r.at("first_loop_iters").get<int>(),
                               r.at("second_loop_iters").get<int>()});
        }
    }
    return s;
}

} // namespace uavfd
