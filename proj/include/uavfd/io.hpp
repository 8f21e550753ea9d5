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

#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "uavfd/energy.hpp"
#include "uavfd/model.hpp"
#include "uavfd/planner.hpp"

// CSV readers and writers for device layouts and run artifacts. Every writer
// emits a header row and 17 significant digits.

namespace uavfd {

/// Quotes a CSV field when it contains a separator, quote or newline.
inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(line);
    while (std::getline(is, cur, ',')) {
        const auto b = cur.find_first_not_of(" \t\r");
        const auto e = cur.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? std::string() : cur.substr(b, e - b + 1));
    }
    return out;
}

inline double parse_double(const std::string& s, const std::string& what) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != s.size()) throw std::invalid_argument("cannot parse " + what + " '" + s + "'");
    return v;
}

} // namespace detail

/// Reads `device,x,y` rows (header required, devices listed in order 1..K).
inline DeviceLayout read_layout_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw std::invalid_argument("device file is empty");
    const auto header = detail::split_csv_line(line);
    if (header != std::vector<std::string>{"device", "x", "y"}) {
        throw std::invalid_argument("device file header must be 'device,x,y'");
    }
    DeviceLayout layout;
    int row = 1;
    while (std::getline(is, line)) {
        ++row;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto f = detail::split_csv_line(line);
        if (f.size() != 3) throw std::invalid_argument("device file row " + std::to_string(row) + " needs 3 fields");
        const double id = detail::parse_double(f[0], "device index");
        if (id != static_cast<double>(layout.size() + 1)) {
            throw std::invalid_argument("device file row " + std::to_string(row) + ": devices must be numbered 1..K in order");
        }
        layout.positions.emplace_back(detail::parse_double(f[1], "x"), detail::parse_double(f[2], "y"));
    }
    if (layout.size() == 0) throw std::invalid_argument("device file lists no devices");
    return layout;
}

inline void write_layout_csv(std::ostream& os, const DeviceLayout& layout) {
    const auto old = os.precision(17);
    os << "device,x,y\n";
    for (std::size_t k = 0; k < layout.size(); ++k) os << k + 1 << ',' << layout[k].x() << ',' << layout[k].y() << '\n';
    os.precision(old);
}

/// `slot,x,y` for slots 0..N+1 (0 and N+1 are the endpoints).
inline void write_trajectory_csv(std::ostream& os, const Trajectory& tr) {
    const auto old = os.precision(17);
    os << "slot,x,y\n";
    for (std::size_t n = 0; n < tr.points.size(); ++n) os << n << ',' << tr.points[n].x() << ',' << tr.points[n].y() << '\n';
    os.precision(old);
}

/// `outer_iter,objective_J,first_loop_iters,second_loop_iters`, one row per
/// complete-loop iteration (benchmarks have a single row with no second loop).
inline void write_convergence_csv(std::ostream& os, const Solution& s) {
    const auto old = os.precision(17);
    os << "outer_iter,objective_J,first_loop_iters,second_loop_iters\n";
    for (std::size_t i = 0; i < s.trace.size(); ++i) {
        const auto& r = s.trace[i];
        os << i + 1 << ',' << r.objective << ',' << r.first_loop_iters << ',' << r.second_loop_iters << '\n';
    }
    os.precision(old);
}

/// `t_move_s,scheme,total_J,propulsion_J,wpt_J,status`. Failed cells keep
/// their row with empty energies.
inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
    const auto old = os.precision(17);
    os << "t_move_s,scheme,total_J,propulsion_J,wpt_J,status\n";
    for (const auto& r : rows) {
        os << r.t_move << ',' << to_string(r.scheme) << ',';
        if (r.ok()) {
            os << r.breakdown.total << ',' << r.breakdown.propulsion_total() << ',' << r.breakdown.wpt_total();
        } else {
            os << ",,";
        }
        os << ',' << csv_field(r.status) << '\n';
    }
    os.precision(old);
}

/// Summary written next to solution files: objective, energy split and the
/// feasibility report at the planner's tolerance.
inline Json summary_json(const Solution& s, const SystemConfig& cfg, const FeasibilityReport& rep, double tol) {
    const auto e = total_energy(s, cfg);
    Json j;
    j["objective_J"] = s.objective;
    j["propulsion_J"] = e.propulsion_total();
    j["wpt_J"] = e.wpt_total();
    j["outer_iterations"] = s.trace.size();
    Json f;
    f["tolerance"] = tol;
    f["passed"] = rep.passed();
    for (const auto& name : constraint_names()) {
        Json c;
        c["passed"] = rep.passed(name);
        c["worst_slack"] = rep.worst_slack(name);
        f["constraints"][name] = c;
    }
    j["feasibility"] = f;
    return j;
}

} // namespace uavfd
