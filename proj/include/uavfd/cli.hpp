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

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "uavfd/channel.hpp"
#include "uavfd/energy.hpp"
#include "uavfd/io.hpp"
#include "uavfd/model.hpp"
#include "uavfd/planner.hpp"

// Command implementations behind the uavfd executable. Each command returns
// a process exit status and only touches the file system once every
// artifact has been produced in memory, so a failing run leaves no files.

namespace uavfd::cli {

namespace fs = std::filesystem;

inline constexpr int exit_ok = 0;
inline constexpr int exit_failure = 1; // infeasible plan, solver failure, violated constraint
inline constexpr int exit_usage = 2;   // bad flags, config or input files

/// Raised for anything that maps to exit_usage.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct CommonOptions {
    std::optional<std::string> config;  // JSON file; built-in defaults when absent
    std::optional<std::uint64_t> seed;  // overrides the config's seed
    std::optional<std::string> devices; // device,x,y CSV
    std::optional<std::uint64_t> random_devices;
    std::string out;
    bool force = false;
};

struct RunOptions : CommonOptions {
    std::string scheme = "optimized";
    bool dump_channels = false;
};

struct SweepOptions : CommonOptions {
    double t_min = 0.5;
    double t_max = 3.0;
    double t_step = 0.5;
};

struct ValidateOptions {
    std::string solution;
    double tol = 1e-6;
};

inline std::string read_file(const std::string& path, const char* what) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw UsageError(std::string("cannot read ") + what + " '" + path + "'");
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

inline Json parse_json_file(const std::string& path, const char* what) {
    try {
        return Json::parse(read_file(path, what));
    } catch (const Json::parse_error& e) {
        throw UsageError(std::string("malformed ") + what + " '" + path + "': " + e.what());
    }
}

/// Config from file (or defaults) with the seed override applied, validated.
inline SystemConfig load_config(const CommonOptions& o) {
    SystemConfig cfg;
    try {
        if (o.config) cfg = config_from_json(parse_json_file(*o.config, "config"));
        if (o.seed) cfg.seed = *o.seed;
        return validate_config(cfg);
    } catch (const UsageError&) {
        throw;
    } catch (const std::exception& e) {
        throw UsageError(std::string("invalid config: ") + e.what());
    }
}

inline DeviceLayout load_layout(const CommonOptions& o, const SystemConfig& cfg) {
    if (o.devices && o.random_devices) throw UsageError("--devices and --random-devices are mutually exclusive");
    DeviceLayout layout;
    try {
        if (o.devices) {
            std::istringstream is(read_file(*o.devices, "device file"));
            layout = read_layout_csv(is);
        } else if (o.random_devices) {
            layout = random_layout(cfg.K, *o.random_devices);
        } else {
            layout = reference_layout();
        }
        check_layout(layout, cfg);
    } catch (const UsageError&) {
        throw;
    } catch (const std::exception& e) {
        throw UsageError(e.what());
    }
    return layout;
}

inline Json layout_json(const DeviceLayout& layout) {
    Json j = Json::array();
    for (const auto& p : layout.positions) j.push_back(to_json(p));
    return j;
}

inline DeviceLayout layout_from_json(const Json& j) {
    if (!j.is_array()) throw std::invalid_argument("devices must be an array of [x, y] pairs");
    DeviceLayout layout;
    for (const auto& p : j) layout.positions.push_back(point_from_json(p, "device"));
    return layout;
}

/// Artifacts of one command, written together at the end.
class OutputSet {
public:
    void add(const std::string& name, std::string content) { files_[name] = std::move(content); }
    [[nodiscard]] std::vector<std::string> names() const {
        std::vector<std::string> n;
        for (const auto& [k, v] : files_) n.push_back(k);
        return n;
    }

    /// Refuses to clobber existing files unless `force`.
    static void check_writable(const fs::path& dir, const std::vector<std::string>& names, bool force) {
        if (fs::exists(dir) && !fs::is_directory(dir)) throw UsageError("output path '" + dir.string() + "' is not a directory");
        if (force) return;
        for (const auto& n : names) {
            if (fs::exists(dir / n)) {
                throw UsageError("'" + (dir / n).string() + "' exists; pass --force to overwrite");
            }
        }
    }

    void write(const fs::path& dir, bool force) const {
        check_writable(dir, names(), force);
        fs::create_directories(dir);
        for (const auto& [name, content] : files_) {
            const fs::path tmp = dir / (name + ".tmp");
            {
                std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
                if (!os) throw std::runtime_error("cannot write '" + tmp.string() + "'");
                os << content;
                if (!os) throw std::runtime_error("write failed for '" + tmp.string() + "'");
            }
            fs::rename(tmp, dir / name);
        }
    }

private:
    std::map<std::string, std::string> files_;
};

inline Json manifest_json(const SystemConfig& cfg, const std::vector<std::string>& schemes, const fs::path& out,
                          std::vector<std::string> files, double runtime_s) {
    files.push_back("manifest.json");
    Json j;
    j["config"] = to_json(cfg);
    j["seed"] = cfg.seed;
    j["schemes"] = schemes;
    j["output_dir"] = out.string();
    j["files"] = files;
    j["runtime_s"] = runtime_s;
    return j;
}

inline double elapsed_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline std::vector<std::string> run_artifacts(bool dump_channels) {
    std::vector<std::string> n{"convergence.csv", "manifest.json", "solution.json", "trajectory.csv"};
    if (dump_channels) n.push_back("channels.csv");
    return n;
}

/// `run`: plans one scheme and writes trajectory.csv, convergence.csv,
/// solution.json and manifest.json (plus channels.csv on request).
inline int cmd_run(const RunOptions& o, std::ostream& out, std::ostream& err) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
        if (o.out.empty()) throw UsageError("--out is required");
        SchemeKind scheme;
        try {
            scheme = scheme_from_string(o.scheme);
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
        const auto cfg = load_config(o);
        const auto layout = load_layout(o, cfg);
        OutputSet::check_writable(o.out, run_artifacts(o.dump_channels), o.force);

        const auto chans = sample_channels(cfg);
        const PlannerSettings settings;
        Solution sol;
        try {
            sol = run_scheme(scheme, cfg, layout, chans, settings);
        } catch (const std::exception& e) {
            err << "error: " << to_string(scheme) << " failed: " << e.what() << '\n';
            return exit_failure;
        }
        const auto rep = verify_feasibility(sol, chans, cfg, layout, settings.feasibility_tol);

        OutputSet files;
        std::ostringstream traj, conv;
        write_trajectory_csv(traj, sol.trajectory);
        write_convergence_csv(conv, sol);
        files.add("trajectory.csv", traj.str());
        files.add("convergence.csv", conv.str());
        Json doc;
        doc["format"] = "uavfd-solution";
        doc["version"] = 1;
        doc["scheme"] = to_string(scheme);
        doc["config"] = to_json(cfg);
        doc["devices"] = layout_json(layout);
        doc["solution"] = to_json(sol);
        doc["summary"] = summary_json(sol, cfg, rep, settings.feasibility_tol);
        files.add("solution.json", doc.dump(2) + "\n");
        if (o.dump_channels) {
            std::ostringstream ch;
            write_channels_csv(ch, chans);
            files.add("channels.csv", ch.str());
        }
        auto names = files.names();
        files.add("manifest.json",
                  manifest_json(cfg, {to_string(scheme)}, o.out, names, elapsed_since(t0)).dump(2) + "\n");
        files.write(o.out, o.force);

        const auto e = total_energy(sol, cfg);
        out.precision(10);
        out << to_string(scheme) << ": total " << e.total << " J (propulsion " << e.propulsion_total() << " J, WPT "
            << e.wpt_total() << " J), " << sol.trace.size() << " outer iteration(s)\n";
        out << "wrote " << names.size() + 1 << " files to " << o.out << '\n';
        return exit_ok;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_failure;
    }
}

/// Moving times t_min, t_min + step, ... up to t_max (inclusive within
/// rounding).
inline std::vector<double> t_grid(double t_min, double t_max, double t_step) {
    if (!(t_min > 0.0) || !(t_step > 0.0) || !(t_max >= t_min) || !std::isfinite(t_max)) {
        throw UsageError("need 0 < --t-min <= --t-max and --t-step > 0");
    }
    std::vector<double> ts;
    for (int i = 0;; ++i) {
        const double t = t_min + i * t_step;
        if (t > t_max + 1e-9 * t_step) break;
        ts.push_back(t);
        if (ts.size() > 100000) throw UsageError("t grid is too large");
    }
    return ts;
}

/// `sweep`: all three schemes over a moving-time grid on one channel
/// realization; writes energy_sweep.csv and manifest.json.
inline int cmd_sweep(const SweepOptions& o, std::ostream& out, std::ostream& err) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
        if (o.out.empty()) throw UsageError("--out is required");
        const auto ts = t_grid(o.t_min, o.t_max, o.t_step);
        const auto cfg = load_config(o);
        const auto layout = load_layout(o, cfg);
        OutputSet::check_writable(o.out, {"energy_sweep.csv", "manifest.json"}, o.force);

        const auto chans = sample_channels(cfg);
        const auto rows = sweep_moving_time(cfg, layout, chans, ts, {});
        std::size_t ok = 0;
        for (const auto& r : rows) {
            if (r.ok()) ++ok;
            else err << "warning: t=" << r.t_move << " " << to_string(r.scheme) << ": " << r.status << '\n';
        }
        if (ok == 0) {
            err << "error: every sweep cell failed\n";
            return exit_failure;
        }
        OutputSet files;
        std::ostringstream csv;
        write_sweep_csv(csv, rows);
        files.add("energy_sweep.csv", csv.str());
        files.add("manifest.json", manifest_json(cfg, {"optimized", "benchmark1", "benchmark2"}, o.out,
                                                 {"energy_sweep.csv"}, elapsed_since(t0))
                                       .dump(2) +
                                       "\n");
        files.write(o.out, o.force);
        out << ok << " of " << rows.size() << " sweep cells succeeded; wrote " << (fs::path(o.out) / "energy_sweep.csv").string()
            << '\n';
        return exit_ok;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_failure;
    }
}

/// `validate`: recomputes every constraint of a saved solution.json and
/// prints the per-constraint slacks. Exit 0 iff everything passes at --tol.
inline int cmd_validate(const ValidateOptions& o, std::ostream& out, std::ostream& err) {
    try {
        if (!(o.tol >= 0.0)) throw UsageError("--tol must be nonnegative");
        const Json doc = parse_json_file(o.solution, "solution file");
        SystemConfig cfg;
        DeviceLayout layout;
        Solution sol;
        ChannelSet chans;
        try {
            cfg = validate_config(config_from_json(doc.at("config")));
            layout = layout_from_json(doc.at("devices"));
            check_layout(layout, cfg);
            sol = solution_from_json(doc.at("solution"));
            check_solution_shape(sol, cfg);
            chans = sample_channels(cfg);
        } catch (const std::exception& e) {
            throw UsageError(std::string("solution file does not match its config: ") + e.what());
        }
        const auto rep = verify_feasibility(sol, chans, cfg, layout, o.tol);
        write_feasibility_csv(out, rep);
        if (rep.passed()) {
            out << "all constraints pass at tol " << o.tol << '\n';
            return exit_ok;
        }
        for (const auto& name : rep.failed_constraints()) {
            err << "violated: " << name << " (" << describe_constraint(name) << "), worst slack "
                << rep.worst_slack(name) << '\n';
        }
        return exit_failure;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    }
}

} // namespace uavfd::cli
