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

// uavfd command-line front end:
//
//   uavfd run      --config cfg.json --scheme optimized --out dir/
//   uavfd sweep    --config cfg.json --t-min 0.5 --t-max 3 --t-step 0.5 --out dir/
//   uavfd validate --solution dir/solution.json --tol 1e-6

#include <iostream>

#include <CLI11.hpp>

#include "uavfd/cli.hpp"

namespace {

void add_common(CLI::App* cmd, uavfd::cli::CommonOptions& o) {
    cmd->add_option("--config", o.config, "JSON config (keys mirror SystemConfig); built-in defaults if omitted")
        ->check(CLI::ExistingFile);
    cmd->add_option("--seed", o.seed, "Channel seed, overrides the config");
    auto* dev = cmd->add_option("--devices", o.devices, "Device layout CSV with header device,x,y");
    cmd->add_option("--random-devices", o.random_devices, "Draw K uniform device positions from this seed")
        ->excludes(dev);
    cmd->add_option("--out", o.out, "Output directory (created if missing)")->required();
    cmd->add_flag("--force", o.force, "Overwrite existing output files");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Energy-minimizing trajectory and WPT planner for a full-duplex MIMO UAV"};
    app.require_subcommand(1);

    uavfd::cli::RunOptions run;
    auto* run_cmd = app.add_subcommand("run", "Plan one scheme and write trajectory, convergence and solution files");
    add_common(run_cmd, run);
    run_cmd->add_option("--scheme", run.scheme, "optimized, benchmark1 or benchmark2")
        ->check(CLI::IsMember({"optimized", "benchmark1", "benchmark2"}));
    run_cmd->add_flag("--dump-channels", run.dump_channels, "Also write the sampled channels to channels.csv");

    uavfd::cli::SweepOptions sweep;
    auto* sweep_cmd = app.add_subcommand("sweep", "Energy of all schemes over a grid of moving times");
    add_common(sweep_cmd, sweep);
    sweep_cmd->add_option("--t-min", sweep.t_min, "Smallest moving time [s]");
    sweep_cmd->add_option("--t-max", sweep.t_max, "Largest moving time [s]");
    sweep_cmd->add_option("--t-step", sweep.t_step, "Moving-time step [s]");

    uavfd::cli::ValidateOptions validate;
    auto* validate_cmd = app.add_subcommand("validate", "Re-check every constraint of a saved solution.json");
    validate_cmd->add_option("--solution", validate.solution, "solution.json written by run")->required();
    validate_cmd->add_option("--tol", validate.tol, "Relative tolerance per constraint");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : uavfd::cli::exit_usage;
    }

    if (*run_cmd) return uavfd::cli::cmd_run(run, std::cout, std::cerr);
    if (*sweep_cmd) return uavfd::cli::cmd_sweep(sweep, std::cout, std::cerr);
    return uavfd::cli::cmd_validate(validate, std::cout, std::cerr);
}
