// Copyright 2026 The macrobell Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// macrobell command-line driver. Logic lives in cli.hpp.

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "cli.hpp"

namespace {

using macrobell::cli::json;

// Registers --name on sub; a given value lands in overrides[section][key].
template <typename T>
void override_flag(CLI::App *sub, json &overrides, const std::string &name, const std::string &section,
                   const std::string &key, const std::string &help) {
    sub->add_option_function<T>(
        name, [&overrides, section, key](const T &v) { overrides[section][key] = v; }, help);
}

void strategy_flag(CLI::App *sub, json &overrides, const std::string &section) {
    override_flag<std::string>(sub, overrides, "--strategy", section, "strategy",
                               "preset: chsh, zeros, ones, coin, independent");
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"macrobell: Bell tests with macroscopic measurements"};
    app.footer("Precedence: defaults < --config file < flags. Exit codes: 0 ok, 2 config error, 3 numeric failure.");
    app.set_version_flag("--version", std::string(macrobell::kVersion));
    app.require_subcommand(1);

    macrobell::cli::Invocation inv;
    std::optional<uint64_t> seed;
    unsigned threads = 0;

    auto common = [&](CLI::App *sub) {
        sub->add_option("--config", inv.config_path, "JSON configuration file")->check(CLI::ExistingFile);
        sub->add_option("--seed", seed, "master seed (64-bit)");
        sub->add_option("--out", inv.out_path, "write the report artifact here");
        sub->add_option("--format", inv.format, "artifact format")->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--threads", threads, "worker threads (0 = hardware)");
    };

    auto *bell = app.add_subcommand("bell", "macroscopic Bell experiment for one strategy");
    common(bell);
    strategy_flag(bell, inv.overrides, "bell");
    override_flag<int64_t>(bell, inv.overrides, "--n-pairs", "bell", "n_pairs", "pairs per trial (N)");
    override_flag<int64_t>(bell, inv.overrides, "--trials", "bell", "trials_per_setting", "trials per setting pair");
    override_flag<double>(bell, inv.overrides, "--epsilon", "bell", "epsilon", "noise level");
    override_flag<std::string>(bell, inv.overrides, "--noise-mode", "bell", "noise_mode", "independent | common");
    override_flag<int64_t>(bell, inv.overrides, "--bootstrap", "bell", "bootstrap", "bootstrap resamples");

    auto *sweep = app.add_subcommand("sweep", "parameter sweep (gamma, lambda, epsilon or theta)");
    sweep->footer(
        "CSV columns by --param:\n"
        "  gamma, lambda  gamma,lambda,M,N_eff,B_hat,std_err   (source settings from the spdc table)\n"
        "  epsilon        epsilon,B_hat,std_err,classical_bound,quantum_lower_bound   (bell table)\n"
        "  theta          theta,p_even\n"
        "An explicit \"values\" array in the sweep table replaces start/stop/step.");
    common(sweep);
    override_flag<std::string>(sweep, inv.overrides, "--param", "sweep", "param", "gamma | lambda | epsilon | theta");
    override_flag<double>(sweep, inv.overrides, "--start", "sweep", "start", "first grid value");
    override_flag<double>(sweep, inv.overrides, "--stop", "sweep", "stop", "last grid value");
    override_flag<double>(sweep, inv.overrides, "--step", "sweep", "step", "grid step");

    auto *spdc = app.add_subcommand("spdc", "down-conversion source experiment");
    common(spdc);
    strategy_flag(spdc, inv.overrides, "spdc");
    override_flag<int64_t>(spdc, inv.overrides, "--m", "spdc", "m_incident", "incident photons per trial");
    override_flag<double>(spdc, inv.overrides, "--lambda", "spdc", "lambda", "conversion probability");
    override_flag<double>(spdc, inv.overrides, "--gamma", "spdc", "gamma", "detection efficiency");
    override_flag<int64_t>(spdc, inv.overrides, "--trials", "spdc", "trials_per_setting", "trials per setting pair");
    override_flag<int64_t>(spdc, inv.overrides, "--bootstrap", "spdc", "bootstrap", "bootstrap resamples");

    auto *game = app.add_subcommand("game", "play the macroscopic nonlocal game");
    common(game);
    strategy_flag(game, inv.overrides, "game");
    override_flag<int64_t>(game, inv.overrides, "--n-players", "game", "n_players", "players per side (N)");
    override_flag<int64_t>(game, inv.overrides, "--rounds", "game", "rounds", "rounds to play");

    auto *posner = app.add_subcommand("posner", "Posner-molecule binding curve and game");
    common(posner);
    override_flag<double>(posner, inv.overrides, "--theta-start", "posner", "theta_start", "first angle");
    override_flag<double>(posner, inv.overrides, "--theta-stop", "posner", "theta_stop", "last angle");
    override_flag<int64_t>(posner, inv.overrides, "--theta-count", "posner", "theta_count", "number of angles");

    auto *tails = app.add_subcommand("tails", "Gaussian tail maximization and game scores");
    common(tails);
    override_flag<double>(tails, inv.overrides, "--n", "tails", "n", "N (caps scale with N)");
    override_flag<double>(tails, inv.overrides, "--var-cap", "tails", "var_cap", "variance cap / N");
    override_flag<double>(tails, inv.overrides, "--cov-cap", "tails", "cov_cap", "covariance cap / N");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : macrobell::cli::kExitConfig;
    }

    inv.command = app.get_subcommands().front()->get_name();
    inv.workers = threads;
    if (seed) inv.overrides["seed"] = *seed;
    return macrobell::cli::execute(inv, std::cout, std::cerr);
}
