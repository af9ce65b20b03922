// SPDX-License-Identifier: Apache-2.0
//
// nfsa - near-field multiuser communications toolkit for sparse antenna arrays
// Copyright (C) 2026 nfsa contributors
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

#include <cstdint>
#include <iostream>
#include <stdexcept>
#include <string>

#include <CLI/CLI.hpp>

#include "nfsa/experiment.hpp"

namespace
{

// 0: success, 1: runtime failure, 2: invalid configuration or usage.
constexpr int k_exit_ok = 0;
constexpr int k_exit_runtime = 1;
constexpr int k_exit_config = 2;

int run_command(const std::string& config_path, const nfsa::RunOverrides& overrides)
{
    const nfsa::ExperimentConfig config = nfsa::load_config(config_path, overrides);
    if (!config.seed_given)
    {
        std::cerr << "warning: seed not given; defaulting to 0\n";
    }
    const nfsa::RunArtifacts artifacts = nfsa::run_experiment(config);
    for (const std::string& file : artifacts.files)
    {
        std::cout << file << "\n";
    }
    std::cout << artifacts.manifest_path << "\n";
    return k_exit_ok;
}

int validate_command(const std::string& config_path)
{
    const nfsa::ExperimentConfig config = nfsa::load_config(config_path, {});
    std::cout << nfsa::describe_config(config);
    return k_exit_ok;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"near-field multiuser communications experiments on sparse antenna arrays"};
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::help);

    std::string run_config;
    std::uint64_t seed = 0;
    int trials = 0;
    std::string out_dir;
    CLI::App* run = app.add_subcommand("run", "execute an experiment config");
    run->add_option("config", run_config, "experiment config JSON")->required();
    CLI::Option* seed_opt = run->add_option("--seed", seed, "override the RNG seed");
    CLI::Option* trials_opt = run->add_option("--trials", trials, "override the trial count");
    CLI::Option* out_opt = run->add_option("--out", out_dir, "override the output directory");

    std::string validate_config;
    CLI::App* validate = app.add_subcommand("validate", "check a config and print derived values");
    validate->add_option("config", validate_config, "experiment config JSON")->required();

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& error)
    {
        const int code = app.exit(error);
        return code == 0 ? k_exit_ok : k_exit_config;
    }

    try
    {
        if (run->parsed())
        {
            nfsa::RunOverrides overrides;
            if (*seed_opt)
            {
                overrides.seed = seed;
            }
            if (*trials_opt)
            {
                overrides.trials = trials;
            }
            if (*out_opt)
            {
                overrides.out_dir = out_dir;
            }
            return run_command(run_config, overrides);
        }
        return validate_command(validate_config);
    }
    catch (const std::invalid_argument& error)
    {
        std::cerr << "error: " << error.what() << "\n";
        return k_exit_config;
    }
    catch (const std::exception& error)
    {
        std::cerr << "error: " << error.what() << "\n";
        return k_exit_runtime;
    }
}
