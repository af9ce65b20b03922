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

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nfsa/channel_model.hpp"

namespace nfsa
{

// One array entry of an experiment config. Either a builder recipe (kind +
// dimensions) or, for nsa, an optional layout file produced by
// optimize-positions; without a file the positions are optimized on the fly
// from the experiment seed.
struct ArraySpec
{
    std::string kind = "usa";
    int n_antennas = 33;
    double sparsity = 10.0;
    double wavelength = 0.01;
    double panel_length = 0.0;   // 0 derives p (N - 1) lambda / 2
    std::string layout_file; // optional, nsa only
};

struct SweepSpec
{
    std::string variable; // snr_db | users | r | theta2 | sparsity
    std::vector<double> values;
};

struct ProbeGrid
{
    double lo = 0.0;
    double hi = 0.0;
    int count = 0;
};

struct OptimizerSpec
{
    int s_samples = 64;
    int t_samples = 129;
    int iterations = 100;
};

struct DictionarySpec
{
    int s_samples = 0; // 0 selects the minimum admissible size
    int t_samples = 0;
};

// Parsed and validated experiment description. `raw` keeps the canonical
// JSON (with overrides applied) used for the manifest hash.
struct ExperimentConfig
{
    std::string experiment;
    std::vector<ArraySpec> arrays;
    ChannelConfig channel;
    double r_min_coverage = 10.0; // defines b_max = 1 / (2 r_min_coverage)
    double snr_db = 20.0;
    int users = 28;
    int trials = 0; // 0 selects the per-experiment default
    std::uint64_t seed = 0;
    bool seed_given = false;
    std::string output_dir = ".";

    SdaPoint focus;          // beam experiments
    ProbeGrid probe_b;       // beam-map rows
    ProbeGrid probe_theta;   // beam-map columns / cross-section ignored
    SweepSpec sweep;         // sweep experiments
    OptimizerSpec optimizer; // optimize-positions and on-the-fly nsa
    DictionarySpec dictionary;
    std::string csi = "perfect"; // perfect | sda-omp | sda-isrce
    int max_paths = 0;           // 0 selects 2 * channel.paths
    std::string raw;
};

struct RunOverrides
{
    std::optional<std::uint64_t> seed;
    std::optional<int> trials;
    std::optional<std::string> out_dir;
};

struct RunArtifacts
{
    std::vector<std::string> files; // absolute paths of the data artifacts
    std::string manifest_path;
};

// Parses and validates; throws std::invalid_argument listing every invalid
// field. A missing seed defaults to 0 with a warning recorded in the config.
ExperimentConfig load_config(const std::string& path, const RunOverrides& overrides = {});

// Human-readable dry-run report: derived geometry, dictionary sizes,
// feasibility notes. Used by the `validate` subcommand.
std::string describe_config(const ExperimentConfig& config);

// Executes one experiment and writes its CSV artifacts plus a manifest JSON
// (tool version, mirrored-figure tag, config hash, seed). Writes are
// atomic (temp file + rename) and partial outputs are removed on failure.
// Identical configs and seeds produce byte-identical artifacts.
RunArtifacts run_experiment(const ExperimentConfig& config);

// Mirrored-figure tag recorded in the manifest for an experiment name.
std::string figure_tag(const std::string& experiment);

// Shortest round-trip decimal rendering used in every CSV artifact.
std::string format_double(double value);

} // namespace nfsa
