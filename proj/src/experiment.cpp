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

#include "nfsa/experiment.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "nfsa/beam_analysis.hpp"
#include "nfsa/multiuser_link.hpp"
#include "nfsa/position_optimizer.hpp"
#include "nfsa/sparse_estimation.hpp"

#ifndef NFSA_VERSION
#define NFSA_VERSION "0.0.0"
#endif

namespace nfsa
{

namespace
{

using nlohmann::json;

const std::map<std::string, std::string>& figure_map()
{
    static const std::map<std::string, std::string> map = {
        {"beam-map", "fig2"},
        {"beam-cross-section", "fig3"},
        {"optimize-positions", "fig3-nsa"},
        {"nmse-sweep", "fig4"},
        {"sumrate-snr", "fig5"},
        {"sumrate-users", "fig7"},
        {"sumrate-distance", "fig8"},
        {"two-user-angle-sweep", "fig9"},
        {"sumrate-spacing", "fig10"},
    };
    return map;
}

std::uint64_t fnv1a64(const std::string& text)
{
    std::uint64_t hash = 1469598103934665603ULL;
    for (unsigned char byte : text)
    {
        hash ^= byte;
        hash *= 1099511628211ULL;
    }
    return hash;
}

std::string hex64(std::uint64_t value)
{
    char buffer[17];
    std::snprintf(buffer, sizeof buffer, "%016llx", static_cast<unsigned long long>(value));
    return buffer;
}

// Collects every violation so the diagnostics list all invalid fields.
class Problems
{
  public:
    void add(const std::string& message) { messages_.push_back(message); }

    void raise_if_any() const
    {
        if (messages_.empty())
        {
            return;
        }
        std::string combined = "invalid config:";
        for (const std::string& message : messages_)
        {
            combined += "\n  - " + message;
        }
        throw std::invalid_argument(combined);
    }

  private:
    std::vector<std::string> messages_;
};

bool is_sweep_experiment(const std::string& name)
{
    return name == "nmse-sweep" || name == "sumrate-snr" || name == "sumrate-users" ||
           name == "sumrate-distance" || name == "two-user-angle-sweep" ||
           name == "sumrate-spacing";
}

std::string sweep_variable_for(const std::string& experiment)
{
    if (experiment == "nmse-sweep" || experiment == "sumrate-snr")
    {
        return "snr_db";
    }
    if (experiment == "sumrate-users")
    {
        return "users";
    }
    if (experiment == "sumrate-distance")
    {
        return "r";
    }
    if (experiment == "two-user-angle-sweep")
    {
        return "theta2";
    }
    return "sparsity";
}

int default_trials(const std::string& experiment)
{
    if (experiment == "nmse-sweep")
    {
        return 200;
    }
    if (is_sweep_experiment(experiment) || experiment == "two-user-angle-sweep")
    {
        return 100;
    }
    return 0;
}

double number_field(const json& doc, const std::string& key, double fallback, Problems& problems)
{
    if (!doc.contains(key))
    {
        return fallback;
    }
    if (!doc[key].is_number())
    {
        problems.add(key + ": must be a number");
        return fallback;
    }
    return doc[key].get<double>();
}

int int_field(const json& doc, const std::string& key, int fallback, Problems& problems)
{
    if (!doc.contains(key))
    {
        return fallback;
    }
    if (!doc[key].is_number_integer())
    {
        problems.add(key + ": must be an integer");
        return fallback;
    }
    return doc[key].get<int>();
}

std::string string_field(const json& doc, const std::string& key, const std::string& fallback,
                         Problems& problems)
{
    if (!doc.contains(key))
    {
        return fallback;
    }
    if (!doc[key].is_string())
    {
        problems.add(key + ": must be a string");
        return fallback;
    }
    return doc[key].get<std::string>();
}

void check_known_keys(const json& doc, const std::set<std::string>& known, const std::string& where,
                      Problems& problems)
{
    for (const auto& item : doc.items())
    {
        if (known.find(item.key()) == known.end())
        {
            problems.add(where + ": unknown field '" + item.key() + "'");
        }
    }
}

ArraySpec parse_array(const json& doc, const std::string& where, Problems& problems)
{
    ArraySpec spec;
    if (!doc.is_object())
    {
        problems.add(where + ": must be an object");
        return spec;
    }
    check_known_keys(doc,
                     {"kind", "n_antennas", "sparsity", "wavelength", "panel_length",
                      "layout_file"},
                     where, problems);
    spec.kind = string_field(doc, "kind", spec.kind, problems);
    spec.n_antennas = int_field(doc, "n_antennas", spec.n_antennas, problems);
    spec.sparsity = number_field(doc, "sparsity", spec.sparsity, problems);
    spec.wavelength = number_field(doc, "wavelength", spec.wavelength, problems);
    spec.panel_length = number_field(doc, "panel_length", spec.panel_length, problems);
    spec.layout_file = string_field(doc, "layout_file", spec.layout_file, problems);

    if (spec.kind != "usa" && spec.kind != "nsa" && spec.kind != "hula" && spec.kind != "uca")
    {
        problems.add(where + ".kind: expected usa, nsa, hula or uca");
        return spec;
    }
    if (spec.kind == "hula")
    {
        spec.sparsity = 1.0;
    }
    if (spec.wavelength <= 0.0)
    {
        problems.add(where + ".wavelength: must be positive");
    }
    if (spec.kind != "uca" && (spec.n_antennas < 3 || spec.n_antennas % 2 == 0))
    {
        problems.add(where + ".n_antennas: linear kinds need an odd count >= 3");
    }
    if (spec.kind == "uca" && spec.n_antennas < 3)
    {
        problems.add(where + ".n_antennas: must be >= 3");
    }
    if ((spec.kind == "usa" || spec.kind == "nsa") && spec.sparsity < 1.0)
    {
        problems.add(where + ".sparsity: must be >= 1");
    }
    if (!spec.layout_file.empty() && spec.kind != "nsa")
    {
        problems.add(where + ".layout_file: only nsa layouts can be loaded from file");
    }

    const double derived = spec.sparsity * (spec.n_antennas - 1) * spec.wavelength / 2.0;
    if (spec.panel_length > 0.0)
    {
        if (spec.kind == "usa" || spec.kind == "hula")
        {
            if (std::abs(spec.panel_length - derived) > 1e-9 * std::max(1.0, derived))
            {
                problems.add(where + ".panel_length: inconsistent with sparsity for a uniform "
                                     "array");
            }
        }
        if ((spec.n_antennas - 1) * spec.wavelength / 2.0 > spec.panel_length)
        {
            problems.add(where +
                         ".panel_length: infeasible, shorter than the minimum-spacing span");
        }
    }
    else if (spec.kind != "uca")
    {
        spec.panel_length = derived;
    }
    return spec;
}

json canonical_array(const ArraySpec& spec)
{
    json doc;
    doc["kind"] = spec.kind;
    doc["n_antennas"] = spec.n_antennas;
    doc["sparsity"] = spec.sparsity;
    doc["wavelength"] = spec.wavelength;
    doc["panel_length"] = spec.panel_length;
    doc["layout_file"] = spec.layout_file;
    return doc;
}

// Unit transmit power: SNR [dB] fixes the noise variance directly.
double sigma_from_snr(double snr_db)
{
    return std::pow(10.0, -snr_db / 10.0);
}

// Linspace including both endpoints; count 1 collapses to lo.
std::vector<double> linspace(const ProbeGrid& grid)
{
    std::vector<double> values(grid.count);
    if (grid.count == 1)
    {
        values[0] = grid.lo;
        return values;
    }
    for (int i = 0; i < grid.count; ++i)
    {
        values[i] = grid.lo + (grid.hi - grid.lo) * i / (grid.count - 1);
    }
    return values;
}

class CsvWriter
{
  public:
    CsvWriter(std::string path, std::string header) : path_(std::move(path))
    {
        body_ = std::move(header);
        body_ += '\n';
    }

    void row(const std::vector<std::string>& cells)
    {
        for (std::size_t i = 0; i < cells.size(); ++i)
        {
            if (i > 0)
            {
                body_ += ',';
            }
            body_ += cells[i];
        }
        body_ += '\n';
    }

    // Atomic publish: written to a temp file, then renamed over the target.
    void commit()
    {
        const std::string temp = path_ + ".tmp";
        {
            std::ofstream out(temp, std::ios::binary);
            if (!out)
            {
                throw std::runtime_error("cannot open '" + temp + "' for writing");
            }
            out << body_;
            if (!out)
            {
                throw std::runtime_error("failed writing '" + temp + "'");
            }
        }
        std::filesystem::rename(temp, path_);
    }

    const std::string& path() const { return path_; }

  private:
    std::string path_;
    std::string body_;
};

void write_text_atomic(const std::string& path, const std::string& body)
{
    const std::string temp = path + ".tmp";
    {
        std::ofstream out(temp, std::ios::binary);
        if (!out)
        {
            throw std::runtime_error("cannot open '" + temp + "' for writing");
        }
        out << body;
        if (!out)
        {
            throw std::runtime_error("failed writing '" + temp + "'");
        }
    }
    std::filesystem::rename(temp, path);
}

struct ResolvedArrays
{
    std::vector<ArrayLayout> layouts;
    std::vector<OptimizerState> states; // filled for freshly optimized nsa entries
};

// Builds every configured layout; nsa entries come from their layout file
// when given, otherwise from a seeded optimizer run.
ResolvedArrays resolve_arrays(const ExperimentConfig& config, double b_max)
{
    ResolvedArrays resolved;
    for (std::size_t i = 0; i < config.arrays.size(); ++i)
    {
        const ArraySpec& spec = config.arrays[i];
        OptimizerState state;
        ArrayLayout layout;
        if (spec.kind == "usa")
        {
            layout = build_usa(spec.n_antennas, spec.sparsity, spec.wavelength);
        }
        else if (spec.kind == "hula")
        {
            layout = build_hula(spec.n_antennas, spec.wavelength);
        }
        else if (spec.kind == "uca")
        {
            layout = build_uca(spec.n_antennas, spec.wavelength);
        }
        else if (!spec.layout_file.empty())
        {
            layout = load_layout(spec.layout_file);
        }
        else
        {
            const DiffGrid grid = build_diff_grid(config.optimizer.s_samples,
                                                  config.optimizer.t_samples, b_max);
            Rng rng = Rng::stream(config.seed, 0xA0, static_cast<std::uint64_t>(i));
            ScaResult sca = sca_apo(spec.n_antennas, spec.panel_length, spec.wavelength, grid,
                                    config.optimizer.iterations, rng);
            layout = std::move(sca.layout);
            state = std::move(sca.state);
        }
        resolved.layouts.push_back(std::move(layout));
        resolved.states.push_back(std::move(state));
    }
    return resolved;
}

std::string array_file_tag(const ExperimentConfig& config, std::size_t index)
{
    const std::string kind = config.arrays[index].kind;
    if (config.arrays.size() == 1)
    {
        return kind;
    }
    return kind + "_" + std::to_string(index);
}

ChannelConfig channel_at_distance(ChannelConfig base, double distance)
{
    base.r_min = distance;
    base.r_max = distance;
    return base;
}

int resolved_max_paths(const ExperimentConfig& config)
{
    return config.max_paths > 0 ? config.max_paths : 2 * config.channel.paths;
}

CsiMode csi_mode(const std::string& name)
{
    if (name == "perfect")
    {
        return CsiMode::perfect;
    }
    if (name == "sda-omp")
    {
        return CsiMode::omp;
    }
    return CsiMode::isrce;
}

} // namespace

std::string figure_tag(const std::string& experiment)
{
    const auto& map = figure_map();
    const auto found = map.find(experiment);
    if (found == map.end())
    {
        throw std::invalid_argument("experiment: unknown name '" + experiment + "'");
    }
    return found->second;
}

std::string format_double(double value)
{
    char buffer[32];
    const auto result = std::to_chars(buffer, buffer + sizeof buffer, value);
    return std::string(buffer, result.ptr);
}

ExperimentConfig load_config(const std::string& path, const RunOverrides& overrides)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
    {
        throw std::invalid_argument("config: cannot open '" + path + "'");
    }
    json doc;
    try
    {
        doc = json::parse(in);
    }
    catch (const json::parse_error& error)
    {
        throw std::invalid_argument(std::string("config: invalid JSON: ") + error.what());
    }

    Problems problems;
    if (!doc.is_object())
    {
        throw std::invalid_argument("config: document must be a JSON object");
    }
    check_known_keys(doc,
                     {"experiment", "arrays", "channel", "r_min_coverage", "snr_db", "users",
                      "trials", "seed", "output_dir", "focus", "probe_b", "probe_theta", "sweep",
                      "optimizer", "dictionary", "csi", "max_paths"},
                     "config", problems);

    ExperimentConfig config;
    config.experiment = string_field(doc, "experiment", "", problems);
    if (figure_map().find(config.experiment) == figure_map().end())
    {
        problems.add("experiment: expected one of beam-map, beam-cross-section, "
                     "optimize-positions, nmse-sweep, sumrate-snr, sumrate-users, "
                     "sumrate-distance, two-user-angle-sweep, sumrate-spacing");
        problems.raise_if_any();
    }

    if (!doc.contains("arrays") || !doc["arrays"].is_array() || doc["arrays"].empty())
    {
        problems.add("arrays: required non-empty array");
    }
    else
    {
        for (std::size_t i = 0; i < doc["arrays"].size(); ++i)
        {
            config.arrays.push_back(
                parse_array(doc["arrays"][i], "arrays[" + std::to_string(i) + "]", problems));
        }
    }

    if (doc.contains("channel"))
    {
        const json& channel = doc["channel"];
        if (!channel.is_object())
        {
            problems.add("channel: must be an object");
        }
        else
        {
            check_known_keys(channel, {"paths", "ricean_db", "theta_range", "r_range"}, "channel",
                             problems);
            config.channel.paths = int_field(channel, "paths", config.channel.paths, problems);
            config.channel.ricean_db =
                number_field(channel, "ricean_db", config.channel.ricean_db, problems);
            const auto range = [&](const char* key, double& lo, double& hi) {
                if (!channel.contains(key))
                {
                    return;
                }
                const json& value = channel[key];
                if (!value.is_array() || value.size() != 2 || !value[0].is_number() ||
                    !value[1].is_number())
                {
                    problems.add(std::string("channel.") + key + ": must be [lo, hi]");
                    return;
                }
                lo = value[0].get<double>();
                hi = value[1].get<double>();
            };
            range("theta_range", config.channel.theta_min, config.channel.theta_max);
            range("r_range", config.channel.r_min, config.channel.r_max);
        }
    }
    if (config.channel.paths < 1)
    {
        problems.add("channel.paths: must be >= 1");
    }
    if (!(config.channel.r_min > 0.0) || config.channel.r_min > config.channel.r_max)
    {
        problems.add("channel.r_range: requires 0 < lo <= hi");
    }
    if (config.channel.theta_min > config.channel.theta_max ||
        config.channel.theta_min < -1.0 || config.channel.theta_max > 1.0)
    {
        problems.add("channel.theta_range: requires -1 <= lo <= hi <= 1");
    }

    config.r_min_coverage =
        number_field(doc, "r_min_coverage", config.channel.r_min, problems);
    if (!(config.r_min_coverage > 0.0))
    {
        problems.add("r_min_coverage: must be positive");
    }
    const double b_max =
        config.r_min_coverage > 0.0 ? 1.0 / (2.0 * config.r_min_coverage) : 0.05;

    config.snr_db = number_field(doc, "snr_db", config.snr_db, problems);
    config.users = int_field(doc, "users", config.users, problems);
    if (config.users < 1)
    {
        problems.add("users: must be >= 1");
    }

    if (doc.contains("trials"))
    {
        config.trials = int_field(doc, "trials", 0, problems);
        if (config.trials < 0)
        {
            problems.add("trials: must be >= 0");
        }
    }
    else
    {
        config.trials = default_trials(config.experiment);
    }

    if (doc.contains("seed"))
    {
        if (!doc["seed"].is_number_unsigned() && !doc["seed"].is_number_integer())
        {
            problems.add("seed: must be a non-negative integer");
        }
        else if (doc["seed"].is_number_integer() && doc["seed"].get<long long>() < 0)
        {
            problems.add("seed: must be a non-negative integer");
        }
        else
        {
            config.seed = doc["seed"].get<std::uint64_t>();
            config.seed_given = true;
        }
    }
    config.output_dir = string_field(doc, "output_dir", config.output_dir, problems);

    config.focus = {b_max, 0.0};
    if (doc.contains("focus"))
    {
        const json& focus = doc["focus"];
        if (!focus.is_object())
        {
            problems.add("focus: must be an object");
        }
        else
        {
            check_known_keys(focus, {"b", "theta"}, "focus", problems);
            config.focus.b = number_field(focus, "b", config.focus.b, problems);
            config.focus.theta = number_field(focus, "theta", config.focus.theta, problems);
            if (config.focus.b < 0.0)
            {
                problems.add("focus.b: must be non-negative");
            }
        }
    }

    const auto parse_grid = [&](const char* key, ProbeGrid fallback) {
        ProbeGrid grid = fallback;
        if (!doc.contains(key))
        {
            return grid;
        }
        const json& value = doc[key];
        if (!value.is_object())
        {
            problems.add(std::string(key) + ": must be an object");
            return grid;
        }
        check_known_keys(value, {"lo", "hi", "count"}, key, problems);
        grid.lo = number_field(value, "lo", grid.lo, problems);
        grid.hi = number_field(value, "hi", grid.hi, problems);
        grid.count = int_field(value, "count", grid.count, problems);
        if (grid.count < 1)
        {
            problems.add(std::string(key) + ".count: must be >= 1");
        }
        if (grid.lo > grid.hi)
        {
            problems.add(std::string(key) + ": requires lo <= hi");
        }
        return grid;
    };
    config.probe_b = parse_grid("probe_b", {0.0, b_max, 101});
    config.probe_theta = parse_grid("probe_theta", {-1.0, 1.0, 201});

    if (doc.contains("sweep"))
    {
        const json& sweep = doc["sweep"];
        if (!sweep.is_object())
        {
            problems.add("sweep: must be an object");
        }
        else
        {
            check_known_keys(sweep, {"variable", "values"}, "sweep", problems);
            config.sweep.variable = string_field(sweep, "variable", "", problems);
            if (!sweep.contains("values") || !sweep["values"].is_array() ||
                sweep["values"].empty())
            {
                problems.add("sweep.values: required non-empty array of numbers");
            }
            else
            {
                for (const auto& value : sweep["values"])
                {
                    if (!value.is_number())
                    {
                        problems.add("sweep.values: must all be numbers");
                        break;
                    }
                    config.sweep.values.push_back(value.get<double>());
                }
            }
        }
    }
    if (is_sweep_experiment(config.experiment))
    {
        const std::string expected = sweep_variable_for(config.experiment);
        if (config.sweep.values.empty())
        {
            problems.add("sweep: required for " + config.experiment + " (variable '" + expected +
                         "')");
        }
        else if (config.sweep.variable != expected)
        {
            problems.add("sweep.variable: " + config.experiment + " sweeps '" + expected + "'");
        }
        for (double value : config.sweep.values)
        {
            if (expected == "users" && (value < 1.0 || value != std::floor(value)))
            {
                problems.add("sweep.values: user counts must be positive integers");
                break;
            }
            if (expected == "r" && value <= 0.0)
            {
                problems.add("sweep.values: distances must be positive");
                break;
            }
            if (expected == "theta2" && std::abs(value) >= 1.0)
            {
                problems.add("sweep.values: |theta2| must be below 1");
                break;
            }
            if (expected == "sparsity" && value < 1.0)
            {
                problems.add("sweep.values: sparsity values must be >= 1");
                break;
            }
        }
    }

    if (doc.contains("optimizer"))
    {
        const json& optimizer = doc["optimizer"];
        if (!optimizer.is_object())
        {
            problems.add("optimizer: must be an object");
        }
        else
        {
            check_known_keys(optimizer, {"s_samples", "t_samples", "iterations"}, "optimizer",
                             problems);
            config.optimizer.s_samples =
                int_field(optimizer, "s_samples", config.optimizer.s_samples, problems);
            config.optimizer.t_samples =
                int_field(optimizer, "t_samples", config.optimizer.t_samples, problems);
            config.optimizer.iterations =
                int_field(optimizer, "iterations", config.optimizer.iterations, problems);
        }
    }
    if (config.optimizer.s_samples < 1 || config.optimizer.t_samples < 1)
    {
        problems.add("optimizer: sample counts must be >= 1");
    }
    if (config.optimizer.iterations < 0)
    {
        problems.add("optimizer.iterations: must be >= 0");
    }

    if (doc.contains("dictionary"))
    {
        const json& dictionary = doc["dictionary"];
        if (!dictionary.is_object())
        {
            problems.add("dictionary: must be an object");
        }
        else
        {
            check_known_keys(dictionary, {"s_samples", "t_samples"}, "dictionary", problems);
            config.dictionary.s_samples =
                int_field(dictionary, "s_samples", config.dictionary.s_samples, problems);
            config.dictionary.t_samples =
                int_field(dictionary, "t_samples", config.dictionary.t_samples, problems);
        }
    }
    if (config.dictionary.s_samples < 0 || config.dictionary.t_samples < 0)
    {
        problems.add("dictionary: sample counts must be >= 0 (0 selects the minimum)");
    }

    config.csi = string_field(doc, "csi", config.csi, problems);
    if (config.csi != "perfect" && config.csi != "sda-omp" && config.csi != "sda-isrce")
    {
        problems.add("csi: expected perfect, sda-omp or sda-isrce");
    }
    config.max_paths = int_field(doc, "max_paths", config.max_paths, problems);
    if (config.max_paths < 0)
    {
        problems.add("max_paths: must be >= 0 (0 selects 2 * channel.paths)");
    }

    // Experiment-specific shape constraints.
    if (config.experiment == "optimize-positions")
    {
        for (std::size_t i = 0; i < config.arrays.size(); ++i)
        {
            if (config.arrays[i].kind != "nsa")
            {
                problems.add("arrays[" + std::to_string(i) +
                             "]: optimize-positions requires nsa entries");
            }
            if (!config.arrays[i].layout_file.empty())
            {
                problems.add("arrays[" + std::to_string(i) +
                             "].layout_file: optimize-positions always optimizes");
            }
        }
    }
    if (config.experiment == "beam-map" || config.experiment == "beam-cross-section" ||
        config.experiment == "nmse-sweep" || config.experiment == "two-user-angle-sweep" ||
        config.experiment == "sumrate-spacing")
    {
        for (std::size_t i = 0; i < config.arrays.size(); ++i)
        {
            if (config.arrays[i].kind == "uca")
            {
                problems.add("arrays[" + std::to_string(i) + "]: " + config.experiment +
                             " requires linear arrays");
            }
        }
    }
    if (config.experiment == "sumrate-spacing")
    {
        for (std::size_t i = 0; i < config.arrays.size(); ++i)
        {
            if (config.arrays[i].kind != "usa" && config.arrays[i].kind != "nsa")
            {
                problems.add("arrays[" + std::to_string(i) +
                             "]: sumrate-spacing sweeps usa or nsa kinds");
            }
            if (!config.arrays[i].layout_file.empty())
            {
                problems.add("arrays[" + std::to_string(i) +
                             "].layout_file: sumrate-spacing rebuilds layouts per sparsity");
            }
        }
    }
    if (config.experiment == "two-user-angle-sweep" && !(config.focus.b > 0.0))
    {
        problems.add("focus.b: two-user-angle-sweep needs a positive shared surrogate distance");
    }

    // Command-line overrides land before the canonical dump so the manifest
    // hash reflects what actually ran.
    if (overrides.seed)
    {
        config.seed = *overrides.seed;
        config.seed_given = true;
    }
    if (overrides.trials)
    {
        if (*overrides.trials < 0)
        {
            problems.add("trials override: must be >= 0");
        }
        config.trials = *overrides.trials;
    }
    if (overrides.out_dir)
    {
        config.output_dir = *overrides.out_dir;
    }

    problems.raise_if_any();

    json canonical;
    canonical["experiment"] = config.experiment;
    canonical["arrays"] = json::array();
    for (const ArraySpec& spec : config.arrays)
    {
        canonical["arrays"].push_back(canonical_array(spec));
    }
    canonical["channel"] = {{"paths", config.channel.paths},
                            {"ricean_db", config.channel.ricean_db},
                            {"theta_range", {config.channel.theta_min, config.channel.theta_max}},
                            {"r_range", {config.channel.r_min, config.channel.r_max}}};
    canonical["r_min_coverage"] = config.r_min_coverage;
    canonical["snr_db"] = config.snr_db;
    canonical["users"] = config.users;
    canonical["trials"] = config.trials;
    canonical["seed"] = config.seed;
    canonical["focus"] = {{"b", config.focus.b}, {"theta", config.focus.theta}};
    canonical["probe_b"] = {{"lo", config.probe_b.lo},
                            {"hi", config.probe_b.hi},
                            {"count", config.probe_b.count}};
    canonical["probe_theta"] = {{"lo", config.probe_theta.lo},
                                {"hi", config.probe_theta.hi},
                                {"count", config.probe_theta.count}};
    canonical["sweep"] = {{"variable", config.sweep.variable}, {"values", config.sweep.values}};
    canonical["optimizer"] = {{"s_samples", config.optimizer.s_samples},
                              {"t_samples", config.optimizer.t_samples},
                              {"iterations", config.optimizer.iterations}};
    canonical["dictionary"] = {{"s_samples", config.dictionary.s_samples},
                               {"t_samples", config.dictionary.t_samples}};
    canonical["csi"] = config.csi;
    canonical["max_paths"] = config.max_paths;
    config.raw = canonical.dump();
    return config;
}

std::string describe_config(const ExperimentConfig& config)
{
    std::ostringstream out;
    out << "experiment: " << config.experiment << " (mirrors " << figure_tag(config.experiment)
        << ")\n";
    if (!config.seed_given)
    {
        out << "warning: seed not given; defaulting to 0\n";
    }
    out << "seed: " << config.seed << "\n";
    out << "trials: " << config.trials << "\n";
    const double b_max = 1.0 / (2.0 * config.r_min_coverage);
    out << "coverage: r_min " << format_double(config.r_min_coverage) << " m, b_max "
        << format_double(b_max) << " 1/m\n";

    for (std::size_t i = 0; i < config.arrays.size(); ++i)
    {
        const ArraySpec& spec = config.arrays[i];
        out << "array[" << i << "]: kind " << spec.kind << ", N " << spec.n_antennas;
        if (spec.kind == "uca")
        {
            const ArrayLayout layout = build_uca(spec.n_antennas, spec.wavelength);
            const GeometrySummary geometry = geometry_summary(layout, config.r_min_coverage);
            out << ", diameter " << format_double(layout.panel_length) << " m";
            out << ", rayleigh " << format_double(geometry.rayleigh_distance) << " m\n";
            continue;
        }
        const double panel = spec.panel_length > 0.0
                                 ? spec.panel_length
                                 : spec.sparsity * (spec.n_antennas - 1) * spec.wavelength / 2.0;
        const double sparsity = 2.0 * panel / ((spec.n_antennas - 1) * spec.wavelength);
        out << ", p " << format_double(sparsity) << ", D " << format_double(panel) << " m";
        // Same evaluation order as geometry_summary so the report matches it
        // digit for digit.
        const double rayleigh = panel / spec.wavelength * panel * 2.0;
        const double near_bound = 0.62 * std::sqrt(panel * panel * panel / spec.wavelength);
        out << ", rayleigh " << format_double(rayleigh) << " m, near bound "
            << format_double(near_bound) << " m\n";
        if (config.experiment == "nmse-sweep")
        {
            if (spec.kind == "usa" || spec.kind == "hula")
            {
                const double n = spec.n_antennas;
                const double depth =
                    std::min(14.0 / (spec.wavelength * sparsity * sparsity * n * n), b_max);
                const int s_min = static_cast<int>(std::ceil(b_max / depth - 1e-9));
                out << "  dictionary minimum: S " << s_min << ", T " << spec.n_antennas << "\n";
            }
            else
            {
                out << "  dictionary minimum: measured after the layout is available\n";
            }
        }
    }
    if (!config.sweep.values.empty())
    {
        out << "sweep: " << config.sweep.variable << " over " << config.sweep.values.size()
            << " values\n";
    }
    out << "output_dir: " << config.output_dir << "\n";
    return out.str();
}

namespace
{

void run_beam_map(const ExperimentConfig& config, const ResolvedArrays& arrays,
                  const std::filesystem::path& dir, std::vector<std::string>& outputs)
{
    const std::vector<double> b_values = linspace(config.probe_b);
    const std::vector<double> theta_values = linspace(config.probe_theta);
    for (std::size_t i = 0; i < arrays.layouts.size(); ++i)
    {
        CsvWriter csv((dir / ("beam_map_" + array_file_tag(config, i) + ".csv")).string(),
                      "b,theta,abs_gain");
        for (double b : b_values)
        {
            for (double theta : theta_values)
            {
                const double gain =
                    std::abs(beam_gain_exact(arrays.layouts[i], config.focus, {b, theta}));
                csv.row({format_double(b), format_double(theta), format_double(gain)});
            }
        }
        csv.commit();
        outputs.push_back(csv.path());
    }
}

void run_cross_section(const ExperimentConfig& config, const ResolvedArrays& arrays,
                       const std::filesystem::path& dir, std::vector<std::string>& outputs)
{
    const std::vector<double> b_values = linspace(config.probe_b);
    for (std::size_t i = 0; i < arrays.layouts.size(); ++i)
    {
        const ArrayLayout& layout = arrays.layouts[i];
        const bool uniform = layout.kind == ArrayKind::usa || layout.kind == ArrayKind::hula;
        CsvWriter csv((dir / ("cross_section_" + array_file_tag(config, i) + ".csv")).string(),
                      "b,abs_gain,abs_gain_model");
        for (double b : b_values)
        {
            const double exact =
                std::abs(beam_gain_exact(layout, config.focus, {b, config.focus.theta}));
            std::string model;
            if (uniform)
            {
                model = format_double(distance_cross_section(
                    layout.sparsity, layout.size(), layout.wavelength, config.focus, b));
            }
            csv.row({format_double(b), format_double(exact), model});
        }
        csv.commit();
        outputs.push_back(csv.path());
    }
}

void run_optimize(const ExperimentConfig& config, const ResolvedArrays& arrays,
                  const std::filesystem::path& dir, std::vector<std::string>& outputs)
{
    for (std::size_t i = 0; i < arrays.layouts.size(); ++i)
    {
        const std::string tag =
            config.arrays.size() == 1 ? std::string("nsa") : "nsa_" + std::to_string(i);
        const std::string layout_path = (dir / (tag + "_layout.json")).string();
        write_text_atomic(layout_path, layout_to_json(arrays.layouts[i]));
        outputs.push_back(layout_path);

        const OptimizerState& state = arrays.states[i];
        CsvWriter csv((dir / (tag + "_log.csv")).string(), "q,h,chi");
        for (std::size_t q = 0; q < state.objective_history.size(); ++q)
        {
            const std::string chi =
                q == 0 ? std::string() : format_double(state.chi_history[q - 1]);
            csv.row({std::to_string(q), format_double(state.objective_history[q]), chi});
        }
        csv.commit();
        outputs.push_back(csv.path());
    }
}

void run_nmse_sweep(const ExperimentConfig& config, const ResolvedArrays& arrays,
                    const std::filesystem::path& dir, std::vector<std::string>& outputs)
{
    const double b_max = 1.0 / (2.0 * config.r_min_coverage);
    const int max_paths = resolved_max_paths(config);
    for (std::size_t i = 0; i < arrays.layouts.size(); ++i)
    {
        const ArrayLayout& layout = arrays.layouts[i];
        const Dictionary dict = build_dictionary(layout, b_max, config.dictionary.s_samples,
                                                 config.dictionary.t_samples);
        const Dictionary farfield = build_farfield_dictionary(
            layout, static_cast<int>(std::lround(
                        std::max(2.0 * layout.size(), layout.sparsity * layout.size()))));
        CsvWriter csv((dir / ("nmse_" + array_file_tag(config, i) + ".csv")).string(),
                      "snr_db,method,nmse_db,trials");
        for (double snr_db : config.sweep.values)
        {
            const double sigma2 = sigma_from_snr(snr_db);
            const std::vector<NmseStat> stats = nmse_mc(layout, config.channel, sigma2,
                                                        config.trials, config.seed, dict,
                                                        farfield, max_paths);
            for (const NmseStat& stat : stats)
            {
                csv.row({format_double(snr_db), stat.method, format_double(stat.nmse_db),
                         std::to_string(stat.trials)});
            }
        }
        csv.commit();
        outputs.push_back(csv.path());
    }
}

McStat sweep_point_rate(const ExperimentConfig& config, const ArrayLayout& layout,
                        const ChannelConfig& channel, int users, double sigma2)
{
    const CsiMode mode = csi_mode(config.csi);
    if (mode == CsiMode::perfect || layout.kind == ArrayKind::uca)
    {
        return sum_rate_mc(layout, channel, users, sigma2, config.trials, config.seed);
    }
    const double b_max = 1.0 / (2.0 * config.r_min_coverage);
    const Dictionary dict = build_dictionary(layout, b_max, config.dictionary.s_samples,
                                             config.dictionary.t_samples);
    return sum_rate_mc_estimated(layout, channel, users, sigma2, config.trials, config.seed, dict,
                                 mode, resolved_max_paths(config));
}

void run_rate_sweep(const ExperimentConfig& config, const ResolvedArrays& arrays,
                    const std::filesystem::path& dir, std::vector<std::string>& outputs)
{
    CsvWriter csv((dir / "sum_rate.csv").string(),
                  "sweep_value,array_kind,metric,mean,stderr,trials");
    // trials = 0 is a dry run: the report stays empty and nothing is sampled.
    const std::vector<double> values = config.trials == 0 ? std::vector<double>{}
                                                          : config.sweep.values;
    for (double value : values)
    {
        for (std::size_t i = 0; i < arrays.layouts.size(); ++i)
        {
            const ArrayLayout& layout = arrays.layouts[i];
            McStat stat;
            if (config.experiment == "sumrate-snr")
            {
                stat = sweep_point_rate(config, layout, config.channel, config.users,
                                        sigma_from_snr(value));
            }
            else if (config.experiment == "sumrate-users")
            {
                stat = sweep_point_rate(config, layout, config.channel, static_cast<int>(value),
                                        sigma_from_snr(config.snr_db));
            }
            else if (config.experiment == "sumrate-distance")
            {
                stat = sweep_point_rate(config, layout, channel_at_distance(config.channel, value),
                                        config.users, sigma_from_snr(config.snr_db));
            }
            else
            {
                stat = two_user_sum_rate_mc(layout, config.focus.b, value,
                                            sigma_from_snr(config.snr_db), config.trials,
                                            config.seed);
            }
            csv.row({format_double(value), array_file_tag(config, i), "sum_rate",
                     format_double(stat.mean), format_double(stat.std_error),
                     std::to_string(stat.trials)});
        }
    }
    csv.commit();
    outputs.push_back(csv.path());
}

void run_spacing_sweep(const ExperimentConfig& config, const std::filesystem::path& dir,
                       std::vector<std::string>& outputs)
{
    const double b_max = 1.0 / (2.0 * config.r_min_coverage);
    const double sigma2 = sigma_from_snr(config.snr_db);
    CsvWriter csv((dir / "sum_rate.csv").string(),
                  "sweep_value,array_kind,metric,mean,stderr,trials");
    // trials = 0 is a dry run: the report stays empty and nothing is sampled.
    const std::size_t sweep_points = config.trials == 0 ? 0 : config.sweep.values.size();
    for (std::size_t v = 0; v < sweep_points; ++v)
    {
        const double sparsity = config.sweep.values[v];
        for (std::size_t i = 0; i < config.arrays.size(); ++i)
        {
            const ArraySpec& spec = config.arrays[i];
            ArrayLayout layout;
            if (spec.kind == "usa")
            {
                layout = build_usa(spec.n_antennas, sparsity, spec.wavelength);
            }
            else
            {
                const double panel = sparsity * (spec.n_antennas - 1) * spec.wavelength / 2.0;
                const DiffGrid grid = build_diff_grid(config.optimizer.s_samples,
                                                      config.optimizer.t_samples, b_max);
                Rng rng = Rng::stream(config.seed, 0xB0 + static_cast<std::uint64_t>(v),
                                      static_cast<std::uint64_t>(i));
                layout = sca_apo(spec.n_antennas, panel, spec.wavelength, grid,
                                 config.optimizer.iterations, rng)
                             .layout;
            }
            const McStat stat = sweep_point_rate(config, layout, config.channel, config.users,
                                                 sigma2);
            csv.row({format_double(sparsity), array_file_tag(config, i), "sum_rate",
                     format_double(stat.mean), format_double(stat.std_error),
                     std::to_string(stat.trials)});
        }
    }
    csv.commit();
    outputs.push_back(csv.path());
}

} // namespace

RunArtifacts run_experiment(const ExperimentConfig& config)
{
    const std::filesystem::path dir(config.output_dir);
    std::filesystem::create_directories(dir);
    const double b_max = 1.0 / (2.0 * config.r_min_coverage);

    RunArtifacts artifacts;
    try
    {
        if (config.experiment == "sumrate-spacing")
        {
            run_spacing_sweep(config, dir, artifacts.files);
        }
        else
        {
            const ResolvedArrays arrays = resolve_arrays(config, b_max);
            if (config.experiment == "beam-map")
            {
                run_beam_map(config, arrays, dir, artifacts.files);
            }
            else if (config.experiment == "beam-cross-section")
            {
                run_cross_section(config, arrays, dir, artifacts.files);
            }
            else if (config.experiment == "optimize-positions")
            {
                run_optimize(config, arrays, dir, artifacts.files);
            }
            else if (config.experiment == "nmse-sweep")
            {
                run_nmse_sweep(config, arrays, dir, artifacts.files);
            }
            else
            {
                run_rate_sweep(config, arrays, dir, artifacts.files);
            }
        }

        json manifest;
        manifest["tool"] = "nfsa";
        manifest["version"] = NFSA_VERSION;
        manifest["experiment"] = config.experiment;
        manifest["figure"] = figure_tag(config.experiment);
        manifest["config_hash"] = hex64(fnv1a64(config.raw));
        manifest["seed"] = config.seed;
        manifest["trials"] = config.trials;
        json names = json::array();
        for (const std::string& file : artifacts.files)
        {
            names.push_back(std::filesystem::path(file).filename().string());
        }
        manifest["outputs"] = std::move(names);
        artifacts.manifest_path = (dir / "manifest.json").string();
        write_text_atomic(artifacts.manifest_path, manifest.dump(2) + "\n");
    }
    catch (...)
    {
        // Never leave partial artifacts behind.
        for (const std::string& file : artifacts.files)
        {
            std::error_code ec;
            std::filesystem::remove(file, ec);
            std::filesystem::remove(file + ".tmp", ec);
        }
        throw;
    }
    return artifacts;
}

} // namespace nfsa
