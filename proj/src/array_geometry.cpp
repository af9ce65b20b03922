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

#include "nfsa/array_geometry.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace nfsa
{

namespace
{

constexpr double k_pi = 3.14159265358979323846;

// Relative slack for floating-point feasibility checks on loaded layouts.
constexpr double k_tol = 1e-9;

void require(bool condition, const std::string& message)
{
    if (!condition)
    {
        throw std::invalid_argument(message);
    }
}

double derived_sparsity(double panel_length, int n_antennas, double wavelength)
{
    return 2.0 * panel_length / ((n_antennas - 1) * wavelength);
}

} // namespace

std::string to_string(ArrayKind kind)
{
    switch (kind)
    {
    case ArrayKind::usa:
        return "usa";
    case ArrayKind::nsa:
        return "nsa";
    case ArrayKind::hula:
        return "hula";
    case ArrayKind::uca:
        return "uca";
    }
    throw std::invalid_argument("array kind: unknown enumerator");
}

ArrayKind array_kind_from_string(const std::string& name)
{
    if (name == "usa")
    {
        return ArrayKind::usa;
    }
    if (name == "nsa")
    {
        return ArrayKind::nsa;
    }
    if (name == "hula")
    {
        return ArrayKind::hula;
    }
    if (name == "uca")
    {
        return ArrayKind::uca;
    }
    throw std::invalid_argument("array kind: expected one of usa, nsa, hula, uca, got '" + name +
                                "'");
}

ArrayLayout build_usa(int n_antennas, double sparsity, double wavelength)
{
    require(n_antennas >= 3 && n_antennas % 2 == 1, "build_usa: n_antennas must be odd and >= 3");
    require(sparsity >= 1.0, "build_usa: sparsity must be >= 1");
    require(wavelength > 0.0, "build_usa: wavelength must be positive");

    ArrayLayout layout;
    layout.kind = ArrayKind::usa;
    layout.wavelength = wavelength;
    layout.sparsity = sparsity;
    const int half = (n_antennas - 1) / 2;
    layout.panel_length = sparsity * (n_antennas - 1) * wavelength / 2.0;
    layout.x.resize(n_antennas);
    for (int n = -half; n <= half; ++n)
    {
        layout.x[n + half] = sparsity * n * wavelength / 2.0;
    }
    validate_layout(layout);
    return layout;
}

ArrayLayout build_hula(int n_antennas, double wavelength)
{
    ArrayLayout layout = build_usa(n_antennas, 1.0, wavelength);
    layout.kind = ArrayKind::hula;
    return layout;
}

ArrayLayout build_uca(int n_antennas, double wavelength)
{
    require(n_antennas >= 3, "build_uca: n_antennas must be >= 3");
    require(wavelength > 0.0, "build_uca: wavelength must be positive");

    ArrayLayout layout;
    layout.kind = ArrayKind::uca;
    layout.wavelength = wavelength;
    // Radius N lambda / (4 pi) gives arc spacing lambda / 2 between antennas.
    const double radius = n_antennas * wavelength / (4.0 * k_pi);
    layout.panel_length = 2.0 * radius;
    layout.sparsity = derived_sparsity(layout.panel_length, n_antennas, wavelength);
    layout.x.resize(n_antennas);
    layout.y.resize(n_antennas);
    for (int i = 0; i < n_antennas; ++i)
    {
        const double arc = 2.0 * k_pi * i / n_antennas;
        layout.x[i] = radius * std::sin(arc);
        layout.y[i] = radius * std::cos(arc);
    }
    validate_layout(layout);
    return layout;
}

ArrayLayout make_nsa(std::vector<double> positions, double panel_length, double wavelength)
{
    ArrayLayout layout;
    layout.kind = ArrayKind::nsa;
    layout.wavelength = wavelength;
    layout.panel_length = panel_length;
    layout.x = std::move(positions);
    layout.sparsity = derived_sparsity(panel_length, layout.size(), wavelength);
    validate_layout(layout);
    return layout;
}

void validate_layout(const ArrayLayout& layout)
{
    const int n = layout.size();
    require(n >= 3, "layout: at least 3 antennas required");
    require(layout.wavelength > 0.0, "layout: wavelength must be positive");
    require(layout.panel_length > 0.0, "layout: panel_length must be positive");
    for (double value : layout.x)
    {
        require(std::isfinite(value), "layout: positions must be finite");
    }

    if (layout.kind == ArrayKind::uca)
    {
        require(static_cast<int>(layout.y.size()) == n,
                "layout: uca needs one y-coordinate per antenna");
        const double radius = layout.panel_length / 2.0;
        for (int i = 0; i < n; ++i)
        {
            require(std::isfinite(layout.y[i]), "layout: positions must be finite");
            const double r = std::hypot(layout.x[i], layout.y[i]);
            require(std::abs(r - radius) <= k_tol * radius,
                    "layout: uca antennas must lie on the circle of diameter panel_length");
        }
        return;
    }

    require(layout.y.empty(), "layout: linear kinds must not carry y-coordinates");
    require(n % 2 == 1, "layout: linear kinds need an odd antenna count");

    const double min_gap = layout.wavelength / 2.0;
    const double slack = k_tol * layout.wavelength;
    const double half_panel = layout.panel_length / 2.0;
    for (int i = 0; i < n; ++i)
    {
        require(std::abs(layout.x[i]) <= half_panel + slack,
                "layout: positions must lie within the panel");
        if (i > 0)
        {
            require(layout.x[i] - layout.x[i - 1] >= min_gap - slack,
                    "layout: adjacent spacing must be at least lambda / 2");
        }
    }

    const double p = derived_sparsity(layout.panel_length, n, layout.wavelength);
    require(std::abs(layout.sparsity - p) <= k_tol * p,
            "layout: sparsity must equal 2 panel_length / ((N - 1) wavelength)");
    if (layout.kind == ArrayKind::usa || layout.kind == ArrayKind::hula)
    {
        const double step = layout.sparsity * layout.wavelength / 2.0;
        const int half = (n - 1) / 2;
        for (int i = 0; i < n; ++i)
        {
            require(std::abs(layout.x[i] - (i - half) * step) <= k_tol * layout.panel_length,
                    "layout: usa positions must be uniform with spacing p lambda / 2");
        }
        if (layout.kind == ArrayKind::hula)
        {
            require(std::abs(layout.sparsity - 1.0) <= k_tol,
                    "layout: hula requires sparsity 1");
        }
    }
}

GeometrySummary geometry_summary(const ArrayLayout& layout, double r_min)
{
    require(r_min > 0.0, "geometry_summary: r_min must be positive");
    GeometrySummary summary;
    summary.panel_length = layout.panel_length;
    summary.sparsity = layout.sparsity;
    const double d = layout.panel_length;
    summary.rayleigh_distance = d / layout.wavelength * d * 2.0;
    summary.near_field_bound = 0.62 * std::sqrt(d * d * d / layout.wavelength);
    summary.b_max = 1.0 / (2.0 * r_min);
    return summary;
}

std::string layout_to_json(const ArrayLayout& layout)
{
    nlohmann::json doc;
    doc["kind"] = to_string(layout.kind);
    doc["wavelength"] = layout.wavelength;
    doc["panel_length"] = layout.panel_length;
    if (layout.kind == ArrayKind::uca)
    {
        nlohmann::json points = nlohmann::json::array();
        for (int i = 0; i < layout.size(); ++i)
        {
            points.push_back({layout.x[i], layout.y[i]});
        }
        doc["positions"] = std::move(points);
    }
    else
    {
        doc["positions"] = layout.x;
    }
    return doc.dump(2) + "\n";
}

ArrayLayout layout_from_json(const std::string& text)
{
    nlohmann::json doc;
    try
    {
        doc = nlohmann::json::parse(text);
    }
    catch (const nlohmann::json::parse_error& error)
    {
        throw std::invalid_argument(std::string("layout: invalid JSON: ") + error.what());
    }
    require(doc.is_object(), "layout: document must be a JSON object");
    require(doc.contains("kind") && doc["kind"].is_string(), "layout: missing string field 'kind'");
    require(doc.contains("wavelength") && doc["wavelength"].is_number(),
            "layout: missing numeric field 'wavelength'");
    require(doc.contains("positions") && doc["positions"].is_array(),
            "layout: missing array field 'positions'");

    ArrayLayout layout;
    layout.kind = array_kind_from_string(doc["kind"].get<std::string>());
    layout.wavelength = doc["wavelength"].get<double>();

    if (layout.kind == ArrayKind::uca)
    {
        for (const auto& entry : doc["positions"])
        {
            require(entry.is_array() && entry.size() == 2 && entry[0].is_number() &&
                        entry[1].is_number(),
                    "layout: uca positions must be [x, y] pairs");
            layout.x.push_back(entry[0].get<double>());
            layout.y.push_back(entry[1].get<double>());
        }
    }
    else
    {
        for (const auto& entry : doc["positions"])
        {
            require(entry.is_number(), "layout: positions must be numbers");
            layout.x.push_back(entry.get<double>());
        }
    }

    if (doc.contains("panel_length"))
    {
        require(doc["panel_length"].is_number(), "layout: 'panel_length' must be a number");
        layout.panel_length = doc["panel_length"].get<double>();
    }
    else
    {
        // Tightest symmetric panel containing the positions.
        double extent = 0.0;
        for (int i = 0; i < layout.size(); ++i)
        {
            extent = std::max(extent, std::abs(layout.x[i]));
            if (!layout.y.empty())
            {
                extent = std::max(extent, std::hypot(layout.x[i], layout.y[i]));
            }
        }
        layout.panel_length = 2.0 * extent;
    }
    layout.sparsity = layout.kind == ArrayKind::hula
                          ? 1.0
                          : derived_sparsity(layout.panel_length, layout.size(), layout.wavelength);
    validate_layout(layout);
    return layout;
}

void save_layout(const ArrayLayout& layout, const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
    {
        throw std::runtime_error("layout: cannot open '" + path + "' for writing");
    }
    out << layout_to_json(layout);
    if (!out)
    {
        throw std::runtime_error("layout: failed writing '" + path + "'");
    }
}

ArrayLayout load_layout(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
    {
        throw std::runtime_error("layout: cannot open '" + path + "' for reading");
    }
    std::ostringstream text;
    text << in.rdbuf();
    return layout_from_json(text.str());
}

} // namespace nfsa
