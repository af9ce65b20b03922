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

#include <string>
#include <vector>

namespace nfsa
{

// usa:  uniform sparse linear array, spacing p * lambda / 2
// nsa:  non-uniform sparse linear array (optimized positions)
// hula: half-wavelength uniform linear array (usa with p = 1)
// uca:  uniform circular array in the x-y plane
enum class ArrayKind
{
    usa,
    nsa,
    hula,
    uca
};

std::string to_string(ArrayKind kind);
ArrayKind array_kind_from_string(const std::string& name);

// Antenna layout centered at the origin. Linear kinds place all antennas on
// the x-axis, indexed n = -M..M with M = (N - 1) / 2; positions are strictly
// increasing, adjacent spacing is at least lambda / 2 and every coordinate
// lies within [-panel_length / 2, panel_length / 2].
struct ArrayLayout
{
    ArrayKind kind = ArrayKind::hula;
    double wavelength = 0.0;   // lambda [m]
    double panel_length = 0.0; // D [m]; for uca the aperture (diameter)
    double sparsity = 1.0;     // p = 2 D / ((N - 1) lambda); 1 for hula
    std::vector<double> x;     // x-coordinates [m]
    std::vector<double> y;     // y-coordinates [m]; empty for linear kinds

    int size() const { return static_cast<int>(x.size()); }
    int half_span() const { return (size() - 1) / 2; } // M
    bool is_linear() const { return kind != ArrayKind::uca; }
};

// Builders; each output satisfies validate_layout. Linear kinds require odd
// N >= 3 (the symmetric indexing n = -M..M); the circular builder requires
// N >= 3 and uses radius R = N lambda / (4 pi), i.e. arc spacing lambda / 2.
ArrayLayout build_usa(int n_antennas, double sparsity, double wavelength);
ArrayLayout build_hula(int n_antennas, double wavelength);
ArrayLayout build_uca(int n_antennas, double wavelength);

// Wraps externally produced positions (e.g. optimizer output) as an nsa.
ArrayLayout make_nsa(std::vector<double> positions, double panel_length, double wavelength);

// Throws std::invalid_argument naming the violated constraint.
void validate_layout(const ArrayLayout& layout);

struct GeometrySummary
{
    double panel_length = 0.0;     // D
    double sparsity = 0.0;         // p
    double rayleigh_distance = 0.0; // 2 D^2 / lambda
    double near_field_bound = 0.0;  // 0.62 sqrt(D^3 / lambda)
    double b_max = 0.0;             // 1 / (2 r_min)
};

// r_min is the closest supported user distance; it must be positive and at
// least the near-field bound is reported for comparison, not enforced.
GeometrySummary geometry_summary(const ArrayLayout& layout, double r_min);

// JSON round-trip {kind, wavelength, positions, panel_length}; every double
// survives bit-exactly. For uca, positions holds [x, y] pairs.
std::string layout_to_json(const ArrayLayout& layout);
ArrayLayout layout_from_json(const std::string& text);
void save_layout(const ArrayLayout& layout, const std::string& path);
ArrayLayout load_layout(const std::string& path);

} // namespace nfsa
