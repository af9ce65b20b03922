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

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "nfsa/array_geometry.hpp"
#include "nfsa/rng.hpp"

namespace nfsa
{

using VecXc = Eigen::VectorXcd;
using MatXc = Eigen::MatrixXcd;

// Surrogate coordinates of a source point: theta = sin(azimuth) and
// b = (1 - theta^2) / (2 r). b = 0 is the far-field limit; for a minimum
// user distance r_min, b stays within [0, 1 / (2 r_min)].
struct SdaPoint
{
    double b = 0.0;     // surrogate distance [1/m]
    double theta = 0.0; // sine of the azimuth angle
};

SdaPoint to_sda(double distance, double angle_rad);

// Inverse map; requires b > 0 and |theta| < 1.
void from_sda(const SdaPoint& point, double& distance, double& angle_rad);

// Exact source-to-element distance for element index n = -M..M (linear) or
// the n-th circle point (uca); angle is measured from broadside.
double exact_distance(const ArrayLayout& layout, double distance, double angle_rad, int element);

// Spherical-wavefront steering vector, entries exp(j 2 pi (r_n - r) / lambda).
VecXc steering_exact(const ArrayLayout& layout, double distance, double angle_rad);

// Quadratic surrogate, entries exp(j 2 pi (b x^2 - theta x) / lambda).
// Linear layouts only.
VecXc steering_approx(const ArrayLayout& layout, const SdaPoint& point);

struct PathParams
{
    std::complex<double> gain;
    double distance = 0.0;  // [m]; 0 when the path came from a far-field atom
    double angle_rad = 0.0;
    SdaPoint sda;
};

struct ChannelConfig
{
    int paths = 3;             // L, one line-of-sight plus L - 1 scatterers
    double ricean_db = -10.0;  // LoS-to-NLoS power ratio; +inf keeps LoS only
    double theta_min = -0.8660254037844386; // draw range for sin(angle)
    double theta_max = 0.8660254037844386;
    double r_min = 10.0; // draw range for the distance [m]
    double r_max = 100.0;
};

struct ChannelRealization
{
    std::vector<PathParams> paths; // paths[0] is the line-of-sight path
    VecXc h;                       // superposition of exact steering vectors
};

// Per-path gains are zero-mean complex Gaussian with variances that sum to
// one, so E ||h||^2 = N. The LoS share is kappa / (1 + kappa) and the
// remainder is split evenly across the scatterers.
ChannelRealization sample_channel(Rng& rng, const ArrayLayout& layout, const ChannelConfig& config);

// y = h + noise with noise ~ CN(0, noise_power I); the unit pilot is absorbed.
VecXc received_pilot(const VecXc& h, double noise_power, Rng& rng);

} // namespace nfsa
