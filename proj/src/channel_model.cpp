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

#include "nfsa/channel_model.hpp"

#include <cmath>
#include <stdexcept>

namespace nfsa
{

namespace
{

constexpr double k_two_pi = 2.0 * 3.14159265358979323846;

void require(bool condition, const std::string& message)
{
    if (!condition)
    {
        throw std::invalid_argument(message);
    }
}

} // namespace

SdaPoint to_sda(double distance, double angle_rad)
{
    require(distance > 0.0, "to_sda: distance must be positive");
    require(std::abs(angle_rad) < 3.14159265358979323846 / 2.0,
            "to_sda: angle must lie in (-pi/2, pi/2)");
    const double theta = std::sin(angle_rad);
    return {(1.0 - theta * theta) / (2.0 * distance), theta};
}

void from_sda(const SdaPoint& point, double& distance, double& angle_rad)
{
    require(point.b > 0.0, "from_sda: b must be positive");
    require(std::abs(point.theta) < 1.0, "from_sda: |theta| must be below 1");
    distance = (1.0 - point.theta * point.theta) / (2.0 * point.b);
    angle_rad = std::asin(point.theta);
}

double exact_distance(const ArrayLayout& layout, double distance, double angle_rad, int element)
{
    require(distance > 0.0, "exact_distance: distance must be positive");
    const double sx = distance * std::sin(angle_rad);
    const double sy = distance * std::cos(angle_rad);
    if (layout.is_linear())
    {
        const int half = layout.half_span();
        require(element >= -half && element <= half,
                "exact_distance: element index out of range");
        return std::hypot(sx - layout.x[element + half], sy);
    }
    require(element >= 0 && element < layout.size(),
            "exact_distance: element index out of range");
    return std::hypot(sx - layout.x[element], sy - layout.y[element]);
}

VecXc steering_exact(const ArrayLayout& layout, double distance, double angle_rad)
{
    require(distance > 0.0, "steering_exact: distance must be positive");
    const int n = layout.size();
    const double sin_a = std::sin(angle_rad);
    const double cos_a = std::cos(angle_rad);
    VecXc a(n);
    for (int i = 0; i < n; ++i)
    {
        const double x = layout.x[i];
        const double y = layout.is_linear() ? 0.0 : layout.y[i];
        // r_i - r through the difference of squares; accurate when the two
        // distances nearly cancel at large range.
        const double ri = std::hypot(distance * sin_a - x, distance * cos_a - y);
        const double sq_diff = x * x + y * y - 2.0 * distance * (x * sin_a + y * cos_a);
        const double delta = sq_diff / (ri + distance);
        const double phase = k_two_pi * delta / layout.wavelength;
        a(i) = std::complex<double>(std::cos(phase), std::sin(phase));
    }
    return a;
}

VecXc steering_approx(const ArrayLayout& layout, const SdaPoint& point)
{
    require(layout.is_linear(), "steering_approx: linear layouts only");
    const int n = layout.size();
    VecXc a(n);
    for (int i = 0; i < n; ++i)
    {
        const double x = layout.x[i];
        const double phase = k_two_pi * (point.b * x * x - point.theta * x) / layout.wavelength;
        a(i) = std::complex<double>(std::cos(phase), std::sin(phase));
    }
    return a;
}

ChannelRealization sample_channel(Rng& rng, const ArrayLayout& layout, const ChannelConfig& config)
{
    require(config.paths >= 1, "channel: paths must be at least 1");
    require(config.r_min > 0.0 && config.r_min <= config.r_max,
            "channel: distance range must satisfy 0 < r_min <= r_max");
    require(config.theta_min >= -1.0 && config.theta_min <= config.theta_max &&
                config.theta_max <= 1.0,
            "channel: angle range must satisfy -1 <= theta_min <= theta_max <= 1");

    const int n_paths = config.paths;
    // LoS power share kappa / (1 + kappa); the remainder is split evenly.
    double los_share = 1.0;
    if (n_paths > 1)
    {
        if (std::isinf(config.ricean_db))
        {
            los_share = config.ricean_db > 0.0 ? 1.0 : 0.0;
        }
        else
        {
            const double kappa = std::pow(10.0, config.ricean_db / 10.0);
            los_share = kappa / (1.0 + kappa);
        }
    }

    ChannelRealization realization;
    realization.paths.resize(n_paths);
    for (int l = 0; l < n_paths; ++l)
    {
        PathParams& path = realization.paths[l];
        const double theta = rng.uniform(config.theta_min, config.theta_max);
        path.distance = rng.uniform(config.r_min, config.r_max);
        path.angle_rad = std::asin(theta);
        path.sda = to_sda(path.distance, path.angle_rad);
    }
    realization.h = VecXc::Zero(layout.size());
    for (int l = 0; l < n_paths; ++l)
    {
        PathParams& path = realization.paths[l];
        const double share =
            l == 0 ? los_share : (1.0 - los_share) / static_cast<double>(n_paths - 1);
        path.gain = std::sqrt(share) * rng.cnormal(1.0);
        realization.h += path.gain * steering_exact(layout, path.distance, path.angle_rad);
    }
    return realization;
}

VecXc received_pilot(const VecXc& h, double noise_power, Rng& rng)
{
    require(noise_power >= 0.0, "received_pilot: noise_power must be non-negative");
    VecXc y = h;
    for (Eigen::Index i = 0; i < y.size(); ++i)
    {
        y(i) += rng.cnormal(noise_power);
    }
    return y;
}

} // namespace nfsa
