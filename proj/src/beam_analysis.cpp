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

#include "nfsa/beam_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace nfsa
{

namespace
{

constexpr double k_pi = 3.14159265358979323846;

void require(bool condition, const std::string& message)
{
    if (!condition)
    {
        throw std::invalid_argument(message);
    }
}

double beam_amplitude(const ArrayLayout& layout, const SdaPoint& focus, const SdaPoint& probe)
{
    return std::abs(beam_gain_exact(layout, focus, probe));
}

// First amplitude crossing of `level` along a parametrized ray, then
// bisection between the bracketing samples. `value(t)` must start above
// level at t = 0; t_max bounds the search.
double crossing_on_ray(const std::function<double(double)>& value, double level, double step,
                       double t_max, double tol)
{
    double lo = 0.0;
    double hi = step;
    while (hi < t_max && value(hi) >= level)
    {
        lo = hi;
        hi += step;
    }
    if (hi >= t_max)
    {
        return t_max;
    }
    while (hi - lo > tol)
    {
        const double mid = 0.5 * (lo + hi);
        if (value(mid) >= level)
        {
            lo = mid;
        }
        else
        {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

} // namespace

std::complex<double> beam_gain_exact(const ArrayLayout& layout, const SdaPoint& focus,
                                     const SdaPoint& probe)
{
    require(layout.is_linear(), "beam_gain_exact: linear layouts only");
    const double db = focus.b - probe.b;
    const double dtheta = probe.theta - focus.theta;
    std::complex<double> sum = 0.0;
    for (double x : layout.x)
    {
        const double phase = 2.0 * k_pi * (db * x * x + dtheta * x) / layout.wavelength;
        sum += std::complex<double>(std::cos(phase), std::sin(phase));
    }
    return sum;
}

double wrap_angle(double probe_theta, double focus_theta, double sparsity)
{
    require(sparsity > 0.0, "wrap_angle: sparsity must be positive");
    const double period = 2.0 / sparsity;
    double offset = std::fmod(probe_theta - focus_theta + 1.0 / sparsity, period);
    if (offset < 0.0)
    {
        offset += period;
    }
    return offset - 1.0 / sparsity + focus_theta;
}

double psp_amplitude(double sparsity, int n_antennas, double wavelength, const SdaPoint& focus,
                     const SdaPoint& probe)
{
    require(sparsity > 0.0 && n_antennas >= 3 && wavelength > 0.0,
            "psp_amplitude: invalid array parameters");
    // Surrogate distances in index units (scaled by lambda / 2).
    const double b_t = probe.b * wavelength / 2.0;
    const double k_t = focus.b * wavelength / 2.0;
    const double spread = std::abs(b_t - k_t);
    require(spread > 0.0,
            "psp_amplitude: probe.b equals focus.b; use the angle cross-section formula");

    // Lobe nearest to the probe angle; lobes repeat every 2 / p.
    const double m = std::round((probe.theta - focus.theta) * sparsity / 2.0);
    const double center = focus.theta + 2.0 * m / sparsity;
    if (std::abs(center) >= 1.0 + 1.0 / sparsity)
    {
        return 0.0;
    }
    const double half_width = sparsity * spread * n_antennas;
    if (std::abs(probe.theta - center) > half_width)
    {
        return 0.0;
    }
    return 1.0 / std::sqrt(sparsity * sparsity * spread);
}

FresnelResult fresnel_cs(double zeta)
{
    const double z = std::abs(zeta);
    const double sign = zeta < 0.0 ? -1.0 : 1.0;
    const auto cos_term = [](double t) { return std::cos(k_pi * t * t / 2.0); };
    const auto sin_term = [](double t) { return std::sin(k_pi * t * t / 2.0); };

    // Integrate cycle by cycle: the phase pi t^2 / 2 completes its k-th
    // cycle at t = 2 sqrt(k), so each segment is mildly oscillatory and the
    // adaptive rule resolves it far below the 1e-9 contract.
    using quad = boost::math::quadrature::gauss_kronrod<double, 31>;
    FresnelResult result;
    const int cycles = static_cast<int>(std::floor(z * z / 4.0));
    double lower = 0.0;
    for (int k = 1; k <= cycles + 1; ++k)
    {
        const double upper = std::min(z, 2.0 * std::sqrt(static_cast<double>(k)));
        if (upper <= lower)
        {
            break;
        }
        result.c += quad::integrate(cos_term, lower, upper, 5, 1e-13);
        result.s += quad::integrate(sin_term, lower, upper, 5, 1e-13);
        lower = upper;
    }
    result.c *= sign;
    result.s *= sign;
    return result;
}

double distance_cross_section(double sparsity, int n_antennas, double wavelength,
                              const SdaPoint& focus, double probe_b)
{
    require(sparsity > 0.0 && n_antennas >= 3 && n_antennas % 2 == 1 && wavelength > 0.0,
            "distance_cross_section: invalid array parameters");
    const double b_t = probe_b * wavelength / 2.0;
    const double k_t = focus.b * wavelength / 2.0;
    const double spread = std::abs(b_t - k_t);
    if (spread == 0.0)
    {
        return static_cast<double>(n_antennas);
    }
    const double half = (n_antennas - 1) / 2 + 0.5;
    const double zeta = std::sqrt(2.0 * sparsity * sparsity * spread) * half;
    const FresnelResult f = fresnel_cs(zeta);
    return std::sqrt(2.0 * (f.c * f.c + f.s * f.s) / (sparsity * sparsity * spread));
}

LobeReport usa_lobe_report(double sparsity, int n_antennas, double wavelength,
                           const SdaPoint& focus, double b_max)
{
    require(sparsity >= 1.0 && n_antennas >= 3 && n_antennas % 2 == 1 && wavelength > 0.0,
            "usa_lobe_report: invalid array parameters");
    require(b_max > 0.0, "usa_lobe_report: b_max must be positive");

    LobeReport report;
    // All m with |focus.theta + 2 m / p| < 1 + 1 / p.
    const int m_lo = static_cast<int>(std::ceil((-1.0 - 1.0 / sparsity - focus.theta) *
                                                sparsity / 2.0));
    const int m_hi = static_cast<int>(std::floor((1.0 + 1.0 / sparsity - focus.theta) *
                                                 sparsity / 2.0));
    for (int m = m_lo; m <= m_hi; ++m)
    {
        const double center = focus.theta + 2.0 * m / sparsity;
        if (std::abs(center) < 1.0 + 1.0 / sparsity)
        {
            report.lobe_indices.push_back(m);
            report.lobe_centers.push_back(center);
        }
    }
    const double n = static_cast<double>(n_antennas);
    report.beamwidth = 2.0 / (sparsity * n);
    report.beam_depth = std::min(14.0 / (wavelength * sparsity * sparsity * n * n), b_max);
    report.coverage = sparsity * report.beamwidth * report.beam_depth;
    return report;
}

MainlobeSize measure_mainlobe(const ArrayLayout& layout, double b_max)
{
    require(layout.is_linear(), "measure_mainlobe: linear layouts only");
    require(b_max > 0.0, "measure_mainlobe: b_max must be positive");

    const double n = static_cast<double>(layout.size());
    const double level = k_half_power_amplitude * n;
    const SdaPoint focus{b_max / 2.0, 0.0};

    // Step resolutions tied to the uniform-array mainlobe of the same
    // aperture; fine enough to catch the first crossing.
    const double theta_step = 1.0 / (10.0 * layout.sparsity * n);
    const double b_scale =
        std::min(14.0 / (layout.wavelength * layout.sparsity * layout.sparsity * n * n), b_max);
    const double b_step = b_scale / 50.0;

    const auto theta_ray = [&](double sign) {
        const auto value = [&](double t) {
            return beam_amplitude(layout, focus, {focus.b, focus.theta + sign * t});
        };
        return crossing_on_ray(value, level, theta_step, 2.0, 1e-6);
    };
    const auto b_ray = [&](double sign) {
        const auto value = [&](double t) {
            return beam_amplitude(layout, focus, {focus.b + sign * t, focus.theta});
        };
        return crossing_on_ray(value, level, b_step, 2.0 * b_max, 1e-6 * b_scale);
    };

    MainlobeSize size;
    size.width_theta = theta_ray(1.0) + theta_ray(-1.0);
    const double b_hi = std::min(focus.b + b_ray(1.0), b_max);
    const double b_lo = std::max(focus.b - b_ray(-1.0), 0.0);
    size.depth_b = b_hi - b_lo;
    return size;
}

} // namespace nfsa
