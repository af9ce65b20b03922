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

#include <complex>
#include <vector>

#include "nfsa/array_geometry.hpp"
#include "nfsa/channel_model.hpp"

namespace nfsa
{

// Amplitude threshold |G| / N for 3 dB widths.
inline constexpr double k_half_power_amplitude = 0.7079457843841379; // 10^(-3/20)

// Beam gain of a unit-modulus combiner focused at `focus`, probed at `probe`:
// G = sum_n exp(j 2 pi ((focus.b - probe.b) x_n^2 + (probe.theta - focus.theta) x_n) / lambda).
// Equals N exactly at probe == focus. Linear layouts only.
std::complex<double> beam_gain_exact(const ArrayLayout& layout, const SdaPoint& focus,
                                     const SdaPoint& probe);

// Principal-period image of probe_theta: the pattern of a uniform array with
// sparsity p repeats with period 2 / p around the focus angle.
double wrap_angle(double probe_theta, double focus_theta, double sparsity);

// Stationary-phase amplitude of the uniform-sparse-array pattern: each lobe
// m contributes a plateau 1 / sqrt(p^2 |b_t - k_t|) over an angular band of
// half-width p |b_t - k_t| N around its center (b_t, k_t are the surrogate
// distances scaled by lambda / 2). Requires probe.b != focus.b.
double psp_amplitude(double sparsity, int n_antennas, double wavelength, const SdaPoint& focus,
                     const SdaPoint& probe);

struct FresnelResult
{
    double c = 0.0; // C(z) = int_0^z cos(pi t^2 / 2) dt
    double s = 0.0; // S(z) = int_0^z sin(pi t^2 / 2) dt
};

// Odd in zeta; absolute error at most 1e-9.
FresnelResult fresnel_cs(double zeta);

// |G| along the surrogate-distance axis at the focus angle, from the
// Fresnel-integral model; returns N at probe_b == focus.b.
double distance_cross_section(double sparsity, int n_antennas, double wavelength,
                              const SdaPoint& focus, double probe_b);

struct LobeReport
{
    std::vector<int> lobe_indices;    // m with |focus.theta + 2 m / p| < 1 + 1 / p
    std::vector<double> lobe_centers; // focus.theta + 2 m / p
    double beamwidth = 0.0;           // 2 / (p N), center-to-null
    double beam_depth = 0.0;          // min(14 / (lambda p^2 N^2), b_max), full 3 dB extent
    double coverage = 0.0;            // p * beamwidth * beam_depth
};

LobeReport usa_lobe_report(double sparsity, int n_antennas, double wavelength,
                           const SdaPoint& focus, double b_max);

struct MainlobeSize
{
    double width_theta = 0.0; // full 3 dB width along the angle axis
    double depth_b = 0.0;     // full 3 dB extent along the b axis, clamped to [0, b_max]
};

// Numerically measured mainlobe of an arbitrary linear layout; the focus
// placement does not matter for uniform arrays (translation invariance) and
// a mid-range focus (b_max / 2, 0) is used. Bisection to 1e-6 per axis.
MainlobeSize measure_mainlobe(const ArrayLayout& layout, double b_max);

} // namespace nfsa
