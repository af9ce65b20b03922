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
#include <string>
#include <vector>

#include "nfsa/channel_model.hpp"
#include "nfsa/sparse_estimation.hpp"

namespace nfsa
{

// Receive combiners from the (estimated) channel matrix (N x K, one column
// per user): F = H (H^H H + sigma^2 I_K)^{-1}, rescaled so ||F||_F^2 = K.
// A singular Gram matrix at sigma^2 = 0 falls back to a 1e-12 ridge.
MatXc mmse_combiner(const MatXc& channels, double noise_power);

// Matched filter f = h / (h^H h).
VecXc mrc_combiner(const VecXc& h);

// SINR of one user under the true channels:
// |h_k^H f_k|^2 / (sum_{i != k} |h_k^H f_i|^2 + sigma^2).
double sinr(const MatXc& channels, const MatXc& combiners, int user, double noise_power);

// sum_k log2(1 + SINR_k).
double sum_rate(const MatXc& channels, const MatXc& combiners, double noise_power);

struct McStat
{
    double mean = 0.0;
    double std_error = 0.0;
    int trials = 0;
};

enum class CsiMode
{
    perfect,
    omp,  // combiners from sda_omp estimates
    isrce // combiners from sda_omp followed by sda_isrce
};

// Mean sum rate over independent K-user channel draws with MMSE combining.
// Trials run on independent RNG streams derived from (seed, trial); results
// do not depend on the execution order or thread count.
McStat sum_rate_mc(const ArrayLayout& layout, const ChannelConfig& channel, int users,
                   double noise_power, int trials, std::uint64_t seed);

// Same draws, but the combiner is built from per-user pilot estimates while
// the SINR is evaluated on the true channels. Requires a linear layout.
McStat sum_rate_mc_estimated(const ArrayLayout& layout, const ChannelConfig& channel, int users,
                             double noise_power, int trials, std::uint64_t seed,
                             const Dictionary& dict, CsiMode mode, int max_paths);

// Two fixed line-of-sight users at equal surrogate distance b: user 1 at
// broadside, user 2 at theta2. Only the gains are redrawn per trial.
McStat two_user_sum_rate_mc(const ArrayLayout& layout, double b, double theta2,
                            double noise_power, int trials, std::uint64_t seed);

struct NmseStat
{
    std::string method; // sda-omp | sda-isrce | farfield-omp | ls | genie-ls
    double nmse_db = 0.0;
    int trials = 0;
};

// Channel-estimation benchmark on shared channel/pilot draws; per-method
// error-power ratios are averaged before the dB conversion.
std::vector<NmseStat> nmse_mc(const ArrayLayout& layout, const ChannelConfig& channel,
                              double noise_power, int trials, std::uint64_t seed,
                              const Dictionary& dict, const Dictionary& farfield_dict,
                              int max_paths);

} // namespace nfsa
