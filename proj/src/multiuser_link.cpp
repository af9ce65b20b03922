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

#include "nfsa/multiuser_link.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "parallel_util.hpp"

namespace nfsa
{

namespace
{

void require(bool condition, const std::string& message)
{
    if (!condition)
    {
        throw std::invalid_argument(message);
    }
}

McStat reduce_stats(const std::vector<double>& samples)
{
    McStat stat;
    stat.trials = static_cast<int>(samples.size());
    if (samples.empty())
    {
        return stat;
    }
    double sum = 0.0;
    for (double value : samples)
    {
        sum += value;
    }
    stat.mean = sum / stat.trials;
    if (stat.trials > 1)
    {
        double accum = 0.0;
        for (double value : samples)
        {
            const double offset = value - stat.mean;
            accum += offset * offset;
        }
        stat.std_error = std::sqrt(accum / (stat.trials - 1) / stat.trials);
    }
    return stat;
}

// Channel draws per (seed, trial, user) so perfect-CSI and estimated runs
// see identical channels; pilot noise lives on the odd sub-streams.
ChannelRealization draw_user_channel(const ArrayLayout& layout, const ChannelConfig& channel,
                                     std::uint64_t seed, int trial, int user)
{
    Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(trial),
                          2 * static_cast<std::uint64_t>(user));
    return sample_channel(rng, layout, channel);
}

} // namespace

MatXc mmse_combiner(const MatXc& channels, double noise_power)
{
    const Eigen::Index users = channels.cols();
    require(users >= 1, "mmse: at least one user required");
    require(noise_power >= 0.0, "mmse: noise_power must be non-negative");

    MatXc gram = channels.adjoint() * channels;
    gram.diagonal().array() += noise_power;
    Eigen::LDLT<MatXc> ldlt(gram);
    const Eigen::VectorXd pivots = ldlt.vectorD().cwiseAbs();
    if (ldlt.info() != Eigen::Success ||
        pivots.minCoeff() <= 1e-14 * std::max(1.0, pivots.maxCoeff()))
    {
        gram.diagonal().array() += 1e-12;
        ldlt.compute(gram);
    }
    MatXc combiners = ldlt.solve(channels.adjoint()).adjoint();

    const double power = combiners.squaredNorm();
    if (power > 0.0)
    {
        combiners *= std::sqrt(static_cast<double>(users) / power);
    }
    return combiners;
}

VecXc mrc_combiner(const VecXc& h)
{
    const double power = h.squaredNorm();
    require(power > 0.0, "mrc: zero channel");
    return h / power;
}

double sinr(const MatXc& channels, const MatXc& combiners, int user, double noise_power)
{
    require(channels.rows() == combiners.rows() && channels.cols() == combiners.cols(),
            "sinr: channel and combiner shapes must match");
    require(user >= 0 && user < channels.cols(), "sinr: user index out of range");
    require(noise_power >= 0.0, "sinr: noise_power must be non-negative");

    const VecXc h = channels.col(user);
    double interference = 0.0;
    for (Eigen::Index i = 0; i < combiners.cols(); ++i)
    {
        if (i != user)
        {
            interference += std::norm(h.dot(combiners.col(i)));
        }
    }
    const double signal = std::norm(h.dot(combiners.col(user)));
    const double denom = interference + noise_power;
    if (denom == 0.0)
    {
        return std::numeric_limits<double>::infinity();
    }
    return signal / denom;
}

double sum_rate(const MatXc& channels, const MatXc& combiners, double noise_power)
{
    double rate = 0.0;
    for (Eigen::Index k = 0; k < channels.cols(); ++k)
    {
        rate += std::log2(1.0 + sinr(channels, combiners, static_cast<int>(k), noise_power));
    }
    return rate;
}

McStat sum_rate_mc(const ArrayLayout& layout, const ChannelConfig& channel, int users,
                   double noise_power, int trials, std::uint64_t seed)
{
    require(users >= 1, "sum_rate_mc: at least one user required");
    require(trials >= 0, "sum_rate_mc: trials must be non-negative");

    std::vector<double> rates(trials, 0.0);
    detail::parallel_for(trials, [&](int trial) {
        MatXc channels(layout.size(), users);
        for (int k = 0; k < users; ++k)
        {
            channels.col(k) = draw_user_channel(layout, channel, seed, trial, k).h;
        }
        const MatXc combiners = mmse_combiner(channels, noise_power);
        rates[trial] = sum_rate(channels, combiners, noise_power);
    });
    return reduce_stats(rates);
}

McStat sum_rate_mc_estimated(const ArrayLayout& layout, const ChannelConfig& channel, int users,
                             double noise_power, int trials, std::uint64_t seed,
                             const Dictionary& dict, CsiMode mode, int max_paths)
{
    require(layout.is_linear(), "sum_rate_mc_estimated: linear layouts only");
    require(users >= 1, "sum_rate_mc_estimated: at least one user required");
    require(trials >= 0, "sum_rate_mc_estimated: trials must be non-negative");
    require(max_paths >= 1, "sum_rate_mc_estimated: max_paths must be positive");

    if (mode == CsiMode::perfect)
    {
        return sum_rate_mc(layout, channel, users, noise_power, trials, seed);
    }

    IsrceParams isrce;
    isrce.noise_power = noise_power;
    isrce.b_max = dict.b_max;

    std::vector<double> rates(trials, 0.0);
    detail::parallel_for(trials, [&](int trial) {
        MatXc channels(layout.size(), users);
        MatXc estimates(layout.size(), users);
        for (int k = 0; k < users; ++k)
        {
            channels.col(k) = draw_user_channel(layout, channel, seed, trial, k).h;
            Rng pilot_rng = Rng::stream(seed, static_cast<std::uint64_t>(trial),
                                        2 * static_cast<std::uint64_t>(k) + 1);
            const VecXc pilot = received_pilot(channels.col(k), noise_power, pilot_rng);
            EstimateResult estimate = sda_omp(pilot, dict, max_paths);
            if (mode == CsiMode::isrce)
            {
                estimate = sda_isrce(pilot, layout, estimate, isrce);
            }
            estimates.col(k) = estimate.channel;
        }
        const MatXc combiners = mmse_combiner(estimates, noise_power);
        rates[trial] = sum_rate(channels, combiners, noise_power);
    });
    return reduce_stats(rates);
}

McStat two_user_sum_rate_mc(const ArrayLayout& layout, double b, double theta2,
                            double noise_power, int trials, std::uint64_t seed)
{
    require(b > 0.0, "two_user_sum_rate_mc: b must be positive");
    require(std::abs(theta2) < 1.0, "two_user_sum_rate_mc: |theta2| must be below 1");
    require(trials >= 0, "two_user_sum_rate_mc: trials must be non-negative");

    double r1 = 0.0;
    double angle1 = 0.0;
    from_sda({b, 0.0}, r1, angle1);
    double r2 = 0.0;
    double angle2 = 0.0;
    from_sda({b, theta2}, r2, angle2);
    const VecXc a1 = steering_exact(layout, r1, angle1);
    const VecXc a2 = steering_exact(layout, r2, angle2);

    std::vector<double> rates(trials, 0.0);
    detail::parallel_for(trials, [&](int trial) {
        Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(trial));
        MatXc channels(layout.size(), 2);
        channels.col(0) = rng.cnormal(1.0) * a1;
        channels.col(1) = rng.cnormal(1.0) * a2;
        const MatXc combiners = mmse_combiner(channels, noise_power);
        rates[trial] = sum_rate(channels, combiners, noise_power);
    });
    return reduce_stats(rates);
}

std::vector<NmseStat> nmse_mc(const ArrayLayout& layout, const ChannelConfig& channel,
                              double noise_power, int trials, std::uint64_t seed,
                              const Dictionary& dict, const Dictionary& farfield_dict,
                              int max_paths)
{
    require(layout.is_linear(), "nmse_mc: linear layouts only");
    require(trials >= 0, "nmse_mc: trials must be non-negative");
    require(max_paths >= 1, "nmse_mc: max_paths must be positive");
    if (trials == 0)
    {
        return {};
    }

    IsrceParams isrce;
    isrce.noise_power = noise_power;
    isrce.b_max = dict.b_max;

    constexpr int k_methods = 5;
    std::vector<std::array<double, k_methods>> ratios(trials);
    detail::parallel_for(trials, [&](int trial) {
        Rng channel_rng = Rng::stream(seed, static_cast<std::uint64_t>(trial), 0);
        Rng pilot_rng = Rng::stream(seed, static_cast<std::uint64_t>(trial), 1);
        const ChannelRealization truth = sample_channel(channel_rng, layout, channel);
        const VecXc pilot = received_pilot(truth.h, noise_power, pilot_rng);
        const double truth_power = truth.h.squaredNorm();

        const EstimateResult omp = sda_omp(pilot, dict, max_paths);
        const EstimateResult refined = sda_isrce(pilot, layout, omp, isrce);
        const EstimateResult farfield = sda_omp(pilot, farfield_dict, max_paths);
        const EstimateResult genie = genie_ls(pilot, layout, truth.paths);

        const auto ratio = [&](const VecXc& estimate) {
            return (estimate - truth.h).squaredNorm() / truth_power;
        };
        ratios[trial] = {ratio(omp.channel), ratio(refined.channel), ratio(farfield.channel),
                         ratio(ls_estimate(pilot)), ratio(genie.channel)};
    });

    const std::array<std::string, k_methods> names = {"sda-omp", "sda-isrce", "farfield-omp", "ls",
                                                      "genie-ls"};
    std::vector<NmseStat> stats(k_methods);
    for (int m = 0; m < k_methods; ++m)
    {
        double sum = 0.0;
        for (int trial = 0; trial < trials; ++trial)
        {
            sum += ratios[trial][m];
        }
        stats[m].method = names[m];
        stats[m].trials = trials;
        const double mean = sum / trials;
        stats[m].nmse_db = std::max(10.0 * std::log10(std::max(mean, 1e-300)), -120.0);
    }
    return stats;
}

} // namespace nfsa
