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

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>

#include "nfsa/channel_model.hpp"

using namespace nfsa;

namespace
{
const double k_pi = std::acos(-1.0);
}

TEST_CASE("surrogate coordinates round trip")
{
    const double distance = 23.7;
    const double angle = std::asin(0.6);
    const SdaPoint point = to_sda(distance, angle);
    REQUIRE(point.theta == Catch::Approx(0.6).epsilon(1e-14));
    REQUIRE(point.b == Catch::Approx((1.0 - 0.36) / (2.0 * distance)).epsilon(1e-14));

    double r = 0.0;
    double a = 0.0;
    from_sda(point, r, a);
    REQUIRE(r == Catch::Approx(distance).epsilon(1e-12));
    REQUIRE(a == Catch::Approx(angle).epsilon(1e-12));

    REQUIRE_THROWS_AS(from_sda({0.0, 0.2}, r, a), std::invalid_argument);
    REQUIRE_THROWS_AS(from_sda({0.01, 1.0}, r, a), std::invalid_argument);
    REQUIRE_THROWS_AS(to_sda(0.0, 0.1), std::invalid_argument);
}

TEST_CASE("exact distance matches the two-point euclidean distance")
{
    const ArrayLayout usa = build_usa(33, 10.0, 0.01);
    const double r = 12.5;
    const double angle = 0.31;
    const int half = usa.half_span();
    for (int element = -half; element <= half; ++element)
    {
        const double x = usa.x[static_cast<std::size_t>(element + half)];
        const double direct = std::hypot(r * std::sin(angle) - x, r * std::cos(angle));
        REQUIRE(exact_distance(usa, r, angle, element) ==
                Catch::Approx(direct).epsilon(1e-12));
    }

    const ArrayLayout uca = build_uca(16, 0.01);
    for (int element = 0; element < uca.size(); ++element)
    {
        const std::size_t i = static_cast<std::size_t>(element);
        const double direct =
            std::hypot(r * std::sin(angle) - uca.x[i], r * std::cos(angle) - uca.y[i]);
        REQUIRE(exact_distance(uca, r, angle, element) ==
                Catch::Approx(direct).epsilon(1e-12));
    }
}

TEST_CASE("exact steering entries carry the propagation phase difference")
{
    const ArrayLayout usa = build_usa(33, 10.0, 0.01);
    const double r = 10.0;
    const double angle = -0.42;
    const VecXc steer = steering_exact(usa, r, angle);
    REQUIRE(steer.size() == 33);
    for (int element = 0; element < 33; ++element)
    {
        REQUIRE(std::abs(steer(element)) == Catch::Approx(1.0).epsilon(1e-14));
        const double delta = exact_distance(usa, r, angle, element - usa.half_span()) - r;
        const std::complex<double> expected =
            std::exp(std::complex<double>(0.0, 2.0 * k_pi * delta / usa.wavelength));
        REQUIRE(std::abs(steer(element) - expected) < 1e-9);
    }
}

TEST_CASE("surrogate steering entries follow the quadratic phase")
{
    const ArrayLayout usa = build_usa(9, 5.0, 0.01);
    const SdaPoint point{0.031, -0.27};
    const VecXc steer = steering_approx(usa, point);
    for (int element = 0; element < 9; ++element)
    {
        const double x = usa.x[static_cast<std::size_t>(element)];
        const double phase = 2.0 * k_pi * (point.b * x * x - point.theta * x) / usa.wavelength;
        const std::complex<double> expected = std::exp(std::complex<double>(0.0, phase));
        REQUIRE(std::abs(steer(element) - expected) < 1e-12);
    }
    REQUIRE_THROWS_AS(steering_approx(build_uca(9, 0.01), point), std::invalid_argument);
}

TEST_CASE("channel synthesis equals the steering superposition")
{
    const ArrayLayout usa = build_usa(33, 10.0, 0.01);
    ChannelConfig config;
    Rng rng = Rng::stream(11, 0);
    const ChannelRealization channel = sample_channel(rng, usa, config);
    REQUIRE(static_cast<int>(channel.paths.size()) == config.paths);

    VecXc rebuilt = VecXc::Zero(usa.size());
    for (const PathParams& path : channel.paths)
    {
        rebuilt += path.gain * steering_exact(usa, path.distance, path.angle_rad);
        REQUIRE(path.distance >= config.r_min);
        REQUIRE(path.distance <= config.r_max);
        REQUIRE(path.sda.theta >= config.theta_min);
        REQUIRE(path.sda.theta <= config.theta_max);
    }
    REQUIRE((rebuilt - channel.h).norm() < 1e-12 * channel.h.norm());
}

TEST_CASE("channel draws are deterministic per stream")
{
    const ArrayLayout usa = build_usa(33, 10.0, 0.01);
    ChannelConfig config;
    Rng a = Rng::stream(5, 17);
    Rng b = Rng::stream(5, 17);
    Rng c = Rng::stream(5, 18);
    const VecXc ha = sample_channel(a, usa, config).h;
    const VecXc hb = sample_channel(b, usa, config).h;
    const VecXc hc = sample_channel(c, usa, config).h;
    REQUIRE((ha - hb).norm() == 0.0);
    REQUIRE((ha - hc).norm() > 0.0);
}

TEST_CASE("path power shares sum to one")
{
    const ArrayLayout usa = build_usa(17, 5.0, 0.01);
    ChannelConfig config;
    config.ricean_db = -10.0;
    const int trials = 4000;
    double mean_power = 0.0;
    for (int trial = 0; trial < trials; ++trial)
    {
        Rng rng = Rng::stream(99, static_cast<std::uint64_t>(trial));
        const ChannelRealization channel = sample_channel(rng, usa, config);
        double gain_power = 0.0;
        for (const PathParams& path : channel.paths)
        {
            gain_power += std::norm(path.gain);
        }
        mean_power += gain_power / trials;
    }
    REQUIRE(mean_power == Catch::Approx(1.0).margin(0.07));
}

TEST_CASE("infinite ricean factor keeps only the line of sight")
{
    const ArrayLayout usa = build_usa(9, 5.0, 0.01);
    ChannelConfig config;
    config.ricean_db = std::numeric_limits<double>::infinity();
    Rng rng = Rng::stream(4, 0);
    const ChannelRealization channel = sample_channel(rng, usa, config);
    REQUIRE(std::abs(channel.paths[0].gain) > 0.0);
    for (std::size_t l = 1; l < channel.paths.size(); ++l)
    {
        REQUIRE(std::abs(channel.paths[l].gain) == 0.0);
    }
}

TEST_CASE("pilot noise has the configured power")
{
    const ArrayLayout usa = build_usa(33, 10.0, 0.01);
    ChannelConfig config;
    Rng rng = Rng::stream(21, 0);
    const VecXc h = sample_channel(rng, usa, config).h;
    const double noise_power = 0.25;
    double measured = 0.0;
    const int trials = 2000;
    for (int trial = 0; trial < trials; ++trial)
    {
        Rng pilot_rng = Rng::stream(21, static_cast<std::uint64_t>(trial), 1);
        const VecXc y = received_pilot(h, noise_power, pilot_rng);
        measured += (y - h).squaredNorm() / (usa.size() * static_cast<double>(trials));
    }
    REQUIRE(measured == Catch::Approx(noise_power).epsilon(0.10));

    Rng again = Rng::stream(21, 0, 1);
    Rng again2 = Rng::stream(21, 0, 1);
    REQUIRE((received_pilot(h, noise_power, again) - received_pilot(h, noise_power, again2))
                .norm() == 0.0);
}

TEST_CASE("channel configuration is validated")
{
    const ArrayLayout usa = build_usa(9, 5.0, 0.01);
    Rng rng(0);

    ChannelConfig bad = ChannelConfig{};
    bad.paths = 0;
    REQUIRE_THROWS_AS(sample_channel(rng, usa, bad), std::invalid_argument);

    bad = ChannelConfig{};
    bad.theta_min = -1.5;
    REQUIRE_THROWS_AS(sample_channel(rng, usa, bad), std::invalid_argument);

    bad = ChannelConfig{};
    bad.r_min = 0.0;
    REQUIRE_THROWS_AS(sample_channel(rng, usa, bad), std::invalid_argument);

    bad = ChannelConfig{};
    bad.r_min = 50.0;
    bad.r_max = 10.0;
    REQUIRE_THROWS_AS(sample_channel(rng, usa, bad), std::invalid_argument);
}
