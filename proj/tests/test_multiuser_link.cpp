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
#include <cstdlib>
#include <stdexcept>

#include "nfsa/multiuser_link.hpp"
#include "nfsa/rng.hpp"

using namespace nfsa;

namespace
{

MatXc random_channels(Rng& rng, int n, int k)
{
    MatXc h(n, k);
    for (int j = 0; j < k; ++j)
    {
        for (int i = 0; i < n; ++i)
        {
            h(i, j) = rng.cnormal(1.0);
        }
    }
    return h;
}

} // namespace

TEST_CASE("mmse combiner carries unit average power per user")
{
    Rng rng(3);
    const MatXc h = random_channels(rng, 16, 5);
    for (double noise : {1e-6, 0.01, 1.0, 100.0})
    {
        const MatXc f = mmse_combiner(h, noise);
        REQUIRE(f.rows() == 16);
        REQUIRE(f.cols() == 5);
        REQUIRE(f.squaredNorm() == Catch::Approx(5.0).margin(1e-10));
    }
    REQUIRE_THROWS_AS(mmse_combiner(h, -0.1), std::invalid_argument);
}

TEST_CASE("sinr and sum rate are invariant under a common unitary rotation")
{
    Rng rng(7);
    const int n = 12;
    const int k = 4;
    const MatXc h = random_channels(rng, n, k);
    const double noise = 0.05;
    const MatXc f = mmse_combiner(h, noise);

    const MatXc seed_matrix = random_channels(rng, n, n);
    const Eigen::HouseholderQR<MatXc> qr(seed_matrix);
    const MatXc unitary = qr.householderQ();

    const MatXc hr = unitary * h;
    const MatXc fr = mmse_combiner(hr, noise);
    for (int user = 0; user < k; ++user)
    {
        REQUIRE(sinr(hr, fr, user, noise) ==
                Catch::Approx(sinr(h, f, user, noise)).epsilon(1e-9));
    }
    REQUIRE(sum_rate(hr, fr, noise) == Catch::Approx(sum_rate(h, f, noise)).epsilon(1e-9));
}

TEST_CASE("single-user mmse aligns with the matched filter at low snr")
{
    Rng rng(11);
    const MatXc h = random_channels(rng, 24, 1);
    const MatXc f = mmse_combiner(h, 1e6);
    const double cosine = std::abs((h.col(0).adjoint() * f.col(0))(0, 0)) /
                          (h.col(0).norm() * f.col(0).norm());
    REQUIRE(cosine >= 1.0 - 1e-6);
}

TEST_CASE("identical users saturate below unit sinr")
{
    Rng rng(13);
    MatXc h = random_channels(rng, 8, 2);
    h.col(1) = h.col(0);
    const double noise = 0.01;
    const MatXc f = mmse_combiner(h, noise);
    REQUIRE(sinr(h, f, 0, noise) <= 1.0 + 1e-9);
    REQUIRE(sinr(h, f, 1, noise) <= 1.0 + 1e-9);

    // No combiner pair can push both users above unit SINR: the interference
    // of each is the signal of the other.
    for (int attempt = 0; attempt < 100; ++attempt)
    {
        MatXc candidate = random_channels(rng, 8, 2);
        const double worst = std::min(sinr(h, candidate, 0, noise),
                                      sinr(h, candidate, 1, noise));
        REQUIRE(worst <= 1.0);
    }
}

TEST_CASE("matched-filter combiner identities")
{
    Rng rng(17);
    const MatXc h = random_channels(rng, 10, 1);
    const VecXc f = mrc_combiner(h.col(0));
    const std::complex<double> inner = (h.col(0).adjoint() * f)(0, 0);
    REQUIRE(std::abs(inner - 1.0) < 1e-12);

    MatXc single(10, 1);
    single.col(0) = h.col(0);
    MatXc combiner(10, 1);
    combiner.col(0) = f;
    REQUIRE(sinr(single, combiner, 0, 0.25) == Catch::Approx(4.0).epsilon(1e-10));
    REQUIRE(sum_rate(single, combiner, 0.25) ==
            Catch::Approx(std::log2(5.0)).epsilon(1e-10));

    REQUIRE_THROWS_AS(mrc_combiner(VecXc::Zero(10)), std::invalid_argument);
}

TEST_CASE("zero noise with separable users gives infinite sinr")
{
    MatXc h = MatXc::Zero(4, 2);
    h(0, 0) = 1.0;
    h(1, 1) = 1.0;
    MatXc f = MatXc::Zero(4, 2);
    f(0, 0) = 1.0;
    f(1, 1) = 1.0;
    REQUIRE(std::isinf(sinr(h, f, 0, 0.0)));
    REQUIRE(std::isinf(sinr(h, f, 1, 0.0)));
}

TEST_CASE("monte carlo sum rate is reproducible and thread-invariant")
{
    const ArrayLayout usa = build_usa(17, 5.0, 0.01);
    ChannelConfig config;
    const McStat once = sum_rate_mc(usa, config, 4, 0.01, 40, 12345);
    const McStat twice = sum_rate_mc(usa, config, 4, 0.01, 40, 12345);
    REQUIRE(once.mean == twice.mean);
    REQUIRE(once.std_error == twice.std_error);
    REQUIRE(once.trials == 40);

    setenv("NFSA_THREADS", "1", 1);
    const McStat serial = sum_rate_mc(usa, config, 4, 0.01, 40, 12345);
    setenv("NFSA_THREADS", "7", 1);
    const McStat parallel = sum_rate_mc(usa, config, 4, 0.01, 40, 12345);
    unsetenv("NFSA_THREADS");
    REQUIRE(serial.mean == parallel.mean);
    REQUIRE(serial.std_error == parallel.std_error);
    REQUIRE(once.mean == serial.mean);

    const McStat reseeded = sum_rate_mc(usa, config, 4, 0.01, 40, 54321);
    REQUIRE(reseeded.mean != once.mean);

    const McStat empty = sum_rate_mc(usa, config, 4, 0.01, 0, 1);
    REQUIRE(empty.trials == 0);
    REQUIRE(empty.mean == 0.0);
}

TEST_CASE("sum rate grows with the antenna count")
{
    ChannelConfig config;
    double previous = 0.0;
    for (int n : {9, 17, 33})
    {
        const ArrayLayout usa = build_usa(n, 10.0, 0.01);
        const McStat stat = sum_rate_mc(usa, config, 4, 0.1, 200, 5);
        REQUIRE(stat.mean > previous);
        previous = stat.mean;
    }
}

TEST_CASE("perfect-csi estimated path equals the direct simulator")
{
    const ArrayLayout usa = build_usa(17, 5.0, 0.01);
    ChannelConfig config;
    const Dictionary dict = build_dictionary(usa, 0.05, 0, 0);
    const McStat direct = sum_rate_mc(usa, config, 3, 0.01, 25, 9);
    const McStat routed = sum_rate_mc_estimated(usa, config, 3, 0.01, 25, 9, dict,
                                                CsiMode::perfect, 6);
    REQUIRE(direct.mean == routed.mean);
    REQUIRE(direct.std_error == routed.std_error);
}

TEST_CASE("estimated csi costs sum rate compared to perfect csi")
{
    const ArrayLayout usa = build_usa(33, 10.0, 0.01);
    ChannelConfig config;
    const Dictionary dict = build_dictionary(usa, 0.05, 0, 0);
    const double noise = 0.01;
    const McStat perfect = sum_rate_mc(usa, config, 4, noise, 30, 2);
    const McStat estimated = sum_rate_mc_estimated(usa, config, 4, noise, 30, 2, dict,
                                                   CsiMode::omp, 6);
    REQUIRE(estimated.mean < perfect.mean);
    REQUIRE(estimated.mean > 0.0);
    const McStat estimated_again = sum_rate_mc_estimated(usa, config, 4, noise, 30, 2, dict,
                                                         CsiMode::omp, 6);
    REQUIRE(estimated.mean == estimated_again.mean);
}

TEST_CASE("two-user benchmark separates colliding and clear angles")
{
    const ArrayLayout usa = build_usa(33, 10.0, 0.01);
    const double noise = 0.01;
    const McStat collided = two_user_sum_rate_mc(usa, 0.05, 0.0, noise, 100, 3);
    const McStat clear = two_user_sum_rate_mc(usa, 0.05, 0.1, noise, 100, 3);
    REQUIRE(clear.mean > collided.mean);

    const McStat repeat = two_user_sum_rate_mc(usa, 0.05, 0.1, noise, 100, 3);
    REQUIRE(repeat.mean == clear.mean);
    REQUIRE_THROWS_AS(two_user_sum_rate_mc(usa, 0.0, 0.1, noise, 10, 3),
                      std::invalid_argument);
}

TEST_CASE("estimation benchmark reports every method once")
{
    const ArrayLayout usa = build_usa(33, 10.0, 0.01);
    ChannelConfig config;
    const Dictionary dict = build_dictionary(usa, 0.05, 0, 0);
    const Dictionary far = build_farfield_dictionary(usa, 330);
    const std::vector<NmseStat> report = nmse_mc(usa, config, 0.1, 5, 21, dict, far, 6);
    REQUIRE(report.size() == 5);
    REQUIRE(report[0].method == "sda-omp");
    REQUIRE(report[1].method == "sda-isrce");
    REQUIRE(report[2].method == "farfield-omp");
    REQUIRE(report[3].method == "ls");
    REQUIRE(report[4].method == "genie-ls");
    for (const NmseStat& stat : report)
    {
        REQUIRE(stat.trials == 5);
        REQUIRE(std::isfinite(stat.nmse_db));
    }
    // The identity estimate pins the noise floor: NMSE = sigma^2 N / E||h||^2,
    // which is 10 log10(0.1) = -10 dB for unit-power channels... the ratio is
    // noisy at 5 trials, so only the deterministic repeat is checked here.
    const std::vector<NmseStat> again = nmse_mc(usa, config, 0.1, 5, 21, dict, far, 6);
    for (std::size_t i = 0; i < report.size(); ++i)
    {
        REQUIRE(report[i].nmse_db == again[i].nmse_db);
    }

    REQUIRE(nmse_mc(usa, config, 0.1, 0, 21, dict, far, 6).empty());
}

TEST_CASE("identity estimator tracks the noise power exactly")
{
    const ArrayLayout usa = build_usa(33, 10.0, 0.01);
    ChannelConfig config;
    const Dictionary dict = build_dictionary(usa, 0.05, 0, 0);
    const Dictionary far = build_farfield_dictionary(usa, 330);
    // Identical channel and noise streams, noise power 100x apart: the ls
    // error ratio scales by exactly 100 per trial, so the mean NMSE moves by
    // exactly 20 dB. The absolute level sits a few dB above 0 dB because the
    // per-trial ratio averages E[1 / ||h||^2] > 1 / E||h||^2.
    const std::vector<NmseStat> loud = nmse_mc(usa, config, 1.0, 60, 33, dict, far, 6);
    const std::vector<NmseStat> quiet = nmse_mc(usa, config, 0.01, 60, 33, dict, far, 6);
    REQUIRE(loud[3].method == "ls");
    REQUIRE(loud[3].nmse_db - quiet[3].nmse_db == Catch::Approx(20.0).margin(1e-6));
    REQUIRE(loud[3].nmse_db > -1.0);
    REQUIRE(loud[3].nmse_db < 5.0);
}
