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
#include <cstdint>
#include <random>

namespace nfsa
{

// Deterministic random stream. Uniform and Gaussian variates are produced
// from raw 53-bit draws (Box-Muller for the Gaussians), so sequences are
// bit-identical across platforms and standard-library implementations.
class Rng
{
  public:
    explicit Rng(std::uint64_t seed);

    // Independent stream for one Monte Carlo task; streams produced from the
    // same seed but different ids never share state.
    static Rng stream(std::uint64_t seed, std::uint64_t stream_id);
    static Rng stream(std::uint64_t seed, std::uint64_t id_a, std::uint64_t id_b);

    double uniform();                        // [0, 1)
    double uniform(double lo, double hi);    // [lo, hi)
    double normal();                         // N(0, 1)
    std::complex<double> cnormal(double variance); // CN(0, variance), circularly symmetric

  private:
    std::mt19937_64 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace nfsa
