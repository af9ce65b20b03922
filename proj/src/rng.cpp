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

#include "nfsa/rng.hpp"

#include <cmath>

namespace nfsa
{

namespace
{

// splitmix64 finalizer; a bijection on 64-bit words.
std::uint64_t mix64(std::uint64_t z)
{
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Collapses (seed, id_a, id_b) into one key; distinct id tuples give
// distinct keys with overwhelming probability because each stage is a
// bijection applied after an xor with the next id.
std::uint64_t stream_key(std::uint64_t seed, std::uint64_t id_a, std::uint64_t id_b)
{
    return mix64(mix64(mix64(seed) ^ id_a) ^ id_b);
}

} // namespace

Rng::Rng(std::uint64_t seed)
{
    // Expand the key into engine seed material. Both the expansion and
    // mt19937_64 are fully specified by the standard, so states and the
    // produced sequences are identical across implementations.
    std::uint64_t state = seed;
    std::uint32_t words[8];
    for (int i = 0; i < 4; ++i)
    {
        state = mix64(state);
        words[2 * i] = static_cast<std::uint32_t>(state);
        words[2 * i + 1] = static_cast<std::uint32_t>(state >> 32);
    }
    std::seed_seq seq(words, words + 8);
    gen_.seed(seq);
}

Rng Rng::stream(std::uint64_t seed, std::uint64_t stream_id)
{
    return Rng(stream_key(seed, stream_id, 0));
}

Rng Rng::stream(std::uint64_t seed, std::uint64_t id_a, std::uint64_t id_b)
{
    return Rng(stream_key(seed, id_a, id_b));
}

double Rng::uniform()
{
    // 53 high bits scaled into [0, 1); every value is exactly representable.
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi)
{
    return lo + (hi - lo) * uniform();
}

double Rng::normal()
{
    if (have_spare_)
    {
        have_spare_ = false;
        return spare_;
    }
    // Box-Muller; 1 - u keeps the log argument in (0, 1].
    const double u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(1.0 - u1));
    const double phase = 2.0 * 3.14159265358979323846 * u2;
    spare_ = radius * std::sin(phase);
    have_spare_ = true;
    return radius * std::cos(phase);
}

std::complex<double> Rng::cnormal(double variance)
{
    const double scale = std::sqrt(variance / 2.0);
    const double re = normal();
    const double im = normal();
    return {scale * re, scale * im};
}

} // namespace nfsa
