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

#include <atomic>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace nfsa::detail
{

inline int thread_count()
{
    if (const char* env = std::getenv("NFSA_THREADS"))
    {
        const int parsed = std::atoi(env);
        if (parsed > 0)
        {
            return parsed;
        }
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs fn(0), ..., fn(count - 1), each exactly once, on NFSA_THREADS workers.
// Callers must write results into per-index slots and reduce afterwards, so
// outputs never depend on the scheduling order. The first exception thrown
// by any task is rethrown on the calling thread after all workers join.
inline void parallel_for(int count, const std::function<void(int)>& fn)
{
    if (count <= 0)
    {
        return;
    }
    const int workers = std::min(thread_count(), count);
    if (workers <= 1)
    {
        for (int i = 0; i < count; ++i)
        {
            fn(i);
        }
        return;
    }

    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    const auto work = [&]() {
        while (true)
        {
            const int index = next.fetch_add(1);
            if (index >= count)
            {
                return;
            }
            try
            {
                fn(index);
            }
            catch (...)
            {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure)
                {
                    failure = std::current_exception();
                }
            }
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w)
    {
        pool.emplace_back(work);
    }
    for (std::thread& worker : pool)
    {
        worker.join();
    }
    if (failure)
    {
        std::rethrow_exception(failure);
    }
}

} // namespace nfsa::detail
