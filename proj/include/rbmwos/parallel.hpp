// SPDX-License-Identifier: Apache-2.0
//! \file rbmwos/parallel.hpp
//! Deterministic fan-out over independent tasks and ordered reductions.
#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <span>
#include <thread>
#include <vector>

namespace rbmwos
{

//! Called with (completed, total) at batch granularity; must be cheap.
using ProgressFn = std::function<void(std::uint64_t, std::uint64_t)>;

inline unsigned default_workers()
{
    return std::max(1u, std::thread::hardware_concurrency());
}

/*!
 * Run task(i) for i in [0, n) on up to \p workers threads.
 *
 * Tasks are handed out in batches from a shared counter. Results must be
 * written to slot i by the task, so the outcome does not depend on the
 * schedule. The first exception thrown by any task is rethrown here.
 */
template<class Task>
void parallel_for(std::uint64_t n, unsigned workers, Task&& task,
                  ProgressFn const& progress = {}, std::uint64_t batch = 256)
{
    workers = std::max(1u, workers);
    batch = std::max<std::uint64_t>(1, batch);
    std::atomic<std::uint64_t> next{0};
    std::atomic<std::uint64_t> done{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex mutex;

    auto worker = [&] {
        try
        {
            for (;;)
            {
                if (failed.load(std::memory_order_relaxed))
                    return;
                std::uint64_t const begin = next.fetch_add(batch);
                if (begin >= n)
                    return;
                std::uint64_t const end = std::min(n, begin + batch);
                for (std::uint64_t i = begin; i < end; ++i)
                    task(i);
                std::uint64_t const total = done.fetch_add(end - begin) + (end - begin);
                if (progress)
                {
                    std::lock_guard lock(mutex);
                    progress(total, n);
                }
            }
        }
        catch (...)
        {
            std::lock_guard lock(mutex);
            if (!error)
                error = std::current_exception();
            failed = true;
        }
    };

    if (workers == 1 || n <= batch)
    {
        worker();
    }
    else
    {
        std::vector<std::jthread> pool;
        unsigned const count = static_cast<unsigned>(
            std::min<std::uint64_t>(workers, (n + batch - 1) / batch));
        pool.reserve(count);
        for (unsigned w = 0; w < count; ++w)
            pool.emplace_back(worker);
    }
    if (error)
        std::rethrow_exception(error);
}

//! Neumaier-compensated sum in index order.
inline double compensated_sum(std::span<double const> values)
{
    double sum = 0;
    double comp = 0;
    for (double v : values)
    {
        double const t = sum + v;
        if (std::abs(sum) >= std::abs(v))
            comp += (sum - t) + v;
        else
            comp += (v - t) + sum;
        sum = t;
    }
    return sum + comp;
}

//! Mean and sample standard deviation (two-pass, compensated mean).
struct SampleStats
{
    double mean{0};
    double sd{0};
    double standard_error{0};
};

inline SampleStats sample_stats(std::span<double const> values)
{
    SampleStats s;
    auto const n = values.size();
    if (n == 0)
        return s;
    s.mean = compensated_sum(values) / static_cast<double>(n);
    if (n > 1)
    {
        std::vector<double> sq(n);
        for (std::size_t i = 0; i < n; ++i)
        {
            double const dv = values[i] - s.mean;
            sq[i] = dv * dv;
        }
        s.sd = std::sqrt(compensated_sum(sq) / static_cast<double>(n - 1));
        s.standard_error = s.sd / std::sqrt(static_cast<double>(n));
    }
    return s;
}

}  // namespace rbmwos
