// SPDX-License-Identifier: Apache-2.0
//! \file rbmwos/local_time.hpp
//! Boundary local time of a sampled path: occupation-time and Levy estimators.
#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "rbm_path.hpp"

namespace rbmwos
{

enum class LocalTimeEstimator
{
    Occupation,
    Levy,
};

inline constexpr std::string_view to_string(LocalTimeEstimator e)
{
    return e == LocalTimeEstimator::Occupation ? "occupation" : "levy";
}

/*!
 * Elapsed time credited to a strip step.
 *
 * Uniform credits every strip step with dx^2/3 regardless of its radius.
 * RadiusSquared credits r^2/3, so a 2 dx step counts four times.
 */
enum class StepTimeLaw
{
    Uniform,
    RadiusSquared,
};

inline constexpr std::string_view to_string(StepTimeLaw l)
{
    return l == StepTimeLaw::Uniform ? "uniform" : "radius_squared";
}

//! Strip-step credit in units of dx^2/3.
inline std::uint64_t strip_ticks(PathEvent const& e, double dx, StepTimeLaw law)
{
    if (!e.in_eps)
        return 0;
    if (law == StepTimeLaw::Uniform)
        return 1;
    return e.radius > 1.5 * dx ? 4 : 1;
}

//---------------------------------------------------------------------------//
/*!
 * Nondecreasing local time L(j) for j = 0..NT, stored as integer tick
 * counts times a fixed unit so that sums over split paths are exact.
 */
struct LocalTimePath
{
    LocalTimeEstimator estimator{LocalTimeEstimator::Occupation};
    double unit{0};
    std::vector<std::uint64_t> ticks;  //!< ticks[0] == 0

    std::size_t size() const { return ticks.size(); }
    double value(std::size_t j) const { return static_cast<double>(ticks.at(j)) * unit; }
    double final_value() const { return ticks.empty() ? 0.0 : value(ticks.size() - 1); }
    std::uint64_t final_ticks() const { return ticks.empty() ? 0 : ticks.back(); }
};

//! Streaming occupation-time local time and elapsed-time bookkeeping.
class OccupationAccumulator
{
  public:
    OccupationAccumulator(StripParams strip, StepTimeLaw law = StepTimeLaw::RadiusSquared)
        : dx_(strip.dx), unit_(strip.dx * strip.dx / (3 * strip.eps())), law_(law)
    {
    }

    void operator()(PathEvent const& e)
    {
        auto const t = strip_ticks(e, dx_, law_);
        ticks_ += t;
        if (e.in_eps)
            ++strip_steps_;
        else
            interior_time_ += e.radius * e.radius / 3;
    }

    double unit() const { return unit_; }
    std::uint64_t ticks() const { return ticks_; }
    std::uint64_t strip_steps() const { return strip_steps_; }
    double local_time() const { return static_cast<double>(ticks_) * unit_; }

    //! Strip time plus r^2/3 for every interior jump of radius r.
    double elapsed_time() const
    {
        return static_cast<double>(ticks_) * dx_ * dx_ / 3 + interior_time_;
    }

  private:
    double dx_;
    double unit_;
    StepTimeLaw law_;
    std::uint64_t ticks_{0};
    std::uint64_t strip_steps_{0};
    double interior_time_{0};
};

//! Streaming Levy estimator: one sqrt(pi/2) sqrt(block time) per block containing a hit.
class LevyAccumulator
{
  public:
    LevyAccumulator(StripParams strip, std::uint64_t steps, std::uint64_t blocks)
    {
        if (blocks == 0 || steps % blocks != 0)
            throw std::invalid_argument("Levy block count must divide the step count");
        block_len_ = steps / blocks;
        double const block_time = static_cast<double>(block_len_) * strip.dx * strip.dx / 3;
        unit_ = std::sqrt(std::numbers::pi / 2) * std::sqrt(block_time);
    }

    //! Returns true when this event adds a tick.
    bool operator()(PathEvent const& e)
    {
        bool tick = false;
        if (e.hit && !hit_in_block_)
        {
            hit_in_block_ = true;
            ++ticks_;
            tick = true;
        }
        if (++in_block_ == block_len_)
        {
            in_block_ = 0;
            hit_in_block_ = false;
        }
        return tick;
    }

    double unit() const { return unit_; }
    std::uint64_t ticks() const { return ticks_; }
    double local_time() const { return static_cast<double>(ticks_) * unit_; }

  private:
    std::uint64_t block_len_{1};
    double unit_{0};
    std::uint64_t in_block_{0};
    bool hit_in_block_{false};
    std::uint64_t ticks_{0};
};

//---------------------------------------------------------------------------//
//! L(j) = (strip steps up to j) * dx^2 / (3 eps).
inline LocalTimePath
occupation_local_time(RbmPath const& path, StepTimeLaw law = StepTimeLaw::RadiusSquared)
{
    LocalTimePath out{LocalTimeEstimator::Occupation, 0, {}};
    OccupationAccumulator acc(path.strip, law);
    out.unit = acc.unit();
    out.ticks.reserve(path.size() + 1);
    out.ticks.push_back(0);
    for (auto const& e : path.events)
    {
        acc(e);
        out.ticks.push_back(acc.ticks());
    }
    return out;
}

//! Levy square-root estimator over \p blocks equal blocks of steps.
inline LocalTimePath levy_local_time(RbmPath const& path, std::uint64_t blocks)
{
    LocalTimePath out{LocalTimeEstimator::Levy, 0, {}};
    LevyAccumulator acc(path.strip, path.size(), blocks);
    out.unit = acc.unit();
    out.ticks.reserve(path.size() + 1);
    out.ticks.push_back(0);
    for (auto const& e : path.events)
    {
        acc(e);
        out.ticks.push_back(acc.ticks());
    }
    return out;
}

//! Diagnostic elapsed time of a path (strip steps plus interior r^2/3).
inline double elapsed_time(RbmPath const& path, StepTimeLaw law = StepTimeLaw::RadiusSquared)
{
    OccupationAccumulator acc(path.strip, law);
    for (auto const& e : path.events)
        acc(e);
    return acc.elapsed_time();
}

}  // namespace rbmwos
