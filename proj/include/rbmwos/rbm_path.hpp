// SPDX-License-Identifier: Apache-2.0
//! \file rbmwos/rbm_path.hpp
//! Reflecting Brownian motion sampled by walk-on-spheres with a boundary strip.
#pragma once

#include <cstdint>
#include <algorithm>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "geometry.hpp"
#include "sampling.hpp"

namespace rbmwos
{

//! Raised when a walk produces a non-finite position.
class InvariantError : public std::logic_error
{
  public:
    using std::logic_error::logic_error;
};

//! One step of a sampled path.
struct PathEvent
{
    std::uint64_t step{0};        //!< 1-based step index
    Vec3 position;                //!< position after the step (and any pull-back)
    RegionClass region{RegionClass::Interior};  //!< class of the pre-move position
    double radius{0};             //!< jump radius used for this step
    bool in_eps{false};           //!< pre-move position was in the boundary strip
    std::optional<Vec3> hit;      //!< boundary point touched during this step
};

/*!
 * Radius of a jump that starts outside the strip (d > eps).
 *
 * ToBoundary uses the full distance to the boundary, so the sphere may reach
 * into the strip and the time it spends there is never credited. ToStrip
 * uses the distance to the strip, max(d - eps, dx), so interior jumps stay
 * out of it and the strip occupation count is complete.
 */
enum class InteriorJump
{
    ToBoundary,
    ToStrip,
};

inline constexpr std::string_view to_string(InteriorJump j)
{
    return j == InteriorJump::ToBoundary ? "to_boundary" : "to_strip";
}

//! Strip parameters shared by the walkers: dx, eps = k * dx.
struct StripParams
{
    double dx{0};
    int k{0};
    InteriorJump interior{InteriorJump::ToStrip};

    double eps() const { return k * dx; }

    void validate() const
    {
        if (!(dx > 0) || !std::isfinite(dx))
            throw std::invalid_argument("dx must be positive");
        if (k < 2)
            throw std::invalid_argument("k must be an integer >= 2");
    }
};

//! Materialized path: start point, strip parameters and every event.
struct RbmPath
{
    Vec3 start;
    StripParams strip;
    std::vector<PathEvent> events;

    double dx() const { return strip.dx; }
    double eps() const { return strip.eps(); }
    std::size_t size() const { return events.size(); }

    //! Events [begin, end) as a path of their own, starting where event begin-1 ended.
    RbmPath slice(std::size_t begin, std::size_t end) const
    {
        if (begin > end || end > events.size())
            throw std::out_of_range("bad path slice");
        RbmPath out{begin == 0 ? start : events[begin - 1].position, strip, {}};
        out.events.assign(events.begin() + static_cast<std::ptrdiff_t>(begin),
                          events.begin() + static_cast<std::ptrdiff_t>(end));
        return out;
    }
};

namespace detail
{
template<class Shape>
void require_strict_interior(Shape const& shape, Vec3 const& x0, double tol)
{
    if (!is_finite(x0) || !shape.contains(x0) || shape.distance(x0) <= tol)
        throw std::invalid_argument("start point must lie strictly inside the domain");
}
}  // namespace detail

//---------------------------------------------------------------------------//
/*!
 * Step-by-step RBM sampler on a concrete shape.
 *
 * Radius rule from the pre-move distance d: d > eps jumps per InteriorJump;
 * dx < d <= eps jumps by dx; d <= dx (including on the boundary)
 * jumps by 2 dx. A proposal outside the closed domain is pulled back to its
 * nearest boundary point and recorded as a hit; a proposal landing within
 * the boundary tolerance is recorded as a hit in place. Paths are never
 * absorbed.
 */
template<class Shape>
class RbmWalker
{
  public:
    RbmWalker(Shape const& shape, Vec3 x0, StripParams strip)
        : shape_(shape), strip_(strip), eps_(strip.eps()),
          tol_(boundary_rel_tolerance * shape.diameter()), x_(x0)
    {
        strip_.validate();
        detail::require_strict_interior(shape_, x0, tol_);
        d_ = shape_.distance(x_);
    }

    Vec3 const& position() const { return x_; }
    double distance() const { return d_; }

    PathEvent step(RngStream& rng)
    {
        PathEvent e;
        e.step = ++count_;
        e.region = classify_distance(true, d_, strip_.dx, eps_, tol_);
        switch (e.region)
        {
            case RegionClass::Interior:
                e.radius = strip_.interior == InteriorJump::ToBoundary
                               ? d_
                               : std::max(d_ - eps_, strip_.dx);
                break;
            case RegionClass::EpsFar:
                e.radius = strip_.dx;
                e.in_eps = true;
                break;
            default:
                e.radius = 2 * strip_.dx;
                e.in_eps = true;
                break;
        }
        Vec3 const y = wos_jump(x_, e.radius, rng);
        if (!shape_.contains(y))
        {
            x_ = shape_.nearest_boundary_point(y);
            d_ = 0;
            e.hit = x_;
        }
        else
        {
            x_ = y;
            d_ = shape_.distance(y);
            if (d_ <= tol_)
                e.hit = x_;
        }
        if (!is_finite(x_) || !std::isfinite(d_))
            throw InvariantError("non-finite position at step " + std::to_string(e.step));
        e.position = x_;
        return e;
    }

  private:
    Shape const& shape_;
    StripParams strip_;
    double eps_;
    double tol_;
    Vec3 x_;
    double d_{0};
    std::uint64_t count_{0};
};

//! Run \p steps WOS-RBM steps and hand each event to \p sink without storing them.
template<class Sink>
void fold_path(Domain const& domain, Vec3 const& x0, StripParams strip, std::uint64_t steps,
               RngStream& rng, Sink&& sink)
{
    if (steps < 1)
        throw std::invalid_argument("step count must be >= 1");
    domain.visit([&](auto const& shape) {
        RbmWalker walker(shape, x0, strip);
        for (std::uint64_t j = 0; j < steps; ++j)
            sink(walker.step(rng));
    });
}

inline RbmPath simulate_path(Domain const& domain, Vec3 const& x0, double dx, int k,
                             std::uint64_t steps, RngStream& rng,
                             InteriorJump interior = InteriorJump::ToStrip)
{
    RbmPath path{x0, StripParams{dx, k, interior}, {}};
    path.events.reserve(steps);
    fold_path(domain, x0, path.strip, steps, rng,
              [&](PathEvent const& e) { path.events.push_back(e); });
    return path;
}

}  // namespace rbmwos
