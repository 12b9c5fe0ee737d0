// SPDX-License-Identifier: Apache-2.0
//! \file rbmwos/lattice.hpp
//! Six-neighbour lattice walks: the strip alternative to WOS for RBM and the
//! moment check of the dx^2/3 time-step law.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "parallel.hpp"
#include "rbm_path.hpp"

namespace rbmwos
{

struct LatticeConfig
{
    double spacing{0};
    Vec3 origin;  //!< a lattice node; test domains anchor it at their center

    void validate() const
    {
        if (!(spacing > 0) || !std::isfinite(spacing))
            throw std::invalid_argument("lattice spacing must be positive");
    }
};

//! Unit moves indexed 0..5: +x, -x, +y, -y, +z, -z.
inline constexpr std::array<Vec3, 6> lattice_moves{
    Vec3{1, 0, 0}, Vec3{-1, 0, 0}, Vec3{0, 1, 0}, Vec3{0, -1, 0}, Vec3{0, 0, 1}, Vec3{0, 0, -1}};

/*!
 * Exactly uniform draws from {0..5} using 3-bit chunks of 64-bit words with
 * rejection of 6 and 7 (21 chunks per word).
 */
class SixWayDie
{
  public:
    int operator()(RngStream& rng)
    {
        for (;;)
        {
            if (left_ == 0)
            {
                bits_ = rng();
                left_ = 21;
            }
            int const v = static_cast<int>(bits_ & 7u);
            bits_ >>= 3;
            --left_;
            if (v < 6)
                return v;
        }
    }

  private:
    std::uint64_t bits_{0};
    int left_{0};
};

inline Vec3 lattice_step(Vec3 const& x, LatticeConfig const& cfg, SixWayDie& die, RngStream& rng)
{
    return x + cfg.spacing * lattice_moves[static_cast<std::size_t>(die(rng))];
}

/*!
 * Closest lattice node to \p x inside the closed domain.
 *
 * Searches growing cubes of nodes around x; ties go to the first node in
 * lexicographic (x, then y, then z index) order.
 */
template<class Shape>
Vec3 snap_inside(Shape const& shape, Vec3 const& x, LatticeConfig const& cfg)
{
    std::array<long long, 3> base{};
    for (int i = 0; i < 3; ++i)
        base[static_cast<std::size_t>(i)]
            = static_cast<long long>(std::floor((x[i] - cfg.origin[i]) / cfg.spacing));
    for (int reach = 1; reach <= 8; ++reach)
    {
        double best = std::numeric_limits<double>::infinity();
        Vec3 best_node;
        for (long long i = base[0] - reach + 1; i <= base[0] + reach; ++i)
            for (long long j = base[1] - reach + 1; j <= base[1] + reach; ++j)
                for (long long k = base[2] - reach + 1; k <= base[2] + reach; ++k)
                {
                    Vec3 const node = cfg.origin
                                      + cfg.spacing
                                            * Vec3{static_cast<double>(i), static_cast<double>(j),
                                                   static_cast<double>(k)};
                    if (!shape.contains(node))
                        continue;
                    double const d2 = norm_squared(node - x);
                    if (d2 < best)
                    {
                        best = d2;
                        best_node = node;
                    }
                }
        if (best < std::numeric_limits<double>::infinity())
            return best_node;
    }
    throw std::runtime_error("no lattice node inside the domain near the requested point");
}

//---------------------------------------------------------------------------//
/*!
 * RBM with lattice moves in the boundary strip.
 *
 * Outside the strip the walker takes WOS jumps sized per InteriorJump; a jump that lands in
 * the strip is snapped to the nearest in-domain node. In the strip it takes
 * one lattice move per step. A move leaving the closed domain is projected
 * onto the boundary (recorded as a hit) and then snapped to the closest
 * in-domain node. Landing on the boundary also counts as a hit.
 */
template<class Shape>
class LatticeRbmWalker
{
  public:
    LatticeRbmWalker(Shape const& shape, Vec3 x0, LatticeConfig cfg, double eps,
                     InteriorJump interior = InteriorJump::ToStrip)
        : shape_(shape), cfg_(cfg), eps_(eps), interior_(interior),
          tol_(boundary_rel_tolerance * shape.diameter()), x_(x0)
    {
        cfg_.validate();
        if (!(eps > cfg_.spacing))
            throw std::invalid_argument("strip width must exceed the lattice spacing");
        detail::require_strict_interior(shape_, x0, tol_);
        d_ = shape_.distance(x_);
        if (d_ <= eps_)
        {
            x_ = snap_inside(shape_, x_, cfg_);
            d_ = shape_.distance(x_);
        }
    }

    Vec3 const& position() const { return x_; }

    PathEvent step(RngStream& rng)
    {
        PathEvent e;
        e.step = ++count_;
        e.region = classify_distance(true, d_, cfg_.spacing, eps_, tol_);
        if (e.region == RegionClass::Interior)
        {
            e.radius = interior_ == InteriorJump::ToBoundary ? d_
                                                             : std::max(d_ - eps_, cfg_.spacing);
            Vec3 y = wos_jump(x_, e.radius, rng);
            if (!shape_.contains(y))
            {
                y = shape_.nearest_boundary_point(y);
                e.hit = y;
            }
            double d = shape_.distance(y);
            if (!e.hit && d <= tol_)
                e.hit = y;
            if (d <= eps_)
            {
                y = snap_inside(shape_, y, cfg_);
                d = shape_.distance(y);
            }
            x_ = y;
            d_ = d;
        }
        else
        {
            e.radius = cfg_.spacing;
            e.in_eps = true;
            Vec3 y = lattice_step(x_, cfg_, die_, rng);
            if (!shape_.contains(y))
            {
                Vec3 const foot = shape_.nearest_boundary_point(y);
                e.hit = foot;
                y = snap_inside(shape_, foot, cfg_);
                x_ = y;
                d_ = shape_.distance(y);
            }
            else
            {
                x_ = y;
                d_ = shape_.distance(y);
                if (d_ <= tol_)
                    e.hit = y;
            }
        }
        if (!is_finite(x_))
            throw InvariantError("non-finite lattice position at step " + std::to_string(e.step));
        e.position = x_;
        return e;
    }

  private:
    Shape const& shape_;
    LatticeConfig cfg_;
    double eps_;
    InteriorJump interior_;
    double tol_;
    Vec3 x_;
    double d_{0};
    std::uint64_t count_{0};
    SixWayDie die_;
};

template<class Sink>
void fold_lattice_path(Domain const& domain, Vec3 const& x0, LatticeConfig const& cfg,
                       double eps, std::uint64_t steps, RngStream& rng, Sink&& sink,
                       InteriorJump interior = InteriorJump::ToStrip)
{
    if (steps < 1)
        throw std::invalid_argument("step count must be >= 1");
    domain.visit([&](auto const& shape) {
        LatticeRbmWalker walker(shape, x0, cfg, eps, interior);
        for (std::uint64_t j = 0; j < steps; ++j)
            sink(walker.step(rng));
    });
}

/*!
 * Lattice RBM as a path; \c strip.dx is the lattice spacing and eps must be
 * an integer multiple k >= 2 of it.
 */
inline RbmPath simulate_lattice_rbm(Domain const& domain, Vec3 const& x0, LatticeConfig const& cfg,
                                    int k, std::uint64_t steps, RngStream& rng,
                                    InteriorJump interior = InteriorJump::ToStrip)
{
    RbmPath path{x0, StripParams{cfg.spacing, k, interior}, {}};
    path.strip.validate();
    path.events.reserve(steps);
    fold_lattice_path(
        domain, x0, cfg, path.eps(), steps, rng,
        [&](PathEvent const& e) { path.events.push_back(e); }, interior);
    return path;
}

//---------------------------------------------------------------------------//
//! Moments of n-step free lattice walks (coordinates of the end point).
struct MomentReport
{
    std::uint64_t steps{0};
    double spacing{0};
    std::uint64_t samples{0};
    double expected_variance{0};               //!< n h^2 / 3
    std::array<double, 3> variance{};          //!< x, y, z
    std::array<double, 3> covariance{};        //!< xy, xz, yz
    std::array<double, 3> covariance_se{};     //!< sampling SE of each covariance
    std::array<double, 3> excess_kurtosis{};   //!< x, y, z
    std::array<double, 3> mean{};
};

inline MomentReport appendix_time_law_check(std::uint64_t steps, double spacing,
                                            std::uint64_t samples, std::uint64_t seed,
                                            unsigned workers = 1)
{
    if (steps < 1)
        throw std::invalid_argument("step count must be >= 1");
    if (samples < 10000)
        throw std::invalid_argument("moment check needs at least 1e4 samples");
    if (!(spacing > 0))
        throw std::invalid_argument("lattice spacing must be positive");

    // End-point displacement in lattice units.
    std::vector<std::array<std::int64_t, 3>> ends(samples);
    parallel_for(samples, workers, [&](std::uint64_t s) {
        RngStream rng(seed, s);
        SixWayDie die;
        std::array<std::int64_t, 6> counts{};
        for (std::uint64_t j = 0; j < steps; ++j)
            ++counts[static_cast<std::size_t>(die(rng))];
        ends[s] = {counts[0] - counts[1], counts[2] - counts[3], counts[4] - counts[5]};
    });

    MomentReport rep;
    rep.steps = steps;
    rep.spacing = spacing;
    rep.samples = samples;
    rep.expected_variance = static_cast<double>(steps) * spacing * spacing / 3;

    auto const n = static_cast<double>(samples);
    std::array<std::vector<double>, 3> coord;
    for (int c = 0; c < 3; ++c)
    {
        auto& v = coord[static_cast<std::size_t>(c)];
        v.resize(samples);
        for (std::uint64_t s = 0; s < samples; ++s)
            v[s] = static_cast<double>(ends[s][static_cast<std::size_t>(c)]) * spacing;
        auto const st = sample_stats(v);
        rep.mean[static_cast<std::size_t>(c)] = st.mean;
        rep.variance[static_cast<std::size_t>(c)] = st.sd * st.sd;
        double m2 = 0, m4 = 0;
        for (double x : v)
        {
            double const d2 = (x - st.mean) * (x - st.mean);
            m2 += d2;
            m4 += d2 * d2;
        }
        m2 /= n;
        m4 /= n;
        rep.excess_kurtosis[static_cast<std::size_t>(c)] = m4 / (m2 * m2) - 3;
    }
    constexpr std::array<std::array<int, 2>, 3> pairs{{{0, 1}, {0, 2}, {1, 2}}};
    for (std::size_t p = 0; p < 3; ++p)
    {
        auto const& a = coord[static_cast<std::size_t>(pairs[p][0])];
        auto const& b = coord[static_cast<std::size_t>(pairs[p][1])];
        double const ma = rep.mean[static_cast<std::size_t>(pairs[p][0])];
        double const mb = rep.mean[static_cast<std::size_t>(pairs[p][1])];
        std::vector<double> prod(samples);
        for (std::uint64_t s = 0; s < samples; ++s)
            prod[s] = (a[s] - ma) * (b[s] - mb);
        auto const st = sample_stats(prod);
        rep.covariance[p] = st.mean * n / (n - 1);
        rep.covariance_se[p] = st.standard_error;
    }
    return rep;
}

}  // namespace rbmwos
