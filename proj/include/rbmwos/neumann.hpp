// SPDX-License-Identifier: Apache-2.0
//! \file rbmwos/neumann.hpp
//! Monte Carlo point evaluation of the Laplace equation with Neumann data,
//! u(x0) ~ (1/2) E[ sum over hits of phi(hit) * (local time since last hit) ].
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "lattice.hpp"
#include "local_time.hpp"
#include "parallel.hpp"
#include "rbm_path.hpp"

namespace rbmwos
{

using ScalarField = std::function<double(Vec3 const&)>;

struct NeumannProblem
{
    Domain domain;
    ScalarField flux;   //!< outward normal derivative on the boundary
    ScalarField exact;  //!< optional, for error reports
};

enum class RbmKind
{
    Wos,
    Lattice,
};

inline constexpr std::string_view to_string(RbmKind k)
{
    return k == RbmKind::Wos ? "wos" : "lattice";
}

struct SolverConfig
{
    double dx{5e-4};
    int k{5};
    std::uint64_t paths{1000};
    std::uint64_t steps{30000};
    std::uint64_t seed{1};
    LocalTimeEstimator estimator{LocalTimeEstimator::Occupation};
    std::uint64_t levy_blocks{0};  //!< 0 selects steps / 10
    StepTimeLaw time_law{StepTimeLaw::RadiusSquared};
    InteriorJump interior{InteriorJump::ToStrip};
    RbmKind rbm{RbmKind::Wos};
    unsigned workers{1};

    StripParams strip() const { return {dx, k, interior}; }
    double eps() const { return k * dx; }
    std::uint64_t effective_levy_blocks() const
    {
        return levy_blocks ? levy_blocks : std::max<std::uint64_t>(1, steps / 10);
    }

    void validate() const
    {
        strip().validate();
        if (paths < 1)
            throw std::invalid_argument("path count must be >= 1");
        if (steps < 1)
            throw std::invalid_argument("step count must be >= 1");
        if (estimator == LocalTimeEstimator::Levy && steps % effective_levy_blocks() != 0)
            throw std::invalid_argument("Levy block count must divide the step count");
    }
};

struct SolverResult
{
    double estimate{0};
    double sd{0};              //!< of the scaled per-path contributions
    double standard_error{0};  //!< sd / sqrt(N)
    std::uint64_t paths{0};
    std::uint64_t steps{0};
    double dx{0};
    int k{0};
};

//---------------------------------------------------------------------------//
/*!
 * Streaming count/flush fold over a path's events.
 *
 * Strip steps add to a running count; every hit adds phi(hit) * count to the
 * sum (the hit step's own strip credit included) and resets the count. A
 * count left over after the last hit is dropped.
 */
class FluxAccumulator
{
  public:
    FluxAccumulator(ScalarField const& flux, double dx, StepTimeLaw law = StepTimeLaw::RadiusSquared)
        : flux_(flux), dx_(dx), law_(law)
    {
    }

    void operator()(PathEvent const& e)
    {
        count_ += strip_ticks(e, dx_, law_);
        if (e.hit)
        {
            sum_ += flux_(*e.hit) * static_cast<double>(count_);
            count_ = 0;
        }
    }

    double sum() const { return sum_; }
    std::uint64_t pending() const { return count_; }

  private:
    ScalarField const& flux_;
    double dx_;
    StepTimeLaw law_;
    std::uint64_t count_{0};
    double sum_{0};
};

//! Same fold with Levy ticks: phi at the first hit of each block.
class LevyFluxAccumulator
{
  public:
    LevyFluxAccumulator(ScalarField const& flux, StripParams strip, std::uint64_t steps,
                        std::uint64_t blocks)
        : flux_(flux), levy_(strip, steps, blocks)
    {
    }

    void operator()(PathEvent const& e)
    {
        if (levy_(e))
            sum_ += flux_(*e.hit);
    }

    double sum() const { return sum_; }
    double unit() const { return levy_.unit(); }

  private:
    ScalarField const& flux_;
    LevyAccumulator levy_;
    double sum_{0};
};

//! Raw occupation contribution sum(phi(hit) * count) of one path.
inline double path_contribution(RbmPath const& path, ScalarField const& flux,
                                StepTimeLaw law = StepTimeLaw::RadiusSquared)
{
    FluxAccumulator acc(flux, path.dx(), law);
    for (auto const& e : path.events)
        acc(e);
    return acc.sum();
}

//! Factor turning a raw contribution into a solution value.
inline double contribution_scale(SolverConfig const& cfg)
{
    if (cfg.estimator == LocalTimeEstimator::Levy)
    {
        LevyAccumulator probe(cfg.strip(), cfg.steps, cfg.effective_levy_blocks());
        return 0.5 * probe.unit();
    }
    return cfg.dx / (6.0 * cfg.k);
}

namespace detail
{
template<class Sink>
void walk(Domain const& domain, Vec3 const& x0, SolverConfig const& cfg, RngStream& rng,
          Sink&& sink)
{
    if (cfg.rbm == RbmKind::Wos)
    {
        fold_path(domain, x0, cfg.strip(), cfg.steps, rng, sink);
    }
    else
    {
        LatticeConfig const lc{cfg.dx, domain.center()};
        fold_lattice_path(domain, x0, lc, cfg.eps(), cfg.steps, rng, sink, cfg.interior);
    }
}
}  // namespace detail

//---------------------------------------------------------------------------//
/*!
 * Solve at \p x0 for several truncation lengths sharing the same paths.
 *
 * Each truncation n uses the first n steps of every path, which is exactly
 * what an independent run with steps = n and the same seed would produce.
 * Path i uses RngStream(cfg.seed, i); contributions are reduced in path
 * order, so the result does not depend on the worker count.
 */
inline std::vector<SolverResult>
solve_truncations(NeumannProblem const& problem, Vec3 const& x0, SolverConfig cfg,
                  std::span<std::uint64_t const> truncations, ProgressFn const& progress = {})
{
    if (truncations.empty())
        throw std::invalid_argument("at least one truncation length is required");
    std::uint64_t longest = 0;
    for (auto t : truncations)
    {
        if (t < 1)
            throw std::invalid_argument("truncation lengths must be >= 1");
        longest = std::max(longest, t);
    }
    cfg.steps = longest;
    cfg.validate();
    if (!problem.flux)
        throw std::invalid_argument("Neumann problem has no boundary flux");
    if (!is_finite(x0) || !problem.domain.contains(x0)
        || problem.domain.distance_to_boundary(x0) <= problem.domain.boundary_tolerance())
        throw std::invalid_argument("evaluation point must lie strictly inside the domain");

    std::size_t const nt = truncations.size();
    std::vector<std::vector<double>> raw(nt, std::vector<double>(cfg.paths));
    std::vector<double> scale(nt);
    for (std::size_t t = 0; t < nt; ++t)
    {
        SolverConfig c = cfg;
        c.steps = truncations[t];
        if (cfg.estimator == LocalTimeEstimator::Levy)
        {
            if (c.levy_blocks == 0)
                c.levy_blocks = std::max<std::uint64_t>(1, c.steps / 10);
            c.validate();
        }
        scale[t] = contribution_scale(c);
    }

    parallel_for(
        cfg.paths, cfg.workers,
        [&](std::uint64_t i) {
            RngStream rng(cfg.seed, i);
            if (cfg.estimator == LocalTimeEstimator::Occupation)
            {
                FluxAccumulator acc(problem.flux, cfg.dx, cfg.time_law);
                detail::walk(problem.domain, x0, cfg, rng, [&](PathEvent const& e) {
                    acc(e);
                    for (std::size_t t = 0; t < nt; ++t)
                        if (e.step == truncations[t])
                            raw[t][i] = acc.sum();
                });
            }
            else
            {
                std::vector<LevyFluxAccumulator> accs;
                accs.reserve(nt);
                for (std::size_t t = 0; t < nt; ++t)
                {
                    std::uint64_t const blocks = cfg.levy_blocks
                                                     ? cfg.levy_blocks
                                                     : std::max<std::uint64_t>(1, truncations[t] / 10);
                    accs.emplace_back(problem.flux, cfg.strip(), truncations[t], blocks);
                }
                detail::walk(problem.domain, x0, cfg, rng, [&](PathEvent const& e) {
                    for (std::size_t t = 0; t < nt; ++t)
                    {
                        if (e.step <= truncations[t])
                            accs[t](e);
                        if (e.step == truncations[t])
                            raw[t][i] = accs[t].sum();
                    }
                });
            }
        },
        progress);

    std::vector<SolverResult> out;
    out.reserve(nt);
    for (std::size_t t = 0; t < nt; ++t)
    {
        for (double& v : raw[t])
            v *= scale[t];
        auto const st = sample_stats(raw[t]);
        out.push_back({st.mean, st.sd, st.standard_error, cfg.paths, truncations[t], cfg.dx, cfg.k});
    }
    return out;
}

inline SolverResult solve(NeumannProblem const& problem, Vec3 const& x0, SolverConfig const& cfg,
                          ProgressFn const& progress = {})
{
    std::uint64_t const steps[] = {cfg.steps};
    return solve_truncations(problem, x0, cfg, steps, progress).front();
}

//---------------------------------------------------------------------------//
//! u = sin(3x) sin(4y) exp(5z) + 5, harmonic in R^3.
inline double manufactured_u(Vec3 const& p)
{
    return std::sin(3 * p.x) * std::sin(4 * p.y) * std::exp(5 * p.z) + 5;
}

inline Vec3 manufactured_gradient(Vec3 const& p)
{
    double const s3 = std::sin(3 * p.x), c3 = std::cos(3 * p.x);
    double const s4 = std::sin(4 * p.y), c4 = std::cos(4 * p.y);
    double const e5 = std::exp(5 * p.z);
    return {3 * c3 * s4 * e5, 4 * s3 * c4 * e5, 5 * s3 * s4 * e5};
}

//! Neumann problem whose exact solution is manufactured_u on \p domain.
inline NeumannProblem manufactured_neumann_data(Domain const& domain)
{
    NeumannProblem p{domain, {}, manufactured_u};
    p.flux = [domain](Vec3 const& x) {
        return dot(manufactured_gradient(x), domain.outward_normal(x));
    };
    return p;
}

/*!
 * Relative compatibility defect |int phi| / int |phi| by surface quadrature.
 * Advisory only: user data is not rejected on this basis.
 */
inline double compatibility_defect(NeumannProblem const& problem, int resolution = 200)
{
    double total = 0, absolute = 0;
    for (auto const& n : problem.domain.surface_quadrature(resolution))
    {
        double const f = problem.flux(n.point) * n.weight;
        total += f;
        absolute += std::abs(f);
    }
    return absolute > 0 ? std::abs(total) / absolute : 0.0;
}

//---------------------------------------------------------------------------//
enum class ShiftMode
{
    FirstPoint,  //!< match the exact value at the first point
    Mean,        //!< match the means over all points
    None,        //!< no shift (Dirichlet estimates are absolute)
};

inline constexpr std::string_view to_string(ShiftMode m)
{
    switch (m)
    {
        case ShiftMode::FirstPoint: return "first";
        case ShiftMode::Mean: return "mean";
        case ShiftMode::None: return "none";
    }
    return "unknown";
}

struct AlignedEstimates
{
    double shift{0};
    std::vector<double> shifted;
    std::vector<double> exact;
    double relative_error{0};  //!< ||shifted - exact||_2 / ||exact||_2
};

//! Raised when the exact values have zero norm.
class UndefinedErrorNorm : public std::domain_error
{
  public:
    UndefinedErrorNorm() : std::domain_error("exact solution has zero norm at the points") {}
};

inline AlignedEstimates align_and_error(std::span<Vec3 const> points,
                                        std::span<double const> estimates,
                                        ScalarField const& exact,
                                        ShiftMode mode = ShiftMode::FirstPoint)
{
    if (points.size() != estimates.size())
        throw std::invalid_argument("points and estimates differ in length");
    if (points.size() < 2)
        throw std::invalid_argument("alignment needs at least two points");
    AlignedEstimates out;
    out.exact.reserve(points.size());
    for (auto const& p : points)
        out.exact.push_back(exact(p));

    if (mode == ShiftMode::FirstPoint)
    {
        out.shift = out.exact[0] - estimates[0];
    }
    else if (mode == ShiftMode::Mean)
    {
        double diff = 0;
        for (std::size_t i = 0; i < points.size(); ++i)
            diff += out.exact[i] - estimates[i];
        out.shift = diff / static_cast<double>(points.size());
    }

    double num = 0, den = 0;
    out.shifted.reserve(points.size());
    for (std::size_t i = 0; i < points.size(); ++i)
    {
        double const s = estimates[i] + out.shift;
        out.shifted.push_back(s);
        num += (s - out.exact[i]) * (s - out.exact[i]);
        den += out.exact[i] * out.exact[i];
    }
    if (den == 0)
        throw UndefinedErrorNorm();
    out.relative_error = std::sqrt(num / den);
    return out;
}

}  // namespace rbmwos
