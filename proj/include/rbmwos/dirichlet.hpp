// SPDX-License-Identifier: Apache-2.0
//! \file rbmwos/dirichlet.hpp
//! Classical walk-on-spheres for the Laplace equation with Dirichlet data.
#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "geometry.hpp"
#include "parallel.hpp"
#include "sampling.hpp"

namespace rbmwos
{

struct DirichletProblem
{
    Domain domain;
    std::function<double(Vec3 const&)> boundary;  //!< g on the boundary
    double eps_abs{0};                            //!< 0 selects 1e-4 * diameter

    double effective_eps_abs() const { return eps_abs > 0 ? eps_abs : 1e-4 * domain.diameter(); }
};

struct DirichletResult
{
    double estimate{0};
    double sd{0};
    double standard_error{0};
    double mean_steps{0};
    std::uint64_t max_steps{0};
    std::uint64_t paths{0};
    double eps_abs{0};
};

//! One WOS walk from \p x0; returns the number of jumps and the absorption point.
template<class Shape>
std::uint64_t wos_absorb(Shape const& shape, Vec3 x, double eps_abs, RngStream& rng, Vec3& foot)
{
    std::uint64_t steps = 0;
    double d = shape.distance(x);
    while (d > eps_abs)
    {
        x = wos_jump(x, d, rng);
        ++steps;
        if (!is_finite(x))
            throw std::logic_error("non-finite WOS position at step " + std::to_string(steps));
        d = shape.contains(x) ? shape.distance(x) : 0.0;
    }
    foot = shape.nearest_boundary_point(x);
    return steps;
}

/*!
 * u(x0) ~ mean of g at the projection of each walk's absorption point.
 *
 * Path i uses RngStream(seed, i); the reduction runs in path order.
 */
inline DirichletResult solve_dirichlet(DirichletProblem const& problem, Vec3 const& x0,
                                       std::uint64_t paths, std::uint64_t seed,
                                       unsigned workers = 1, ProgressFn const& progress = {})
{
    if (paths < 1)
        throw std::invalid_argument("path count must be >= 1");
    if (!problem.boundary)
        throw std::invalid_argument("Dirichlet problem has no boundary data");
    double const eps_abs = problem.effective_eps_abs();
    if (!(eps_abs > 0) || !(eps_abs < problem.domain.diameter()))
        throw std::invalid_argument("absorption shell must be positive and below the diameter");
    if (!is_finite(x0) || !problem.domain.contains(x0)
        || problem.domain.distance_to_boundary(x0) <= problem.domain.boundary_tolerance())
        throw std::invalid_argument("evaluation point must lie strictly inside the domain");

    std::vector<double> values(paths);
    std::vector<double> steps(paths);
    problem.domain.visit([&](auto const& shape) {
        parallel_for(
            paths, workers,
            [&](std::uint64_t i) {
                RngStream rng(seed, i);
                Vec3 foot;
                steps[i] = static_cast<double>(wos_absorb(shape, x0, eps_abs, rng, foot));
                values[i] = problem.boundary(foot);
            },
            progress);
    });

    auto const st = sample_stats(values);
    DirichletResult r;
    r.estimate = st.mean;
    r.sd = st.sd;
    r.standard_error = st.standard_error;
    r.mean_steps = compensated_sum(steps) / static_cast<double>(paths);
    for (double s : steps)
        r.max_steps = std::max(r.max_steps, static_cast<std::uint64_t>(s));
    r.paths = paths;
    r.eps_abs = eps_abs;
    return r;
}

}  // namespace rbmwos
