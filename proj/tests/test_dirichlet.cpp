// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include <rbmwos/dirichlet.hpp>
#include <rbmwos/neumann.hpp>

using namespace rbmwos;

namespace
{
Domain const cube = Domain::box({0, 0, 0}, {1, 1, 1});
Domain const ball = Domain::ball({0, 0, 0}, 1);
}  // namespace

TEST(Dirichlet, ConstantDataIsExact)
{
    DirichletProblem const p{cube, [](Vec3 const&) { return 2.75; }, 1e-4};
    auto const r = solve_dirichlet(p, {0.3, -0.1, 0.2}, 5000, 1);
    EXPECT_EQ(r.estimate, 2.75);
    EXPECT_EQ(r.standard_error, 0.0);
}

TEST(Dirichlet, HarmonicXAtBallCenter)
{
    DirichletProblem const p{ball, [](Vec3 const& x) { return x.x; }, 1e-4};
    auto const r = solve_dirichlet(p, {0, 0, 0}, 100000, 3);
    EXPECT_LE(std::abs(r.estimate), 3 * r.standard_error);
    EXPECT_NEAR(r.sd, 1 / std::sqrt(3.0), 0.01);
}

TEST(Dirichlet, ManufacturedCubeNearAxisPoint)
{
    DirichletProblem const p{cube, manufactured_u, 1e-4};
    Vec3 const x0{0.1, 0, 0};
    EXPECT_EQ(manufactured_u(x0), 5.0);
    auto const r = solve_dirichlet(p, x0, 100000, 4);
    EXPECT_LE(std::abs(r.estimate - 5), 3 * r.standard_error + 1e-3);
}

TEST(Dirichlet, MaximumPrinciple)
{
    // Boundary data with range [-1, 1]; every estimate must stay in it.
    DirichletProblem const p{cube, [](Vec3 const& x) { return std::tanh(40 * x.x * x.y); }, 1e-3};
    for (std::uint64_t s = 0; s < 20; ++s)
    {
        auto const r = solve_dirichlet(p, {0.8, 0.7, 0.1}, 7, s);
        EXPECT_GE(r.estimate, -1.0);
        EXPECT_LE(r.estimate, 1.0);
    }
}

TEST(Dirichlet, StepCountGrowsLogarithmically)
{
    DirichletProblem p{ball, [](Vec3 const& x) { return x.y; }, 1e-3};
    double prev = 0;
    for (double eps : {1e-3, 5e-4, 1e-6})
    {
        p.eps_abs = eps;
        auto const r = solve_dirichlet(p, {0.2, 0.1, 0}, 20000, 9);
        EXPECT_LT(r.mean_steps, 200);
        EXPECT_GT(r.mean_steps, prev);
        if (eps == 5e-4)
        {
            EXPECT_LT(r.mean_steps - prev, 5.0);  // halving the shell adds O(1) steps
        }
        prev = r.mean_steps;
    }
    p.domain = cube;
    p.eps_abs = 1e-6;
    EXPECT_LT(solve_dirichlet(p, {0.9, 0.1, 0}, 20000, 9).mean_steps, 200);
}

TEST(Dirichlet, IndependentOfWorkerCount)
{
    DirichletProblem const p{cube, manufactured_u, 0};
    auto const a = solve_dirichlet(p, {0.2, 0.3, 0.4}, 3000, 5, 1);
    auto const b = solve_dirichlet(p, {0.2, 0.3, 0.4}, 3000, 5, 3);
    EXPECT_EQ(a.estimate, b.estimate);
    EXPECT_EQ(a.mean_steps, b.mean_steps);
    EXPECT_DOUBLE_EQ(a.eps_abs, 1e-4 * cube.diameter());
}

TEST(Dirichlet, RejectsBadInputs)
{
    DirichletProblem const p{cube, manufactured_u, 1e-4};
    EXPECT_THROW(solve_dirichlet(p, {1, 0, 0}, 10, 1), std::invalid_argument);
    EXPECT_THROW(solve_dirichlet(p, {0, 0, 0}, 0, 1), std::invalid_argument);
    DirichletProblem const q{cube, {}, 1e-4};
    EXPECT_THROW(solve_dirichlet(q, {0, 0, 0}, 10, 1), std::invalid_argument);
}
