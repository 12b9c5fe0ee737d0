// SPDX-License-Identifier: Apache-2.0
// Neumann problem on the unit ball with exact solution u = x. The solution
// is fixed only up to a constant, so compare the difference of two points.

#include <cstdio>

#include <rbmwos/neumann.hpp>

using namespace rbmwos;

int main()
{
    Domain const ball = Domain::ball({0, 0, 0}, 1);
    NeumannProblem const problem{ball, [](Vec3 const& p) { return p.x; },
                                 [](Vec3 const& p) { return p.x; }};

    SolverConfig cfg;
    // u = x is the slowest mode of the ball; paths need ~3e5 steps to forget x0.
    cfg.paths = 500;
    cfg.steps = 300000;
    cfg.workers = default_workers();

    auto const a = solve(problem, {0.5, 0, 0}, cfg);
    cfg.seed = 2;
    auto const b = solve(problem, {-0.5, 0, 0}, cfg);
    std::printf("u(0.5,0,0) - u(-0.5,0,0) = %.4f +- %.4f (exact 1)\n", a.estimate - b.estimate,
                std::hypot(a.standard_error, b.standard_error));
}
