// SPDX-License-Identifier: Apache-2.0
// Dirichlet baseline: classical walk on spheres in the cube.

#include <cstdio>

#include <rbmwos/dirichlet.hpp>
#include <rbmwos/neumann.hpp>

using namespace rbmwos;

int main()
{
    DirichletProblem const problem{Domain::box({0, 0, 0}, {1, 1, 1}), manufactured_u, 1e-4};
    Vec3 const x0{0.3, 0.2, 0.1};
    auto const r = solve_dirichlet(problem, x0, 100000, 1, default_workers());
    std::printf("estimate %.5f +- %.5f, exact %.5f, mean steps %.1f\n", r.estimate,
                r.standard_error, manufactured_u(x0), r.mean_steps);
}
