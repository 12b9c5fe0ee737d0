// SPDX-License-Identifier: Apache-2.0
// One reflecting path in the cube: print the local time every 5000 steps.

#include <cstdio>

#include <rbmwos/local_time.hpp>

using namespace rbmwos;

int main()
{
    Domain const cube = Domain::box({0, 0, 0}, {1, 1, 1});
    RngStream rng(7, 0);
    RbmPath const path = simulate_path(cube, {0.4, 0.4, 0.6}, 5e-4, 6, 30000, rng);
    LocalTimePath const occ = occupation_local_time(path);
    LocalTimePath const levy = levy_local_time(path, 3000);

    std::size_t hits = 0;
    for (auto const& e : path.events)
        hits += e.hit ? 1 : 0;
    std::printf("%8s %12s %12s\n", "step", "occupation", "levy");
    for (std::size_t j = 0; j <= path.size(); j += 5000)
        std::printf("%8zu %12.6f %12.6f\n", j, occ.value(j), levy.value(j));
    std::printf("boundary hits: %zu\n", hits);
}
