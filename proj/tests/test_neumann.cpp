// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include <rbmwos/neumann.hpp>

using namespace rbmwos;

namespace
{
Domain const cube = Domain::box({0, 0, 0}, {1, 1, 1});
Domain const ball = Domain::ball({0, 0, 0}, 1);

PathEvent event(std::uint64_t step, bool in_eps, std::optional<Vec3> hit = {})
{
    PathEvent e;
    e.step = step;
    e.in_eps = in_eps;
    e.region = in_eps ? RegionClass::EpsFar : RegionClass::Interior;
    e.radius = in_eps ? 0.001 : 0.1;
    e.hit = hit;
    return e;
}

// Small, fast configuration with a wide strip.
SolverConfig quick_config()
{
    SolverConfig c;
    c.dx = 0.01;
    c.k = 3;
    c.paths = 64;
    c.steps = 2000;
    c.seed = 42;
    return c;
}
}  // namespace

TEST(PathContribution, NoHitsGivesZero)
{
    RbmPath p{{0, 0, 0}, {0.001, 5}, {}};
    for (std::uint64_t j = 1; j <= 20; ++j)
        p.events.push_back(event(j, true));
    EXPECT_EQ(path_contribution(p, [](Vec3 const&) { return 1.0; }), 0.0);
}

TEST(PathContribution, CountFlushPattern)
{
    // Strip steps 1..3 with a hit at p on step 3, steps 4..5 with a hit at q on step 5.
    Vec3 const p{1, 0.2, 0.3}, q{-1, 0.5, 0.1};
    RbmPath path{{0, 0, 0}, {0.001, 5}, {}};
    path.events = {event(1, true), event(2, true), event(3, true, p), event(4, true),
                   event(5, true, q)};
    ScalarField const phi = [](Vec3 const& x) { return x.x + 10 * x.y; };
    double const expected = phi(p) * 3 + phi(q) * 2;
    EXPECT_DOUBLE_EQ(path_contribution(path, phi, StepTimeLaw::Uniform), expected);
}

TEST(PathContribution, TrailingCountIsDropped)
{
    RbmPath path{{0, 0, 0}, {0.001, 5}, {}};
    path.events = {event(1, true), event(2, true, Vec3{1, 0, 0}), event(3, true), event(4, false),
                   event(5, true)};
    EXPECT_EQ(path_contribution(path, [](Vec3 const&) { return 1.0; }, StepTimeLaw::Uniform), 2.0);
    FluxAccumulator acc([](Vec3 const&) { return 1.0; }, 0.001, StepTimeLaw::Uniform);
    for (auto const& e : path.events)
        acc(e);
    EXPECT_EQ(acc.pending(), 2u);
}

TEST(PathContribution, UnitFluxCountsFlushedStripSteps)
{
    RngStream rng(6, 0);
    RbmPath const p = simulate_path(cube, {0.9, 0.5, 0.1}, 0.005, 4, 20000, rng);
    double const c = path_contribution(p, [](Vec3 const&) { return 1.0; }, StepTimeLaw::Uniform);
    std::size_t strip = 0, flushed = 0, pending = 0;
    for (auto const& e : p.events)
    {
        pending += e.in_eps;
        strip += e.in_eps;
        if (e.hit)
        {
            flushed += pending;
            pending = 0;
        }
    }
    EXPECT_EQ(c, static_cast<double>(flushed));
    EXPECT_LE(c, static_cast<double>(strip));
}

TEST(Solve, ZeroFluxGivesZero)
{
    NeumannProblem const prob{cube, [](Vec3 const&) { return 0.0; }, {}};
    for (auto est : {LocalTimeEstimator::Occupation, LocalTimeEstimator::Levy})
    {
        SolverConfig c = quick_config();
        c.estimator = est;
        auto const r = solve(prob, {0.1, 0.2, 0.3}, c);
        EXPECT_EQ(r.estimate, 0.0);
        EXPECT_EQ(r.sd, 0.0);
        EXPECT_EQ(r.standard_error, 0.0);
    }
}

TEST(Solve, LinearInFlux)
{
    ScalarField const f1 = [](Vec3 const& x) { return x.x * x.y + 0.3; };
    ScalarField const f2 = [](Vec3 const& x) { return std::sin(3 * x.z) - x.x; };
    double const a = 2.5, b = -0.75;
    ScalarField const f = [&](Vec3 const& x) { return a * f1(x) + b * f2(x); };
    for (auto est : {LocalTimeEstimator::Occupation, LocalTimeEstimator::Levy})
    {
        SolverConfig c = quick_config();
        c.estimator = est;
        Vec3 const x0{0.3, -0.2, 0.5};
        double const u = solve({cube, f, {}}, x0, c).estimate;
        double const u1 = solve({cube, f1, {}}, x0, c).estimate;
        double const u2 = solve({cube, f2, {}}, x0, c).estimate;
        // Same paths, so only rounding separates the two sides.
        EXPECT_NEAR(u, a * u1 + b * u2, 1e-12 * (std::abs(a * u1) + std::abs(b * u2)));
    }
}

TEST(Solve, IndependentOfWorkerCount)
{
    auto const prob = manufactured_neumann_data(cube);
    for (auto rbm : {RbmKind::Wos, RbmKind::Lattice})
    {
        SolverConfig c = quick_config();
        c.rbm = rbm;
        c.paths = 1000;
        c.workers = 1;
        auto const one = solve(prob, {0.2, 0.1, 0.3}, c);
        c.workers = 4;
        auto const four = solve(prob, {0.2, 0.1, 0.3}, c);
        EXPECT_EQ(one.estimate, four.estimate);
        EXPECT_EQ(one.sd, four.sd);
        EXPECT_EQ(one.standard_error, four.standard_error);
    }
}

TEST(Solve, SameInputsSameResult)
{
    auto const prob = manufactured_neumann_data(ball);
    SolverConfig const c = quick_config();
    auto const a = solve(prob, {0.2, 0.1, 0.3}, c);
    auto const b = solve(prob, {0.2, 0.1, 0.3}, c);
    EXPECT_EQ(a.estimate, b.estimate);
    EXPECT_EQ(a.sd, b.sd);
    EXPECT_EQ(a.paths, 64u);
    EXPECT_EQ(a.steps, 2000u);
    EXPECT_EQ(a.dx, 0.01);
    EXPECT_EQ(a.k, 3);
}

TEST(Solve, TruncationsMatchIndependentRuns)
{
    auto const prob = manufactured_neumann_data(cube);
    SolverConfig c = quick_config();
    std::uint64_t const t[] = {2000, 1500};
    auto const both = solve_truncations(prob, {0.1, 0.1, 0.1}, c, t);
    c.steps = 1500;
    auto const single = solve(prob, {0.1, 0.1, 0.1}, c);
    EXPECT_EQ(both[1].estimate, single.estimate);
    EXPECT_EQ(both[1].steps, 1500u);
    c.steps = 2000;
    EXPECT_EQ(both[0].estimate, solve(prob, {0.1, 0.1, 0.1}, c).estimate);
}

TEST(Solve, StandardErrorHalvesWhenPathsQuadruple)
{
    auto const prob = manufactured_neumann_data(cube);
    double ratio_sum = 0;
    int const trials = 5;
    for (int t = 0; t < trials; ++t)
    {
        SolverConfig c = quick_config();
        c.seed = 100 + t;
        c.paths = 200;
        double const se1 = solve(prob, {0.1, 0.2, 0.3}, c).standard_error;
        c.seed = 200 + t;
        c.paths = 800;
        double const se4 = solve(prob, {0.1, 0.2, 0.3}, c).standard_error;
        ratio_sum += se4 / se1;
    }
    EXPECT_NEAR(ratio_sum / trials, 0.5, 0.1);
}

TEST(Solve, RejectsBadInputs)
{
    auto const prob = manufactured_neumann_data(cube);
    SolverConfig c = quick_config();
    EXPECT_THROW(solve(prob, {1, 0, 0}, c), std::invalid_argument);
    EXPECT_THROW(solve(prob, {1.5, 0, 0}, c), std::invalid_argument);
    c.k = 1;
    EXPECT_THROW(solve(prob, {0, 0, 0}, c), std::invalid_argument);
    c = quick_config();
    c.paths = 0;
    EXPECT_THROW(solve(prob, {0, 0, 0}, c), std::invalid_argument);
    c = quick_config();
    c.estimator = LocalTimeEstimator::Levy;
    c.levy_blocks = 7;
    EXPECT_THROW(solve(prob, {0, 0, 0}, c), std::invalid_argument);
}

TEST(Solve, ScaleFollowsEstimator)
{
    SolverConfig c;
    c.dx = 0.0005;
    c.k = 5;
    EXPECT_DOUBLE_EQ(contribution_scale(c), 0.0005 / 30);
    c.estimator = LocalTimeEstimator::Levy;
    c.steps = 30000;
    c.levy_blocks = 1;
    EXPECT_NEAR(contribution_scale(c), 0.5 * std::sqrt(std::numbers::pi / 2) * 0.05, 1e-15);
}

TEST(Manufactured, Examples)
{
    EXPECT_EQ(manufactured_u({0, 0, 0}), 5.0);
    EXPECT_EQ(manufactured_gradient({0, 0, 0}), (Vec3{0, 0, 0}));
    auto const prob = manufactured_neumann_data(cube);
    EXPECT_EQ(prob.flux({1, 0, 0}), 0.0);
    double const corner = prob.flux({1, 1, 1});
    EXPECT_NEAR(corner, 3 * std::cos(3.0) * std::sin(4.0) * std::exp(5.0), 1e-12);
    // Central difference of u along the tie-break normal (1, 0, 0).
    double const h = 1e-6;
    double const fd = (manufactured_u({1 + h, 1, 1}) - manufactured_u({1 - h, 1, 1})) / (2 * h);
    EXPECT_NEAR(corner, fd, 1e-6 * std::abs(corner));
}

TEST(Manufactured, GradientMatchesFiniteDifferences)
{
    double const h = 1e-6;
    for (Vec3 const p : {Vec3{0.3, -0.4, 0.2}, Vec3{-0.7, 0.1, 0.9}, Vec3{1.2, 0.5, -0.3}})
    {
        Vec3 const g = manufactured_gradient(p);
        for (int i = 0; i < 3; ++i)
        {
            Vec3 e{};
            e[i] = h;
            double const fd = (manufactured_u(p + e) - manufactured_u(p - e)) / (2 * h);
            EXPECT_NEAR(g[i], fd, 1e-6 * (1 + std::abs(g[i])));
        }
    }
}

TEST(Manufactured, CompatibleOnAllTestDomains)
{
    for (auto const& d : {cube, ball, Domain::ellipsoid({0, 0, 0}, {3, 2, 1})})
        EXPECT_LT(compatibility_defect(manufactured_neumann_data(d), 400), 0.01);
    NeumannProblem const bad{ball, [](Vec3 const&) { return 1.0; }, {}};
    EXPECT_NEAR(compatibility_defect(bad), 1.0, 1e-12);
}

TEST(AlignAndError, ConstantOffsetGivesZero)
{
    std::vector<Vec3> const pts{{0.1, 0, 0}, {0.2, 0.1, 0}, {0, 0.3, 0.2}};
    std::vector<double> est;
    for (auto const& p : pts)
        est.push_back(manufactured_u(p) - 3.25);
    for (auto mode : {ShiftMode::FirstPoint, ShiftMode::Mean})
    {
        auto const a = align_and_error(pts, est, manufactured_u, mode);
        EXPECT_NEAR(a.shift, 3.25, 1e-14);
        EXPECT_NEAR(a.relative_error, 0, 1e-15);
    }
}

TEST(AlignAndError, Arithmetic)
{
    std::vector<Vec3> const pts{{0, 0, 0}, {1, 1, 1}};
    std::vector<double> const est{0, 0.5};
    auto const five = [](Vec3 const&) { return 5.0; };
    auto const a = align_and_error(pts, est, five);
    EXPECT_EQ(a.shifted, (std::vector<double>{5, 5.5}));
    EXPECT_NEAR(a.relative_error, 0.5 / std::sqrt(50.0), 1e-15);
    auto const m = align_and_error(pts, est, five, ShiftMode::Mean);
    EXPECT_DOUBLE_EQ(m.shift, 4.75);
    auto const n = align_and_error(pts, est, five, ShiftMode::None);
    EXPECT_EQ(n.shift, 0.0);
    EXPECT_NEAR(n.relative_error, std::sqrt(25 + 4.5 * 4.5) / std::sqrt(50.0), 1e-15);
}

TEST(AlignAndError, Errors)
{
    std::vector<Vec3> const one{{0, 0, 0}};
    std::vector<double> const e1{1};
    EXPECT_THROW(align_and_error(one, e1, manufactured_u), std::invalid_argument);
    std::vector<Vec3> const two{{0, 0, 0}, {1, 0, 0}};
    std::vector<double> const e2{1, 2};
    EXPECT_THROW(align_and_error(two, e2, [](Vec3 const&) { return 0.0; }), UndefinedErrorNorm);
    EXPECT_THROW(align_and_error(two, e1, manufactured_u), std::invalid_argument);
}
