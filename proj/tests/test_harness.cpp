// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include <rbmwos/harness.hpp>

using namespace rbmwos;
namespace fs = std::filesystem;

namespace
{
fs::path scratch_dir(std::string const& name)
{
    fs::path const p = fs::temp_directory_path() / ("rbmwos_test_" + name);
    fs::remove_all(p);
    return p;
}

ExperimentConfig small_config()
{
    ExperimentConfig c;
    c.name = "small";
    c.domain = DomainSpec::named("sphere");
    c.solver.dx = 0.005;
    c.solver.k = 3;
    c.solver.paths = 40;
    c.solver.steps = 2000;
    c.solver.seed = 17;
    c.extra_truncations = {1000};
    c.points.count = 4;
    return c;
}
}  // namespace

TEST(PointSets, CircleExampleAndShape)
{
    auto const pts = circle_points(0.6, std::numbers::pi / 4, 15);
    ASSERT_EQ(pts.size(), 15u);
    double const a = 0.6 * std::sin(std::numbers::pi / 4);
    EXPECT_NEAR(pts[14].x, -a, 1e-12);
    EXPECT_NEAR(pts[14].y, 0, 1e-12);
    EXPECT_NEAR(pts[14].z, a, 1e-12);
    EXPECT_NEAR(a, 0.4243, 1e-4);
    for (auto const& p : pts)
    {
        EXPECT_NEAR(std::hypot(p.x, p.y), a, 1e-12);
        EXPECT_NEAR(p.z, a, 1e-12);
        for (auto name : {"cube", "sphere", "ellipsoid"})
            EXPECT_TRUE(DomainSpec::named(name).build().contains(p));
    }
    EXPECT_THROW(circle_points(0.6, 1, 0), std::invalid_argument);
}

TEST(PointSets, SegmentEndpointsAndMidpoint)
{
    Vec3 const a{0.4, 0.4, 0.6}, b{0.1, 0, 0};
    auto const two = segment_points(a, b, 2);
    ASSERT_EQ(two.size(), 2u);
    EXPECT_EQ(two[0], a);
    EXPECT_EQ(two[1], b);
    auto const pts = segment_points(a, b, 15);
    EXPECT_EQ(pts.back(), b);
    EXPECT_NEAR(pts[7].x, 0.25, 1e-15);
    EXPECT_NEAR(pts[7].y, 0.2, 1e-15);
    EXPECT_NEAR(pts[7].z, 0.3, 1e-15);
    for (auto const& p : pts)
        EXPECT_LT(norm(p), 1.0);
    EXPECT_THROW(segment_points(a, b, 1), std::invalid_argument);
}

TEST(PointSets, ReadFromFile)
{
    auto const dir = scratch_dir("points");
    fs::create_directories(dir);
    {
        std::ofstream out(dir / "pts.txt");
        out << "# x y z\n0.1 0.2 0.3\n\n-0.5, 0, 0.25\n";
    }
    auto const pts = read_points(dir / "pts.txt");
    ASSERT_EQ(pts.size(), 2u);
    EXPECT_EQ(pts[1], (Vec3{-0.5, 0, 0.25}));
    EXPECT_THROW(read_points(dir / "missing.txt"), IoError);
    fs::remove_all(dir);
}

TEST(Config, JsonRoundTrip)
{
    ExperimentConfig c = small_config();
    c.solver.estimator = LocalTimeEstimator::Levy;
    c.solver.levy_blocks = 10;
    c.solver.time_law = StepTimeLaw::Uniform;
    c.solver.interior = InteriorJump::ToBoundary;
    c.solver.rbm = RbmKind::Lattice;
    c.shift = ShiftMode::Mean;
    Json const j = to_json(c);
    EXPECT_EQ(to_json(config_from_json(j)), j);
}

TEST(Config, KeyValueRoundTrip)
{
    ExperimentConfig c = small_config();
    c.points.kind = PointSetKind::List;
    c.points.list = {{0.1, 0.2, 0.3}, {0, 0, 0}};
    std::string const text = to_key_value(c);
    EXPECT_EQ(to_json(config_from_key_value(text)), to_json(c));
}

TEST(Config, FileSaveAndLoad)
{
    auto const dir = scratch_dir("config");
    fs::create_directories(dir);
    ExperimentConfig const c = small_config();
    for (auto name : {"c.json", "c.toml"})
    {
        save_config(c, dir / name);
        EXPECT_EQ(to_json(load_config(dir / name)), to_json(c));
    }
    EXPECT_THROW(load_config(dir / "missing.toml"), IoError);
    fs::remove_all(dir);
}

TEST(Config, InvalidValuesAreRejected)
{
    Json j = to_json(small_config());
    j["solver"]["estimator"] = "bogus";
    EXPECT_THROW(config_from_json(j), std::invalid_argument);

    ExperimentConfig c = small_config();
    c.solver.k = 1;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = small_config();
    c.points.kind = PointSetKind::List;
    c.points.list = {{2, 0, 0}};
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = small_config();
    c.problem = ProblemKind::Table;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    EXPECT_THROW(config_from_key_value("solver.dx 0.1\n"), std::invalid_argument);
}

TEST(RunExperiment, IndependentOfWorkerCount)
{
    ExperimentConfig a = small_config();
    a.solver.workers = 1;
    ExperimentConfig b = a;
    b.solver.workers = 2;
    auto const ra = run_experiment(a), rb = run_experiment(b);
    ASSERT_EQ(ra.runs.size(), 2u);
    for (std::size_t t = 0; t < ra.runs.size(); ++t)
        EXPECT_EQ(ra.runs[t].raw, rb.runs[t].raw);
    EXPECT_EQ(ra.runs[1].steps, 1000u);
}

TEST(RunExperiment, ReplayFromWrittenConfigIsBitwise)
{
    auto const dir = scratch_dir("replay");
    ExperimentConfig c = small_config();
    c.out_dir = dir.string();
    c.dump_paths = true;
    auto const first = run_experiment(c);
    for (auto name : {"report.json", "config.toml", "estimates.csv", "estimates_nt1000.csv",
                      "path.csv", "local_time.csv"})
        EXPECT_TRUE(fs::exists(dir / name)) << name;

    std::ifstream in(dir / "report.json");
    Json const report = Json::parse(in);
    ExperimentConfig echo = config_from_json(report.at("config"));
    echo.out_dir.clear();
    auto const again = run_experiment(echo);
    EXPECT_EQ(again.primary().raw, first.primary().raw);
    EXPECT_EQ(report.at("telemetry").at("total_steps").get<std::uint64_t>(),
              4u * 40u * 2000u);
    fs::remove_all(dir);
}

TEST(RunExperiment, PointSeedsAreDerived)
{
    auto const r = run_experiment(small_config());
    ASSERT_EQ(r.point_seeds.size(), 4u);
    for (std::size_t i = 0; i < 4; ++i)
        EXPECT_EQ(r.point_seeds[i], derive_seed(17, i));
    ASSERT_TRUE(r.primary().aligned.has_value());
    EXPECT_DOUBLE_EQ(r.primary().aligned->shifted[0], r.primary().aligned->exact[0]);
}

TEST(RunExperiment, DirichletManufactured)
{
    ExperimentConfig c;
    c.method = Method::Dirichlet;
    c.domain = DomainSpec::named("cube");
    c.solver.paths = 20000;
    c.solver.seed = 3;
    c.points.count = 5;
    c.shift = ShiftMode::None;
    auto const r = run_experiment(c);
    ASSERT_TRUE(r.primary().aligned.has_value());
    for (std::size_t i = 0; i < r.points.size(); ++i)
        EXPECT_NEAR(r.primary().raw[i], manufactured_u(r.points[i]),
                    4 * r.primary().standard_error[i] + 1e-3);
    EXPECT_GT(r.total_steps, 0u);
}

TEST(TabulatedField, NearestNeighbour)
{
    TabulatedField const f({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, {1.0, 2.0, 3.0});
    EXPECT_EQ(f({0.1, 0.1, 0}), 1.0);
    EXPECT_EQ(f({0.9, -0.2, 0.3}), 2.0);
    EXPECT_EQ(f({0.2, 0.7, 0}), 3.0);
    EXPECT_THROW(TabulatedField({{0, 0, 0}}, {}), std::invalid_argument);
}

TEST(TabulatedField, DrivesANeumannRun)
{
    auto const dir = scratch_dir("table");
    fs::create_directories(dir);
    {
        // Flux +1 on the upper half of the sphere and -1 on the lower half.
        std::ofstream out(dir / "flux.txt");
        for (int i = 0; i < 200; ++i)
        {
            double const z = -1 + (i + 0.5) / 100.0;
            double const r = std::sqrt(1 - z * z);
            for (int a = 0; a < 8; ++a)
            {
                double const t = a * std::numbers::pi / 4;
                out << r * std::cos(t) << ' ' << r * std::sin(t) << ' ' << z << ' '
                    << (z > 0 ? 1 : -1) << '\n';
            }
        }
    }
    ExperimentConfig c = small_config();
    c.problem = ProblemKind::Table;
    c.table = (dir / "flux.txt").string();
    c.extra_truncations.clear();
    auto const r = run_experiment(c);
    EXPECT_FALSE(r.primary().aligned.has_value());
    EXPECT_LT(r.compatibility_defect, 0.05);
    fs::remove_all(dir);
}

TEST(WriteReport, UnwritableDirectoryThrows)
{
    auto const dir = scratch_dir("blocked");
    fs::create_directories(dir);
    std::ofstream(dir / "file") << "x";
    ExperimentConfig c = small_config();
    c.solver.paths = 2;
    c.solver.steps = 10;
    c.out_dir = (dir / "file" / "sub").string();
    EXPECT_THROW(run_experiment(c), IoError);
    fs::remove_all(dir);
}

TEST(PaperConfigs, Presets)
{
    auto const cube = paper_configs("cube", false);
    ASSERT_EQ(cube.size(), 2u);
    EXPECT_EQ(cube[0].solver.paths, 20000u);
    EXPECT_EQ(cube[0].solver.steps, 30000u);
    EXPECT_EQ(cube[0].solver.k, 6);
    EXPECT_EQ(cube[0].truncations(), (std::vector<std::uint64_t>{30000, 27000}));
    EXPECT_EQ(cube[1].points.kind, PointSetKind::Segment);
    EXPECT_EQ(paper_configs("ellipsoid", true)[0].solver.dx, 4e-4);
    EXPECT_EQ(paper_configs("sphere", true)[1].solver.paths, 200000u);
    for (auto name : {"cube", "sphere", "ellipsoid"})
        for (auto const& c : paper_configs(name, false))
            EXPECT_NO_THROW(c.validate());
}
