// SPDX-License-Identifier: Apache-2.0
//! \file tools/rbmwos.cpp
//! Command-line driver for the Neumann/Dirichlet solvers and the lattice check.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include <rbmwos/harness.hpp>

using namespace rbmwos;

namespace
{
struct Overrides
{
    std::string config;
    std::string domain;
    double dx{0};
    int k{0};
    std::uint64_t paths{0};
    std::uint64_t steps{0};
    std::uint64_t seed{0};
    unsigned workers{0};
    std::string points;
    int count{0};
    std::string estimator;
    std::string rbm;
    std::string time_law;
    std::string interior;
    std::string shift;
    std::uint64_t levy_blocks{0};
    std::vector<std::uint64_t> truncation;
    double eps_abs{0};
    std::string table;
    std::string out;
    bool dump_paths{false};
    bool print_config{false};
    bool quiet{false};
};

void add_experiment_options(CLI::App& sub, Overrides& o, bool neumann)
{
    sub.add_option("--config", o.config, "Experiment file (.json or key = value text)");
    sub.add_option("--domain", o.domain, "cube | sphere | ellipsoid");
    sub.add_option("--paths", o.paths, "Paths per evaluation point (N)");
    sub.add_option("--seed", o.seed, "Master seed");
    sub.add_option("--workers", o.workers, "Worker threads (default: all cores)");
    sub.add_option("--points", o.points, "circle | segment | <file with x y z rows>");
    sub.add_option("--count", o.count, "Number of circle or segment points");
    sub.add_option("--shift", o.shift, "first | mean | none");
    sub.add_option("--table", o.table, "Boundary data file (x y z value rows)");
    sub.add_option("--out", o.out, "Directory for report.json, CSVs and dumps");
    sub.add_flag("--print-config", o.print_config, "Print the resolved config and exit");
    sub.add_flag("-q,--quiet", o.quiet, "No progress log");
    if (neumann)
    {
        sub.add_option("--dx", o.dx, "Strip step length");
        sub.add_option("--k-eps", o.k, "Strip width multiplier k (eps = k dx)");
        sub.add_option("--steps", o.steps, "Steps per path (NT)");
        sub.add_option("--estimator", o.estimator, "occupation | levy");
        sub.add_option("--levy-blocks", o.levy_blocks, "Levy blocks (default NT/10)");
        sub.add_option("--rbm", o.rbm, "wos | lattice");
        sub.add_option("--time-law", o.time_law, "radius_squared | uniform");
        sub.add_option("--interior-jump", o.interior, "to_strip | to_boundary");
        sub.add_option("--truncation", o.truncation, "Extra NT values sharing the same paths");
        sub.add_flag("--dump-paths", o.dump_paths, "Write path.csv and local_time.csv");
    }
    else
    {
        sub.add_option("--eps-abs", o.eps_abs, "Absorption shell (default 1e-4 diameter)");
    }
}

ExperimentConfig resolve(Overrides const& o, Method method)
{
    ExperimentConfig c = o.config.empty() ? ExperimentConfig{} : load_config(o.config);
    if (o.config.empty())
        c.solver.workers = default_workers();
    c.method = method;
    if (method == Method::Dirichlet && o.config.empty())
        c.shift = ShiftMode::None;
    if (!o.domain.empty())
        c.domain = DomainSpec::named(o.domain);
    if (o.dx > 0)
        c.solver.dx = o.dx;
    if (o.k > 0)
        c.solver.k = o.k;
    if (o.paths > 0)
        c.solver.paths = o.paths;
    if (o.steps > 0)
        c.solver.steps = o.steps;
    if (o.seed > 0)
        c.solver.seed = o.seed;
    if (o.workers > 0)
        c.solver.workers = o.workers;
    if (o.levy_blocks > 0)
        c.solver.levy_blocks = o.levy_blocks;
    Json patch = to_json(c);
    if (!o.estimator.empty())
        patch["solver"]["estimator"] = o.estimator;
    if (!o.rbm.empty())
        patch["solver"]["rbm"] = o.rbm;
    if (!o.time_law.empty())
        patch["solver"]["time_law"] = o.time_law;
    if (!o.interior.empty())
        patch["solver"]["interior_jump"] = o.interior;
    if (!o.shift.empty())
        patch["shift"] = o.shift;
    c = config_from_json(patch);
    if (!o.points.empty())
    {
        if (o.points == "circle")
            c.points.kind = PointSetKind::Circle;
        else if (o.points == "segment")
            c.points.kind = PointSetKind::Segment;
        else
        {
            c.points.kind = PointSetKind::List;
            c.points.list = read_points(o.points);
        }
    }
    if (o.count > 0)
        c.points.count = o.count;
    if (!o.truncation.empty())
        c.extra_truncations = o.truncation;
    if (o.eps_abs > 0)
        c.eps_abs = o.eps_abs;
    if (!o.table.empty())
    {
        c.problem = ProblemKind::Table;
        c.table = o.table;
    }
    if (!o.out.empty())
        c.out_dir = o.out;
    if (o.dump_paths)
        c.dump_paths = true;
    c.validate();
    return c;
}

LogFn stderr_log(bool quiet)
{
    if (quiet)
        return {};
    auto const start = std::chrono::steady_clock::now();
    return [start](std::string const& msg) {
        double const t
            = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::fprintf(stderr, "[%9.1fs] %s\n", t, msg.c_str());
    };
}

Json summary(RunReport const& r)
{
    Json runs = Json::array();
    for (auto const& t : r.runs)
    {
        Json j{{"steps", t.steps}};
        if (t.aligned)
            j["relative_error"] = t.aligned->relative_error;
        runs.push_back(std::move(j));
    }
    return Json{{"name", r.config.name},
                {"points", r.points.size()},
                {"runs", std::move(runs)},
                {"wall_seconds", r.wall_seconds},
                {"total_steps", r.total_steps}};
}

int fail(std::string const& kind, std::string const& message, int code)
{
    std::cerr << Json{{"error", kind}, {"message", message}}.dump() << std::endl;
    return code;
}
}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Walk-on-spheres solvers for the Laplace equation with Neumann or Dirichlet "
                 "data"};
    app.require_subcommand(1);

    Overrides neu, dir;
    auto* solve_neumann = app.add_subcommand("solve-neumann", "Neumann problem at a point set");
    add_experiment_options(*solve_neumann, neu, true);
    auto* solve_dirichlet = app.add_subcommand("solve-dirichlet", "Dirichlet WOS baseline");
    add_experiment_options(*solve_dirichlet, dir, false);

    std::uint64_t lc_steps = 10000, lc_samples = 100000, lc_seed = 1;
    double lc_spacing = 0.01;
    unsigned lc_workers = 0;
    std::string lc_out;
    auto* lattice = app.add_subcommand("lattice-check", "Moments of n-step lattice walks");
    lattice->add_option("--steps", lc_steps, "Steps per walk (n)")->capture_default_str();
    lattice->add_option("--spacing", lc_spacing, "Lattice spacing h")->capture_default_str();
    lattice->add_option("--samples", lc_samples, "Independent walks")->capture_default_str();
    lattice->add_option("--seed", lc_seed, "Seed")->capture_default_str();
    lattice->add_option("--workers", lc_workers, "Worker threads (default: all cores)");
    lattice->add_option("--out", lc_out, "Write the report to this JSON file");

    std::string repro_domain, repro_out;
    bool full_scale = false, repro_quiet = false;
    unsigned repro_workers = 0;
    std::uint64_t repro_seed = 0, repro_paths = 0;
    auto* repro = app.add_subcommand("paper-repro", "Circle and segment runs of a test domain");
    repro->add_option("domain", repro_domain, "cube | sphere | ellipsoid")
        ->required()
        ->check(CLI::IsMember({"cube", "sphere", "ellipsoid"}));
    repro->add_flag("--full-scale", full_scale, "N = 2e5 paths instead of 2e4");
    repro->add_option("--paths", repro_paths, "Override the path count");
    repro->add_option("--seed", repro_seed, "Master seed");
    repro->add_option("--workers", repro_workers, "Worker threads (default: all cores)");
    repro->add_option("--out", repro_out, "Parent directory for the per-run reports");
    repro->add_flag("-q,--quiet", repro_quiet, "No progress log");

    try
    {
        app.parse(argc, argv);
    }
    catch (CLI::CallForHelp const& e)
    {
        return app.exit(e);
    }
    catch (CLI::ParseError const& e)
    {
        return fail("usage", e.what(), e.get_exit_code() ? e.get_exit_code() : 2);
    }

    try
    {
        if (solve_neumann->parsed() || solve_dirichlet->parsed())
        {
            bool const is_neumann = solve_neumann->parsed();
            Overrides const& o = is_neumann ? neu : dir;
            auto const cfg = resolve(o, is_neumann ? Method::Neumann : Method::Dirichlet);
            if (o.print_config)
            {
                std::cout << to_key_value(cfg);
                return 0;
            }
            auto const rep = run_experiment(cfg, stderr_log(o.quiet));
            std::cout << (cfg.out_dir.empty() ? to_json(rep) : summary(rep)).dump(2) << std::endl;
        }
        else if (lattice->parsed())
        {
            auto const rep = appendix_time_law_check(lc_steps, lc_spacing, lc_samples, lc_seed,
                                                     lc_workers ? lc_workers : default_workers());
            auto const j = to_json(rep);
            if (!lc_out.empty())
            {
                std::ofstream out(lc_out);
                if (!(out << j.dump(2) << "\n"))
                    throw IoError("cannot write " + lc_out);
            }
            std::cout << j.dump(2) << std::endl;
        }
        else if (repro->parsed())
        {
            Json all = Json::array();
            for (auto cfg : paper_configs(repro_domain, full_scale))
            {
                if (repro_paths > 0)
                    cfg.solver.paths = repro_paths;
                if (repro_seed > 0)
                    cfg.solver.seed = repro_seed;
                if (repro_workers > 0)
                    cfg.solver.workers = repro_workers;
                if (!repro_out.empty())
                    cfg.out_dir = (std::filesystem::path(repro_out) / cfg.name).string();
                auto const rep = run_experiment(cfg, stderr_log(repro_quiet));
                all.push_back(summary(rep));
            }
            std::cout << all.dump(2) << std::endl;
        }
    }
    catch (std::invalid_argument const& e)
    {
        return fail("invalid_argument", e.what(), 2);
    }
    catch (IoError const& e)
    {
        return fail("io", e.what(), 3);
    }
    catch (std::exception const& e)
    {
        return fail("runtime", e.what(), 1);
    }
    return 0;
}
