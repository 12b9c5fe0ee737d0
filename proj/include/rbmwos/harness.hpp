// SPDX-License-Identifier: Apache-2.0
//! \file rbmwos/harness.hpp
//! Experiment orchestration: configuration files, evaluation points, runs
//! over many points, reports and plot data.
#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <boost/geometry.hpp>
#include <boost/geometry/index/rtree.hpp>
#include <json.hpp>

#include "dirichlet.hpp"
#include "lattice.hpp"
#include "local_time.hpp"
#include "neumann.hpp"

namespace rbmwos
{

using Json = nlohmann::ordered_json;
using LogFn = std::function<void(std::string const&)>;

//! Raised for unreadable or unwritable files; the message names the file.
class IoError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

//---------------------------------------------------------------------------//
// EVALUATION POINTS
//---------------------------------------------------------------------------//
/*!
 * Points (r cos t sin theta2, r sin t sin theta2, r cos theta2) with
 * t = i * 2 pi / 30 for i = 1..count.
 */
inline std::vector<Vec3> circle_points(double r, double theta2, int count)
{
    if (count < 1)
        throw std::invalid_argument("circle needs at least one point");
    std::vector<Vec3> pts;
    pts.reserve(static_cast<std::size_t>(count));
    for (int i = 1; i <= count; ++i)
    {
        double const t = i * 2 * std::numbers::pi / 30;
        pts.push_back({r * std::cos(t) * std::sin(theta2), r * std::sin(t) * std::sin(theta2),
                       r * std::cos(theta2)});
    }
    return pts;
}

//! \p count evenly spaced points from \p a to \p b, both included.
inline std::vector<Vec3> segment_points(Vec3 const& a, Vec3 const& b, int count)
{
    if (count < 2)
        throw std::invalid_argument("segment needs at least two points");
    std::vector<Vec3> pts;
    pts.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i)
    {
        double const s = static_cast<double>(i) / (count - 1);
        pts.push_back(i == count - 1 ? b : a + s * (b - a));
    }
    return pts;
}

namespace detail
{
inline std::vector<std::vector<double>> read_numeric_rows(std::filesystem::path const& file,
                                                          std::size_t columns)
{
    std::ifstream in(file);
    if (!in)
        throw IoError("cannot open " + file.string());
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line))
    {
        ++lineno;
        auto const hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        for (char& c : line)
            if (c == ',' || c == ';' || c == '\t')
                c = ' ';
        std::istringstream ss(line);
        std::vector<double> row;
        std::string tok;
        while (ss >> tok)
        {
            try
            {
                std::size_t used = 0;
                row.push_back(std::stod(tok, &used));
                if (used != tok.size())
                    throw std::invalid_argument(tok);
            }
            catch (std::exception const&)
            {
                if (rows.empty() && row.empty())
                {
                    row.clear();
                    break;  // header line
                }
                throw IoError(file.string() + ":" + std::to_string(lineno) + ": bad number '"
                              + tok + "'");
            }
        }
        if (row.empty())
            continue;
        if (row.size() != columns)
            throw IoError(file.string() + ":" + std::to_string(lineno) + ": expected "
                          + std::to_string(columns) + " columns");
        rows.push_back(std::move(row));
    }
    return rows;
}
}  // namespace detail

//! Points from a text file, one "x y z" (or "x,y,z") per line.
inline std::vector<Vec3> read_points(std::filesystem::path const& file)
{
    std::vector<Vec3> pts;
    for (auto const& r : detail::read_numeric_rows(file, 3))
        pts.push_back({r[0], r[1], r[2]});
    if (pts.empty())
        throw IoError(file.string() + ": no points");
    return pts;
}

enum class PointSetKind
{
    Circle,
    Segment,
    List,
};

struct PointSpec
{
    PointSetKind kind{PointSetKind::Circle};
    double radius{0.6};
    double theta2{std::numbers::pi / 4};
    int count{15};
    Vec3 from{0.4, 0.4, 0.6};
    Vec3 to{0.1, 0, 0};
    std::vector<Vec3> list;

    std::vector<Vec3> generate() const
    {
        switch (kind)
        {
            case PointSetKind::Circle: return circle_points(radius, theta2, count);
            case PointSetKind::Segment: return segment_points(from, to, count);
            case PointSetKind::List: return list;
        }
        return {};
    }
};

//---------------------------------------------------------------------------//
// TABULATED BOUNDARY DATA
//---------------------------------------------------------------------------//
/*!
 * Boundary values given at scattered points; evaluation returns the value at
 * the nearest tabulated point (R-tree query).
 */
class TabulatedField
{
    using BPoint = boost::geometry::model::point<double, 3, boost::geometry::cs::cartesian>;
    using Entry = std::pair<BPoint, std::size_t>;
    using Tree = boost::geometry::index::rtree<Entry, boost::geometry::index::quadratic<16>>;

  public:
    TabulatedField(std::vector<Vec3> const& points, std::vector<double> values)
        : values_(std::move(values))
    {
        if (points.empty() || points.size() != values_.size())
            throw std::invalid_argument("table needs matching, non-empty points and values");
        std::vector<Entry> entries;
        entries.reserve(points.size());
        for (std::size_t i = 0; i < points.size(); ++i)
            entries.emplace_back(BPoint(points[i].x, points[i].y, points[i].z), i);
        tree_ = std::make_shared<Tree const>(entries.begin(), entries.end());
    }

    //! Table from a file of "x y z value" rows.
    static TabulatedField from_file(std::filesystem::path const& file)
    {
        std::vector<Vec3> pts;
        std::vector<double> vals;
        for (auto const& r : detail::read_numeric_rows(file, 4))
        {
            pts.push_back({r[0], r[1], r[2]});
            vals.push_back(r[3]);
        }
        if (pts.empty())
            throw IoError(file.string() + ": empty table");
        return TabulatedField(pts, std::move(vals));
    }

    double operator()(Vec3 const& x) const
    {
        std::vector<Entry> hit;
        tree_->query(boost::geometry::index::nearest(BPoint(x.x, x.y, x.z), 1),
                     std::back_inserter(hit));
        return values_[hit.front().second];
    }

    std::size_t size() const { return values_.size(); }

  private:
    std::shared_ptr<Tree const> tree_;
    std::vector<double> values_;
};

//---------------------------------------------------------------------------//
// CONFIGURATION
//---------------------------------------------------------------------------//
struct DomainSpec
{
    DomainKind kind{DomainKind::Box};
    Vec3 center{};
    Vec3 extents{1, 1, 1};  //!< half-widths, radius (x only) or semi-axes

    Domain build() const
    {
        switch (kind)
        {
            case DomainKind::Box: return Domain::box(center, extents);
            case DomainKind::Ball: return Domain::ball(center, extents.x);
            case DomainKind::Ellipsoid: return Domain::ellipsoid(center, extents);
        }
        throw std::invalid_argument("unknown domain kind");
    }

    //! "cube" (size 2), "sphere" (unit ball) or "ellipsoid" (semi-axes 3, 2, 1).
    static DomainSpec named(std::string_view name)
    {
        if (name == "cube")
            return {DomainKind::Box, {}, {1, 1, 1}};
        if (name == "sphere")
            return {DomainKind::Ball, {}, {1, 1, 1}};
        if (name == "ellipsoid")
            return {DomainKind::Ellipsoid, {}, {3, 2, 1}};
        throw std::invalid_argument("unknown domain '" + std::string(name)
                                    + "' (cube, sphere, ellipsoid)");
    }
};

enum class Method
{
    Neumann,
    Dirichlet,
};

enum class ProblemKind
{
    Manufactured,  //!< u = sin(3x) sin(4y) exp(5z) + 5
    Table,         //!< boundary values from a file, no exact solution
};

struct ExperimentConfig
{
    std::string name{"experiment"};
    Method method{Method::Neumann};
    DomainSpec domain;
    ProblemKind problem{ProblemKind::Manufactured};
    std::string table;  //!< boundary value file for ProblemKind::Table
    SolverConfig solver;
    std::vector<std::uint64_t> extra_truncations;  //!< further NT values sharing the paths
    PointSpec points;
    ShiftMode shift{ShiftMode::FirstPoint};
    double eps_abs{0};  //!< Dirichlet shell, 0 selects 1e-4 * diameter
    std::string out_dir;
    bool dump_paths{false};

    std::vector<std::uint64_t> truncations() const
    {
        std::vector<std::uint64_t> t{solver.steps};
        for (auto s : extra_truncations)
            if (std::find(t.begin(), t.end(), s) == t.end())
                t.push_back(s);
        return t;
    }

    void validate() const
    {
        if (method == Method::Neumann)
            solver.validate();
        else if (solver.paths < 1)
            throw std::invalid_argument("path count must be >= 1");
        for (auto s : extra_truncations)
            if (s < 1)
                throw std::invalid_argument("truncation lengths must be >= 1");
        if (problem == ProblemKind::Table && table.empty())
            throw std::invalid_argument("problem 'table' requires a table file");
        Domain const d = domain.build();
        auto const pts = points.generate();
        if (pts.empty())
            throw std::invalid_argument("no evaluation points");
        for (std::size_t i = 0; i < pts.size(); ++i)
            if (!is_finite(pts[i]) || !d.contains(pts[i])
                || d.distance_to_boundary(pts[i]) <= d.boundary_tolerance())
                throw std::invalid_argument("evaluation point " + std::to_string(i)
                                            + " is not strictly inside the domain");
    }
};

namespace detail
{
template<class E, std::size_t N>
E parse_enum(std::string_view what, std::string const& s,
             std::array<std::pair<std::string_view, E>, N> const& table)
{
    for (auto const& [name, value] : table)
        if (s == name)
            return value;
    std::string msg = "unknown " + std::string(what) + " '" + s + "' (expected";
    for (auto const& [name, value] : table)
        msg += " " + std::string(name);
    throw std::invalid_argument(msg + ")");
}

inline constexpr std::array<std::pair<std::string_view, DomainKind>, 3> domain_kinds{
    {{"box", DomainKind::Box}, {"ball", DomainKind::Ball}, {"ellipsoid", DomainKind::Ellipsoid}}};
inline constexpr std::array<std::pair<std::string_view, Method>, 2> methods{
    {{"neumann", Method::Neumann}, {"dirichlet", Method::Dirichlet}}};
inline constexpr std::array<std::pair<std::string_view, ProblemKind>, 2> problems{
    {{"manufactured", ProblemKind::Manufactured}, {"table", ProblemKind::Table}}};
inline constexpr std::array<std::pair<std::string_view, PointSetKind>, 3> point_kinds{
    {{"circle", PointSetKind::Circle},
     {"segment", PointSetKind::Segment},
     {"list", PointSetKind::List}}};
inline constexpr std::array<std::pair<std::string_view, LocalTimeEstimator>, 2> estimators{
    {{"occupation", LocalTimeEstimator::Occupation}, {"levy", LocalTimeEstimator::Levy}}};
inline constexpr std::array<std::pair<std::string_view, StepTimeLaw>, 2> time_laws{
    {{"uniform", StepTimeLaw::Uniform}, {"radius_squared", StepTimeLaw::RadiusSquared}}};
inline constexpr std::array<std::pair<std::string_view, InteriorJump>, 2> interior_jumps{
    {{"to_boundary", InteriorJump::ToBoundary}, {"to_strip", InteriorJump::ToStrip}}};
inline constexpr std::array<std::pair<std::string_view, RbmKind>, 2> rbm_kinds{
    {{"wos", RbmKind::Wos}, {"lattice", RbmKind::Lattice}}};
inline constexpr std::array<std::pair<std::string_view, ShiftMode>, 3> shift_modes{
    {{"first", ShiftMode::FirstPoint}, {"mean", ShiftMode::Mean}, {"none", ShiftMode::None}}};

template<class E, std::size_t N>
std::string enum_name(E v, std::array<std::pair<std::string_view, E>, N> const& table)
{
    for (auto const& [name, value] : table)
        if (v == value)
            return std::string(name);
    return "unknown";
}

inline Json vec_json(Vec3 const& v)
{
    return Json::array({v.x, v.y, v.z});
}

inline Vec3 json_vec(Json const& j)
{
    if (!j.is_array() || j.size() != 3)
        throw std::invalid_argument("expected a 3-vector, got " + j.dump());
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

//! Object member or \p fallback when absent.
template<class T>
T opt(Json const& j, char const* key, T fallback)
{
    auto it = j.find(key);
    return it == j.end() ? fallback : it->template get<T>();
}
}  // namespace detail

inline Json to_json(SolverConfig const& s)
{
    using namespace detail;
    return Json{{"dx", s.dx},
                {"k", s.k},
                {"paths", s.paths},
                {"steps", s.steps},
                {"seed", s.seed},
                {"estimator", enum_name(s.estimator, estimators)},
                {"levy_blocks", s.levy_blocks},
                {"time_law", enum_name(s.time_law, time_laws)},
                {"interior_jump", enum_name(s.interior, interior_jumps)},
                {"rbm", enum_name(s.rbm, rbm_kinds)},
                {"workers", s.workers}};
}

inline SolverConfig solver_config_from_json(Json const& j)
{
    using namespace detail;
    SolverConfig s;
    s.dx = opt(j, "dx", s.dx);
    s.k = opt(j, "k", s.k);
    s.paths = opt(j, "paths", s.paths);
    s.steps = opt(j, "steps", s.steps);
    s.seed = opt(j, "seed", s.seed);
    s.estimator = parse_enum("estimator", opt<std::string>(j, "estimator", "occupation"),
                             estimators);
    s.levy_blocks = opt(j, "levy_blocks", s.levy_blocks);
    s.time_law = parse_enum("time law", opt<std::string>(j, "time_law", "radius_squared"),
                            time_laws);
    s.interior = parse_enum("interior jump", opt<std::string>(j, "interior_jump", "to_strip"),
                            interior_jumps);
    s.rbm = parse_enum("rbm", opt<std::string>(j, "rbm", "wos"), rbm_kinds);
    s.workers = opt(j, "workers", s.workers);
    return s;
}

inline Json to_json(ExperimentConfig const& c)
{
    using namespace detail;
    Json pts{{"kind", enum_name(c.points.kind, point_kinds)}};
    if (c.points.kind == PointSetKind::Circle)
    {
        pts["radius"] = c.points.radius;
        pts["theta2"] = c.points.theta2;
        pts["count"] = c.points.count;
    }
    else if (c.points.kind == PointSetKind::Segment)
    {
        pts["from"] = vec_json(c.points.from);
        pts["to"] = vec_json(c.points.to);
        pts["count"] = c.points.count;
    }
    else
    {
        Json list = Json::array();
        for (auto const& p : c.points.list)
            list.push_back(vec_json(p));
        pts["list"] = std::move(list);
    }
    return Json{{"name", c.name},
                {"method", enum_name(c.method, methods)},
                {"domain",
                 {{"kind", enum_name(c.domain.kind, domain_kinds)},
                  {"center", vec_json(c.domain.center)},
                  {"extents", vec_json(c.domain.extents)}}},
                {"problem", {{"kind", enum_name(c.problem, problems)}, {"table", c.table}}},
                {"solver", to_json(c.solver)},
                {"extra_truncations", c.extra_truncations},
                {"points", std::move(pts)},
                {"shift", enum_name(c.shift, shift_modes)},
                {"eps_abs", c.eps_abs},
                {"out_dir", c.out_dir},
                {"dump_paths", c.dump_paths}};
}

inline ExperimentConfig config_from_json(Json const& j)
{
    using namespace detail;
    if (!j.is_object())
        throw std::invalid_argument("configuration must be an object");
    ExperimentConfig c;
    c.name = opt<std::string>(j, "name", c.name);
    c.method = parse_enum("method", opt<std::string>(j, "method", "neumann"), methods);
    if (auto it = j.find("domain"); it != j.end())
    {
        c.domain.kind = parse_enum("domain kind", opt<std::string>(*it, "kind", "box"),
                                   domain_kinds);
        if (it->contains("center"))
            c.domain.center = json_vec(it->at("center"));
        if (it->contains("extents"))
            c.domain.extents = json_vec(it->at("extents"));
    }
    if (auto it = j.find("problem"); it != j.end())
    {
        c.problem = parse_enum("problem", opt<std::string>(*it, "kind", "manufactured"),
                               problems);
        c.table = opt<std::string>(*it, "table", "");
    }
    if (auto it = j.find("solver"); it != j.end())
        c.solver = solver_config_from_json(*it);
    c.extra_truncations = opt(j, "extra_truncations", c.extra_truncations);
    if (auto it = j.find("points"); it != j.end())
    {
        auto& p = c.points;
        p.kind = parse_enum("point set", opt<std::string>(*it, "kind", "circle"), point_kinds);
        p.radius = opt(*it, "radius", p.radius);
        p.theta2 = opt(*it, "theta2", p.theta2);
        p.count = opt(*it, "count", p.count);
        if (it->contains("from"))
            p.from = json_vec(it->at("from"));
        if (it->contains("to"))
            p.to = json_vec(it->at("to"));
        if (it->contains("list"))
            for (auto const& v : it->at("list"))
                p.list.push_back(json_vec(v));
    }
    c.shift = parse_enum("shift", opt<std::string>(j, "shift", "first"), shift_modes);
    c.eps_abs = opt(j, "eps_abs", c.eps_abs);
    c.out_dir = opt<std::string>(j, "out_dir", "");
    c.dump_paths = opt(j, "dump_paths", false);
    return c;
}

/*!
 * Flat key-value text: one "dotted.key = value" line per leaf, values in
 * JSON syntax (strings quoted, vectors as [x, y, z]), '#' starts a comment
 * line.
 */
inline std::string to_key_value(ExperimentConfig const& c)
{
    std::ostringstream out;
    out << "# rbmwos experiment\n";
    std::function<void(std::string const&, Json const&)> emit = [&](std::string const& prefix,
                                                                   Json const& j) {
        if (j.is_object())
        {
            for (auto const& [k, v] : j.items())
                emit(prefix.empty() ? k : prefix + "." + k, v);
            return;
        }
        out << prefix << " = " << j.dump() << "\n";
    };
    emit("", to_json(c));
    return out.str();
}

inline ExperimentConfig config_from_key_value(std::string const& text)
{
    Json root = Json::object();
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    auto trim = [](std::string s) {
        auto const b = s.find_first_not_of(" \t\r");
        auto const e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    while (std::getline(in, line))
    {
        ++lineno;
        line = trim(line);
        if (line.empty() || line[0] == '#')
            continue;
        auto const eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno)
                                        + ": expected key = value");
        std::string const key = trim(line.substr(0, eq));
        std::string const value = trim(line.substr(eq + 1));
        if (key.empty())
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": empty key");
        Json parsed;
        try
        {
            parsed = Json::parse(value);
        }
        catch (Json::parse_error const&)
        {
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": bad value '"
                                        + value + "'");
        }
        std::string ptr;
        for (char ch : "/" + key)
            ptr += ch == '.' ? '/' : ch;
        root[Json::json_pointer(ptr)] = std::move(parsed);
    }
    return config_from_json(root);
}

//! Reads JSON for a .json extension, key-value text otherwise.
inline ExperimentConfig load_config(std::filesystem::path const& file)
{
    std::ifstream in(file);
    if (!in)
        throw IoError("cannot open " + file.string());
    std::stringstream ss;
    ss << in.rdbuf();
    try
    {
        if (file.extension() == ".json")
            return config_from_json(Json::parse(ss.str()));
        return config_from_key_value(ss.str());
    }
    catch (Json::exception const& e)
    {
        throw std::invalid_argument(file.string() + ": " + e.what());
    }
    catch (std::invalid_argument const& e)
    {
        throw std::invalid_argument(file.string() + ": " + e.what());
    }
}

inline void save_config(ExperimentConfig const& c, std::filesystem::path const& file)
{
    std::ofstream out(file);
    if (!out)
        throw IoError("cannot write " + file.string());
    if (file.extension() == ".json")
        out << to_json(c).dump(2) << "\n";
    else
        out << to_key_value(c);
    if (!out)
        throw IoError("write failed for " + file.string());
}

//---------------------------------------------------------------------------//
// REPORTS
//---------------------------------------------------------------------------//
//! Estimates for every point at one truncation length.
struct TruncationRun
{
    std::uint64_t steps{0};  //!< NT (0 for Dirichlet runs)
    std::vector<double> raw;
    std::vector<double> sd;
    std::vector<double> standard_error;
    std::vector<double> mean_steps;  //!< Dirichlet only
    std::optional<AlignedEstimates> aligned;

    double relative_error() const
    {
        return aligned ? aligned->relative_error : std::numeric_limits<double>::quiet_NaN();
    }
};

struct RunReport
{
    ExperimentConfig config;
    std::vector<Vec3> points;
    std::vector<std::uint64_t> point_seeds;
    std::vector<TruncationRun> runs;  //!< runs[0] is the configured NT
    double compatibility_defect{0};
    double wall_seconds{0};
    std::uint64_t total_steps{0};

    TruncationRun const& primary() const { return runs.front(); }
    double relative_error() const { return primary().relative_error(); }
};

inline Json to_json(RunReport const& r)
{
    using detail::vec_json;
    Json runs = Json::array();
    for (auto const& t : r.runs)
    {
        Json pts = Json::array();
        for (std::size_t i = 0; i < r.points.size(); ++i)
        {
            Json p{{"index", i},
                   {"point", vec_json(r.points[i])},
                   {"raw", t.raw[i]},
                   {"sd", t.sd[i]},
                   {"stderr", t.standard_error[i]}};
            if (t.aligned)
            {
                p["exact"] = t.aligned->exact[i];
                p["shifted"] = t.aligned->shifted[i];
            }
            if (!t.mean_steps.empty())
                p["mean_steps"] = t.mean_steps[i];
            pts.push_back(std::move(p));
        }
        Json run{{"steps", t.steps}, {"points", std::move(pts)}};
        if (t.aligned)
        {
            run["shift"] = t.aligned->shift;
            run["relative_error"] = t.aligned->relative_error;
        }
        runs.push_back(std::move(run));
    }
    return Json{{"config", to_json(r.config)},
                {"point_seeds", r.point_seeds},
                {"compatibility_defect", r.compatibility_defect},
                {"runs", std::move(runs)},
                {"telemetry", {{"wall_seconds", r.wall_seconds}, {"total_steps", r.total_steps}}}};
}

//! Per-point plot data: index, x, y, z, exact, raw, shifted, stderr.
inline void write_estimates_csv(RunReport const& r, TruncationRun const& t,
                                std::filesystem::path const& file)
{
    std::ofstream out(file);
    if (!out)
        throw IoError("cannot write " + file.string());
    out.precision(17);
    out << "index,x,y,z,exact,raw,shifted,stderr\n";
    for (std::size_t i = 0; i < r.points.size(); ++i)
    {
        auto const& p = r.points[i];
        out << i << ',' << p.x << ',' << p.y << ',' << p.z << ',';
        if (t.aligned)
            out << t.aligned->exact[i] << ',' << t.raw[i] << ',' << t.aligned->shifted[i];
        else
            out << ',' << t.raw[i] << ',';
        out << ',' << t.standard_error[i] << '\n';
    }
    if (!out)
        throw IoError("write failed for " + file.string());
}

//! Path dump: step, x, y, z, in_eps, hit, hit_x, hit_y, hit_z.
inline void write_path_csv(RbmPath const& path, std::filesystem::path const& file)
{
    std::ofstream out(file);
    if (!out)
        throw IoError("cannot write " + file.string());
    out.precision(17);
    out << "step,x,y,z,in_eps,hit,hit_x,hit_y,hit_z\n";
    out << 0 << ',' << path.start.x << ',' << path.start.y << ',' << path.start.z << ",0,0,,,\n";
    for (auto const& e : path.events)
    {
        out << e.step << ',' << e.position.x << ',' << e.position.y << ',' << e.position.z << ','
            << (e.in_eps ? 1 : 0) << ',' << (e.hit ? 1 : 0) << ',';
        if (e.hit)
            out << e.hit->x << ',' << e.hit->y << ',' << e.hit->z;
        else
            out << ",,";
        out << '\n';
    }
    if (!out)
        throw IoError("write failed for " + file.string());
}

//! Local-time dump: step, L.
inline void write_local_time_csv(LocalTimePath const& lt, std::filesystem::path const& file)
{
    std::ofstream out(file);
    if (!out)
        throw IoError("cannot write " + file.string());
    out.precision(17);
    out << "step,L\n";
    for (std::size_t j = 0; j < lt.size(); ++j)
        out << j << ',' << lt.value(j) << '\n';
    if (!out)
        throw IoError("write failed for " + file.string());
}

//! report.json, config.toml and estimates CSVs under \p dir.
inline void write_report(RunReport const& r, std::filesystem::path const& dir)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
        throw IoError("cannot create " + dir.string() + ": " + ec.message());
    {
        auto const file = dir / "report.json";
        std::ofstream out(file);
        if (!out)
            throw IoError("cannot write " + file.string());
        out << to_json(r).dump(2) << "\n";
        if (!out)
            throw IoError("write failed for " + file.string());
    }
    save_config(r.config, dir / "config.toml");
    for (std::size_t t = 0; t < r.runs.size(); ++t)
    {
        auto const name = t == 0 ? std::string("estimates.csv")
                                 : "estimates_nt" + std::to_string(r.runs[t].steps) + ".csv";
        write_estimates_csv(r, r.runs[t], dir / name);
    }
}

//---------------------------------------------------------------------------//
// RUNS
//---------------------------------------------------------------------------//
namespace detail
{
//! Logs "label: done/total" each time another tenth of the work completes.
inline ProgressFn decile_progress(LogFn const& log, std::string label)
{
    if (!log)
        return {};
    auto last = std::make_shared<std::uint64_t>(0);
    return [log, label = std::move(label), last](std::uint64_t done, std::uint64_t total) {
        std::uint64_t const decile = total ? done * 10 / total : 10;
        if (decile > *last)
        {
            *last = decile;
            log(label + ": " + std::to_string(done) + "/" + std::to_string(total) + " paths");
        }
    };
}
}  // namespace detail

//! Boundary data and exact solution for a configuration.
inline NeumannProblem build_problem(ExperimentConfig const& cfg)
{
    Domain const domain = cfg.domain.build();
    if (cfg.problem == ProblemKind::Manufactured)
        return manufactured_neumann_data(domain);
    auto table = std::make_shared<TabulatedField const>(TabulatedField::from_file(cfg.table));
    return {domain, [table](Vec3 const& x) { return (*table)(x); }, {}};
}

//! Materialize path 0 of point 0 and its local time.
inline void dump_first_path(ExperimentConfig const& cfg, Vec3 const& x0, std::uint64_t seed,
                            std::filesystem::path const& dir)
{
    Domain const domain = cfg.domain.build();
    RngStream rng(seed, 0);
    SolverConfig const& s = cfg.solver;
    RbmPath const path
        = s.rbm == RbmKind::Wos
              ? simulate_path(domain, x0, s.dx, s.k, s.steps, rng, s.interior)
              : simulate_lattice_rbm(domain, x0, {s.dx, domain.center()}, s.k, s.steps, rng,
                                     s.interior);
    write_path_csv(path, dir / "path.csv");
    auto const lt = s.estimator == LocalTimeEstimator::Levy
                        ? levy_local_time(path, s.effective_levy_blocks())
                        : occupation_local_time(path, s.time_law);
    write_local_time_csv(lt, dir / "local_time.csv");
}

/*!
 * Solve at every evaluation point, align against the exact solution when one
 * is known, and write the report when an output directory is configured.
 *
 * Point i uses seed derive_seed(solver.seed, i), so points are independent
 * and any single point can be rerun on its own.
 */
inline RunReport run_experiment(ExperimentConfig const& cfg, LogFn const& log = {})
{
    cfg.validate();
    auto const t0 = std::chrono::steady_clock::now();
    NeumannProblem const problem = build_problem(cfg);

    RunReport rep;
    rep.config = cfg;
    rep.points = cfg.points.generate();
    std::size_t const np = rep.points.size();
    for (std::size_t i = 0; i < np; ++i)
        rep.point_seeds.push_back(derive_seed(cfg.solver.seed, i));

    if (cfg.method == Method::Neumann)
    {
        rep.compatibility_defect = compatibility_defect(problem);
        if (log && rep.compatibility_defect > 0.01)
            log("warning: boundary flux violates compatibility (relative defect "
                + std::to_string(rep.compatibility_defect) + ")");
        auto const truncs = cfg.truncations();
        rep.runs.resize(truncs.size());
        for (std::size_t t = 0; t < truncs.size(); ++t)
        {
            rep.runs[t].steps = truncs[t];
            rep.runs[t].raw.resize(np);
            rep.runs[t].sd.resize(np);
            rep.runs[t].standard_error.resize(np);
        }
        for (std::size_t i = 0; i < np; ++i)
        {
            SolverConfig s = cfg.solver;
            s.seed = rep.point_seeds[i];
            auto const res = solve_truncations(
                problem, rep.points[i], s, truncs,
                detail::decile_progress(log, "point " + std::to_string(i + 1) + "/"
                                                 + std::to_string(np)));
            for (std::size_t t = 0; t < truncs.size(); ++t)
            {
                rep.runs[t].raw[i] = res[t].estimate;
                rep.runs[t].sd[i] = res[t].sd;
                rep.runs[t].standard_error[i] = res[t].standard_error;
            }
        }
        rep.total_steps = static_cast<std::uint64_t>(np) * cfg.solver.paths
                          * *std::max_element(truncs.begin(), truncs.end());
    }
    else
    {
        DirichletProblem const dp{problem.domain,
                                  cfg.problem == ProblemKind::Manufactured ? problem.exact
                                                                           : problem.flux,
                                  cfg.eps_abs};
        TruncationRun run;
        double steps = 0;
        for (std::size_t i = 0; i < np; ++i)
        {
            auto const res = solve_dirichlet(
                dp, rep.points[i], cfg.solver.paths, rep.point_seeds[i], cfg.solver.workers,
                detail::decile_progress(log, "point " + std::to_string(i + 1) + "/"
                                                 + std::to_string(np)));
            run.raw.push_back(res.estimate);
            run.sd.push_back(res.sd);
            run.standard_error.push_back(res.standard_error);
            run.mean_steps.push_back(res.mean_steps);
            steps += res.mean_steps * static_cast<double>(res.paths);
        }
        rep.runs.push_back(std::move(run));
        rep.total_steps = static_cast<std::uint64_t>(std::llround(steps));
    }

    if (problem.exact && np >= 2)
        for (auto& run : rep.runs)
            run.aligned = align_and_error(rep.points, run.raw, problem.exact, cfg.shift);

    rep.wall_seconds
        = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!cfg.out_dir.empty())
    {
        write_report(rep, cfg.out_dir);
        if (cfg.dump_paths && cfg.method == Method::Neumann)
            dump_first_path(cfg, rep.points.front(), rep.point_seeds.front(), cfg.out_dir);
        if (log)
            log("report written to " + cfg.out_dir);
    }
    return rep;
}

//---------------------------------------------------------------------------//
//! Reference experiment presets (scaled N unless \p full_scale).
inline std::vector<ExperimentConfig> paper_configs(std::string_view domain, bool full_scale)
{
    ExperimentConfig base;
    base.domain = DomainSpec::named(domain);
    base.solver.paths = full_scale ? 200000 : 20000;
    base.solver.steps = 30000;
    base.solver.workers = default_workers();
    if (domain == "cube")
    {
        base.solver.dx = 5e-4;
        base.solver.k = 6;
        base.extra_truncations = {27000};
    }
    else if (domain == "sphere")
    {
        base.solver.dx = 5e-4;
        base.solver.k = 5;
    }
    else
    {
        base.solver.dx = 4e-4;
        base.solver.k = 5;
    }
    std::vector<ExperimentConfig> out;
    for (auto kind : {PointSetKind::Circle, PointSetKind::Segment})
    {
        ExperimentConfig c = base;
        c.points.kind = kind;
        c.name = std::string(domain) + (kind == PointSetKind::Circle ? "-circle" : "-segment");
        if (kind == PointSetKind::Segment)
            c.extra_truncations.clear();
        out.push_back(std::move(c));
    }
    return out;
}

inline Json to_json(MomentReport const& m)
{
    return Json{{"steps", m.steps},
                {"spacing", m.spacing},
                {"samples", m.samples},
                {"expected_variance", m.expected_variance},
                {"mean", m.mean},
                {"variance", m.variance},
                {"covariance", {{"xy", m.covariance[0]}, {"xz", m.covariance[1]}, {"yz", m.covariance[2]}}},
                {"covariance_se",
                 {{"xy", m.covariance_se[0]}, {"xz", m.covariance_se[1]}, {"yz", m.covariance_se[2]}}},
                {"excess_kurtosis", m.excess_kurtosis}};
}

}  // namespace rbmwos
