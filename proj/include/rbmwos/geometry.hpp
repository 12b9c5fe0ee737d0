// SPDX-License-Identifier: Apache-2.0
//! \file rbmwos/geometry.hpp
//! Bounded test domains (box, ball, ellipsoid) and the queries the walkers
//! need: containment, distance to the boundary, projection and normals.
#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "vec3.hpp"

namespace rbmwos
{

//! Position of a point relative to the boundary strip of width eps.
enum class RegionClass
{
    Interior,    //!< d > eps
    EpsFar,      //!< dx < d <= eps
    EpsNear,     //!< 0 < d <= dx (within boundary tolerance counts as OnBoundary)
    OnBoundary,  //!< d within tolerance of zero
    Outside,     //!< not in the closed domain
};

inline constexpr std::string_view to_string(RegionClass r)
{
    switch (r)
    {
        case RegionClass::Interior: return "interior";
        case RegionClass::EpsFar: return "eps_far";
        case RegionClass::EpsNear: return "eps_near";
        case RegionClass::OnBoundary: return "on_boundary";
        case RegionClass::Outside: return "outside";
    }
    return "unknown";
}

inline constexpr bool in_eps_region(RegionClass r)
{
    return r == RegionClass::EpsFar || r == RegionClass::EpsNear
           || r == RegionClass::OnBoundary;
}

//! Relative tolerance (times the diameter) for a point to count as on the boundary.
inline constexpr double boundary_rel_tolerance = 1e-9;

//! Classify from a precomputed distance; total over all inputs.
inline constexpr RegionClass
classify_distance(bool inside, double dist, double dx, double eps, double tol)
{
    if (!inside)
        return RegionClass::Outside;
    if (dist <= tol)
        return RegionClass::OnBoundary;
    if (dist <= dx)
        return RegionClass::EpsNear;
    if (dist <= eps)
        return RegionClass::EpsFar;
    return RegionClass::Interior;
}

struct SurfaceNode
{
    Vec3 point;
    double weight;
};

namespace detail
{
inline double sign_or_plus(double v) { return v < 0 ? -1.0 : 1.0; }

inline void require_positive(Vec3 const& e, char const* what)
{
    if (!(e.x > 0 && e.y > 0 && e.z > 0) || !is_finite(e))
        throw std::invalid_argument(std::string(what) + " extents must be positive and finite");
}

// Midpoint quadrature over (theta, phi) for x = c + (a sin t cos p, b sin t sin p, c cos t).
inline std::vector<SurfaceNode> spheroidal_quadrature(Vec3 const& center, Vec3 const& ax, int res)
{
    std::vector<SurfaceNode> nodes;
    nodes.reserve(static_cast<std::size_t>(res) * 2 * res);
    double const dt = std::numbers::pi / res;
    double const dp = std::numbers::pi / res;  // 2*res cells over 2*pi
    for (int i = 0; i < res; ++i)
    {
        double const t = (i + 0.5) * dt;
        double const st = std::sin(t), ct = std::cos(t);
        for (int j = 0; j < 2 * res; ++j)
        {
            double const p = (j + 0.5) * dp;
            double const sp = std::sin(p), cp = std::cos(p);
            Vec3 const dpt{ax.x * ct * cp, ax.y * ct * sp, -ax.z * st};
            Vec3 const dpp{-ax.x * st * sp, ax.y * st * cp, 0.0};
            nodes.push_back({center + Vec3{ax.x * st * cp, ax.y * st * sp, ax.z * ct},
                             norm(cross(dpt, dpp)) * dt * dp});
        }
    }
    return nodes;
}
}  // namespace detail

//---------------------------------------------------------------------------//
/*!
 * Axis-aligned box given by its center and half-widths.
 *
 * Edge and corner normals use the face with the largest |q_i|/h_i, ties to
 * the lowest axis. Interior projection ties (equidistant faces) likewise go
 * to the lowest axis, and a coordinate exactly on the mid-plane projects to
 * the positive face.
 */
class Box
{
  public:
    Box(Vec3 center, Vec3 half_widths) : center_(center), half_(half_widths)
    {
        detail::require_positive(half_, "box");
    }

    Vec3 const& center() const { return center_; }
    Vec3 const& half_widths() const { return half_; }
    double diameter() const { return 2 * norm(half_); }
    double volume() const { return 8 * half_.x * half_.y * half_.z; }
    double surface_area() const
    {
        return 8 * (half_.x * half_.y + half_.y * half_.z + half_.x * half_.z);
    }

    bool contains(Vec3 const& x) const
    {
        Vec3 const q = x - center_;
        return std::abs(q.x) <= half_.x && std::abs(q.y) <= half_.y && std::abs(q.z) <= half_.z;
    }

    double distance(Vec3 const& x) const
    {
        Vec3 const q = x - center_;
        double const ex = std::abs(q.x) - half_.x;
        double const ey = std::abs(q.y) - half_.y;
        double const ez = std::abs(q.z) - half_.z;
        if (ex <= 0 && ey <= 0 && ez <= 0)
            return -std::max({ex, ey, ez});
        double const px = std::max(ex, 0.0), py = std::max(ey, 0.0), pz = std::max(ez, 0.0);
        return std::sqrt(px * px + py * py + pz * pz);
    }

    Vec3 nearest_boundary_point(Vec3 const& x) const
    {
        Vec3 q = x - center_;
        if (contains(x))
        {
            int axis = 0;
            double best = half_[0] - std::abs(q[0]);
            for (int i = 1; i < 3; ++i)
            {
                double const gap = half_[i] - std::abs(q[i]);
                if (gap < best)
                {
                    best = gap;
                    axis = i;
                }
            }
            q[axis] = detail::sign_or_plus(q[axis]) * half_[axis];
        }
        else
        {
            for (int i = 0; i < 3; ++i)
                q[i] = std::clamp(q[i], -half_[i], half_[i]);
        }
        return center_ + q;
    }

    Vec3 outward_normal(Vec3 const& p) const
    {
        Vec3 const q = p - center_;
        int axis = 0;
        double best = std::abs(q[0]) / half_[0];
        for (int i = 1; i < 3; ++i)
        {
            double const ratio = std::abs(q[i]) / half_[i];
            if (ratio > best)
            {
                best = ratio;
                axis = i;
            }
        }
        Vec3 n{};
        n[axis] = detail::sign_or_plus(q[axis]);
        return n;
    }

    std::vector<SurfaceNode> surface_quadrature(int res) const
    {
        std::vector<SurfaceNode> nodes;
        nodes.reserve(static_cast<std::size_t>(6) * res * res);
        for (int axis = 0; axis < 3; ++axis)
        {
            int const u = (axis + 1) % 3, v = (axis + 2) % 3;
            double const du = 2 * half_[u] / res, dv = 2 * half_[v] / res;
            for (double side : {-1.0, 1.0})
            {
                for (int i = 0; i < res; ++i)
                {
                    for (int j = 0; j < res; ++j)
                    {
                        Vec3 q{};
                        q[axis] = side * half_[axis];
                        q[u] = -half_[u] + (i + 0.5) * du;
                        q[v] = -half_[v] + (j + 0.5) * dv;
                        nodes.push_back({center_ + q, du * dv});
                    }
                }
            }
        }
        return nodes;
    }

  private:
    Vec3 center_;
    Vec3 half_;
};

//---------------------------------------------------------------------------//
//! Ball; the center projects to center + (r, 0, 0).
class Ball
{
  public:
    Ball(Vec3 center, double radius) : center_(center), radius_(radius)
    {
        detail::require_positive({radius, radius, radius}, "ball");
    }

    Vec3 const& center() const { return center_; }
    double radius() const { return radius_; }
    double diameter() const { return 2 * radius_; }
    double volume() const { return 4.0 / 3.0 * std::numbers::pi * radius_ * radius_ * radius_; }
    double surface_area() const { return 4 * std::numbers::pi * radius_ * radius_; }

    bool contains(Vec3 const& x) const { return norm_squared(x - center_) <= radius_ * radius_; }

    double distance(Vec3 const& x) const { return std::abs(radius_ - norm(x - center_)); }

    Vec3 nearest_boundary_point(Vec3 const& x) const
    {
        Vec3 const q = x - center_;
        double const len = norm(q);
        if (len == 0)
            return center_ + Vec3{radius_, 0, 0};
        return center_ + q * (radius_ / len);
    }

    Vec3 outward_normal(Vec3 const& p) const
    {
        Vec3 const q = p - center_;
        double const len = norm(q);
        if (len == 0)
            return {1, 0, 0};
        return q * (1.0 / len);
    }

    std::vector<SurfaceNode> surface_quadrature(int res) const
    {
        return detail::spheroidal_quadrature(center_, {radius_, radius_, radius_}, res);
    }

  private:
    Vec3 center_;
    double radius_;
};

//---------------------------------------------------------------------------//
/*!
 * Axis-aligned ellipsoid with semi-axes (a, b, c).
 *
 * The nearest boundary point is p_i = a_i^2 y_i / (t + a_i^2) where t is the
 * root of sum_i (a_i y_i / (t + a_i^2))^2 = 1 on (-c_min^2, inf), working in
 * the first octant (y_i = |q_i|). The root is found by Newton iteration kept
 * inside a shrinking bracket, with bisection whenever Newton leaves it.
 * When the coordinate along the smallest axis vanishes and the remaining
 * terms cannot reach 1, the closest point sits at t = -c_min^2 and the
 * smallest-axis coordinate comes from the surface equation (positive side).
 */
class Ellipsoid
{
  public:
    static constexpr double residual_tolerance = 1e-12;
    static constexpr int max_iterations = 200;

    Ellipsoid(Vec3 center, Vec3 semi_axes) : center_(center), axes_(semi_axes)
    {
        detail::require_positive(axes_, "ellipsoid");
        for (int i = 0; i < 3; ++i)
            sq_[i] = axes_[i] * axes_[i];
        min_sq_ = std::min({sq_.x, sq_.y, sq_.z});
    }

    Vec3 const& center() const { return center_; }
    Vec3 const& semi_axes() const { return axes_; }
    double diameter() const { return 2 * std::max({axes_.x, axes_.y, axes_.z}); }
    double volume() const { return 4.0 / 3.0 * std::numbers::pi * axes_.x * axes_.y * axes_.z; }
    double surface_area() const
    {
        double area = 0;
        for (auto const& n : surface_quadrature(400))
            area += n.weight;
        return area;
    }

    double level(Vec3 const& x) const
    {
        Vec3 const q = x - center_;
        return q.x * q.x / sq_.x + q.y * q.y / sq_.y + q.z * q.z / sq_.z;
    }

    bool contains(Vec3 const& x) const { return level(x) <= 1.0; }

    double distance(Vec3 const& x) const
    {
        Vec3 const q = x - center_;
        Vec3 const y{std::abs(q.x), std::abs(q.y), std::abs(q.z)};
        return norm(y - project_first_octant(y));
    }

    Vec3 nearest_boundary_point(Vec3 const& x) const
    {
        Vec3 const q = x - center_;
        Vec3 const y{std::abs(q.x), std::abs(q.y), std::abs(q.z)};
        Vec3 p = project_first_octant(y);
        for (int i = 0; i < 3; ++i)
            p[i] *= detail::sign_or_plus(q[i]);
        return center_ + p;
    }

    Vec3 outward_normal(Vec3 const& p) const
    {
        Vec3 const q = p - center_;
        return normalized({q.x / sq_.x, q.y / sq_.y, q.z / sq_.z});
    }

    std::vector<SurfaceNode> surface_quadrature(int res) const
    {
        return detail::spheroidal_quadrature(center_, axes_, res);
    }

  private:
    Vec3 center_;
    Vec3 axes_;
    Vec3 sq_;
    double min_sq_;

    // Nearest surface point of y (all components >= 0) in centered coordinates.
    Vec3 project_first_octant(Vec3 const& y) const
    {
        Vec3 ay;  // a_i * y_i
        for (int i = 0; i < 3; ++i)
            ay[i] = axes_[i] * y[i];

        double lo = -min_sq_;
        double max_small = 0;
        bool any_small = false;
        for (int i = 0; i < 3; ++i)
        {
            if (sq_[i] == min_sq_)
            {
                any_small = true;
                max_small = std::max(max_small, y[i]);
            }
        }
        // F -> +inf at the left end of the bracket unless the smallest-axis
        // coordinates all vanish.
        if (any_small && max_small > 0)
        {
            lo = std::sqrt(min_sq_) * max_small - min_sq_;
        }
        else
        {
            double g = 0;
            for (int i = 0; i < 3; ++i)
            {
                if (sq_[i] != min_sq_)
                {
                    double const r = ay[i] / (sq_[i] - min_sq_);
                    g += r * r;
                }
            }
            if (g < 1.0)
            {
                Vec3 p{};
                double rem = 1.0;
                int first_small = -1;
                for (int i = 0; i < 3; ++i)
                {
                    if (sq_[i] != min_sq_)
                    {
                        p[i] = sq_[i] * y[i] / (sq_[i] - min_sq_);
                        rem -= p[i] * p[i] / sq_[i];
                    }
                    else if (first_small < 0)
                    {
                        first_small = i;
                    }
                }
                p[first_small] = axes_[first_small] * std::sqrt(std::max(rem, 0.0));
                return p;
            }
        }
        double hi = norm(ay) - min_sq_;
        if (hi < lo)
            hi = lo;

        double t = std::clamp(0.0, lo, hi);
        for (int it = 0; it < max_iterations; ++it)
        {
            double f = -1.0, df = 0.0;
            for (int i = 0; i < 3; ++i)
            {
                double const inv = 1.0 / (t + sq_[i]);
                double const r = ay[i] * inv;
                f += r * r;
                df -= 2 * r * r * inv;
            }
            if (std::abs(f) <= residual_tolerance)
                break;
            if (f > 0)
                lo = t;
            else
                hi = t;
            double next = (df < 0) ? t - f / df : 0.5 * (lo + hi);
            if (!(next > lo && next < hi))
                next = 0.5 * (lo + hi);
            if (next == t)
                break;
            t = next;
        }
        Vec3 p;
        for (int i = 0; i < 3; ++i)
            p[i] = sq_[i] * y[i] / (t + sq_[i]);
        return p;
    }
};

//---------------------------------------------------------------------------//
enum class DomainKind
{
    Box,
    Ball,
    Ellipsoid,
};

inline constexpr std::string_view to_string(DomainKind k)
{
    switch (k)
    {
        case DomainKind::Box: return "box";
        case DomainKind::Ball: return "ball";
        case DomainKind::Ellipsoid: return "ellipsoid";
    }
    return "unknown";
}

/*!
 * Immutable domain description dispatching to one of the concrete shapes.
 *
 * Per-step code should call visit() once and work on the concrete shape
 * type so the inner loop is free of variant dispatch.
 */
class Domain
{
  public:
    using Shape = std::variant<Box, Ball, Ellipsoid>;

    explicit Domain(Shape s) : shape_(std::move(s)) {}

    static Domain box(Vec3 center, Vec3 half_widths) { return Domain{Box{center, half_widths}}; }
    static Domain ball(Vec3 center, double radius) { return Domain{Ball{center, radius}}; }
    static Domain ellipsoid(Vec3 center, Vec3 semi_axes)
    {
        return Domain{Ellipsoid{center, semi_axes}};
    }

    DomainKind kind() const { return static_cast<DomainKind>(shape_.index()); }
    Shape const& shape() const { return shape_; }

    template<class F>
    decltype(auto) visit(F&& f) const
    {
        return std::visit(std::forward<F>(f), shape_);
    }

    Vec3 center() const
    {
        return visit([](auto const& s) { return s.center(); });
    }
    //! Box half-widths, ball radius repeated, or ellipsoid semi-axes.
    Vec3 extents() const
    {
        return visit([](auto const& s) -> Vec3 {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, Box>)
                return s.half_widths();
            else if constexpr (std::is_same_v<S, Ball>)
                return {s.radius(), s.radius(), s.radius()};
            else
                return s.semi_axes();
        });
    }
    double diameter() const
    {
        return visit([](auto const& s) { return s.diameter(); });
    }
    double boundary_tolerance() const { return boundary_rel_tolerance * diameter(); }
    double volume() const
    {
        return visit([](auto const& s) { return s.volume(); });
    }
    double surface_area() const
    {
        return visit([](auto const& s) { return s.surface_area(); });
    }
    bool contains(Vec3 const& x) const
    {
        return visit([&](auto const& s) { return s.contains(x); });
    }
    double distance_to_boundary(Vec3 const& x) const
    {
        return visit([&](auto const& s) { return s.distance(x); });
    }
    Vec3 nearest_boundary_point(Vec3 const& x) const
    {
        return visit([&](auto const& s) { return s.nearest_boundary_point(x); });
    }
    Vec3 outward_normal(Vec3 const& p) const
    {
        return visit([&](auto const& s) { return s.outward_normal(p); });
    }
    std::vector<SurfaceNode> surface_quadrature(int res) const
    {
        return visit([&](auto const& s) { return s.surface_quadrature(res); });
    }

    RegionClass classify(Vec3 const& x, double dx, double eps) const
    {
        if (!(dx > 0 && dx < eps))
            throw std::invalid_argument("classify requires 0 < dx < eps");
        return classify_distance(contains(x), distance_to_boundary(x), dx, eps,
                                 boundary_tolerance());
    }

  private:
    Shape shape_;
};

}  // namespace rbmwos
