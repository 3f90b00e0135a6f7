#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace torsionlab {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend constexpr Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
    friend constexpr bool operator==(Vec2 a, Vec2 b) = default;
};

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

/// Twice the signed area of the triangle (a, b, c); positive when counterclockwise.
constexpr double orient2d(Vec2 a, Vec2 b, Vec2 c) { return cross(b - a, c - a); }

/// Euclidean distance from p to the closed segment [a, b].
double segment_distance(Vec2 p, Vec2 a, Vec2 b);

using Loop = std::vector<Vec2>;

/// Planar polygon with optional holes. The outer loop is counterclockwise,
/// hole loops are clockwise.
struct PolygonalDomain {
    std::string name;
    Loop outer;
    std::vector<Loop> holes;

    static constexpr int dimension = 2;

    /// Throws InvalidParameter when the loops are not simple, not oriented as
    /// documented, or holes are not nested strictly inside the outer loop.
    void validate() const;

    bool contains(Vec2 p) const;
    double diameter() const;
    Vec2 centroid() const;
    std::size_t loop_count() const { return 1 + holes.size(); }
    const Loop& loop(std::size_t i) const { return i == 0 ? outer : holes[i - 1]; }
};

enum class RadialKind { ball, annulus };

/// Ball or spherical shell in R^m.
struct RadialDomain {
    RadialKind kind = RadialKind::ball;
    double inner_radius = 0.0;
    double outer_radius = 1.0;
    int dimension = 2;

    void validate() const;
};

RadialDomain make_ball(int dimension, double radius);
RadialDomain make_radial_annulus(int dimension, double inner_radius, double outer_radius);

/// Volume of the unit ball in R^m.
double unit_ball_volume(int m);

struct Measures {
    double area = 0.0;             ///< |Omega| (volume for radial domains)
    double boundary_length = 0.0;  ///< (m-1)-dimensional measure of the boundary
};

double signed_area(std::span<const Vec2> loop);
double loop_length(std::span<const Vec2> loop);

Measures measures(const PolygonalDomain& domain);
Measures measures(const RadialDomain& domain);

enum class CanonicalKind { unit_square, rectangle, disk_polygon, annulus_polygon, l_shape };

CanonicalKind parse_canonical_kind(std::string_view name);
std::string_view to_string(CanonicalKind kind);

/// Builds one of the corpus domains.
///
///   unit_square                       no params
///   rectangle        (width, height)
///   disk_polygon     (R, n)           regular n-gon inscribed in the circle of radius R, n >= 16
///   annulus_polygon  (r, R, n)        two inscribed n-gons, hole of radius r
///   l_shape          (side)           side defaults to 1; the upper-right quarter is removed
PolygonalDomain make_canonical_domain(CanonicalKind kind, std::span<const double> params = {});

/// Radius of the disk whose area equals `area`.
inline double equal_area_radius(double area) { return std::sqrt(area / std::numbers::pi); }

}  // namespace torsionlab
