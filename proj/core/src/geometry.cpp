#include "torsionlab/geometry.hpp"

#include <algorithm>
#include <numbers>

#include "torsionlab/errors.hpp"

namespace torsionlab {

namespace {

constexpr double pi = std::numbers::pi;

bool segments_intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
    const double d1 = orient2d(c, d, a);
    const double d2 = orient2d(c, d, b);
    const double d3 = orient2d(a, b, c);
    const double d4 = orient2d(a, b, d);
    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) {
        return true;
    }
    auto on_segment = [](Vec2 p, Vec2 q, Vec2 r) {
        return std::min(p.x, q.x) <= r.x && r.x <= std::max(p.x, q.x) && std::min(p.y, q.y) <= r.y &&
               r.y <= std::max(p.y, q.y);
    };
    if (d1 == 0 && on_segment(c, d, a)) return true;
    if (d2 == 0 && on_segment(c, d, b)) return true;
    if (d3 == 0 && on_segment(a, b, c)) return true;
    if (d4 == 0 && on_segment(a, b, d)) return true;
    return false;
}

bool loop_is_simple(const Loop& loop) {
    const std::size_t n = loop.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 a = loop[i];
        const Vec2 b = loop[(i + 1) % n];
        if (a == b) return false;
        for (std::size_t j = i + 1; j < n; ++j) {
            // adjacent edges share exactly one endpoint
            if (j == i + 1 || (i == 0 && j == n - 1)) continue;
            if (segments_intersect(a, b, loop[j], loop[(j + 1) % n])) return false;
        }
    }
    return true;
}

bool loops_intersect(const Loop& p, const Loop& q) {
    for (std::size_t i = 0; i < p.size(); ++i) {
        for (std::size_t j = 0; j < q.size(); ++j) {
            if (segments_intersect(p[i], p[(i + 1) % p.size()], q[j], q[(j + 1) % q.size()])) return true;
        }
    }
    return false;
}

bool point_in_loop(const Loop& loop, Vec2 p) {
    bool inside = false;
    const std::size_t n = loop.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Vec2 a = loop[i];
        const Vec2 b = loop[j];
        if ((a.y > p.y) != (b.y > p.y)) {
            const double x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if (p.x < x) inside = !inside;
        }
    }
    return inside;
}

Loop regular_polygon(double radius, int n, bool counterclockwise) {
    Loop loop(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        const double angle = 2.0 * pi * k / n;
        loop[static_cast<std::size_t>(k)] = {radius * std::cos(angle), radius * std::sin(angle)};
    }
    if (!counterclockwise) std::reverse(loop.begin(), loop.end());
    return loop;
}

void require(bool ok, const char* message) {
    if (!ok) throw InvalidParameter(message);
}

int segment_count(double value) {
    require(std::isfinite(value) && value == std::floor(value), "segment count must be an integer");
    require(value >= 16, "segment count n must be at least 16");
    return static_cast<int>(value);
}

}  // namespace

double segment_distance(Vec2 p, Vec2 a, Vec2 b) {
    const Vec2 ab = b - a;
    const double len2 = dot(ab, ab);
    double s = len2 > 0 ? dot(p - a, ab) / len2 : 0.0;
    s = std::clamp(s, 0.0, 1.0);
    return norm(p - (a + s * ab));
}

double signed_area(std::span<const Vec2> loop) {
    double twice = 0.0;
    const std::size_t n = loop.size();
    for (std::size_t i = 0; i < n; ++i) twice += cross(loop[i], loop[(i + 1) % n]);
    return 0.5 * twice;
}

double loop_length(std::span<const Vec2> loop) {
    double total = 0.0;
    const std::size_t n = loop.size();
    for (std::size_t i = 0; i < n; ++i) total += norm(loop[(i + 1) % n] - loop[i]);
    return total;
}

void PolygonalDomain::validate() const {
    require(outer.size() >= 3, "outer loop needs at least three vertices");
    require(loop_is_simple(outer), "outer loop is not simple");
    require(signed_area(outer) > 0, "outer loop must be counterclockwise with positive area");
    for (std::size_t h = 0; h < holes.size(); ++h) {
        const Loop& hole = holes[h];
        require(hole.size() >= 3, "hole loop needs at least three vertices");
        require(loop_is_simple(hole), "hole loop is not simple");
        require(signed_area(hole) < 0, "hole loops must be clockwise");
        require(!loops_intersect(hole, outer), "hole touches the outer loop");
        require(point_in_loop(outer, hole.front()), "hole lies outside the outer loop");
        for (std::size_t g = h + 1; g < holes.size(); ++g) {
            require(!loops_intersect(hole, holes[g]), "holes intersect");
            require(!point_in_loop(holes[g], hole.front()) && !point_in_loop(hole, holes[g].front()),
                    "holes are nested");
        }
    }
    require(measures(*this).area > 0, "domain area must be positive");
}

bool PolygonalDomain::contains(Vec2 p) const {
    if (!point_in_loop(outer, p)) return false;
    return std::none_of(holes.begin(), holes.end(), [&](const Loop& h) { return point_in_loop(h, p); });
}

double PolygonalDomain::diameter() const {
    double best = 0.0;
    for (std::size_t i = 0; i < outer.size(); ++i)
        for (std::size_t j = i + 1; j < outer.size(); ++j) best = std::max(best, norm(outer[i] - outer[j]));
    return best;
}

Vec2 PolygonalDomain::centroid() const {
    double area = 0.0;
    Vec2 moment{};
    for (std::size_t l = 0; l < loop_count(); ++l) {
        const Loop& lp = loop(l);
        for (std::size_t i = 0; i < lp.size(); ++i) {
            const Vec2 a = lp[i];
            const Vec2 b = lp[(i + 1) % lp.size()];
            const double w = cross(a, b);
            area += 0.5 * w;
            moment = moment + (w / 6.0) * (a + b);
        }
    }
    return (1.0 / area) * moment;
}

void RadialDomain::validate() const {
    require(dimension >= 2, "radial domain dimension must be at least 2");
    require(outer_radius > 0, "outer radius must be positive");
    require(inner_radius >= 0 && inner_radius < outer_radius, "need 0 <= inner radius < outer radius");
    require(kind == RadialKind::annulus || inner_radius == 0, "a ball has zero inner radius");
}

RadialDomain make_ball(int dimension, double radius) {
    RadialDomain d{RadialKind::ball, 0.0, radius, dimension};
    d.validate();
    return d;
}

RadialDomain make_radial_annulus(int dimension, double inner_radius, double outer_radius) {
    RadialDomain d{RadialKind::annulus, inner_radius, outer_radius, dimension};
    d.validate();
    return d;
}

double unit_ball_volume(int m) { return std::pow(pi, 0.5 * m) / std::tgamma(0.5 * m + 1.0); }

Measures measures(const PolygonalDomain& domain) {
    Measures out;
    for (std::size_t l = 0; l < domain.loop_count(); ++l) {
        out.area += signed_area(domain.loop(l));
        out.boundary_length += loop_length(domain.loop(l));
    }
    return out;
}

Measures measures(const RadialDomain& domain) {
    const int m = domain.dimension;
    const double w = unit_ball_volume(m);
    auto volume = [&](double r) { return w * std::pow(r, m); };
    auto surface = [&](double r) { return m * w * std::pow(r, m - 1); };
    Measures out{volume(domain.outer_radius), surface(domain.outer_radius)};
    if (domain.inner_radius > 0) {
        out.area -= volume(domain.inner_radius);
        out.boundary_length += surface(domain.inner_radius);
    }
    return out;
}

CanonicalKind parse_canonical_kind(std::string_view name) {
    if (name == "unit_square" || name == "square") return CanonicalKind::unit_square;
    if (name == "rectangle") return CanonicalKind::rectangle;
    if (name == "disk_polygon" || name == "disk") return CanonicalKind::disk_polygon;
    if (name == "annulus_polygon" || name == "annulus") return CanonicalKind::annulus_polygon;
    if (name == "l_shape") return CanonicalKind::l_shape;
    throw InvalidParameter("unknown domain kind '" + std::string(name) + "'");
}

std::string_view to_string(CanonicalKind kind) {
    switch (kind) {
        case CanonicalKind::unit_square: return "unit_square";
        case CanonicalKind::rectangle: return "rectangle";
        case CanonicalKind::disk_polygon: return "disk_polygon";
        case CanonicalKind::annulus_polygon: return "annulus_polygon";
        case CanonicalKind::l_shape: return "l_shape";
    }
    return "unknown";
}

PolygonalDomain make_canonical_domain(CanonicalKind kind, std::span<const double> params) {
    for (double v : params) require(std::isfinite(v), "parameters must be finite");
    PolygonalDomain d;
    d.name = std::string(to_string(kind));
    switch (kind) {
        case CanonicalKind::unit_square:
            require(params.empty(), "unit_square takes no parameters");
            d.outer = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
            break;
        case CanonicalKind::rectangle: {
            require(params.size() == 2, "rectangle needs (width, height)");
            const double w = params[0];
            const double h = params[1];
            require(w > 0 && h > 0, "rectangle sides must be positive");
            d.outer = {{0, 0}, {w, 0}, {w, h}, {0, h}};
            break;
        }
        case CanonicalKind::disk_polygon: {
            require(params.size() == 2, "disk_polygon needs (R, n)");
            require(params[0] > 0, "disk radius must be positive");
            d.outer = regular_polygon(params[0], segment_count(params[1]), true);
            break;
        }
        case CanonicalKind::annulus_polygon: {
            require(params.size() == 3, "annulus_polygon needs (r, R, n)");
            const double r = params[0];
            const double big = params[1];
            require(r > 0 && big > 0, "annulus radii must be positive");
            require(r < big, "inner radius must be smaller than outer radius");
            const int n = segment_count(params[2]);
            d.outer = regular_polygon(big, n, true);
            d.holes.push_back(regular_polygon(r, n, false));
            break;
        }
        case CanonicalKind::l_shape: {
            require(params.size() <= 1, "l_shape takes at most one parameter (side)");
            const double s = params.empty() ? 1.0 : params[0];
            require(s > 0, "l_shape side must be positive");
            const double c = 0.5 * s;
            d.outer = {{0, 0}, {s, 0}, {s, c}, {c, c}, {c, s}, {0, s}};
            break;
        }
    }
    d.validate();
    return d;
}

}  // namespace torsionlab
