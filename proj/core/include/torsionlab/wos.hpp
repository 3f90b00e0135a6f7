#pragma once

#include <cstdint>
#include <vector>

#include "torsionlab/geometry.hpp"

namespace torsionlab {

/// Exact distance to the boundary segments of a polygon (outer loop and
/// holes), accelerated by a uniform grid of segment buckets.
class BoundaryDistance {
public:
    explicit BoundaryDistance(const PolygonalDomain& domain);

    /// Unsigned distance to the nearest boundary segment.
    double operator()(Vec2 p) const;

    double diameter() const { return diameter_; }

private:
    struct Segment {
        Vec2 a;
        Vec2 b;
    };

    std::size_t cell_index(int i, int j) const { return static_cast<std::size_t>(j) * nx_ + static_cast<std::size_t>(i); }

    std::vector<Segment> segments_;
    std::vector<std::vector<int>> cells_;
    Vec2 origin_;
    double cell_ = 1.0;
    int nx_ = 1;
    int ny_ = 1;
    double diameter_ = 0.0;
};

/// Signed distance: positive inside, zero on the boundary, negative outside.
double distance_to_boundary(const PolygonalDomain& domain, Vec2 x);

/// Circle with exact geometry, for checks free of polygonal error.
struct ExactDisk {
    Vec2 center;
    double radius = 1.0;

    double distance(Vec2 x) const { return radius - norm(x - center); }
    double diameter() const { return 2.0 * radius; }
};

struct WosOptions {
    int n_walks = 100000;
    double eps_shell = 0.0;  ///< <= 0 selects 1e-4 times the domain diameter
    std::uint64_t seed = 0;
    int step_cap = 10000;
    int workers = 1;
};

struct WosEstimate {
    Vec2 point;
    double mean = 0.0;
    double standard_error = 0.0;  ///< sample standard deviation / sqrt(n_walks)
    int n_walks = 0;              ///< walks that reached the shell
    int capped_walks = 0;         ///< walks stopped by the step cap, excluded
    double eps_shell = 0.0;
    double mean_steps = 0.0;
};

/// Mean exit time E_x[T] of Brownian motion with generator Delta, i.e. the
/// Dirichlet torsion function, by walk on spheres. Each step adds r^2/(2m)
/// for the inscribed circle of radius r. Walks are split into fixed chunks
/// with independent generators derived from (seed, chunk), so the estimate
/// does not depend on the worker count. Throws InvalidParameter when x is
/// not strictly inside.
WosEstimate wos_exit_time(const PolygonalDomain& domain, Vec2 x, const WosOptions& options);
WosEstimate wos_exit_time(const ExactDisk& disk, Vec2 x, const WosOptions& options);

/// Convenience form with the default step cap and one worker.
WosEstimate wos_exit_time(const PolygonalDomain& domain, Vec2 x, int n_walks, double eps_shell, std::uint64_t seed);

/// `count` points strictly inside the domain at distance at least
/// `min_distance` from the boundary, taken in order from the Halton sequence
/// (bases 2 and 3) over the bounding box.
std::vector<Vec2> interior_probe_points(const PolygonalDomain& domain, int count, double min_distance);

}  // namespace torsionlab
