#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <vector>

#include "torsionlab/geometry.hpp"

namespace torsionlab {

/// Boundary edge oriented with the domain on its left; `loop` is 0 for the
/// outer loop and 1 + hole index for holes.
struct BoundaryEdge {
    int a = 0;
    int b = 0;
    int loop = 0;
};

/// Conforming P1 triangulation. Triangles are counterclockwise.
struct TriangleMesh {
    std::vector<Vec2> nodes;
    std::vector<std::array<int, 3>> triangles;
    std::vector<BoundaryEdge> boundary_edges;
    double h_max = 0.0;

    std::size_t node_count() const { return nodes.size(); }
    std::size_t triangle_count() const { return triangles.size(); }

    double triangle_area(std::size_t t) const;
    double diameter() const;
    /// true at every node lying on a boundary edge
    std::vector<bool> boundary_nodes() const;
};

struct TriangulateOptions {
    /// Ruppert refinement target; the verified contract is 20 degrees.
    double quality_angle_deg = 25.0;
    std::size_t max_insertions = 2'000'000;
};

/// Constrained Delaunay refinement of a polygon with holes. The mesh covers
/// the polygon exactly, every input vertex is a mesh node, the longest edge
/// is at most h_target and no angle is below 20 degrees.
TriangleMesh triangulate(const PolygonalDomain& domain, double h_target, const TriangulateOptions& options = {});

/// Uniform red refinement: every triangle is split into four similar children.
TriangleMesh refine(const TriangleMesh& mesh);

/// `levels` successive red refinements.
TriangleMesh refine(const TriangleMesh& mesh, int levels);

Measures measures(const TriangleMesh& mesh);

double min_angle_deg(const TriangleMesh& mesh);
double longest_edge(const TriangleMesh& mesh);

/// Checks orientation, conformity and boundary closure. Throws MeshingFailure.
void validate(const TriangleMesh& mesh);

/// Text format: "nodes N triangles T boundary B", then N lines "x y",
/// T lines "i j k" and B lines "i j loop_tag" (0-based).
void write_mesh(std::ostream& out, const TriangleMesh& mesh);
TriangleMesh read_mesh(std::istream& in);

struct Barycentric {
    std::size_t triangle = 0;
    std::array<double, 3> weights{};
};

/// Bucket grid over the triangles for point queries.
class PointLocator {
public:
    explicit PointLocator(const TriangleMesh& mesh);

    std::optional<Barycentric> locate(Vec2 p) const;

private:
    const TriangleMesh* mesh_;
    Vec2 lo_{};
    double cell_ = 1.0;
    int nx_ = 1;
    int ny_ = 1;
    std::vector<std::vector<std::size_t>> buckets_;
};

}  // namespace torsionlab
