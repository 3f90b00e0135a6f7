#pragma once

#include <array>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "torsionlab/mesh.hpp"
#include "torsionlab/sparse.hpp"

namespace torsionlab {

using MeshPtr = std::shared_ptr<const TriangleMesh>;

/// Nodal P1 coefficients over a shared mesh.
struct DiscreteField {
    MeshPtr mesh;
    std::vector<double> values;

    DiscreteField() = default;
    DiscreteField(MeshPtr mesh, std::vector<double> values);

    std::size_t size() const { return values.size(); }
};

/// Gradients of the three hat functions of triangle t.
std::array<Vec2, 3> hat_gradients(const TriangleMesh& mesh, std::size_t t);

/// Per-triangle gradient of a P1 field.
std::vector<Vec2> element_gradients(const TriangleMesh& mesh, std::span<const double> values);

SparseMatrix assemble_stiffness(const TriangleMesh& mesh);
/// Stiffness with a piecewise-constant coefficient, one value per triangle.
SparseMatrix assemble_weighted_stiffness(const TriangleMesh& mesh, std::span<const double> coefficient);

SparseMatrix assemble_mass(const TriangleMesh& mesh);

SparseMatrix assemble_boundary_mass(const TriangleMesh& mesh);

/// Two-point Gauss rule on each boundary edge: parameters along the edge
/// measured from its first node.
inline constexpr std::array<double, 2> boundary_gauss_points{0.21132486540518713, 0.78867513459481287};

/// Boundary mass with a coefficient sampled at the Gauss points, two values
/// per boundary edge in edge order. A unit coefficient reproduces
/// assemble_boundary_mass up to rounding.
SparseMatrix assemble_weighted_boundary_mass(const TriangleMesh& mesh, std::span<const double> point_coefficient);

/// Field values at the boundary Gauss points (two per edge) and the matching
/// quadrature weights.
std::vector<double> boundary_point_values(const TriangleMesh& mesh, std::span<const double> values);
std::vector<double> boundary_point_weights(const TriangleMesh& mesh);

/// Vertex quadrature weights: the row sums of the mass matrix (area/3 per
/// incident triangle).
std::vector<double> lumped_weights(const TriangleMesh& mesh);

/// Numbering of the nodes that remain free under a Dirichlet condition.
struct DofMap {
    std::vector<int> full_to_free;  ///< -1 on boundary nodes
    std::vector<int> free_to_full;

    std::size_t free_count() const { return free_to_full.size(); }
    std::vector<double> restrict_vector(std::span<const double> full) const;
    /// Boundary entries are zero.
    std::vector<double> extend_vector(std::span<const double> free) const;
    SparseMatrix restrict_matrix(const SparseMatrix& full) const;
};

DofMap interior_dofs(const TriangleMesh& mesh);

/// Matrices and quadrature data shared by every solve on one mesh.
struct FemSystem {
    MeshPtr mesh;
    SparseMatrix stiffness;
    SparseMatrix mass;
    SparseMatrix boundary_mass;
    std::vector<double> lumped;  ///< vertex quadrature weights
    std::vector<double> load;    ///< M * 1
    DofMap interior;
    Measures measures;

    explicit FemSystem(MeshPtr mesh);
};

/// Integral of a P1 field (exact).
double integral(const FemSystem& fem, std::span<const double> values);

/// L^p norm: consistent mass matrix for p = 2, vertex quadrature otherwise.
double lp_norm(const FemSystem& fem, std::span<const double> values, double p);

/// Vertex-quadrature L^p norm, also for p = 2.
double lumped_lp_norm(std::span<const double> weights, std::span<const double> values, double p);

/// Exact integral of max(u, 0) over a triangle for the linear u with the
/// given vertex values.
double triangle_positive_part(double area, double a, double b, double c);

/// Exact area of {u > 0} inside a triangle for the linear u with the given
/// vertex values.
double triangle_positive_area(double area, double a, double b, double c);

/// Exact integral of |u| for a P1 field.
double abs_integral(const TriangleMesh& mesh, std::span<const double> values);

double max_value(std::span<const double> values);
double max_abs(std::span<const double> values);

/// Value of a P1 field at a point, or nothing outside the mesh.
std::optional<double> evaluate(const TriangleMesh& mesh, const PointLocator& locator, std::span<const double> values,
                               Vec2 point);

}  // namespace torsionlab
