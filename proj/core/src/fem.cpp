#include "torsionlab/fem.hpp"

#include <algorithm>
#include <cmath>

#include "torsionlab/errors.hpp"

namespace torsionlab {

namespace {

void push_symmetric(std::vector<Triplet>& out, int i, int j, double value) {
    out.push_back({i, j, value});
    if (i != j) out.push_back({j, i, value});
}

double edge_length(const TriangleMesh& mesh, const BoundaryEdge& e) {
    return norm(mesh.nodes[static_cast<std::size_t>(e.b)] - mesh.nodes[static_cast<std::size_t>(e.a)]);
}

}  // namespace

DiscreteField::DiscreteField(MeshPtr mesh_in, std::vector<double> values_in)
    : mesh(std::move(mesh_in)), values(std::move(values_in)) {
    if (!mesh) throw InvalidParameter("field needs a mesh");
    if (values.size() != mesh->node_count()) throw InvalidParameter("field length differs from node count");
}

std::array<Vec2, 3> hat_gradients(const TriangleMesh& mesh, std::size_t t) {
    const auto& tri = mesh.triangles[t];
    const Vec2 p0 = mesh.nodes[static_cast<std::size_t>(tri[0])];
    const Vec2 p1 = mesh.nodes[static_cast<std::size_t>(tri[1])];
    const Vec2 p2 = mesh.nodes[static_cast<std::size_t>(tri[2])];
    const double twice_area = orient2d(p0, p1, p2);
    if (!(twice_area > 0)) throw InvalidParameter("degenerate or inverted triangle");
    const double s = 1.0 / twice_area;
    return {Vec2{(p1.y - p2.y) * s, (p2.x - p1.x) * s}, Vec2{(p2.y - p0.y) * s, (p0.x - p2.x) * s},
            Vec2{(p0.y - p1.y) * s, (p1.x - p0.x) * s}};
}

std::vector<Vec2> element_gradients(const TriangleMesh& mesh, std::span<const double> values) {
    std::vector<Vec2> out(mesh.triangle_count());
    for (std::size_t t = 0; t < out.size(); ++t) {
        const auto g = hat_gradients(mesh, t);
        const auto& tri = mesh.triangles[t];
        Vec2 sum{};
        for (int i = 0; i < 3; ++i) sum = sum + values[static_cast<std::size_t>(tri[i])] * g[i];
        out[t] = sum;
    }
    return out;
}

SparseMatrix assemble_weighted_stiffness(const TriangleMesh& mesh, std::span<const double> coefficient) {
    if (!coefficient.empty() && coefficient.size() != mesh.triangle_count())
        throw InvalidParameter("one stiffness coefficient per triangle expected");
    std::vector<Triplet> trip;
    trip.reserve(9 * mesh.triangle_count());
    for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
        const auto g = hat_gradients(mesh, t);
        const auto& tri = mesh.triangles[t];
        const double scale = mesh.triangle_area(t) * (coefficient.empty() ? 1.0 : coefficient[t]);
        for (int i = 0; i < 3; ++i)
            for (int j = i; j < 3; ++j) push_symmetric(trip, tri[i], tri[j], scale * dot(g[i], g[j]));
    }
    return SparseMatrix::from_triplets(mesh.node_count(), mesh.node_count(), std::move(trip));
}

SparseMatrix assemble_stiffness(const TriangleMesh& mesh) { return assemble_weighted_stiffness(mesh, {}); }

SparseMatrix assemble_mass(const TriangleMesh& mesh) {
    std::vector<Triplet> trip;
    trip.reserve(9 * mesh.triangle_count());
    for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
        const auto& tri = mesh.triangles[t];
        const double a = mesh.triangle_area(t) / 12.0;
        for (int i = 0; i < 3; ++i)
            for (int j = i; j < 3; ++j) push_symmetric(trip, tri[i], tri[j], i == j ? 2.0 * a : a);
    }
    return SparseMatrix::from_triplets(mesh.node_count(), mesh.node_count(), std::move(trip));
}

SparseMatrix assemble_boundary_mass(const TriangleMesh& mesh) {
    std::vector<Triplet> trip;
    trip.reserve(4 * mesh.boundary_edges.size());
    for (const BoundaryEdge& e : mesh.boundary_edges) {
        const double l = edge_length(mesh, e) / 6.0;
        push_symmetric(trip, e.a, e.a, 2.0 * l);
        push_symmetric(trip, e.b, e.b, 2.0 * l);
        push_symmetric(trip, e.a, e.b, l);
    }
    return SparseMatrix::from_triplets(mesh.node_count(), mesh.node_count(), std::move(trip));
}

SparseMatrix assemble_weighted_boundary_mass(const TriangleMesh& mesh, std::span<const double> point_coefficient) {
    if (point_coefficient.size() != 2 * mesh.boundary_edges.size())
        throw InvalidParameter("two boundary coefficients per edge expected");
    std::vector<Triplet> trip;
    trip.reserve(4 * mesh.boundary_edges.size());
    for (std::size_t k = 0; k < mesh.boundary_edges.size(); ++k) {
        const BoundaryEdge& e = mesh.boundary_edges[k];
        const double half = 0.5 * edge_length(mesh, e);
        double aa = 0.0, ab = 0.0, bb = 0.0;
        for (int q = 0; q < 2; ++q) {
            const double s = boundary_gauss_points[static_cast<std::size_t>(q)];
            const double w = half * point_coefficient[2 * k + static_cast<std::size_t>(q)];
            aa += w * (1.0 - s) * (1.0 - s);
            ab += w * (1.0 - s) * s;
            bb += w * s * s;
        }
        push_symmetric(trip, e.a, e.a, aa);
        push_symmetric(trip, e.b, e.b, bb);
        push_symmetric(trip, e.a, e.b, ab);
    }
    return SparseMatrix::from_triplets(mesh.node_count(), mesh.node_count(), std::move(trip));
}

std::vector<double> boundary_point_values(const TriangleMesh& mesh, std::span<const double> values) {
    std::vector<double> out(2 * mesh.boundary_edges.size());
    for (std::size_t k = 0; k < mesh.boundary_edges.size(); ++k) {
        const BoundaryEdge& e = mesh.boundary_edges[k];
        const double va = values[static_cast<std::size_t>(e.a)];
        const double vb = values[static_cast<std::size_t>(e.b)];
        for (std::size_t q = 0; q < 2; ++q) {
            const double s = boundary_gauss_points[q];
            out[2 * k + q] = (1.0 - s) * va + s * vb;
        }
    }
    return out;
}

std::vector<double> boundary_point_weights(const TriangleMesh& mesh) {
    std::vector<double> out(2 * mesh.boundary_edges.size());
    for (std::size_t k = 0; k < mesh.boundary_edges.size(); ++k) {
        const double half = 0.5 * edge_length(mesh, mesh.boundary_edges[k]);
        out[2 * k] = half;
        out[2 * k + 1] = half;
    }
    return out;
}

std::vector<double> lumped_weights(const TriangleMesh& mesh) {
    std::vector<double> w(mesh.node_count(), 0.0);
    for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
        const double a = mesh.triangle_area(t) / 3.0;
        for (int i : mesh.triangles[t]) w[static_cast<std::size_t>(i)] += a;
    }
    return w;
}

std::vector<double> DofMap::restrict_vector(std::span<const double> full) const {
    std::vector<double> out(free_to_full.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = full[static_cast<std::size_t>(free_to_full[i])];
    return out;
}

std::vector<double> DofMap::extend_vector(std::span<const double> free) const {
    std::vector<double> out(full_to_free.size(), 0.0);
    for (std::size_t i = 0; i < free_to_full.size(); ++i) out[static_cast<std::size_t>(free_to_full[i])] = free[i];
    return out;
}

SparseMatrix DofMap::restrict_matrix(const SparseMatrix& full) const {
    return full.principal_submatrix(full_to_free, free_to_full.size());
}

DofMap interior_dofs(const TriangleMesh& mesh) {
    const std::vector<bool> boundary = mesh.boundary_nodes();
    DofMap map;
    map.full_to_free.assign(mesh.node_count(), -1);
    for (std::size_t i = 0; i < mesh.node_count(); ++i) {
        if (boundary[i]) continue;
        map.full_to_free[i] = static_cast<int>(map.free_to_full.size());
        map.free_to_full.push_back(static_cast<int>(i));
    }
    return map;
}

FemSystem::FemSystem(MeshPtr mesh_in) : mesh(std::move(mesh_in)) {
    if (!mesh) throw InvalidParameter("FEM system needs a mesh");
    stiffness = assemble_stiffness(*mesh);
    mass = assemble_mass(*mesh);
    boundary_mass = assemble_boundary_mass(*mesh);
    lumped = lumped_weights(*mesh);
    load = mass.row_sums();
    interior = interior_dofs(*mesh);
    measures = torsionlab::measures(*mesh);
}

double integral(const FemSystem& fem, std::span<const double> values) { return dot(fem.load, values); }

double lumped_lp_norm(std::span<const double> weights, std::span<const double> values, double p) {
    if (!(p >= 1)) throw InvalidParameter("L^p norm needs p >= 1");
    double s = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) s += weights[i] * std::pow(std::abs(values[i]), p);
    return std::pow(s, 1.0 / p);
}

double lp_norm(const FemSystem& fem, std::span<const double> values, double p) {
    if (p == 2.0) return std::sqrt(std::max(0.0, fem.mass.quadratic_form(values)));
    return lumped_lp_norm(fem.lumped, values, p);
}

namespace {

void sort_descending(double& a, double& b, double& c) {
    if (a < b) std::swap(a, b);
    if (b < c) std::swap(b, c);
    if (a < b) std::swap(a, b);
}

}  // namespace

double triangle_positive_part(double area, double a, double b, double c) {
    sort_descending(a, b, c);
    if (c >= 0) return area * (a + b + c) / 3.0;
    if (a <= 0) return 0.0;
    if (b <= 0) return area * a * a * a / (3.0 * (a - b) * (a - c));
    // only c is negative: add back the negative part
    return area * (a + b + c) / 3.0 + area * (-c) * c * c / (3.0 * (a - c) * (b - c));
}

double triangle_positive_area(double area, double a, double b, double c) {
    sort_descending(a, b, c);
    if (c > 0) return area;
    if (a <= 0) return 0.0;
    if (b <= 0) return area * a * a / ((a - b) * (a - c));
    return area * (1.0 - c * c / ((a - c) * (b - c)));
}

double abs_integral(const TriangleMesh& mesh, std::span<const double> values) {
    double total = 0.0;
    for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
        const auto& tri = mesh.triangles[t];
        const double area = mesh.triangle_area(t);
        const double a = values[static_cast<std::size_t>(tri[0])];
        const double b = values[static_cast<std::size_t>(tri[1])];
        const double c = values[static_cast<std::size_t>(tri[2])];
        total += triangle_positive_part(area, a, b, c) + triangle_positive_part(area, -a, -b, -c);
    }
    return total;
}

double max_value(std::span<const double> values) {
    if (values.empty()) return 0.0;
    return *std::max_element(values.begin(), values.end());
}

double max_abs(std::span<const double> values) {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
}

std::optional<double> evaluate(const TriangleMesh& mesh, const PointLocator& locator, std::span<const double> values,
                               Vec2 point) {
    const auto bary = locator.locate(point);
    if (!bary) return std::nullopt;
    const auto& tri = mesh.triangles[bary->triangle];
    double v = 0.0;
    for (int i = 0; i < 3; ++i) v += bary->weights[static_cast<std::size_t>(i)] * values[static_cast<std::size_t>(tri[i])];
    return v;
}

}  // namespace torsionlab
