#include "torsionlab/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>

#include "torsionlab/errors.hpp"

namespace torsionlab {

namespace {

std::uint64_t edge_key(int a, int b) {
    const auto lo = static_cast<std::uint64_t>(std::min(a, b));
    const auto hi = static_cast<std::uint64_t>(std::max(a, b));
    return (hi << 32) | lo;
}

}  // namespace

double TriangleMesh::triangle_area(std::size_t t) const {
    const auto& tri = triangles[t];
    return 0.5 * orient2d(nodes[tri[0]], nodes[tri[1]], nodes[tri[2]]);
}

double TriangleMesh::diameter() const {
    // boundary nodes suffice for polygonal meshes
    std::vector<Vec2> pts;
    for (const auto& e : boundary_edges) pts.push_back(nodes[e.a]);
    double best = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j) best = std::max(best, norm(pts[i] - pts[j]));
    return best;
}

std::vector<bool> TriangleMesh::boundary_nodes() const {
    std::vector<bool> mask(nodes.size(), false);
    for (const auto& e : boundary_edges) mask[e.a] = mask[e.b] = true;
    return mask;
}

TriangleMesh refine(const TriangleMesh& mesh) {
    TriangleMesh out;
    out.nodes = mesh.nodes;
    std::unordered_map<std::uint64_t, int> midpoint;
    midpoint.reserve(mesh.triangles.size() * 2);
    auto mid = [&](int a, int b) {
        auto [it, fresh] = midpoint.try_emplace(edge_key(a, b), static_cast<int>(out.nodes.size()));
        if (fresh) out.nodes.push_back(0.5 * (mesh.nodes[a] + mesh.nodes[b]));
        return it->second;
    };
    out.triangles.reserve(4 * mesh.triangles.size());
    for (const auto& t : mesh.triangles) {
        const int ab = mid(t[0], t[1]);
        const int bc = mid(t[1], t[2]);
        const int ca = mid(t[2], t[0]);
        out.triangles.push_back({t[0], ab, ca});
        out.triangles.push_back({ab, t[1], bc});
        out.triangles.push_back({ca, bc, t[2]});
        out.triangles.push_back({ab, bc, ca});
    }
    out.boundary_edges.reserve(2 * mesh.boundary_edges.size());
    for (const auto& e : mesh.boundary_edges) {
        const int m = midpoint.at(edge_key(e.a, e.b));
        out.boundary_edges.push_back({e.a, m, e.loop});
        out.boundary_edges.push_back({m, e.b, e.loop});
    }
    out.h_max = longest_edge(out);
    return out;
}

TriangleMesh refine(const TriangleMesh& mesh, int levels) {
    TriangleMesh out = mesh;
    for (int i = 0; i < levels; ++i) out = refine(out);
    return out;
}

Measures measures(const TriangleMesh& mesh) {
    Measures m;
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) m.area += mesh.triangle_area(t);
    for (const auto& e : mesh.boundary_edges) m.boundary_length += norm(mesh.nodes[e.b] - mesh.nodes[e.a]);
    return m;
}

double min_angle_deg(const TriangleMesh& mesh) {
    double best = 180.0;
    for (const auto& t : mesh.triangles) {
        for (int i = 0; i < 3; ++i) {
            const Vec2 p = mesh.nodes[t[i]];
            const Vec2 u = mesh.nodes[t[(i + 1) % 3]] - p;
            const Vec2 v = mesh.nodes[t[(i + 2) % 3]] - p;
            const double angle = std::atan2(std::abs(cross(u, v)), dot(u, v));
            best = std::min(best, angle * 180.0 / std::numbers::pi);
        }
    }
    return best;
}

double longest_edge(const TriangleMesh& mesh) {
    double h = 0.0;
    for (const auto& t : mesh.triangles)
        for (int i = 0; i < 3; ++i) h = std::max(h, norm(mesh.nodes[t[(i + 1) % 3]] - mesh.nodes[t[i]]));
    return h;
}

void validate(const TriangleMesh& mesh) {
    const int n = static_cast<int>(mesh.nodes.size());
    // directed edge -> count; conformity means each undirected interior edge
    // appears once in each direction
    std::unordered_map<std::uint64_t, std::pair<int, int>> edges;
    edges.reserve(mesh.triangles.size() * 3);
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tri = mesh.triangles[t];
        for (int v : tri)
            if (v < 0 || v >= n) throw MeshingFailure("triangle references a missing node");
        if (!(mesh.triangle_area(t) > 0)) throw MeshingFailure("triangle with non-positive area");
        for (int i = 0; i < 3; ++i) {
            const int a = tri[i];
            const int b = tri[(i + 1) % 3];
            auto& slot = edges[edge_key(a, b)];
            (a < b ? slot.first : slot.second) += 1;
        }
    }
    std::map<std::uint64_t, int> open;  // directed boundary edges still unmatched
    for (const auto& [key, count] : edges) {
        if (count.first > 1 || count.second > 1) throw MeshingFailure("non-conforming edge");
        if (count.first + count.second == 1) open[key] = count.first == 1 ? 1 : -1;
    }
    if (open.size() != mesh.boundary_edges.size())
        throw MeshingFailure("boundary edges do not tile the triangulation boundary");
    for (const auto& e : mesh.boundary_edges) {
        auto it = open.find(edge_key(e.a, e.b));
        if (it == open.end()) throw MeshingFailure("boundary edge is not on the triangulation boundary");
        const int dir = e.a < e.b ? 1 : -1;
        if (it->second != dir) throw MeshingFailure("boundary edge orientation does not keep the domain on its left");
    }
}

void write_mesh(std::ostream& out, const TriangleMesh& mesh) {
    std::ostringstream buf;
    buf.precision(17);
    buf << "nodes " << mesh.nodes.size() << " triangles " << mesh.triangles.size() << " boundary "
        << mesh.boundary_edges.size() << '\n';
    for (const auto& p : mesh.nodes) buf << p.x << ' ' << p.y << '\n';
    for (const auto& t : mesh.triangles) buf << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
    for (const auto& e : mesh.boundary_edges) buf << e.a << ' ' << e.b << ' ' << e.loop << '\n';
    out << buf.str();
}

TriangleMesh read_mesh(std::istream& in) {
    std::string w1, w2, w3;
    std::size_t n = 0, t = 0, b = 0;
    if (!(in >> w1 >> n >> w2 >> t >> w3 >> b) || w1 != "nodes" || w2 != "triangles" || w3 != "boundary")
        throw MeshingFailure("mesh file: malformed header");
    TriangleMesh mesh;
    mesh.nodes.resize(n);
    mesh.triangles.resize(t);
    mesh.boundary_edges.resize(b);
    for (auto& p : mesh.nodes)
        if (!(in >> p.x >> p.y)) throw MeshingFailure("mesh file: truncated node block");
    for (auto& tri : mesh.triangles)
        if (!(in >> tri[0] >> tri[1] >> tri[2])) throw MeshingFailure("mesh file: truncated triangle block");
    for (auto& e : mesh.boundary_edges)
        if (!(in >> e.a >> e.b >> e.loop)) throw MeshingFailure("mesh file: truncated boundary block");
    mesh.h_max = longest_edge(mesh);
    validate(mesh);
    return mesh;
}

PointLocator::PointLocator(const TriangleMesh& mesh) : mesh_(&mesh) {
    Vec2 lo = mesh.nodes.front(), hi = lo;
    for (const auto& p : mesh.nodes) {
        lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
        hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
    }
    const double span = std::max(hi.x - lo.x, hi.y - lo.y);
    const int per_side = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(mesh.triangles.size()) / 2.0)));
    cell_ = span / per_side * (1.0 + 1e-9);
    lo_ = lo;
    nx_ = std::max(1, static_cast<int>(std::ceil((hi.x - lo.x) / cell_)) + 1);
    ny_ = std::max(1, static_cast<int>(std::ceil((hi.y - lo.y) / cell_)) + 1);
    buckets_.resize(static_cast<std::size_t>(nx_) * ny_);
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        Vec2 a = mesh.nodes[mesh.triangles[t][0]], b = a;
        for (int v : mesh.triangles[t]) {
            a = {std::min(a.x, mesh.nodes[v].x), std::min(a.y, mesh.nodes[v].y)};
            b = {std::max(b.x, mesh.nodes[v].x), std::max(b.y, mesh.nodes[v].y)};
        }
        const int i0 = static_cast<int>((a.x - lo_.x) / cell_), i1 = static_cast<int>((b.x - lo_.x) / cell_);
        const int j0 = static_cast<int>((a.y - lo_.y) / cell_), j1 = static_cast<int>((b.y - lo_.y) / cell_);
        for (int j = j0; j <= std::min(j1, ny_ - 1); ++j)
            for (int i = i0; i <= std::min(i1, nx_ - 1); ++i) buckets_[static_cast<std::size_t>(j) * nx_ + i].push_back(t);
    }
}

std::optional<Barycentric> PointLocator::locate(Vec2 p) const {
    const int i = static_cast<int>(std::floor((p.x - lo_.x) / cell_));
    const int j = static_cast<int>(std::floor((p.y - lo_.y) / cell_));
    if (i < 0 || j < 0 || i >= nx_ || j >= ny_) return std::nullopt;
    const double tol = 1e-12;
    for (std::size_t t : buckets_[static_cast<std::size_t>(j) * nx_ + i]) {
        const auto& tri = mesh_->triangles[t];
        const Vec2 a = mesh_->nodes[tri[0]], b = mesh_->nodes[tri[1]], c = mesh_->nodes[tri[2]];
        const double area = orient2d(a, b, c);
        const double wa = orient2d(p, b, c) / area;
        const double wb = orient2d(a, p, c) / area;
        const double wc = 1.0 - wa - wb;
        if (wa >= -tol && wb >= -tol && wc >= -tol) return Barycentric{t, {wa, wb, wc}};
    }
    return std::nullopt;
}

}  // namespace torsionlab
