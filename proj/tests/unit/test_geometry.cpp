#include <gtest/gtest.h>

#include <set>
#include <sstream>
#include <vector>

#include "oracles/oracles.hpp"
#include "torsionlab/errors.hpp"
#include "torsionlab/geometry.hpp"
#include "torsionlab/mesh.hpp"

using namespace torsionlab;

namespace {

PolygonalDomain disk(double r, int n) {
    const std::vector<double> params{r, static_cast<double>(n)};
    return make_canonical_domain(CanonicalKind::disk_polygon, params);
}

PolygonalDomain annulus(double r, double big, int n) {
    const std::vector<double> params{r, big, static_cast<double>(n)};
    return make_canonical_domain(CanonicalKind::annulus_polygon, params);
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST(CanonicalDomains, UnitSquareMeasures) {
    const auto m = measures(make_canonical_domain(CanonicalKind::unit_square));
    EXPECT_DOUBLE_EQ(m.area, 1.0);
    EXPECT_DOUBLE_EQ(m.boundary_length, 4.0);
}

TEST(CanonicalDomains, LShapeMeasures) {
    const auto m = measures(make_canonical_domain(CanonicalKind::l_shape));
    EXPECT_DOUBLE_EQ(m.area, 0.75);
    EXPECT_DOUBLE_EQ(m.boundary_length, 4.0);
}

TEST(CanonicalDomains, DiskPolygonIsInscribedRegularPolygon) {
    const auto d = disk(1.0, 256);
    ASSERT_EQ(d.outer.size(), 256u);
    for (const Vec2& v : d.outer) EXPECT_NEAR(norm(v), 1.0, 1e-15);
    const auto m = measures(d);
    EXPECT_LT(rel(m.area, oracle::regular_polygon_area(1.0, 256)), 1e-13);
    EXPECT_NEAR(m.area, 3.1412772509327, 1e-12);
}

TEST(CanonicalDomains, AnnulusPolygonArea) {
    const auto m = measures(annulus(0.5, 1.0, 256));
    const double expected = oracle::regular_polygon_area(1.0, 256) - oracle::regular_polygon_area(0.5, 256);
    EXPECT_LT(rel(m.area, expected), 1e-13);
    EXPECT_NEAR(m.area, 2.35597, 2e-5);
}

TEST(CanonicalDomains, RejectsInvalidParameters) {
    const std::vector<double> few{1.0, 8.0};
    EXPECT_THROW(make_canonical_domain(CanonicalKind::disk_polygon, few), InvalidParameter);
    const std::vector<double> negative{-1.0, 64.0};
    EXPECT_THROW(make_canonical_domain(CanonicalKind::disk_polygon, negative), InvalidParameter);
    const std::vector<double> inverted{1.0, 0.5, 64.0};
    EXPECT_THROW(make_canonical_domain(CanonicalKind::annulus_polygon, inverted), InvalidParameter);
    const std::vector<double> flat{0.0, 1.0};
    EXPECT_THROW(make_canonical_domain(CanonicalKind::rectangle, flat), InvalidParameter);
    EXPECT_THROW(parse_canonical_kind("hexagon"), InvalidParameter);
}

TEST(CanonicalDomains, DiskMeasuresConvergeQuadratically) {
    // error ratio for doubled n tends to 4
    double prev_area = 0, prev_len = 0;
    for (int n : {64, 128, 256, 512}) {
        const auto m = measures(disk(1.0, n));
        const double ea = oracle::pi - m.area;
        const double el = 2 * oracle::pi - m.boundary_length;
        EXPECT_GT(ea, 0);
        EXPECT_GT(el, 0);
        if (prev_area > 0) {
            EXPECT_NEAR(prev_area / ea, 4.0, 0.01);
            EXPECT_NEAR(prev_len / el, 4.0, 0.01);
        }
        prev_area = ea;
        prev_len = el;
    }
}

TEST(RadialDomains, BallMeasuresMatchClosedForms) {
    const auto m3 = measures(make_ball(3, 1.0));
    EXPECT_NEAR(m3.area, 4.0 * oracle::pi / 3.0, 1e-13);
    EXPECT_NEAR(m3.boundary_length, 4.0 * oracle::pi, 1e-13);
    const auto m2 = measures(make_ball(2, 2.0));
    EXPECT_NEAR(m2.area, 4.0 * oracle::pi, 1e-13);
    EXPECT_NEAR(m2.boundary_length, 4.0 * oracle::pi, 1e-13);
    const auto shell = measures(make_radial_annulus(3, 0.5, 1.0));
    EXPECT_NEAR(shell.area, 4.0 * oracle::pi / 3.0 * (1 - 0.125), 1e-13);
    EXPECT_THROW(make_radial_annulus(2, 1.0, 1.0), InvalidParameter);
    EXPECT_THROW(make_ball(1, 1.0), InvalidParameter);
}

TEST(PolygonValidation, RejectsBadLoops) {
    PolygonalDomain bow;
    bow.outer = {{0, 0}, {1, 1}, {1, 0}, {0, 1}};
    EXPECT_THROW(bow.validate(), InvalidParameter);
    PolygonalDomain cw;
    cw.outer = {{0, 0}, {0, 1}, {1, 1}, {1, 0}};
    EXPECT_THROW(cw.validate(), InvalidParameter);
    PolygonalDomain outside;
    outside.outer = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    outside.holes.push_back({{2, 2}, {2, 3}, {3, 3}, {3, 2}});
    EXPECT_THROW(outside.validate(), InvalidParameter);
}

TEST(Triangulate, SquareAreaPreserved) {
    const auto mesh = triangulate(make_canonical_domain(CanonicalKind::unit_square), 0.5);
    validate(mesh);
    const auto m = measures(mesh);
    EXPECT_NEAR(m.area, 1.0, 1e-12);
    EXPECT_NEAR(m.boundary_length, 4.0, 1e-12);
    EXPECT_LE(mesh.h_max, 2 * 0.5);
    EXPECT_GE(min_angle_deg(mesh), 20.0);
}

TEST(Triangulate, LShapeKeepsReentrantCorner) {
    for (double h : {0.5, 0.13, 0.05}) {
        const auto d = make_canonical_domain(CanonicalKind::l_shape);
        const auto mesh = triangulate(d, h);
        validate(mesh);
        for (const Vec2& corner : d.outer) {
            bool found = false;
            for (const Vec2& v : mesh.nodes) found = found || v == corner;
            EXPECT_TRUE(found) << "corner (" << corner.x << ", " << corner.y << ") missing at h=" << h;
        }
        EXPECT_GE(min_angle_deg(mesh), 20.0);
    }
}

TEST(Triangulate, DiskBoundaryLengthIsPolygonPerimeter) {
    const auto mesh = triangulate(disk(1.0, 64), 0.1);
    validate(mesh);
    EXPECT_LT(rel(measures(mesh).boundary_length, oracle::regular_polygon_perimeter(1.0, 64)), 1e-12);
    EXPECT_NEAR(measures(mesh).boundary_length, 6.2806623139095, 1e-12);
    EXPECT_LE(mesh.h_max, 0.2);
    EXPECT_GE(min_angle_deg(mesh), 20.0);
}

TEST(Triangulate, AnnulusHasTwoOrientedBoundaryLoops) {
    const auto d = annulus(0.5, 1.0, 64);
    const auto mesh = triangulate(d, 0.15);
    validate(mesh);
    std::set<int> tags;
    double outer_len = 0, inner_len = 0;
    for (const auto& e : mesh.boundary_edges) {
        tags.insert(e.loop);
        const Vec2 a = mesh.nodes[static_cast<std::size_t>(e.a)];
        const Vec2 b = mesh.nodes[static_cast<std::size_t>(e.b)];
        // domain on the left: outer loop turns counterclockwise, hole clockwise
        const double turn = cross(a, b);
        if (e.loop == 0) {
            EXPECT_GT(turn, 0);
            outer_len += norm(b - a);
        } else {
            EXPECT_LT(turn, 0);
            inner_len += norm(b - a);
        }
    }
    EXPECT_EQ(tags, (std::set<int>{0, 1}));
    EXPECT_NEAR(outer_len, loop_length(d.outer), 1e-12);
    EXPECT_NEAR(inner_len, loop_length(d.holes[0]), 1e-12);
}

TEST(Triangulate, CoarsestMeshForHugeTarget) {
    const auto mesh = triangulate(make_canonical_domain(CanonicalKind::l_shape), 100.0);
    validate(mesh);
    EXPECT_NEAR(measures(mesh).area, 0.75, 1e-12);
}

TEST(Triangulate, RejectsDegeneratePolygon) {
    PolygonalDomain flat;
    flat.outer = {{0, 0}, {1, 0}, {2, 0}};
    EXPECT_THROW(triangulate(flat, 0.1), MeshingFailure);
    EXPECT_THROW(triangulate(make_canonical_domain(CanonicalKind::unit_square), 0.0), InvalidParameter);
}

TEST(Refine, RedRefinementContract) {
    const auto base = triangulate(annulus(0.5, 1.0, 32), 0.2);
    const auto once = refine(base);
    const auto twice = refine(base, 2);
    validate(once);
    validate(twice);
    EXPECT_EQ(once.triangle_count(), 4 * base.triangle_count());
    EXPECT_EQ(twice.triangle_count(), 16 * base.triangle_count());
    for (std::size_t i = 0; i < base.node_count(); ++i) EXPECT_EQ(once.nodes[i], base.nodes[i]);
    EXPECT_NEAR(once.h_max, base.h_max / 2, 1e-14);
    EXPECT_NEAR(twice.h_max, base.h_max / 4, 1e-14);
    const auto m0 = measures(base);
    const auto m2 = measures(twice);
    EXPECT_LT(rel(m2.area, m0.area), 1e-12);
    EXPECT_LT(rel(m2.boundary_length, m0.boundary_length), 1e-12);
    EXPECT_NEAR(min_angle_deg(twice), min_angle_deg(base), 1e-9);
}

TEST(MeshIo, RoundTrip) {
    const auto mesh = triangulate(make_canonical_domain(CanonicalKind::l_shape), 0.2);
    std::stringstream buffer;
    write_mesh(buffer, mesh);
    std::string header;
    std::getline(buffer, header);
    EXPECT_EQ(header.rfind("nodes ", 0), 0u);
    buffer.seekg(0);
    const auto back = read_mesh(buffer);
    ASSERT_EQ(back.node_count(), mesh.node_count());
    ASSERT_EQ(back.triangle_count(), mesh.triangle_count());
    ASSERT_EQ(back.boundary_edges.size(), mesh.boundary_edges.size());
    for (std::size_t i = 0; i < mesh.node_count(); ++i) EXPECT_EQ(back.nodes[i], mesh.nodes[i]);
    EXPECT_EQ(back.triangles, mesh.triangles);
    EXPECT_DOUBLE_EQ(back.h_max, mesh.h_max);
}

TEST(MeshIo, RejectsTruncatedInput) {
    std::stringstream bad("nodes 3 triangles 1 boundary 3\n0 0\n1 0\n");
    EXPECT_THROW(read_mesh(bad), Error);
}

TEST(PointLocator, FindsContainingTriangle) {
    const auto mesh = triangulate(make_canonical_domain(CanonicalKind::l_shape), 0.1);
    PointLocator locator(mesh);
    const auto hit = locator.locate({0.2, 0.7});
    ASSERT_TRUE(hit.has_value());
    double sum = 0;
    Vec2 p{};
    for (int i = 0; i < 3; ++i) {
        sum += hit->weights[static_cast<std::size_t>(i)];
        p = p + hit->weights[static_cast<std::size_t>(i)] *
                    mesh.nodes[static_cast<std::size_t>(mesh.triangles[hit->triangle][static_cast<std::size_t>(i)])];
    }
    EXPECT_NEAR(sum, 1.0, 1e-14);
    EXPECT_NEAR(p.x, 0.2, 1e-13);
    EXPECT_NEAR(p.y, 0.7, 1e-13);
    EXPECT_FALSE(locator.locate({0.8, 0.8}).has_value());
}
