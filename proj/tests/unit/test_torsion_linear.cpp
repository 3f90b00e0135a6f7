#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "oracles/oracles.hpp"
#include "torsionlab/errors.hpp"
#include "torsionlab/torsion_linear.hpp"

using namespace torsionlab;

namespace {

constexpr double pi = std::numbers::pi;

MeshPtr disk_mesh(double h, int levels, int n = 256) {
    const std::vector<double> params{1.0, static_cast<double>(n)};
    return std::make_shared<const TriangleMesh>(
        refine(triangulate(make_canonical_domain(CanonicalKind::disk_polygon, params), h), levels));
}

MeshPtr square_mesh(double h, int levels = 0) {
    return std::make_shared<const TriangleMesh>(
        refine(triangulate(make_canonical_domain(CanonicalKind::unit_square), h), levels));
}

const FemSystem& fine_disk() {
    static const FemSystem fem(disk_mesh(0.1, 2));
    return fem;
}

double relative(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST(BoundaryCondition, Validation) {
    EXPECT_NO_THROW(BoundaryCondition::dirichlet().validate());
    EXPECT_NO_THROW(BoundaryCondition::robin(0.5).validate());
    EXPECT_THROW(BoundaryCondition::robin(0.0).validate(), InvalidParameter);
    EXPECT_THROW(BoundaryCondition::robin(-1.0).validate(), InvalidParameter);
    EXPECT_EQ(BoundaryCondition::dirichlet().describe(), "dirichlet");
    EXPECT_EQ(BoundaryCondition::robin(2.0).describe(), "robin(b=2)");
}

TEST(Torsion, DiskDirichletClosedForm) {
    const TorsionSolution sol = solve_torsion(fine_disk(), BoundaryCondition::dirichlet());
    EXPECT_LT(relative(sol.sup_norm, 0.25), 0.01);
    EXPECT_LT(relative(torsional_rigidity(sol), pi / 8.0), 0.01);
    EXPECT_LT(relative(sol.lambda1, oracle::disk_dirichlet_lambda(1.0)), 0.01);
    EXPECT_TRUE(sol.cg.converged);
}

TEST(Torsion, DiskRobinClosedForm) {
    const TorsionSolution sol = solve_torsion(fine_disk(), BoundaryCondition::robin(1.0));
    EXPECT_LT(relative(sol.sup_norm, oracle::ball_robin_torsion(2, 1.0, 1.0, 0.0)), 0.01);
    EXPECT_LT(relative(sol.sup_norm, 0.75), 0.01);
    EXPECT_LT(relative(torsional_rigidity(sol), pi / 8.0 + pi / 2.0), 0.01);
    EXPECT_LT(relative(sol.lambda1, oracle::disk_robin_lambda(1.0, 1.0)), 0.01);
}

TEST(Torsion, NodalValuesMatchRadialProfile) {
    const FemSystem& fem = fine_disk();
    const TorsionSolution sol = solve_torsion(fem, BoundaryCondition::robin(2.0));
    double worst = 0.0;
    for (std::size_t i = 0; i < fem.mesh->node_count(); ++i) {
        const double r = norm(fem.mesh->nodes[i]);
        worst = std::max(worst, std::abs(sol.field.values[i] - oracle::ball_robin_torsion(2, 1.0, 2.0, r)));
    }
    EXPECT_LT(worst, 0.01 * 0.5);
}

TEST(Torsion, SquareMatchesSeries) {
    const FemSystem fem(square_mesh(0.05, 1));
    const TorsionSolution sol = solve_torsion(fem, BoundaryCondition::dirichlet());
    EXPECT_LT(relative(sol.sup_norm, oracle::rectangle_torsion(1.0, 1.0, 0.5, 0.5)), 0.005);
    EXPECT_LT(relative(torsional_rigidity(sol), oracle::rectangle_rigidity(1.0, 1.0)), 0.005);
}

TEST(Torsion, LargeBApproachesDirichlet) {
    const FemSystem fem(disk_mesh(0.15, 1));
    const TorsionSolution d = solve_torsion(fem, BoundaryCondition::dirichlet());
    const TorsionSolution r = solve_torsion(fem, BoundaryCondition::robin(1e6));
    EXPECT_LT(relative(r.sup_norm, d.sup_norm), 1e-3);
}

TEST(Torsion, LinearInLoad) {
    const FemSystem fem(square_mesh(0.1));
    TorsionOptions scaled;
    scaled.load_scale = 3.0;
    for (BoundaryCondition bc : {BoundaryCondition::dirichlet(), BoundaryCondition::robin(0.7)}) {
        const TorsionSolution a = solve_torsion(fem, bc);
        const TorsionSolution b = solve_torsion(fem, bc, scaled);
        for (std::size_t i = 0; i < a.field.size(); ++i)
            EXPECT_NEAR(b.field.values[i], 3.0 * a.field.values[i], 1e-8 * b.sup_norm);
        EXPECT_NEAR(torsional_rigidity(b), 3.0 * torsional_rigidity(a), 1e-8);
    }
}

TEST(Torsion, PositiveAndConsistentNorms) {
    const FemSystem fem(disk_mesh(0.2, 0, 64));
    for (BoundaryCondition bc : {BoundaryCondition::dirichlet(), BoundaryCondition::robin(0.3)}) {
        const TorsionSolution sol = solve_torsion(fem, bc);
        for (double v : sol.field.values) EXPECT_GE(v, -1e-10);
        EXPECT_DOUBLE_EQ(sol.sup_norm, max_value(sol.field.values));
        EXPECT_NEAR(sol.l1_norm, torsional_rigidity(sol), 1e-12);
        EXPECT_GE(sol.lambda1 * sol.sup_norm, 0.98);
    }
}

TEST(Spectrum, RobinDiskBessel) {
    const SpectralSet s = robin_spectrum(fine_disk(), 1.0, 1);
    EXPECT_LT(relative(s.pairs[0].eigenvalue, 1.577), 0.01);
    EXPECT_LT(relative(s.pairs[0].eigenvalue, oracle::disk_robin_lambda(1.0, 1.0)), 0.01);
}

TEST(Spectrum, SmallBOnSquare) {
    const double b = 1e-3;
    const SpectralSet s = robin_spectrum(square_mesh(0.1), b, 1);
    const double ratio = s.pairs[0].eigenvalue / b;
    EXPECT_LT(relative(ratio, 4.0), 0.02);
    EXPECT_LT(relative(s.pairs[0].eigenvalue, 2.0 * oracle::interval_robin_lambda(b)), 0.01);
}

TEST(Spectrum, MonotoneInB) {
    const FemSystem fem(square_mesh(0.15));
    double prev = 0.0;
    for (double b : {0.01, 0.1, 1.0, 10.0, 100.0}) {
        const double lambda = robin_spectrum(fem, b, 1).pairs[0].eigenvalue;
        EXPECT_GE(lambda, prev);
        prev = lambda;
    }
}

TEST(Spectrum, SignAndOrdering) {
    const FemSystem fem(square_mesh(0.15));
    const SpectralSet s = robin_spectrum(fem, 1.0, 6);
    ASSERT_EQ(s.count(), 6u);
    for (std::size_t j = 0; j < s.count(); ++j) {
        const auto& v = s.pairs[j].vector;
        EXPECT_EQ(v.size(), fem.mesh->node_count());
        EXPECT_GT(max_value(v), 0.0);
        EXPECT_GE(max_value(v), max_abs(v));
        if (j > 0) EXPECT_GE(s.pairs[j].eigenvalue, s.pairs[j - 1].eigenvalue);
    }
    for (double x : s.pairs[0].vector) EXPECT_GT(x, 0.0);
}

TEST(Spectrum, DirichletVectorsVanishOnBoundary) {
    const FemSystem fem(square_mesh(0.2));
    const SpectralSet s = spectrum(fem, BoundaryCondition::dirichlet(), 3);
    const auto boundary = fem.mesh->boundary_nodes();
    for (const auto& p : s.pairs)
        for (std::size_t i = 0; i < boundary.size(); ++i)
            if (boundary[i]) EXPECT_EQ(p.vector[i], 0.0);
    EXPECT_NEAR(fem.mass.quadratic_form(s.pairs[0].vector), 1.0, 1e-10);
}

TEST(Inequalities, ConstantFieldOnSquare) {
    const FemSystem fem(square_mesh(0.2));
    const std::vector<double> one(fem.mesh->node_count(), 1.0);
    const FieldInequalities f = evaluate_inequalities(fem, 1.0, 2.0, one);
    EXPECT_NEAR(f.sobolev_lhs, 1.0, 1e-12);
    EXPECT_NEAR(f.trace_sobolev_rhs, 4.0 / (2.0 * std::sqrt(pi)), 1e-12);
    EXPECT_NEAR(f.trace_sobolev_rhs - f.sobolev_lhs, 0.12838, 1e-5);
}

TEST(Inequalities, ConstantFieldHasNoGradientTerm) {
    const FemSystem fem(disk_mesh(0.3, 0, 32));
    const std::vector<double> c(fem.mesh->node_count(), 2.5);
    const FieldInequalities f = evaluate_inequalities(fem, 0.4, 1.0, c);
    // with zero gradient the trace form reduces to the boundary integral
    EXPECT_NEAR(f.trace_sobolev_rhs, isoperimetric_constant(2) * fem.boundary_mass.quadratic_form(c), 1e-12);
}

TEST(Inequalities, RandomFieldsOnDisk) {
    const FemSystem fem(disk_mesh(0.15, 0, 128));
    const double lambda = robin_spectrum(fem, 1.0, 1).pairs[0].eigenvalue;
    const InequalityMargins mg = functional_inequality_margins(fem, 1.0, lambda, 1000, 42);
    EXPECT_EQ(mg.samples, 1000);
    EXPECT_GE(mg.nash_general.margin, 0.0);
    EXPECT_GE(mg.trace_sobolev.margin, 0.0);
    EXPECT_GE(mg.robin_sobolev.margin, 0.0);
    ASSERT_FALSE(mg.nash_strong.has_value());  // b = 1 < sqrt(1.58)
}

TEST(Inequalities, StrongBranchForLargeB) {
    const FemSystem fem(square_mesh(0.2));
    const double lambda = robin_spectrum(fem, 10.0, 1).pairs[0].eigenvalue;
    const InequalityMargins mg = functional_inequality_margins(fem, 10.0, lambda, 200, 7);
    ASSERT_TRUE(mg.nash_strong.has_value());
    ASSERT_TRUE(mg.robin_sobolev_strong.has_value());
    EXPECT_GE(mg.nash_strong->margin, 0.0);
    EXPECT_GE(mg.robin_sobolev_strong->margin, 0.0);
    for (const BoundVerdict& v : functional_inequality_verdicts(mg, 10.0, lambda)) EXPECT_TRUE(v.satisfied) << v.name;
}

TEST(Inequalities, DeterministicPerSeed) {
    const FemSystem fem(square_mesh(0.25));
    const auto a = functional_inequality_margins(fem, 1.0, 1.5, 50, 99);
    const auto b = functional_inequality_margins(fem, 1.0, 1.5, 50, 99);
    EXPECT_EQ(a.nash_general.margin, b.nash_general.margin);
    EXPECT_EQ(a.trace_sobolev.lhs, b.trace_sobolev.lhs);
    EXPECT_THROW(functional_inequality_margins(fem, 1.0, 1.5, 0, 1), InvalidParameter);
}

TEST(HeatTrace, PartialSums) {
    SpectralSet s;
    s.pairs.push_back({1.0, {}, 0.0});
    const std::vector<double> t{1.0, 2.0, 10.0};
    const auto sums = heat_trace_partial_sum(s, t);
    EXPECT_NEAR(sums[0], std::exp(-1.0), 1e-15);
    EXPECT_LT(sums[1], sums[0]);
    EXPECT_LT(sums[2], sums[1]);
    const std::vector<double> bad{0.0};
    EXPECT_THROW(heat_trace_partial_sum(s, bad), InvalidParameter);
}

TEST(Verdicts, RobinEigenChainOnDisk) {
    const FemSystem fem(disk_mesh(0.15, 0, 128));
    const TorsionSolution u = solve_torsion(fem, BoundaryCondition::robin(1.0));
    const SpectralSet s = robin_spectrum(fem, 1.0, 10);
    const std::vector<double> t{0.1, 0.5, 1.0, 2.0};
    const auto verdicts = robin_eigen_verdicts(fem, u, s, t);
    EXPECT_EQ(verdicts.size(), t.size() + 10 + 1);
    for (const BoundVerdict& v : verdicts) {
        EXPECT_TRUE(v.satisfied) << v.name << " " << v.lhs << " " << v.rhs;
        EXPECT_TRUE(is_catalog_anchor(v.anchor));
    }
    const auto trace = heat_trace_partial_sum(s, std::vector<double>{0.5});
    const double bound =
        147456.0 * std::pow(nash_constant(2, 1.0, s.pairs[0].eigenvalue).best(), 2) * fem.measures.area / 0.25;
    EXPECT_LT(trace[0], bound);
}

TEST(Verdicts, SupNorm) {
    const TorsionSolution d = solve_torsion(fine_disk(), BoundaryCondition::dirichlet());
    const auto vd = sup_norm_verdicts(d, 0.02);
    ASSERT_EQ(vd.size(), 2u);
    for (const auto& v : vd) EXPECT_TRUE(v.satisfied) << v.name;
    EXPECT_NEAR(vd[1].rhs * d.lambda1, 4.0 + 6.0 * std::log(2.0), 1e-12);
    EXPECT_EQ(vd[1].note, natural_log_note);

    const TorsionSolution r = solve_torsion(fine_disk(), BoundaryCondition::robin(1.0));
    const auto vr = sup_norm_verdicts(r, 0.02);
    for (const auto& v : vr) EXPECT_TRUE(v.satisfied) << v.name;
    EXPECT_NEAR(vr[0].lhs, 1.0 / r.lambda1, 1e-15);
    EXPECT_NEAR(vr[1].rhs, robin_sup_bound(2, 1.0, r.lambda1).upper, 1e-12);
}

TEST(Verdicts, MismatchedRobinDataRejected) {
    const FemSystem fem(square_mesh(0.3));
    const TorsionSolution u = solve_torsion(fem, BoundaryCondition::robin(1.0));
    const SpectralSet s = robin_spectrum(fem, 2.0, 2);
    const std::vector<double> t{1.0};
    EXPECT_THROW(robin_eigen_verdicts(fem, u, s, t), InvalidParameter);
}
