#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "oracles/oracles.hpp"
#include "torsionlab/errors.hpp"
#include "torsionlab/plaplace.hpp"

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

const FemSystem& coarse_disk() {
    static const FemSystem fem(disk_mesh(0.15, 0, 128));
    return fem;
}

double relative(double a, double b) { return std::abs(a - b) / std::abs(b); }

bool nonincreasing(const std::vector<double>& v, double slack) {
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] > v[i - 1] + slack * std::abs(v[i - 1])) return false;
    return true;
}

}  // namespace

TEST(PTorsion, QuadraticMatchesLinearSolver) {
    const FemSystem& fem = coarse_disk();
    for (BoundaryCondition bc : {BoundaryCondition::dirichlet(), BoundaryCondition::robin(1.0)}) {
        const PTorsionSolution ps = solve_p_torsion(fem, 2.0, bc);
        const TorsionSolution ls = solve_torsion(fem, bc);
        EXPECT_TRUE(ps.converged);
        EXPECT_LT(relative(ps.sup_norm, ls.sup_norm), 1e-6);
        EXPECT_LT(relative(ps.l1_norm, ls.l1_norm), 1e-6);
    }
}

TEST(PTorsion, DiskDirichletCubic) {
    const PTorsionSolution s = solve_p_torsion(fine_disk(), 3.0, BoundaryCondition::dirichlet());
    EXPECT_TRUE(s.converged);
    EXPECT_LT(relative(s.sup_norm, oracle::ball_p_torsion(2, 3.0, 1.0, 0.0)), 0.02);
    EXPECT_LT(relative(s.sup_norm, 2.0 / 3.0 / std::sqrt(2.0)), 0.02);
}

TEST(PTorsion, DiskDirichletSubquadratic) {
    const PTorsionSolution s = solve_p_torsion(fine_disk(), 1.5, BoundaryCondition::dirichlet());
    EXPECT_TRUE(s.converged);
    EXPECT_LT(relative(s.sup_norm, oracle::ball_p_torsion(2, 1.5, 1.0, 0.0)), 0.02);
    EXPECT_LT(relative(s.sup_norm, 1.0 / 12.0), 0.02);
}

TEST(PTorsion, EnergyNonincreasing) {
    for (double p : {1.5, 3.0}) {
        const PTorsionSolution s = solve_p_torsion(coarse_disk(), p, BoundaryCondition::robin(0.5));
        EXPECT_TRUE(s.converged) << p;
        ASSERT_GE(s.energy_history.size(), 2u);
        EXPECT_TRUE(nonincreasing(s.energy_history, 0.0)) << p;
        EXPECT_LT(s.energy, 0.0);
        for (double v : s.field.values) EXPECT_GE(v, -1e-10);
    }
}

TEST(PTorsion, MinimizerBeatsPerturbations) {
    const FemSystem& fem = coarse_disk();
    const double p = 3.0;
    const BoundaryCondition bc = BoundaryCondition::robin(1.0);
    const PTorsionSolution s = solve_p_torsion(fem, p, bc);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> normal;
    for (int k = 0; k < 5; ++k) {
        std::vector<double> v = s.field.values;
        for (double& x : v) x += 1e-3 * s.sup_norm * normal(rng);
        EXPECT_GT(p_energy(fem, p, bc, v), s.energy);
    }
}

TEST(PTorsion, RejectsBadP) {
    EXPECT_THROW(solve_p_torsion(coarse_disk(), 1.0, BoundaryCondition::dirichlet()), InvalidParameter);
    EXPECT_THROW(solve_p_torsion(coarse_disk(), 0.5, BoundaryCondition::dirichlet()), InvalidParameter);
}

TEST(PTorsion, RigiditySandwich) {
    const FemSystem& fem = coarse_disk();
    for (double p : {1.5, 2.0, 3.0}) {
        const PTorsionSolution s = solve_p_torsion(fem, p, BoundaryCondition::robin(1.0));
        const PEigenResult e = p_eigenvalue_2d(fem, p, BoundaryCondition::robin(1.0));
        for (const BoundVerdict& v : rigidity_verdicts(s, fem.measures, e.lambda, 0.02))
            EXPECT_TRUE(v.satisfied) << p << " " << v.name << " " << v.lhs << " " << v.rhs;
    }
}

TEST(RadialEigenvalue, QuadraticDiskRobin) {
    const double lambda = radial_p_eigenvalue(2, 2.0, 1.0, BoundaryCondition::robin(1.0));
    EXPECT_NEAR(lambda, oracle::disk_robin_lambda(1.0, 1.0), 1e-6);
    EXPECT_LT(relative(lambda, 1.577), 0.01);
}

TEST(RadialEigenvalue, QuadraticDirichlet) {
    EXPECT_NEAR(radial_p_eigenvalue(2, 2.0, 1.0, BoundaryCondition::dirichlet()), oracle::disk_dirichlet_lambda(1.0),
                1e-6);
    EXPECT_LT(relative(radial_p_eigenvalue(3, 2.0, 1.0, BoundaryCondition::dirichlet()), pi * pi), 1e-3);
    EXPECT_NEAR(radial_p_eigenvalue(3, 2.0, 1.0, BoundaryCondition::robin(0.7)), oracle::ball3_robin_lambda(1.0, 0.7),
                1e-6);
}

TEST(RadialEigenvalue, SmallBLimit) {
    const double b = 1e-3;
    for (int m : {2, 3}) {
        const double lambda = radial_p_eigenvalue(m, 2.0, 1.0, BoundaryCondition::robin(b));
        EXPECT_LT(relative(lambda / b, m), 0.02) << m;
    }
    EXPECT_LT(relative(radial_p_eigenvalue(2, 3.0, 1.0, BoundaryCondition::robin(b)) / b, 2.0), 0.02);
}

TEST(RadialEigenvalue, MonotoneInBAndDirichletLimit) {
    for (double p : {1.5, 2.0, 3.0}) {
        const double dirichlet = radial_p_eigenvalue(2, p, 1.0, BoundaryCondition::dirichlet());
        double prev = 0.0;
        for (double b : {1.0, 10.0, 1e3, 1e6}) {
            const double lambda = radial_p_eigenvalue(2, p, 1.0, BoundaryCondition::robin(b));
            EXPECT_GE(lambda, prev) << p << " " << b;
            EXPECT_LE(lambda, dirichlet * (1 + 1e-7)) << p << " " << b;
            prev = lambda;
        }
        // the Robin value approaches the Dirichlet one like b^{-1/(p-1)}
        EXPECT_LT(relative(prev, dirichlet), 5.0 * std::pow(1e6, -1.0 / (p - 1.0)) + 1e-6) << p;
    }
}

TEST(RadialEigenvalue, RadiusScaling) {
    // lambda(B_R, b) = R^{-p} lambda(B_1, b R^{p-1})
    const double p = 3.0;
    const double r = 2.0;
    const double a = radial_p_eigenvalue(2, p, r, BoundaryCondition::robin(0.4));
    const double b = std::pow(r, -p) * radial_p_eigenvalue(2, p, 1.0, BoundaryCondition::robin(0.4 * r * r));
    EXPECT_LT(relative(a, b), 1e-6);
}

TEST(PEigenvalue, QuadraticMatchesLinear) {
    const FemSystem& fem = coarse_disk();
    const PEigenResult e = p_eigenvalue_2d(fem, 2.0, BoundaryCondition::robin(1.0));
    const double lambda = robin_spectrum(fem, 1.0, 1).pairs[0].eigenvalue;
    EXPECT_TRUE(e.converged);
    EXPECT_LT(relative(e.lambda, lambda), 1e-4);
}

TEST(PEigenvalue, CubicMatchesRadial) {
    const FemSystem fem(disk_mesh(0.1, 0, 128));
    const PEigenResult e = p_eigenvalue_2d(fem, 3.0, BoundaryCondition::robin(1.0));
    const double radial = radial_p_eigenvalue(2, 3.0, 1.0, BoundaryCondition::robin(1.0));
    EXPECT_TRUE(e.converged);
    EXPECT_LT(relative(e.lambda, radial), 0.02);
}

TEST(PEigenvalue, DirichletDisk) {
    const FemSystem fem(disk_mesh(0.1, 0, 128));
    for (double p : {1.5, 3.0}) {
        const PEigenResult e = p_eigenvalue_2d(fem, p, BoundaryCondition::dirichlet());
        const double radial = radial_p_eigenvalue(2, p, 1.0, BoundaryCondition::dirichlet());
        EXPECT_LT(relative(e.lambda, radial), 0.03) << p;
    }
}

TEST(PEigenvalue, QuotientOfReturnedField) {
    const FemSystem& fem = coarse_disk();
    const PEigenResult e = p_eigenvalue_2d(fem, 1.5, BoundaryCondition::robin(2.0));
    EXPECT_NEAR(p_rayleigh_quotient(fem, 1.5, BoundaryCondition::robin(2.0), e.field.values), e.lambda, 1e-8 * e.lambda);
    EXPECT_NEAR(p_mass_norm(fem, 1.5, e.field.values), 1.0, 1e-12);
    EXPECT_TRUE(nonincreasing(e.rayleigh_history, 1e-9));
}

TEST(LevelSet, EndpointsAndMonotonicity) {
    const PTorsionSolution s = solve_p_torsion(coarse_disk(), 2.0, BoundaryCondition::robin(1.0));
    const LevelSetProfile prof = levelset_profile(s, 32);
    ASSERT_EQ(prof.t_grid.size(), 33u);
    EXPECT_EQ(prof.t_grid.front(), 0.0);
    EXPECT_EQ(prof.t_grid.back(), s.sup_norm);
    EXPECT_NEAR(prof.f_values.front(), s.l1_norm, 1e-12 * s.l1_norm);
    EXPECT_NEAR(prof.h_values.front(), 1.0, 1e-14);
    EXPECT_FALSE(std::isfinite(prof.h_values.back()));
    for (std::size_t k = 1; k < prof.t_grid.size(); ++k) {
        EXPECT_LE(prof.level_measure[k], prof.level_measure[k - 1]);
        EXPECT_LE(prof.f_values[k], prof.f_values[k - 1]);
        EXPECT_GE(prof.h_values[k], prof.h_values[k - 1]);
    }
    EXPECT_THROW(levelset_profile(s, 8), InvalidParameter);
}

TEST(LevelSet, LinearRampOnSquare) {
    const MeshPtr mesh = square_mesh(0.1);
    std::vector<double> ramp(mesh->node_count());
    for (std::size_t i = 0; i < ramp.size(); ++i) ramp[i] = mesh->nodes[i].x;
    const LevelSetProfile prof = levelset_profile(DiscreteField(mesh, ramp), 20);
    for (std::size_t k = 0; k < prof.t_grid.size(); ++k) {
        const double t = prof.t_grid[k];
        EXPECT_NEAR(prof.level_measure[k], 1.0 - t, 1e-12);
        EXPECT_NEAR(prof.f_values[k], 0.5 * (1.0 - t) * (1.0 - t), 1e-12);
    }
}

TEST(LevelSet, IntegrandLimits) {
    const double r = 1.0;
    // empty level set: limit m b / R
    EXPECT_NEAR(levelset_integrand(2, 2.0, 1.0, r, INFINITY), std::pow(2.0, 2.0 / 3.0), 1e-14);
    // h = 1 reproduces the ball eigenvalue
    const double lambda = radial_p_eigenvalue(2, 2.0, r, BoundaryCondition::robin(1.0));
    EXPECT_NEAR(levelset_integrand(2, 2.0, 1.0, r, 1.0), std::pow(lambda, 2.0 / 3.0), 1e-8);
    // large h approaches the limit from below
    const double big = levelset_integrand(2, 2.0, 1.0, r, 1e4);
    EXPECT_LT(big, std::pow(2.0, 2.0 / 3.0));
    EXPECT_GT(big, 0.999 * std::pow(2.0, 2.0 / 3.0));
}

TEST(LevelSet, IntegralBoundOnDisk) {
    const FemSystem& fem = coarse_disk();
    const PTorsionSolution s = solve_p_torsion(fem, 2.0, BoundaryCondition::robin(1.0));
    const double lambda = robin_spectrum(fem, 1.0, 1).pairs[0].eigenvalue;
    const LevelsetIntegralCheck c = levelset_integral_check(s, lambda, 128);
    EXPECT_TRUE(c.grid_independent) << c.grid_change;
    EXPECT_TRUE(c.verdict.satisfied) << c.verdict.lhs << " " << c.verdict.rhs;
    EXPECT_NEAR(c.verdict.rhs, std::cbrt(4.0) * 3.0 / std::cbrt(lambda), 1e-12);
    EXPECT_NEAR(c.ball_radius, std::sqrt(fem.measures.area / pi), 1e-12);
}

TEST(Caccioppoli, ZeroCutoff) {
    const FemSystem& fem = coarse_disk();
    const PTorsionSolution w = solve_p_torsion(fem, 2.0, BoundaryCondition::dirichlet());
    const std::vector<double> zero(fem.mesh->node_count(), 0.0);
    const BoundVerdict v = caccioppoli_check(*fem.mesh, w.field.values, zero, 2.0, 3.0);
    EXPECT_EQ(v.lhs, 0.0);
    EXPECT_EQ(v.rhs, 0.0);
    EXPECT_TRUE(v.satisfied);
}

TEST(Caccioppoli, UnitCutoffIsEnergyIdentity) {
    const FemSystem& fem = coarse_disk();
    const PTorsionSolution w = solve_p_torsion(fem, 2.0, BoundaryCondition::dirichlet());
    const std::vector<double> one(fem.mesh->node_count(), 1.0);
    const CaccioppoliTerms t = caccioppoli_terms(*fem.mesh, w.field.values, one, 2.0, 3.0);
    EXPECT_NEAR(t.lhs, w.l1_norm, 1e-9 * w.l1_norm);
    EXPECT_NEAR(t.mass_term, w.l1_norm, 1e-12);
    EXPECT_NEAR(t.cutoff_term, 0.0, 1e-20);
    EXPECT_NEAR(3.0 * t.mass_term - t.lhs, 2.0 * w.l1_norm, 1e-8);
    EXPECT_DOUBLE_EQ(t.c2, 2.0 + 3.0 * 3.0);
}

TEST(Caccioppoli, RandomCutoffs) {
    const FemSystem& fem = coarse_disk();
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> centre(-0.6, 0.6);
    std::uniform_real_distribution<double> radius(0.1, 0.8);
    for (double p : {1.5, 2.0, 3.0}) {
        const PTorsionSolution w = solve_p_torsion(fem, p, BoundaryCondition::dirichlet());
        const double c1 = std::pow(2.0, p - 1.0) + 1.0;
        for (int k = 0; k < 30; ++k) {
            const Vec2 c{centre(rng), centre(rng)};
            const double r = radius(rng);
            const double width = 0.5 * r;
            std::vector<double> theta(fem.mesh->node_count());
            for (std::size_t i = 0; i < theta.size(); ++i)
                theta[i] = std::clamp((r - norm(fem.mesh->nodes[i] - c)) / width, 0.0, 1.0);
            const BoundVerdict v = caccioppoli_check(*fem.mesh, w.field.values, theta, p, c1);
            EXPECT_TRUE(v.satisfied) << p << " " << k;
        }
    }
    const std::vector<double> one(fem.mesh->node_count(), 1.0);
    EXPECT_THROW(caccioppoli_check(*fem.mesh, one, one, 2.0, 2.0), InvalidParameter);
}

TEST(DirichletRatio, QuadraticDisk) {
    const PTorsionSolution w = solve_p_torsion(fine_disk(), 2.0, BoundaryCondition::dirichlet());
    const double ratio = dirichlet_p_ratio(w, oracle::disk_dirichlet_lambda(1.0));
    EXPECT_LT(relative(ratio, 0.25 * 5.7832), 0.01);
    EXPECT_GE(ratio, 0.98);
    EXPECT_THROW(dirichlet_p_ratio(solve_p_torsion(coarse_disk(), 2.0, BoundaryCondition::robin(1.0)), 1.0),
                 InvalidParameter);
}

TEST(Caccioppoli, SeededSweepIsReproducible) {
    const FemSystem& fem = coarse_disk();
    const PTorsionSolution w = solve_p_torsion(fem, 3.0, BoundaryCondition::dirichlet());
    const double c1 = std::pow(2.0, 2.0) + 1.0;
    const CaccioppoliSweep a = caccioppoli_sweep(*fem.mesh, w.field.values, 3.0, c1, 40, 17);
    const CaccioppoliSweep b = caccioppoli_sweep(*fem.mesh, w.field.values, 3.0, c1, 40, 17);
    EXPECT_EQ(a.cutoffs, 40);
    EXPECT_EQ(a.satisfied, 40);
    EXPECT_GT(a.nontrivial, 20);
    EXPECT_TRUE(a.worst.satisfied);
    EXPECT_EQ(a.worst.lhs, b.worst.lhs);
    EXPECT_EQ(a.worst.anchor, anchors::caccioppoli);
}
