#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "torsionlab/bounds.hpp"
#include "torsionlab/errors.hpp"

using namespace torsionlab;

namespace {

constexpr double pi = std::numbers::pi;

}  // namespace

TEST(IsoperimetricConstant, PlanarValue) { EXPECT_NEAR(isoperimetric_constant(2), 1.0 / (2.0 * std::sqrt(pi)), 1e-15); }

TEST(IsoperimetricConstant, SpatialValue) {
    // Gamma(5/2) = 3 sqrt(pi) / 4
    const double expected = std::cbrt(0.75 * std::sqrt(pi)) / (3.0 * std::sqrt(pi));
    EXPECT_NEAR(isoperimetric_constant(3), expected, 1e-14);
    EXPECT_NEAR(isoperimetric_constant(3), 0.2067835, 1e-7);
}

TEST(IsoperimetricConstant, PositiveAndDecreasing) {
    double prev = isoperimetric_constant(2);
    for (int m = 3; m <= 10; ++m) {
        const double c = isoperimetric_constant(m);
        EXPECT_GT(c, 0.0);
        EXPECT_LT(c, prev) << m;
        prev = c;
    }
}

TEST(IsoperimetricConstant, RejectsLowDimension) {
    EXPECT_THROW(isoperimetric_constant(1), InvalidParameter);
    EXPECT_THROW(heat_kernel_constant(0), InvalidParameter);
}

TEST(HeatKernelConstant, Values) {
    EXPECT_DOUBLE_EQ(heat_kernel_constant(2), 147456.0);
    EXPECT_DOUBLE_EQ(heat_kernel_constant(3), 576.0 * 576.0 * 576.0);
    EXPECT_DOUBLE_EQ(gaussian_width_constant(4), 19.0);
}

TEST(NashConstant, BranchBoundary) {
    const NashConstant n = nash_constant(2, 1.0, 1.0);
    EXPECT_NEAR(n.general, 0.564190, 1e-6);
    ASSERT_TRUE(n.strong.has_value());
    EXPECT_NEAR(*n.strong, 0.564190, 1e-6);
    EXPECT_NEAR(n.general, *n.strong, 1e-15);
}

TEST(NashConstant, StrongBranchSmaller) {
    const NashConstant n = nash_constant(2, 2.0, 1.0);
    EXPECT_NEAR(n.general, 0.282095 * 2.5, 1e-6);
    ASSERT_TRUE(n.strong.has_value());
    EXPECT_NEAR(*n.strong, 0.564190, 1e-6);
    EXPECT_DOUBLE_EQ(n.best(), *n.strong);
}

TEST(NashConstant, StrongAbsentForSmallB) {
    const NashConstant n = nash_constant(2, 0.5, 1.0);
    EXPECT_FALSE(n.strong.has_value());
    EXPECT_DOUBLE_EQ(n.best(), n.general);
}

TEST(NashConstant, SquareTimesLambdaLowerBound) {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> log_range(-8.0, 8.0);
    for (int m : {2, 3}) {
        const double c = isoperimetric_constant(m);
        for (int i = 0; i < 10000; ++i) {
            const double b = std::exp(log_range(rng));
            const double lambda = std::exp(log_range(rng));
            const HeatKernelConstants pc = HeatKernelConstants::make(m, b, lambda);
            EXPECT_GE(pc.nash.general * pc.nash.general * lambda, 4.0 * c * c * (1 - 1e-12)) << b << " " << lambda;
            if (pc.nash.strong) EXPECT_LE(*pc.nash.strong, pc.nash.general * (1 + 1e-15));
        }
    }
}

TEST(NashConstant, SquareTimesLambdaMinimumBelowOne) {
    // at b = sqrt(lambda) both branches give N^2 lambda = 4 C(2)^2 = 1/pi
    const HeatKernelConstants pc = HeatKernelConstants::make(2, 3.0, 9.0);
    EXPECT_NEAR(pc.nash_used * pc.nash_used * 9.0, 1.0 / pi, 1e-14);
    // the quantity it feeds still exceeds e^{1/4} by a wide margin
    const double rhs = std::pow(2.0, 20) * 9.0 * 4.0 * (pc.nash_used * pc.nash_used * 9.0) * pi * pc.omega;
    EXPECT_GT(rhs, std::exp(0.25));
}

TEST(RobinSupBound, ReferenceValues) {
    const BoundPair bp = robin_sup_bound(2, 1.0, 1.577);
    EXPECT_NEAR(bp.lower, 0.6341, 1e-4);
    const double arg = std::pow(2.0, 11) * 3.0 * std::sqrt(3.0) * 2.0;
    EXPECT_NEAR(arg, 21283.44, 0.01);
    EXPECT_NEAR(bp.upper, 12.0 * std::log(arg * (1.0 + std::sqrt(1.577))) / 1.577, 1e-12);
    EXPECT_NEAR(bp.upper, 82.023, 1e-3);
}

TEST(RobinSupBound, MonotoneInB) {
    const double lambda = 3.0;
    double prev = robin_sup_bound(2, 0.01, lambda).upper;
    for (double b = 0.02; b < 100.0; b *= 1.7) {
        const double u = robin_sup_bound(2, b, lambda).upper;
        EXPECT_LT(u, prev) << b;
        prev = u;
    }
}

TEST(RobinSupBound, RatioAboveOne) {
    for (double b : {0.01, 1.0, 100.0})
        for (double lambda : {0.1, 1.0, 1e4}) {
            const BoundPair bp = robin_sup_bound(2, b, lambda);
            EXPECT_GE(bp.upper / bp.lower, 12.0 * std::log(std::pow(2.0, 11) * 3.0 * std::sqrt(3.0) * 2.0));
        }
}

TEST(RobinSupBound, LargeLambdaDecays) {
    EXPECT_LT(robin_sup_bound(2, 1.0, 1e8).upper, robin_sup_bound(2, 1.0, 1e4).upper);
    EXPECT_LT(robin_sup_bound(2, 1.0, 1e12).upper, 1e-9);
}

TEST(RobinSupBound, NonPositiveLambdaIsUnboundedRegime) {
    EXPECT_THROW(robin_sup_bound(2, 1.0, 0.0), InvalidParameter);
    EXPECT_THROW(robin_sup_bound(2, 1.0, -1.0), InvalidParameter);
    EXPECT_THROW(robin_sup_bound(2, 0.0, 1.0), InvalidParameter);
}

TEST(DirichletSupBound, ReferenceValues) {
    const BoundPair a = dirichlet_sup_bound(2, 5.7832);
    EXPECT_NEAR(a.lower, 0.17291, 1e-5);
    EXPECT_NEAR(a.upper, 1.41079, 1e-5);
    const BoundPair b = dirichlet_sup_bound(2, 1.0);
    EXPECT_DOUBLE_EQ(b.lower, 1.0);
    EXPECT_NEAR(b.upper, 8.15888, 1e-5);
}

TEST(DirichletSupBound, RatioIsConstant) {
    for (int m = 2; m <= 5; ++m)
        for (double lambda : {0.3, 1.0, 17.0}) {
            const BoundPair bp = dirichlet_sup_bound(m, lambda);
            EXPECT_NEAR(bp.upper / bp.lower, 4.0 + 3.0 * m * std::log(2.0), 1e-13);
        }
}

TEST(RigidityBounds, DiskAndSquare) {
    const BoundPair disk = rigidity_bounds(2, 2.0, 1.0, pi, 2.0 * pi, 1.577);
    EXPECT_NEAR(disk.lower, pi / 2.0, 1e-14);
    EXPECT_NEAR(disk.upper, pi / 1.577, 1e-14);
    const double exact = pi / 8.0 + pi / 2.0;
    EXPECT_GT(exact, disk.lower);
    EXPECT_LT(exact, disk.upper);
    EXPECT_DOUBLE_EQ(rigidity_bounds(2, 2.0, 1.0, 1.0, 4.0, 10.0).lower, 0.25);
}

TEST(RigidityBounds, LargePLimit) {
    const BoundPair bp = rigidity_bounds(2, 1e6, 3.0, 2.0, 7.0, 5.0);
    EXPECT_NEAR(bp.lower, 2.0, 1e-5);
    EXPECT_NEAR(bp.upper, 2.0, 1e-5);
}

TEST(EigenBounds, ReferenceValues) {
    const HeatKernelConstants c = HeatKernelConstants::make(2, 1.0, 1.577);
    EXPECT_NEAR(c.nash_used, 0.282095 * (1.0 + 1.0 / 1.577), 1e-6);
    const std::vector<double> lambdas{1.577, 4.0};
    const EigenBounds eb = eigen_bounds(c, pi, lambdas, 1.0);
    const double chain = 147456.0 * c.nash_used * c.nash_used * std::exp(2.0) / 4.0;
    EXPECT_NEAR(eb.eigenfunction_rhs[0], std::sqrt(chain) * 1.577, 1e-9);
    EXPECT_NEAR(eb.eigenfunction_rhs[1], std::sqrt(chain) * 4.0, 1e-9);
    EXPECT_NEAR(eb.trace_rhs, 147456.0 * c.nash_used * c.nash_used * pi, 1e-6);
}

TEST(EigenBounds, ValuesAtNashReference) {
    // b = sqrt(lambda) = 1 gives N = 1/sqrt(pi)
    const HeatKernelConstants c = HeatKernelConstants::make(2, 1.0, 1.0);
    const std::vector<double> lambdas{1.577};
    const EigenBounds eb = eigen_bounds(c, pi, lambdas, 1.0);
    EXPECT_NEAR(eb.eigenfunction_rhs[0], 464.3, 0.5);
    EXPECT_NEAR(eb.trace_rhs, 1.4745e5, 10.0);
}

TEST(EigenBounds, ComparisonScaleCancels) {
    const HeatKernelConstants c = HeatKernelConstants::make(2, 0.7, 2.3);
    const std::vector<double> lambdas{2.3};
    const EigenBounds eb = eigen_bounds(c, 1.0, lambdas, 0.5);
    EXPECT_NEAR(eb.comparison_scale * eb.eigenfunction_rhs[0], 1.0 / 2.3, 1e-14);
    EXPECT_THROW(eigen_bounds(c, 1.0, lambdas, 0.0), InvalidParameter);
}

TEST(PConstants, PlanarQuadratic) {
    const PConstants c = PConstants::make(2, 2.0);
    EXPECT_NEAR(c.c1, 2.0 / 3.0, 1e-15);
    EXPECT_NEAR(c.c2, std::cbrt(4.0) * 3.0, 1e-13);
    EXPECT_NEAR(c.c2, 4.7622, 1e-4);
    EXPECT_NEAR(c.c3, 1.0 / 3.0, 1e-15);
    EXPECT_THROW(PConstants::make(2, 1.0), InvalidParameter);
}

TEST(Caccioppoli, ConstantFormula) {
    const double p = 1.2;
    const double c1 = 3.0;
    const double base = std::pow(2.0, 0.2);
    EXPECT_NEAR(caccioppoli_constant(p, c1), base + c1 * std::pow(0.2 * c1 / (c1 - base), 0.2), 1e-14);
    EXPECT_THROW(caccioppoli_constant(2.0, 1.5), InvalidParameter);
}

TEST(BallPTorsion, SupValues) {
    EXPECT_NEAR(ball_p_torsion_sup(2, 2.0, 1.0), 0.25, 1e-15);
    EXPECT_NEAR(ball_p_torsion_sup(2, 3.0, 1.0), 2.0 / 3.0 / std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(ball_p_torsion_sup(2, 1.5, 1.0), 1.0 / 12.0, 1e-15);
}

TEST(Verdict, Rule) {
    const BoundVerdict a = make_verdict("a", std::string(anchors::nash), 1.0, 2.0, 0.0);
    EXPECT_TRUE(a.satisfied);
    EXPECT_DOUBLE_EQ(a.margin, 1.0);
    const BoundVerdict b = make_verdict("b", std::string(anchors::nash), 2.0, 1.0, 0.0);
    EXPECT_FALSE(b.satisfied);
    EXPECT_DOUBLE_EQ(b.margin, -1.0);
    EXPECT_TRUE(make_verdict("c", std::string(anchors::nash), 1.0, 1.0, 0.02).satisfied);
    EXPECT_TRUE(make_verdict("d", std::string(anchors::nash), 1.01, 1.0, 0.02).satisfied);
}

TEST(Verdict, RejectsNonFinite) {
    EXPECT_THROW(make_verdict("x", "", NAN, 1.0, 0.0), InvalidParameter);
    EXPECT_THROW(make_verdict("x", "", 1.0, INFINITY, 0.0), InvalidParameter);
    EXPECT_THROW(make_verdict("x", "", 1.0, 1.0, 0.0, {{"k", NAN}}), InvalidParameter);
}

TEST(Verdict, InputsRecomputeSides) {
    const double lambda = 2.5;
    const BoundPair bp = dirichlet_sup_bound(2, lambda);
    const BoundVerdict v = make_verdict("upper", std::string(anchors::dirichlet_sup), 1.0, bp.upper, 0.0,
                                        {{"m", 2}, {"lambda1", lambda}});
    EXPECT_DOUBLE_EQ(dirichlet_sup_bound(static_cast<int>(v.inputs[0].second), v.inputs[1].second).upper, v.rhs);
}

TEST(Catalog, PureAndComplete) {
    EXPECT_EQ(robin_sup_bound(2, 0.3, 2.0).upper, robin_sup_bound(2, 0.3, 2.0).upper);
    for (std::string_view id : {anchors::dirichlet_sup, anchors::robin_sup, anchors::nash, anchors::trace_sobolev,
                                anchors::robin_sobolev, anchors::robin_sobolev_strong, anchors::heat_trace,
                                anchors::eigenfunction_sup, anchors::comparison, anchors::small_b_limit,
                                anchors::ball_small_b_limit, anchors::rigidity_lower, anchors::rigidity_upper,
                                anchors::levelset_integral, anchors::caccioppoli, anchors::p_torsion_ratio,
                                anchors::exit_time})
        EXPECT_TRUE(is_catalog_anchor(id)) << id;
    EXPECT_FALSE(is_catalog_anchor("no-such-anchor"));
}
