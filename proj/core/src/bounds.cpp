#include "torsionlab/bounds.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "torsionlab/errors.hpp"

namespace torsionlab {

namespace {

void require(bool ok, const char* message) {
    if (!ok) throw InvalidParameter(message);
}

void require_dimension(int m) { require(m >= 2, "dimension m must be at least 2"); }

void require_spectrum(double lambda1) {
    require(std::isfinite(lambda1), "spectral bottom must be finite");
    require(lambda1 > 0, "spectral bottom is not positive: the torsion function is unbounded");
}

}  // namespace

double isoperimetric_constant(int m) {
    require_dimension(m);
    return std::pow(std::tgamma(0.5 * (2.0 + m)), 1.0 / m) / (m * std::sqrt(std::numbers::pi));
}

double heat_kernel_constant(int m) {
    require_dimension(m);
    return std::pow(192.0 * m, m);
}

double gaussian_width_constant(int m) {
    require_dimension(m);
    return 1.0 + std::sqrt(static_cast<double>(m)) + 4.0 * m;
}

NashConstant nash_constant(int m, double b, double lambda1) {
    require(b > 0, "Robin parameter b must be positive");
    require_spectrum(lambda1);
    const double c = isoperimetric_constant(m);
    NashConstant out;
    out.general = c * (1.0 / b + b / lambda1);
    if (b >= std::sqrt(lambda1)) out.strong = 2.0 * c / std::sqrt(lambda1);
    return out;
}

BoundPair robin_sup_bound(int m, double b, double lambda1) {
    require_dimension(m);
    require(b > 0, "Robin parameter b must be positive");
    require_spectrum(lambda1);
    const double arg = std::pow(2.0, 11) * 3.0 * std::sqrt(3.0) * m * (1.0 + std::sqrt(lambda1) / b);
    return {1.0 / lambda1, 6.0 * m / lambda1 * std::log(arg)};
}

double dirichlet_sup_constant(int m) {
    require_dimension(m);
    return 4.0 + 3.0 * m * std::log(2.0);
}

BoundPair dirichlet_sup_bound(int m, double lambda1) {
    require_spectrum(lambda1);
    return {1.0 / lambda1, dirichlet_sup_constant(m) / lambda1};
}

BoundPair rigidity_bounds(int m, double p, double b, double area, double perimeter, double lambda1) {
    require_dimension(m);
    require(p > 1, "p must exceed 1");
    require(b > 0 && area > 0 && perimeter > 0, "b, area and perimeter must be positive");
    require_spectrum(lambda1);
    const double e = 1.0 / (p - 1.0);
    return {std::pow(b, -e) * std::pow(area, p * e) * std::pow(perimeter, -e), std::pow(lambda1, -e) * area};
}

HeatKernelConstants HeatKernelConstants::make(int m, double b, double lambda1) {
    HeatKernelConstants c;
    c.m = m;
    c.b = b;
    c.lambda1 = lambda1;
    c.isoperimetric = isoperimetric_constant(m);
    c.c2m = heat_kernel_constant(m);
    c.omega = gaussian_width_constant(m);
    c.nash = nash_constant(m, b, lambda1);
    c.nash_used = c.nash.best();
    c.k = c.c2m * std::pow(c.nash_used, m);
    c.dirichlet_upper = dirichlet_sup_constant(m);
    return c;
}

EigenBounds eigen_bounds(const HeatKernelConstants& c, double area, std::span<const double> lambdas, double t) {
    require(t > 0 && std::isfinite(t), "time t must be positive");
    require(area > 0, "area must be positive");
    const double m = c.m;
    const double chain = c.k * std::pow(std::numbers::e / m, m);
    EigenBounds out;
    out.trace_rhs = c.k * area * std::pow(t, -m);
    out.eigenfunction_rhs.reserve(lambdas.size());
    for (double lambda : lambdas) out.eigenfunction_rhs.push_back(std::sqrt(chain) * std::pow(lambda, 0.5 * m));
    out.comparison_scale = std::pow(chain, -0.5) * std::pow(c.lambda1, -1.0 - 0.5 * m);
    return out;
}

PConstants PConstants::make(int m, double p) {
    require_dimension(m);
    require(p > 1, "p must exceed 1");
    const double d = m * (p - 1.0) + 1.0;
    PConstants c;
    c.c1 = m / d;
    c.c2 = std::pow(p, c.c1) * d;
    c.c3 = 1.0 / ((p - 1.0) * d);
    return c;
}

double caccioppoli_constant(double p, double c1) {
    require(p > 1, "p must exceed 1");
    const double base = std::pow(2.0, p - 1.0);
    require(c1 > base, "Caccioppoli constant c1 must exceed 2^{p-1}");
    return base + c1 * std::pow((p - 1.0) * c1 / (c1 - base), p - 1.0);
}

double ball_p_torsion_sup(int m, double p, double radius) {
    require_dimension(m);
    require(p > 1 && radius > 0, "need p > 1 and a positive radius");
    return (p - 1.0) / p * std::pow(m, -1.0 / (p - 1.0)) * std::pow(radius, p / (p - 1.0));
}

BoundVerdict make_verdict(std::string name, std::string anchor, double lhs, double rhs, double tolerance,
                          std::vector<std::pair<std::string, double>> inputs, std::string note) {
    require(std::isfinite(lhs) && std::isfinite(rhs), "verdict sides must be finite");
    require(std::isfinite(tolerance) && tolerance >= 0, "verdict tolerance must be finite and nonnegative");
    for (const auto& [key, value] : inputs)
        if (!std::isfinite(value)) throw InvalidParameter("verdict input '" + key + "' is not finite");
    BoundVerdict v;
    v.name = std::move(name);
    v.anchor = std::move(anchor);
    v.lhs = lhs;
    v.rhs = rhs;
    v.margin = rhs - lhs;
    v.tolerance = tolerance;
    v.satisfied = lhs <= rhs * (1.0 + tolerance);
    v.inputs = std::move(inputs);
    v.note = std::move(note);
    return v;
}

std::span<const AnchorInfo> anchor_catalog() {
    static constexpr std::array<AnchorInfo, 17> catalog{{
        {anchors::dirichlet_sup, "1/lambda <= |u|_inf <= (4 + 3m log 2)/lambda for the Dirichlet torsion function"},
        {anchors::robin_sup, "1/lambda <= |u_b|_inf <= 6m/lambda log(2^11 3 sqrt3 m (1 + sqrt(lambda)/b))"},
        {anchors::nash, "|u|_2^{2+2/m} <= N_b q_b(u) |u|_1^{2/m}"},
        {anchors::trace_sobolev, "|u|_{2m/(m-1)}^2 <= C(m) (2 int |u||grad u| + int_boundary u^2)"},
        {anchors::robin_sobolev, "|u|_{2m/(m-1)}^2 <= C(m) (1/b + b/lambda) q_b(u)"},
        {anchors::robin_sobolev_strong, "|u|_{2m/(m-1)}^2 <= 2 C(m) lambda^{-1/2} q_b(u) when b >= sqrt(lambda)"},
        {anchors::heat_trace, "sum_j exp(-t lambda_j) <= C_2m N_b^m |Omega| t^{-m}"},
        {anchors::eigenfunction_sup, "|phi_j|_inf <= (C_2m N_b^m e^m m^{-m})^{1/2} lambda_j^{m/2}"},
        {anchors::comparison, "u_b >= (C_2m N_b^m e^m m^{-m})^{-1/2} lambda^{-1-m/2} phi_1"},
        {anchors::small_b_limit, "lambda(Omega, b)/b -> |boundary|/|Omega| as b -> 0"},
        {anchors::ball_small_b_limit, "lambda(B_R, b)/b -> m/R as b -> 0"},
        {anchors::rigidity_lower, "b^{-1/(p-1)} |Omega|^{p/(p-1)} |boundary|^{-1/(p-1)} <= P_p(Omega, b)"},
        {anchors::rigidity_upper, "P_p(Omega, b) <= lambda_p(Omega, b)^{-1/(p-1)} |Omega|"},
        {anchors::levelset_integral,
         "int_0^{|u_b|_inf} (h^{p-1} lambda(Omega*, b/h^{p-1}))^{c1} dt <= c2 / lambda(Omega, b)^{c3}"},
        {anchors::caccioppoli, "int |grad(w theta)|^p <= c1 int w |theta|^p + c2 int |grad theta|^p w^p"},
        {anchors::p_torsion_ratio, "|w|_inf lambda_p^{1/(p-1)} <= C_{m,p}"},
        {anchors::exit_time, "u(x) = E_x[T_Omega] for the Dirichlet torsion function"},
    }};
    return catalog;
}

bool is_catalog_anchor(std::string_view id) {
    const auto c = anchor_catalog();
    return std::any_of(c.begin(), c.end(), [&](const AnchorInfo& a) { return a.id == id; });
}

}  // namespace torsionlab
