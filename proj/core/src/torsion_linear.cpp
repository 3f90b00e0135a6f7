#include "torsionlab/torsion_linear.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "torsionlab/errors.hpp"

namespace torsionlab {

namespace {

constexpr int planar = 2;

void normalize_sign(std::vector<double>& v) {
    std::size_t arg = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (std::abs(v[i]) > std::abs(v[arg])) arg = i;
    if (!v.empty() && v[arg] < 0)
        for (double& x : v) x = -x;
}

std::string format_number(double x) {
    std::ostringstream out;
    out.precision(6);
    out << x;
    return out.str();
}

}  // namespace

void BoundaryCondition::validate() const {
    if (kind == BoundaryKind::robin && !(b > 0 && std::isfinite(b)))
        throw InvalidParameter("Robin parameter b must be positive and finite");
}

std::string BoundaryCondition::describe() const {
    return kind == BoundaryKind::dirichlet ? std::string("dirichlet") : "robin(b=" + format_number(b) + ")";
}

SparseMatrix torsion_operator(const FemSystem& fem, BoundaryCondition bc) {
    bc.validate();
    if (bc.is_robin()) return fem.stiffness.added(fem.boundary_mass, bc.b);
    return fem.interior.restrict_matrix(fem.stiffness);
}

SpectralSet spectrum(const FemSystem& fem, BoundaryCondition bc, int k, const EigenOptions& options) {
    const SparseMatrix a = torsion_operator(fem, bc);
    const SparseMatrix m = bc.is_robin() ? fem.mass : fem.interior.restrict_matrix(fem.mass);
    EigenResult result = smallest_eigenpairs(a, m, k, options);
    SpectralSet out;
    out.bc = bc;
    out.mesh = fem.mesh;
    out.cluster_warning = result.cluster_warning;
    for (EigenPair& pair : result.pairs) {
        if (!bc.is_robin()) pair.vector = fem.interior.extend_vector(pair.vector);
        normalize_sign(pair.vector);
        out.pairs.push_back(std::move(pair));
    }
    return out;
}

SpectralSet robin_spectrum(const FemSystem& fem, double b, int k, const EigenOptions& options) {
    return spectrum(fem, BoundaryCondition::robin(b), k, options);
}

SpectralSet robin_spectrum(const MeshPtr& mesh, double b, int k, const EigenOptions& options) {
    return robin_spectrum(FemSystem(mesh), b, k, options);
}

std::vector<double> SpectralSet::eigenvalues() const {
    std::vector<double> out;
    out.reserve(pairs.size());
    for (const auto& p : pairs) out.push_back(p.eigenvalue);
    return out;
}

DiscreteField SpectralSet::eigenfunction(std::size_t j) const { return DiscreteField(mesh, pairs.at(j).vector); }

TorsionSolution solve_torsion(const FemSystem& fem, BoundaryCondition bc, const TorsionOptions& options) {
    bc.validate();
    const SparseMatrix a = torsion_operator(fem, bc);
    std::vector<double> rhs = bc.is_robin() ? fem.load : fem.interior.restrict_vector(fem.load);
    for (double& r : rhs) r *= options.load_scale;
    CgResult cg = cg_solve(a, rhs, options.cg_tol);
    std::vector<double> u = bc.is_robin() ? std::move(cg.solution) : fem.interior.extend_vector(cg.solution);

    TorsionSolution sol;
    sol.bc = bc;
    sol.cg = cg.stats;
    sol.sup_norm = max_value(u);
    sol.l1_norm = integral(fem, u);
    sol.field = DiscreteField(fem.mesh, std::move(u));
    sol.lambda1 = spectrum(fem, bc, 1, options.eigen).pairs.at(0).eigenvalue;
    return sol;
}

TorsionSolution solve_torsion(const MeshPtr& mesh, BoundaryCondition bc, const TorsionOptions& options) {
    return solve_torsion(FemSystem(mesh), bc, options);
}

double torsional_rigidity(const TorsionSolution& solution) {
    const auto w = lumped_weights(*solution.field.mesh);
    return dot(w, solution.field.values);
}

FieldInequalities evaluate_inequalities(const FemSystem& fem, double b, double lambda1, std::span<const double> u) {
    BoundaryCondition::robin(b).validate();
    const TriangleMesh& mesh = *fem.mesh;
    if (u.size() != mesh.node_count()) throw InvalidParameter("field length differs from node count");
    const int m = planar;
    const double c = isoperimetric_constant(m);
    const NashConstant nash = nash_constant(m, b, lambda1);

    const double b_form = fem.boundary_mass.quadratic_form(u);
    const double q = fem.stiffness.quadratic_form(u) + b * b_form;
    const double l2 = std::sqrt(std::max(0.0, fem.mass.quadratic_form(u)));
    const double l1 = abs_integral(mesh, u);
    const double ls = lumped_lp_norm(fem.lumped, u, 2.0 * m / (m - 1.0));

    const auto grads = element_gradients(mesh, u);
    double weighted = 0.0;
    for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
        const auto& tri = mesh.triangles[t];
        const double area = mesh.triangle_area(t);
        const double va = u[static_cast<std::size_t>(tri[0])];
        const double vb = u[static_cast<std::size_t>(tri[1])];
        const double vc = u[static_cast<std::size_t>(tri[2])];
        const double abs_u = triangle_positive_part(area, va, vb, vc) + triangle_positive_part(area, -va, -vb, -vc);
        weighted += norm(grads[t]) * abs_u;
    }

    FieldInequalities out;
    out.nash_lhs = std::pow(l2, 2.0 + 2.0 / m);
    const double nash_tail = q * std::pow(l1, 2.0 / m);
    out.nash_general_rhs = nash.general * nash_tail;
    if (nash.strong) out.nash_strong_rhs = *nash.strong * nash_tail;
    out.sobolev_lhs = ls * ls;
    out.trace_sobolev_rhs = c * (2.0 * weighted + b_form);
    out.robin_sobolev_rhs = c * (1.0 / b + b / lambda1) * q;
    if (nash.strong) out.robin_sobolev_strong_rhs = 2.0 * c / std::sqrt(lambda1) * q;
    return out;
}

InequalityMargins functional_inequality_margins(const FemSystem& fem, double b, double lambda1, int n_samples,
                                                std::uint64_t seed) {
    if (!(lambda1 > 0)) throw InvalidParameter("functional inequalities need lambda_1 > 0");
    if (n_samples < 1) throw InvalidParameter("need at least one sample");
    BoundaryCondition::robin(b).validate();
    const std::size_t n = fem.mesh->node_count();

    InequalityMargins out;
    out.isoperimetric = isoperimetric_constant(planar);
    out.nash = nash_constant(planar, b, lambda1);
    if (out.nash.strong) {
        out.nash_strong.emplace();
        out.robin_sobolev_strong.emplace();
    }

    auto record = [&](const std::vector<double>& u) {
        const FieldInequalities f = evaluate_inequalities(fem, b, lambda1, u);
        out.nash_general.update(f.nash_lhs, f.nash_general_rhs);
        if (f.nash_strong_rhs) out.nash_strong->update(f.nash_lhs, *f.nash_strong_rhs);
        out.trace_sobolev.update(f.sobolev_lhs, f.trace_sobolev_rhs);
        out.robin_sobolev.update(f.sobolev_lhs, f.robin_sobolev_rhs);
        if (f.robin_sobolev_strong_rhs) out.robin_sobolev_strong->update(f.sobolev_lhs, *f.robin_sobolev_strong_rhs);
    };

    record(std::vector<double>(n, 1.0));
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    std::vector<double> u(n);
    while (out.samples < n_samples) {
        for (double& x : u) x = normal(rng);
        if (max_abs(u) == 0.0) continue;
        record(u);
        ++out.samples;
    }
    return out;
}

std::vector<double> heat_trace_partial_sum(const SpectralSet& spec, std::span<const double> t_grid) {
    if (spec.pairs.empty()) throw InvalidParameter("heat trace needs at least one eigenvalue");
    std::vector<double> out;
    out.reserve(t_grid.size());
    for (double t : t_grid) {
        if (!(t > 0)) throw InvalidParameter("heat trace times must be positive");
        double s = 0.0;
        for (const auto& p : spec.pairs) s += std::exp(-t * p.eigenvalue);
        out.push_back(s);
    }
    return out;
}

std::vector<BoundVerdict> sup_norm_verdicts(const TorsionSolution& torsion, double tolerance) {
    const int m = planar;
    const double lambda = torsion.lambda1;
    std::vector<BoundVerdict> out;
    if (torsion.bc.is_robin()) {
        const BoundPair bounds = robin_sup_bound(m, torsion.bc.b, lambda);
        const std::vector<std::pair<std::string, double>> inputs{
            {"m", m}, {"b", torsion.bc.b}, {"lambda1", lambda}, {"sup_norm", torsion.sup_norm}};
        out.push_back(make_verdict("robin sup norm lower bound", std::string(anchors::robin_sup), bounds.lower,
                                   torsion.sup_norm, tolerance, inputs));
        out.push_back(make_verdict("robin sup norm upper bound", std::string(anchors::robin_sup), torsion.sup_norm,
                                   bounds.upper, tolerance, inputs, std::string(natural_log_note)));
    } else {
        const BoundPair bounds = dirichlet_sup_bound(m, lambda);
        const std::vector<std::pair<std::string, double>> inputs{
            {"m", m}, {"lambda1", lambda}, {"sup_norm", torsion.sup_norm}};
        out.push_back(make_verdict("dirichlet sup norm lower bound", std::string(anchors::dirichlet_sup),
                                   bounds.lower, torsion.sup_norm, tolerance, inputs));
        out.push_back(make_verdict("dirichlet sup norm upper bound", std::string(anchors::dirichlet_sup),
                                   torsion.sup_norm, bounds.upper, tolerance, inputs, std::string(natural_log_note)));
    }
    return out;
}

std::vector<BoundVerdict> robin_eigen_verdicts(const FemSystem& fem, const TorsionSolution& torsion,
                                               const SpectralSet& spec, std::span<const double> t_grid) {
    if (!spec.bc.is_robin() || !torsion.bc.is_robin() || spec.bc.b != torsion.bc.b)
        throw InvalidParameter("eigenfunction bounds need Robin data with matching b");
    const int m = planar;
    const double b = spec.bc.b;
    const std::vector<double> lambdas = spec.eigenvalues();
    const HeatKernelConstants constants = HeatKernelConstants::make(m, b, lambdas.at(0));
    const double area = fem.measures.area;
    const std::vector<std::pair<std::string, double>> base{
        {"m", m}, {"b", b}, {"lambda1", lambdas[0]}, {"nash_constant", constants.nash_used}, {"area", area}};

    std::vector<BoundVerdict> out;
    const std::vector<double> traces = heat_trace_partial_sum(spec, t_grid);
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        const EigenBounds eb = eigen_bounds(constants, area, lambdas, t_grid[i]);
        auto inputs = base;
        inputs.emplace_back("t", t_grid[i]);
        inputs.emplace_back("eigenvalue_count", static_cast<double>(lambdas.size()));
        out.push_back(make_verdict("heat trace partial sum t=" + format_number(t_grid[i]),
                                   std::string(anchors::heat_trace), traces[i], eb.trace_rhs, 0.0, inputs));
    }

    const EigenBounds eb = eigen_bounds(constants, area, lambdas, 1.0);
    for (std::size_t j = 0; j < spec.pairs.size(); ++j) {
        auto inputs = base;
        inputs.emplace_back("j", static_cast<double>(j + 1));
        inputs.emplace_back("lambda_j", lambdas[j]);
        out.push_back(make_verdict("eigenfunction sup norm j=" + std::to_string(j + 1),
                                   std::string(anchors::eigenfunction_sup), max_abs(spec.pairs[j].vector),
                                   eb.eigenfunction_rhs[j], 0.0, inputs));
    }

    // largest nodal excess of the scaled eigenfunction over the torsion function
    const auto& phi = spec.pairs[0].vector;
    const auto& u = torsion.field.values;
    double excess = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < u.size(); ++i) excess = std::max(excess, eb.comparison_scale * phi[i] - u[i]);
    auto inputs = base;
    inputs.emplace_back("comparison_scale", eb.comparison_scale);
    out.push_back(make_verdict("torsion dominates scaled first eigenfunction", std::string(anchors::comparison),
                               excess, 1e-8, 0.0, inputs));
    return out;
}

std::vector<BoundVerdict> functional_inequality_verdicts(const InequalityMargins& mg, double b, double lambda1) {
    const std::vector<std::pair<std::string, double>> inputs{{"m", planar},
                                                             {"b", b},
                                                             {"lambda1", lambda1},
                                                             {"samples", static_cast<double>(mg.samples)},
                                                             {"isoperimetric_constant", mg.isoperimetric},
                                                             {"nash_general", mg.nash.general}};
    std::vector<BoundVerdict> out;
    auto add = [&](const char* name, std::string_view anchor, const WorstSample& w) {
        out.push_back(make_verdict(name, std::string(anchor), w.lhs, w.rhs, 0.0, inputs));
    };
    add("nash inequality, general constant", anchors::nash, mg.nash_general);
    if (mg.nash_strong) add("nash inequality, strong constant", anchors::nash, *mg.nash_strong);
    add("trace sobolev inequality", anchors::trace_sobolev, mg.trace_sobolev);
    add("robin sobolev inequality", anchors::robin_sobolev, mg.robin_sobolev);
    if (mg.robin_sobolev_strong) add("robin sobolev inequality, strong form", anchors::robin_sobolev_strong,
                                     *mg.robin_sobolev_strong);
    return out;
}

}  // namespace torsionlab
