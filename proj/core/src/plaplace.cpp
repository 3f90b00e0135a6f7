#include "torsionlab/plaplace.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <boost/math/tools/roots.hpp>
#include <boost/numeric/odeint.hpp>

#include "torsionlab/errors.hpp"
#include "torsionlab/solvers.hpp"

namespace torsionlab {

namespace {

constexpr int planar = 2;

void require_p(double p) {
    if (!(p > 1.0) || !std::isfinite(p)) throw InvalidParameter("p must be a finite number greater than 1");
}

double signed_power(double x, double e) { return std::copysign(std::pow(std::abs(x), e), x); }

double regularized_power(double s, double eps, double p) {
    return eps == 0.0 ? std::pow(std::abs(s), p) : std::pow(s * s + eps * eps, 0.5 * p);
}

/// Discrete p-energy and Picard linearization for one (mesh, p, bc).
class PProblem {
public:
    PProblem(const FemSystem& fem, double p, BoundaryCondition bc, double gradient_eps, double value_eps)
        : fem_(fem), mesh_(*fem.mesh), p_(p), bc_(bc), eg_(gradient_eps), ev_(value_eps) {
        require_p(p);
        bc.validate();
        if (bc.is_robin()) boundary_weights_ = boundary_point_weights(mesh_);
    }

    double form(std::span<const double> v, double eg, double ev) const {
        const auto grads = element_gradients(mesh_, v);
        double s = 0.0;
        for (std::size_t t = 0; t < grads.size(); ++t) s += mesh_.triangle_area(t) * regularized_power(norm(grads[t]), eg, p_);
        if (bc_.is_robin()) {
            const auto values = boundary_point_values(mesh_, v);
            double boundary = 0.0;
            for (std::size_t q = 0; q < values.size(); ++q)
                boundary += boundary_weights_[q] * regularized_power(values[q], ev, p_);
            s += bc_.b * boundary;
        }
        return s;
    }

    double energy(std::span<const double> v, std::span<const double> rhs) const {
        return form(v, eg_, ev_) - p_ * dot(rhs, v);
    }

    double unregularized_energy(std::span<const double> v, std::span<const double> rhs) const {
        return form(v, 0.0, 0.0) - p_ * dot(rhs, v);
    }

    /// Solution x of A(v) x = rhs with the Picard coefficients frozen at v.
    std::vector<double> picard_solve(std::span<const double> v, std::span<const double> rhs) {
        const auto grads = element_gradients(mesh_, v);
        std::vector<double> coeff(grads.size());
        for (std::size_t t = 0; t < grads.size(); ++t) {
            const double g = norm(grads[t]);
            coeff[t] = p_ == 2.0 ? 1.0 : std::pow(g * g + eg_ * eg_, 0.5 * (p_ - 2.0));
        }
        SparseMatrix a = assemble_weighted_stiffness(mesh_, coeff);
        if (bc_.is_robin()) {
            auto values = boundary_point_values(mesh_, v);
            for (double& x : values) x = p_ == 2.0 ? 1.0 : std::pow(x * x + ev_ * ev_, 0.5 * (p_ - 2.0));
            a = a.added(assemble_weighted_boundary_mass(mesh_, values), bc_.b);
            solver_.factor(a);
            return solver_.solve(rhs);
        }
        solver_.factor(fem_.interior.restrict_matrix(a));
        const auto x = solver_.solve(fem_.interior.restrict_vector(rhs));
        return fem_.interior.extend_vector(x);
    }

    /// Newton step for the regularized energy: H d = rhs - A(v) v with the
    /// Hessian H of (1/p) E at v.
    std::vector<double> newton_step(std::span<const double> v, std::span<const double> rhs) {
        std::vector<Triplet> trip;
        trip.reserve(9 * mesh_.triangle_count());
        std::vector<double> residual(rhs.begin(), rhs.end());
        for (std::size_t t = 0; t < mesh_.triangle_count(); ++t) {
            const auto grads = hat_gradients(mesh_, t);
            const auto& tri = mesh_.triangles[t];
            Vec2 g{};
            for (int i = 0; i < 3; ++i) g = g + v[static_cast<std::size_t>(tri[i])] * grads[i];
            const double s2 = dot(g, g) + eg_ * eg_;
            const double a = std::pow(s2, 0.5 * (p_ - 2.0));
            const double c = a * (p_ - 2.0) / s2;
            const double area = mesh_.triangle_area(t);
            for (int i = 0; i < 3; ++i) {
                const double gi = dot(g, grads[i]);
                residual[static_cast<std::size_t>(tri[i])] -= area * a * gi;
                for (int j = 0; j < 3; ++j) {
                    const double h = area * (a * dot(grads[i], grads[j]) + c * gi * dot(g, grads[j]));
                    trip.push_back({tri[i], tri[j], h});
                }
            }
        }
        if (bc_.is_robin()) {
            const auto values = boundary_point_values(mesh_, v);
            for (std::size_t k = 0; k < mesh_.boundary_edges.size(); ++k) {
                const BoundaryEdge& e = mesh_.boundary_edges[k];
                for (std::size_t q = 0; q < 2; ++q) {
                    const double x = values[2 * k + q];
                    const double s2 = x * x + ev_ * ev_;
                    const double beta = std::pow(s2, 0.5 * (p_ - 2.0));
                    const double w = bc_.b * boundary_weights_[2 * k + q];
                    const double curvature = w * beta * ((p_ - 1.0) * x * x + ev_ * ev_) / s2;
                    const double sa = 1.0 - boundary_gauss_points[q];
                    const double sb = boundary_gauss_points[q];
                    residual[static_cast<std::size_t>(e.a)] -= w * beta * x * sa;
                    residual[static_cast<std::size_t>(e.b)] -= w * beta * x * sb;
                    trip.push_back({e.a, e.a, curvature * sa * sa});
                    trip.push_back({e.a, e.b, curvature * sa * sb});
                    trip.push_back({e.b, e.a, curvature * sa * sb});
                    trip.push_back({e.b, e.b, curvature * sb * sb});
                }
            }
        }
        const std::size_t n = mesh_.node_count();
        const SparseMatrix h = SparseMatrix::from_triplets(n, n, std::move(trip));
        if (bc_.is_robin()) {
            solver_.factor(h);
            return solver_.solve(residual);
        }
        solver_.factor(fem_.interior.restrict_matrix(h));
        return fem_.interior.extend_vector(solver_.solve(fem_.interior.restrict_vector(residual)));
    }

    /// Linear (p = 2) solution for the same data, used to seed the iteration.
    std::vector<double> linear_solve(std::span<const double> rhs) {
        if (bc_.is_robin()) {
            solver_.factor(fem_.stiffness.added(fem_.boundary_mass, bc_.b));
            return solver_.solve(rhs);
        }
        solver_.factor(fem_.interior.restrict_matrix(fem_.stiffness));
        return fem_.interior.extend_vector(solver_.solve(fem_.interior.restrict_vector(rhs)));
    }

    /// Scale s minimizing the unregularized energy along s v.
    std::vector<double> optimally_scaled(std::vector<double> v, std::span<const double> rhs) const {
        const double a = form(v, 0.0, 0.0);
        const double l = dot(rhs, v);
        if (a > 0 && l > 0) {
            const double s = std::pow(l / a, 1.0 / (p_ - 1.0));
            for (double& x : v) x *= s;
        }
        return v;
    }

    double p() const { return p_; }

private:
    const FemSystem& fem_;
    const TriangleMesh& mesh_;
    double p_;
    BoundaryCondition bc_;
    double eg_;
    double ev_;
    std::vector<double> boundary_weights_;
    DirectSolver solver_;
};

struct MinimizeResult {
    std::vector<double> v;
    std::vector<double> history;
    int iterations = 0;
    bool converged = false;
};

enum class StepKind { picard, newton };

MinimizeResult minimize(PProblem& problem, std::vector<double> v, std::span<const double> rhs,
                        const PSolveOptions& options, StepKind kind = StepKind::picard) {
    MinimizeResult out;
    double e = problem.energy(v, rhs);
    out.history.push_back(e);
    for (int it = 0; it < options.max_iter; ++it) {
        std::vector<double> d;
        if (kind == StepKind::newton) {
            d = problem.newton_step(v, rhs);
        } else {
            d = problem.picard_solve(v, rhs);
            for (std::size_t i = 0; i < v.size(); ++i) d[i] -= v[i];
        }

        std::vector<double> trial(v.size());
        double alpha = 1.0;
        double e_trial = e;
        bool accepted = false;
        for (int halving = 0; halving < 40; ++halving, alpha *= 0.5) {
            for (std::size_t i = 0; i < v.size(); ++i) trial[i] = v[i] + alpha * d[i];
            e_trial = problem.energy(trial, rhs);
            if (e_trial <= e) {
                accepted = true;
                break;
            }
        }
        out.iterations = it + 1;
        if (!accepted) {
            // no decrease representable along the step: stationary to rounding
            out.converged = true;
            break;
        }
        const double decrease = e - e_trial;
        v.swap(trial);
        e = e_trial;
        out.history.push_back(e);
        if (decrease <= options.tol * std::max(std::abs(e), std::numeric_limits<double>::min())) {
            out.converged = true;
            break;
        }
    }
    out.v = std::move(v);
    return out;
}

std::pair<double, double> regularization(const FemSystem& fem, double p, const PSolveOptions& options) {
    const double diam = fem.mesh->diameter();
    return {options.epsilon_scale * std::pow(diam, 1.0 / (p - 1.0)),
            options.epsilon_scale * std::pow(diam, p / (p - 1.0))};
}

}  // namespace

double p_energy(const FemSystem& fem, double p, BoundaryCondition bc, std::span<const double> v,
                double gradient_epsilon, double value_epsilon) {
    if (v.size() != fem.mesh->node_count()) throw InvalidParameter("field length differs from node count");
    const PProblem problem(fem, p, bc, gradient_epsilon, value_epsilon);
    return problem.energy(v, fem.load);
}

PTorsionSolution solve_p_torsion(const FemSystem& fem, double p, BoundaryCondition bc, const PSolveOptions& options) {
    require_p(p);
    bc.validate();
    if (!(options.tol > 0)) throw InvalidParameter("p-torsion tolerance must be positive");
    const auto [eg, ev] = regularization(fem, p, options);
    PProblem problem(fem, p, bc, eg, ev);
    std::vector<double> start = problem.optimally_scaled(problem.linear_solve(fem.load), fem.load);
    MinimizeResult r = minimize(problem, std::move(start), fem.load, options);

    PTorsionSolution sol;
    sol.p = p;
    sol.bc = bc;
    sol.energy = problem.unregularized_energy(r.v, fem.load);
    sol.sup_norm = max_value(r.v);
    sol.l1_norm = integral(fem, r.v);
    sol.iterations = r.iterations;
    sol.converged = r.converged;
    sol.gradient_epsilon = eg;
    sol.value_epsilon = ev;
    sol.energy_history = std::move(r.history);
    sol.field = DiscreteField(fem.mesh, std::move(r.v));
    return sol;
}

PTorsionSolution solve_p_torsion(const MeshPtr& mesh, double p, BoundaryCondition bc, const PSolveOptions& options) {
    return solve_p_torsion(FemSystem(mesh), p, bc, options);
}

double p_mass_norm(const FemSystem& fem, double p, std::span<const double> v) {
    require_p(p);
    if (p == 2.0) return std::sqrt(std::max(0.0, fem.mass.quadratic_form(v)));
    return lumped_lp_norm(fem.lumped, v, p);
}

double p_rayleigh_quotient(const FemSystem& fem, double p, BoundaryCondition bc, std::span<const double> v) {
    const PProblem problem(fem, p, bc, 0.0, 0.0);
    const double denom = std::pow(p_mass_norm(fem, p, v), p);
    if (!(denom > 0)) throw InvalidParameter("Rayleigh quotient of the zero field");
    return problem.form(v, 0.0, 0.0) / denom;
}

PEigenResult p_eigenvalue_2d(const FemSystem& fem, double p, BoundaryCondition bc, double tol, int max_iter) {
    require_p(p);
    bc.validate();
    if (!(tol > 0) || max_iter < 1) throw InvalidParameter("p-eigenvalue needs tol > 0 and max_iter >= 1");
    PSolveOptions inner;
    inner.tol = 1e-13;
    const auto [eg, ev] = regularization(fem, p, inner);
    PProblem problem(fem, p, bc, eg, ev);

    auto normalized = [&](std::vector<double> v) {
        for (double& x : v) x = std::max(x, 0.0);
        const double n = p_mass_norm(fem, p, v);
        if (!(n > 0)) throw NoConvergence("p-eigenvalue iteration collapsed to zero");
        for (double& x : v) x /= n;
        return v;
    };
    auto source = [&](const std::vector<double>& u) {
        if (p == 2.0) return fem.mass * u;
        std::vector<double> s(u.size());
        for (std::size_t i = 0; i < u.size(); ++i) s[i] = fem.lumped[i] * signed_power(u[i], p - 1.0);
        return s;
    };

    std::vector<double> u = normalized(problem.linear_solve(fem.load));
    PEigenResult out;
    double rq = p_rayleigh_quotient(fem, p, bc, u);
    out.rayleigh_history.push_back(rq);
    std::vector<double> best = u;
    double best_rq = rq;
    for (int it = 0; it < max_iter; ++it) {
        const std::vector<double> rhs = source(u);
        MinimizeResult r = minimize(problem, problem.optimally_scaled(u, rhs), rhs, inner, StepKind::newton);
        u = normalized(std::move(r.v));
        const double next = p_rayleigh_quotient(fem, p, bc, u);
        out.rayleigh_history.push_back(next);
        out.iterations = it + 1;
        if (next < best_rq) {
            best_rq = next;
            best = u;
        }
        const bool small_change = std::abs(rq - next) <= tol * next;
        rq = next;
        if (small_change) {
            out.converged = true;
            break;
        }
    }
    out.lambda = best_rq;
    out.field = DiscreteField(fem.mesh, std::move(best));
    return out;
}

namespace {

/// Radial shooting in the variables u and chi = |u'|^{p-2} u' / lambda, so
/// that every quantity stays of order one for small lambda.
struct RadialShot {
    double u_end = 0.0;
    double chi_end = 0.0;
    bool sign_change = false;
};

RadialShot shoot(int m, double p, double radius, double lambda) {
    namespace odeint = boost::numeric::odeint;
    using State = std::array<double, 2>;
    const double q = 1.0 / (p - 1.0);
    const double lambda_q = std::pow(lambda, q);
    auto rhs = [&](const State& x, State& dx, double r) {
        dx[0] = lambda_q * signed_power(x[1], q);
        dx[1] = -(m - 1.0) / r * x[1] - signed_power(x[0], p - 1.0);
    };
    const double r0 = 1e-7 * radius;
    // series at the origin: chi ~ -r/m, u ~ 1 - (p-1)/p (lambda/m)^{1/(p-1)} r^{p/(p-1)}
    State x{1.0 - (p - 1.0) / p * std::pow(lambda / m, q) * std::pow(r0, p * q), -r0 / m};
    RadialShot shot;
    auto stepper = odeint::make_controlled<odeint::runge_kutta_dopri5<State>>(1e-12, 1e-12);
    odeint::integrate_adaptive(stepper, rhs, x, r0, radius, 1e-3 * radius, [&](const State& s, double) {
        if (s[0] <= 0.0) shot.sign_change = true;
    });
    shot.u_end = x[0];
    shot.chi_end = x[1];
    if (x[0] <= 0.0) shot.sign_change = true;
    return shot;
}

}  // namespace

double radial_p_eigenvalue(int m, double p, double radius, BoundaryCondition bc, double rel_tol) {
    if (m < 2) throw InvalidParameter("dimension m must be at least 2");
    require_p(p);
    if (!(radius > 0)) throw InvalidParameter("radius must be positive");
    if (!(rel_tol > 0)) throw InvalidParameter("tolerance must be positive");
    bc.validate();

    // lambda is too large when the profile changes sign, or (Robin) when the
    // outward flux exceeds what the boundary condition allows
    auto too_large = [&](double lambda) {
        if (lambda <= 0.0) return false;
        const RadialShot s = shoot(m, p, radius, lambda);
        if (s.sign_change) return true;
        if (!bc.is_robin()) return false;
        return lambda * -s.chi_end > bc.b * std::pow(s.u_end, p - 1.0);
    };

    double hi;
    if (bc.is_robin()) {
        // the constant test function bounds the eigenvalue by m b / R
        hi = m * bc.b / radius * (1.0 + 1e-9);
    } else {
        hi = std::pow(radius, -p);
        int doublings = 0;
        while (!too_large(hi)) {
            hi *= 2.0;
            if (++doublings > 200) throw NoConvergence("radial eigenvalue: no upper bracket found");
        }
    }
    if (!too_large(hi)) {
        // numerical slack at the constant-function bound
        hi *= 1.0 + 1e-6;
        if (!too_large(hi)) throw NoConvergence("radial eigenvalue: upper bracket " + std::to_string(hi) + " not valid");
    }
    auto sign = [&](double lambda) { return too_large(lambda) ? 1.0 : -1.0; };
    auto done = [&](double a, double b) { return std::abs(b - a) <= rel_tol * std::max(std::abs(a), std::abs(b)); };
    const auto bracket = boost::math::tools::bisect(sign, 0.0, hi, done);
    return 0.5 * (bracket.first + bracket.second);
}

LevelSetProfile levelset_profile(const DiscreteField& field, std::span<const double> fractions) {
    if (!field.mesh) throw InvalidParameter("level-set profile needs a mesh");
    for (std::size_t k = 0; k < fractions.size(); ++k)
        if (!(fractions[k] >= 0.0 && fractions[k] <= 1.0) || (k > 0 && !(fractions[k] > fractions[k - 1])))
            throw InvalidParameter("level fractions must increase within [0, 1]");
    const TriangleMesh& mesh = *field.mesh;
    const auto& u = field.values;
    LevelSetProfile out;
    out.m = planar;
    out.sup_norm = std::max(0.0, max_value(u));
    for (std::size_t t = 0; t < mesh.triangle_count(); ++t) out.area += mesh.triangle_area(t);

    for (double fraction : fractions) {
        const double level = fraction == 1.0 ? out.sup_norm : out.sup_norm * fraction;
        double measure = 0.0;
        double f = 0.0;
        for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
            const auto& tri = mesh.triangles[t];
            const double area = mesh.triangle_area(t);
            const double a = u[static_cast<std::size_t>(tri[0])] - level;
            const double b = u[static_cast<std::size_t>(tri[1])] - level;
            const double c = u[static_cast<std::size_t>(tri[2])] - level;
            measure += triangle_positive_area(area, a, b, c);
            f += triangle_positive_part(area, a, b, c);
        }
        out.t_grid.push_back(level);
        out.level_measure.push_back(measure);
        out.f_values.push_back(f);
        out.h_values.push_back(measure > 0 ? std::pow(out.area / measure, 1.0 / out.m)
                                           : std::numeric_limits<double>::infinity());
    }
    return out;
}

LevelSetProfile levelset_profile(const DiscreteField& field, int n_levels) {
    if (n_levels < 16) throw InvalidParameter("level-set profile needs at least 16 levels");
    std::vector<double> fractions(static_cast<std::size_t>(n_levels) + 1);
    for (int k = 0; k <= n_levels; ++k) fractions[static_cast<std::size_t>(k)] = static_cast<double>(k) / n_levels;
    return levelset_profile(field, fractions);
}

LevelSetProfile levelset_profile(const PTorsionSolution& solution, int n_levels) {
    return levelset_profile(solution.field, n_levels);
}

double levelset_integrand(int m, double p, double b, double ball_radius, double h) {
    const double c1 = PConstants::make(m, p).c1;
    if (!std::isfinite(h)) return std::pow(m * b / ball_radius, c1);
    if (!(h >= 1.0 - 1e-12)) throw InvalidParameter("level-set rescale factor must be at least 1");
    const double scale = std::pow(h, p - 1.0);
    const double lambda = radial_p_eigenvalue(m, p, ball_radius, BoundaryCondition::robin(b / scale));
    return std::pow(scale * lambda, c1);
}

LevelsetIntegralCheck levelset_integral_check(const PTorsionSolution& solution, double lambda_robin, int n_levels,
                                              double tolerance, double grid_tol) {
    if (!solution.bc.is_robin()) throw InvalidParameter("level-set bound needs a Robin solution");
    if (!(lambda_robin > 0)) throw InvalidParameter("level-set bound needs a positive eigenvalue");
    const int m = planar;
    const double p = solution.p;
    const double b = solution.bc.b;
    if (n_levels < 16) throw InvalidParameter("level-set integral needs at least 16 intervals");
    // graded levels t = sup (1 - (1 - s)^2): near a ridge maximum |U_t| ~ (sup - t)^{1/2},
    // which is smooth in s
    const std::size_t n = 2 * static_cast<std::size_t>(n_levels);
    std::vector<double> s_grid(n + 1);
    std::vector<double> fractions(n + 1);
    for (std::size_t k = 0; k <= n; ++k) {
        s_grid[k] = static_cast<double>(k) / static_cast<double>(n);
        fractions[k] = k == n ? 1.0 : 1.0 - (1.0 - s_grid[k]) * (1.0 - s_grid[k]);
    }
    const LevelSetProfile fine = levelset_profile(solution.field, fractions);
    const double radius = std::sqrt(fine.area / std::numbers::pi);

    // integrand in s, including dt/ds = 2 sup (1 - s)
    std::vector<double> g(n + 1);
    for (std::size_t k = 0; k <= n; ++k)
        g[k] = levelset_integrand(m, p, b, radius, fine.h_values[k]) * 2.0 * fine.sup_norm * (1.0 - s_grid[k]);

    auto trapezoid = [&](std::size_t stride) {
        double sum = 0.0;
        for (std::size_t k = stride; k <= n; k += stride) sum += 0.5 * (g[k - stride] + g[k]) * (s_grid[k] - s_grid[k - stride]);
        return sum;
    };

    LevelsetIntegralCheck out;
    out.ball_radius = radius;
    out.lhs_coarse = trapezoid(2);
    out.lhs_fine = trapezoid(1);
    out.grid_change = out.lhs_fine > 0 ? std::abs(out.lhs_fine - out.lhs_coarse) / out.lhs_fine : 0.0;
    out.grid_independent = out.grid_change < grid_tol;

    const PConstants c = PConstants::make(m, p);
    const double rhs = c.c2 / std::pow(lambda_robin, c.c3);
    out.verdict = make_verdict("level-set integral bound", std::string(anchors::levelset_integral), out.lhs_fine,
                               rhs, tolerance,
                               {{"m", m},
                                {"p", p},
                                {"b", b},
                                {"lambda_robin", lambda_robin},
                                {"sup_norm", fine.sup_norm},
                                {"area", fine.area},
                                {"ball_radius", radius},
                                {"c1", c.c1},
                                {"c2", c.c2},
                                {"c3", c.c3},
                                {"intervals", 2.0 * n_levels},
                                {"lhs_coarse", out.lhs_coarse},
                                {"grid_change", out.grid_change}});
    if (!out.grid_independent) {
        out.verdict.satisfied = false;
        out.verdict.note = "t-grid refinement changed the integral by more than the grid tolerance";
    }
    return out;
}

CaccioppoliTerms caccioppoli_terms(const TriangleMesh& mesh, std::span<const double> w, std::span<const double> theta,
                                   double p, double c1) {
    require_p(p);
    if (w.size() != mesh.node_count() || theta.size() != mesh.node_count())
        throw InvalidParameter("field length differs from node count");
    CaccioppoliTerms out;
    out.c2 = caccioppoli_constant(p, c1);
    std::vector<double> product(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) product[i] = w[i] * theta[i];
    const auto grad_product = element_gradients(mesh, product);
    const auto grad_theta = element_gradients(mesh, theta);
    for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
        const double area = mesh.triangle_area(t);
        out.lhs += area * std::pow(norm(grad_product[t]), p);
        double w_mass = 0.0;
        double w_power = 0.0;
        for (int i : mesh.triangles[t]) {
            const auto n = static_cast<std::size_t>(i);
            w_mass += w[n] * std::pow(std::abs(theta[n]), p);
            w_power += std::pow(std::abs(w[n]), p);
        }
        out.mass_term += area / 3.0 * w_mass;
        out.cutoff_term += std::pow(norm(grad_theta[t]), p) * area / 3.0 * w_power;
    }
    return out;
}

BoundVerdict caccioppoli_check(const TriangleMesh& mesh, std::span<const double> w, std::span<const double> theta,
                               double p, double c1) {
    const CaccioppoliTerms c = caccioppoli_terms(mesh, w, theta, p, c1);
    return make_verdict("caccioppoli inequality", std::string(anchors::caccioppoli), c.lhs,
                        c1 * c.mass_term + c.c2 * c.cutoff_term, 0.0,
                        {{"p", p}, {"c1", c1}, {"c2", c.c2}, {"mass_term", c.mass_term}, {"cutoff_term", c.cutoff_term}});
}

CaccioppoliSweep caccioppoli_sweep(const TriangleMesh& mesh, std::span<const double> w, double p, double c1, int count,
                                   std::uint64_t seed) {
    if (count < 0) throw InvalidParameter("cutoff count must be nonnegative");
    Vec2 lo = mesh.nodes.front();
    Vec2 hi = lo;
    for (Vec2 v : mesh.nodes) {
        lo = {std::min(lo.x, v.x), std::min(lo.y, v.y)};
        hi = {std::max(hi.x, v.x), std::max(hi.y, v.y)};
    }
    const double diam = norm(hi - lo);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    CaccioppoliSweep out;
    out.cutoffs = count;
    double worst = std::numeric_limits<double>::infinity();
    std::vector<double> theta(mesh.node_count());
    for (int k = 0; k < count; ++k) {
        const Vec2 c{lo.x + (hi.x - lo.x) * unit(rng), lo.y + (hi.y - lo.y) * unit(rng)};
        const double r = diam * (0.05 + 0.35 * unit(rng));
        for (std::size_t i = 0; i < theta.size(); ++i)
            theta[i] = std::clamp((r - norm(mesh.nodes[i] - c)) / (0.5 * r), 0.0, 1.0);
        BoundVerdict v = caccioppoli_check(mesh, w, theta, p, c1);
        if (v.satisfied) ++out.satisfied;
        if (v.rhs <= 0.0) continue;
        ++out.nontrivial;
        const double rel = v.margin / v.rhs;
        if (rel < worst) {
            worst = rel;
            v.inputs.emplace_back("cutoff_centre_x", c.x);
            v.inputs.emplace_back("cutoff_centre_y", c.y);
            v.inputs.emplace_back("cutoff_radius", r);
            out.worst = std::move(v);
        }
    }
    if (out.nontrivial == 0) {
        out.worst = make_verdict("caccioppoli inequality", std::string(anchors::caccioppoli), 0.0, 0.0, 0.0, {{"p", p}, {"c1", c1}},
                                 "every cutoff vanished on the mesh");
    }
    out.worst.note = std::to_string(out.satisfied) + " of " + std::to_string(count) + " cutoffs satisfied";
    return out;
}

double dirichlet_p_ratio(const PTorsionSolution& solution, double lambda_p) {
    if (solution.bc.is_robin()) throw InvalidParameter("p-torsion ratio needs a Dirichlet solution");
    if (!(lambda_p > 0)) throw InvalidParameter("p-torsion ratio needs a positive eigenvalue");
    return solution.sup_norm * std::pow(lambda_p, 1.0 / (solution.p - 1.0));
}

std::vector<BoundVerdict> rigidity_verdicts(const PTorsionSolution& solution, const Measures& measures,
                                            double lambda_robin, double tolerance) {
    if (!solution.bc.is_robin()) throw InvalidParameter("rigidity sandwich needs a Robin solution");
    const BoundPair bounds =
        rigidity_bounds(planar, solution.p, solution.bc.b, measures.area, measures.boundary_length, lambda_robin);
    const std::vector<std::pair<std::string, double>> inputs{{"m", planar},
                                                             {"p", solution.p},
                                                             {"b", solution.bc.b},
                                                             {"area", measures.area},
                                                             {"perimeter", measures.boundary_length},
                                                             {"lambda_robin", lambda_robin},
                                                             {"rigidity", solution.l1_norm}};
    return {make_verdict("p-rigidity lower bound", std::string(anchors::rigidity_lower), bounds.lower,
                         solution.l1_norm, tolerance, inputs),
            make_verdict("p-rigidity upper bound", std::string(anchors::rigidity_upper), solution.l1_norm,
                         bounds.upper, tolerance, inputs)};
}

}  // namespace torsionlab
