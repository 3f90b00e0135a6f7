#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "torsionlab/bounds.hpp"
#include "torsionlab/fem.hpp"
#include "torsionlab/torsion_linear.hpp"

namespace torsionlab {

struct PSolveOptions {
    double tol = 1e-11;  ///< stop once the relative energy decrease falls below this
    int max_iter = 400;
    /// Regularization relative to the natural scales of the problem: the
    /// gradient floor is epsilon_scale * diam^{1/(p-1)} and the value floor
    /// epsilon_scale * diam^{p/(p-1)}.
    double epsilon_scale = 1e-8;
};

struct PTorsionSolution {
    DiscreteField field;
    double p = 2.0;
    BoundaryCondition bc;
    double energy = 0.0;  ///< unregularized energy at the returned iterate
    double sup_norm = 0.0;
    double l1_norm = 0.0;
    int iterations = 0;
    bool converged = false;
    double gradient_epsilon = 0.0;
    double value_epsilon = 0.0;
    std::vector<double> energy_history;  ///< regularized energy per accepted iterate
};

/// Discrete energy  sum_T |T| |grad v|^p + b sum_q w_q |v(x_q)|^p - p f^T v
/// with f = M 1, the boundary sum over the two-point Gauss rule and the
/// boundary term dropped for Dirichlet data. `epsilon` > 0 regularizes
/// |s|^p as (s^2 + eps^2)^{p/2} in both terms.
double p_energy(const FemSystem& fem, double p, BoundaryCondition bc, std::span<const double> v,
                double gradient_epsilon = 0.0, double value_epsilon = 0.0);

/// Minimizer of the discrete energy by Picard (Kacanov) iteration: each step
/// solves the linear problem with coefficients (|grad u_k|^2 + eps^2)^{(p-2)/2}
/// per triangle and (|u_k|^2 + eps^2)^{(p-2)/2} at the boundary Gauss points,
/// then backtracks along the step so that the energy never increases. Starts
/// from the linear torsion function scaled to minimize the energy along that
/// ray. Never throws on slow convergence; `converged` reports the outcome.
PTorsionSolution solve_p_torsion(const FemSystem& fem, double p, BoundaryCondition bc, const PSolveOptions& options = {});
PTorsionSolution solve_p_torsion(const MeshPtr& mesh, double p, BoundaryCondition bc, const PSolveOptions& options = {});

/// Discrete L^p norm used by the p-eigenvalue: consistent mass for p = 2,
/// vertex quadrature otherwise.
double p_mass_norm(const FemSystem& fem, double p, std::span<const double> v);

/// Rayleigh quotient (sum_T |T| |grad v|^p + b sum_q w_q |v_q|^p) / |v|_p^p.
double p_rayleigh_quotient(const FemSystem& fem, double p, BoundaryCondition bc, std::span<const double> v);

struct PEigenResult {
    double lambda = 0.0;
    DiscreteField field;  ///< nonnegative, unit p_mass_norm
    int iterations = 0;
    bool converged = false;
    std::vector<double> rayleigh_history;
};

/// First eigenvalue of the discrete p-Laplacian with Robin or Dirichlet data
/// by nonlinear inverse iteration: each step minimizes the energy with source
/// |u_k|^{p-2} u_k and renormalizes. Returns the best iterate with the flag
/// cleared when `tol` (relative change of the quotient) is not reached.
PEigenResult p_eigenvalue_2d(const FemSystem& fem, double p, BoundaryCondition bc, double tol = 1e-9,
                             int max_iter = 300);

/// First eigenvalue of the radial problem
/// -(r^{m-1} |u'|^{p-2} u')' = lambda r^{m-1} |u|^{p-2} u on (0, R),
/// u'(0) = 0 and |u'|^{p-2} u' + b |u|^{p-2} u = 0 (Robin) or u = 0
/// (Dirichlet) at R. Shooting from the origin with bisection on lambda to
/// `rel_tol`. Throws NoConvergence when no bracket is found.
double radial_p_eigenvalue(int m, double p, double radius, BoundaryCondition bc, double rel_tol = 1e-8);

struct LevelSetProfile {
    std::vector<double> t_grid;         ///< 0 = t_0 < ... < t_n = sup_norm
    std::vector<double> level_measure;  ///< |{u > t}|
    std::vector<double> f_values;       ///< integral of (u - t)^+
    std::vector<double> h_values;       ///< (|Omega| / |U_t|)^{1/m}, infinite where U_t is empty
    double area = 0.0;
    double sup_norm = 0.0;
    int m = 2;
};

/// Exact level-set areas and truncated integrals of a P1 field on a uniform
/// grid of `n_levels` intervals. Requires n_levels >= 16.
LevelSetProfile levelset_profile(const DiscreteField& field, int n_levels);
/// Same at the levels t = fraction * sup u for increasing fractions in [0, 1].
LevelSetProfile levelset_profile(const DiscreteField& field, std::span<const double> fractions);
LevelSetProfile levelset_profile(const PTorsionSolution& solution, int n_levels);

struct LevelsetIntegralCheck {
    BoundVerdict verdict;
    double lhs_coarse = 0.0;  ///< trapezoid value on n_levels graded intervals
    double lhs_fine = 0.0;    ///< same on 2 n_levels intervals, used in the verdict
    double grid_change = 0.0;
    bool grid_independent = false;
    double ball_radius = 0.0;
};

/// Integrand of the level-set bound at one t:
/// (h^{p-1} lambda(B, b / h^{p-1}))^{c1}, B the ball of the given radius.
/// For an empty level set (h infinite) the limit (m b / radius)^{c1} is used.
double levelset_integrand(int m, double p, double b, double ball_radius, double h);

/// Integral bound for a Robin p-torsion solution: the integrand over
/// [0, sup u] against c2 / lambda^{c3}. Levels are graded towards the
/// maximum, t = sup (1 - (1 - s)^2), and the trapezoid rule in s is evaluated
/// on n_levels and 2 n_levels intervals; the verdict uses the finer one and
/// is only marked satisfied when the two differ by less than `grid_tol`
/// relative.
LevelsetIntegralCheck levelset_integral_check(const PTorsionSolution& solution, double lambda_robin,
                                              int n_levels = 128, double tolerance = 0.0, double grid_tol = 5e-3);

struct CaccioppoliTerms {
    double lhs = 0.0;       ///< sum_T |T| |grad(w theta)|^p, product formed nodally
    double mass_term = 0.0; ///< integral of w |theta|^p (vertex rule)
    double cutoff_term = 0.0;  ///< sum_T |grad theta|^p times the vertex-rule integral of w^p over T
    double c2 = 0.0;
};

CaccioppoliTerms caccioppoli_terms(const TriangleMesh& mesh, std::span<const double> w, std::span<const double> theta,
                                   double p, double c1);

/// lhs <= c1 mass_term + c2 cutoff_term. Throws for c1 <= 2^{p-1}.
BoundVerdict caccioppoli_check(const TriangleMesh& mesh, std::span<const double> w, std::span<const double> theta,
                               double p, double c1);

struct CaccioppoliSweep {
    BoundVerdict worst;  ///< smallest relative margin among nontrivial cutoffs
    int cutoffs = 0;
    int nontrivial = 0;  ///< cutoffs with a nonzero right-hand side
    int satisfied = 0;
};

/// Caccioppoli check over `count` Lipschitz cutoffs
/// theta = clamp((r - |x - c|) / (r/2), 0, 1) with centres uniform in the
/// bounding box of the mesh and r uniform in [0.05, 0.4] times its diameter,
/// drawn from a generator seeded with `seed`.
CaccioppoliSweep caccioppoli_sweep(const TriangleMesh& mesh, std::span<const double> w, double p, double c1, int count,
                                   std::uint64_t seed);

/// sup w * lambda_p^{1/(p-1)} for a Dirichlet p-torsion solution.
double dirichlet_p_ratio(const PTorsionSolution& solution, double lambda_p);

/// Both sides of the p-rigidity sandwich with discrete area and perimeter.
std::vector<BoundVerdict> rigidity_verdicts(const PTorsionSolution& solution, const Measures& measures,
                                            double lambda_robin, double tolerance);

}  // namespace torsionlab
