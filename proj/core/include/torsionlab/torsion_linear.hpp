#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "torsionlab/bounds.hpp"
#include "torsionlab/fem.hpp"
#include "torsionlab/solvers.hpp"

namespace torsionlab {

enum class BoundaryKind { dirichlet, robin };

struct BoundaryCondition {
    BoundaryKind kind = BoundaryKind::dirichlet;
    double b = 0.0;  ///< Robin parameter, strictly positive

    static BoundaryCondition dirichlet() { return {BoundaryKind::dirichlet, 0.0}; }
    static BoundaryCondition robin(double b) { return {BoundaryKind::robin, b}; }

    bool is_robin() const { return kind == BoundaryKind::robin; }
    /// Throws InvalidParameter for a Robin condition with b <= 0.
    void validate() const;
    std::string describe() const;
};

struct TorsionSolution {
    DiscreteField field;
    double sup_norm = 0.0;  ///< largest nodal value
    double l1_norm = 0.0;   ///< 1^T M u, the torsional rigidity
    double lambda1 = 0.0;
    BoundaryCondition bc;
    CgStats cg;
};

struct TorsionOptions {
    double cg_tol = 1e-10;
    double load_scale = 1.0;  ///< solves -Delta u = load_scale
    EigenOptions eigen;
};

/// P1 torsion function: (K + bB) u = M 1 for Robin, K u = M 1 on the
/// interior nodes for Dirichlet. Also computes lambda_1 for the same
/// boundary condition.
TorsionSolution solve_torsion(const FemSystem& fem, BoundaryCondition bc, const TorsionOptions& options = {});
TorsionSolution solve_torsion(const MeshPtr& mesh, BoundaryCondition bc, const TorsionOptions& options = {});

/// Integral of the torsion field, recomputed from the nodal values.
double torsional_rigidity(const TorsionSolution& solution);

/// Eigenpairs with full-length nodal vectors, M-orthonormal, each sign
/// normalized so that its largest-magnitude entry is positive.
struct SpectralSet {
    BoundaryCondition bc;
    MeshPtr mesh;
    std::vector<EigenPair> pairs;
    bool cluster_warning = false;

    std::size_t count() const { return pairs.size(); }
    std::vector<double> eigenvalues() const;
    DiscreteField eigenfunction(std::size_t j) const;
};

/// First k eigenpairs of (K + bB) phi = lambda M phi.
SpectralSet robin_spectrum(const FemSystem& fem, double b, int k, const EigenOptions& options = {});
SpectralSet robin_spectrum(const MeshPtr& mesh, double b, int k, const EigenOptions& options = {});

/// First k eigenpairs for either boundary condition.
SpectralSet spectrum(const FemSystem& fem, BoundaryCondition bc, int k, const EigenOptions& options = {});

/// The operator K + bB (Robin) or K restricted to interior nodes (Dirichlet).
SparseMatrix torsion_operator(const FemSystem& fem, BoundaryCondition bc);

/// Sample with the smallest margin rhs - lhs for one inequality.
struct WorstSample {
    double margin = std::numeric_limits<double>::infinity();
    double lhs = 0.0;
    double rhs = 0.0;

    void update(double l, double r) {
        if (r - l < margin) {
            margin = r - l;
            lhs = l;
            rhs = r;
        }
    }
};

/// Both sides of every sampled inequality for one nodal field.
struct FieldInequalities {
    double nash_lhs = 0.0;  ///< |u|_2^{2+2/m}
    double nash_general_rhs = 0.0;
    std::optional<double> nash_strong_rhs;
    double sobolev_lhs = 0.0;  ///< |u|_{2m/(m-1)}^2
    double trace_sobolev_rhs = 0.0;
    double robin_sobolev_rhs = 0.0;
    std::optional<double> robin_sobolev_strong_rhs;
};

FieldInequalities evaluate_inequalities(const FemSystem& fem, double b, double lambda1, std::span<const double> u);

struct InequalityMargins {
    int samples = 0;  ///< random fields evaluated, plus one constant probe
    WorstSample nash_general;
    std::optional<WorstSample> nash_strong;  ///< present when b >= sqrt(lambda)
    WorstSample trace_sobolev;
    WorstSample robin_sobolev;
    std::optional<WorstSample> robin_sobolev_strong;
    NashConstant nash;
    double isoperimetric = 0.0;
};

/// Minimum margins (rhs - lhs) over `n_samples` standard normal nodal fields
/// drawn from a generator seeded with `seed`, together with the constant
/// field. Norms: L^2 by the consistent mass matrix, L^1 and the
/// |u||grad u| term exactly per triangle, L^{2m/(m-1)} by vertex quadrature.
InequalityMargins functional_inequality_margins(const FemSystem& fem, double b, double lambda1, int n_samples,
                                                std::uint64_t seed);

/// sum_{j <= k} exp(-t lambda_j) for each t.
std::vector<double> heat_trace_partial_sum(const SpectralSet& spectrum, std::span<const double> t_grid);

/// Verdicts for the heat-trace bound at each t, the eigenfunction sup bound
/// for each pair and the nodal torsion/eigenfunction comparison.
std::vector<BoundVerdict> robin_eigen_verdicts(const FemSystem& fem, const TorsionSolution& torsion,
                                               const SpectralSet& spectrum, std::span<const double> t_grid);

/// Lower and upper sup-norm verdicts for the torsion function (Dirichlet or
/// Robin form chosen from the solution's boundary condition).
std::vector<BoundVerdict> sup_norm_verdicts(const TorsionSolution& torsion, double tolerance);

/// One verdict per functional inequality (min margin over samples >= 0).
std::vector<BoundVerdict> functional_inequality_verdicts(const InequalityMargins& margins, double b, double lambda1);

}  // namespace torsionlab
