#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "torsionlab/sparse.hpp"

namespace torsionlab {

struct CgStats {
    int iterations = 0;
    double relative_residual = 0.0;
    bool converged = false;
};

struct CgResult {
    std::vector<double> solution;
    CgStats stats;
};

/// Jacobi-preconditioned conjugate gradients for a symmetric positive
/// definite matrix. `max_iter <= 0` selects 10 n + 100. Throws NoConvergence
/// when the relative residual stays above `tol`.
CgResult cg_solve(const SparseMatrix& a, std::span<const double> rhs, double tol = 1e-10, int max_iter = 0,
                  std::span<const double> initial = {});

/// Sparse LDL^T factorization of a symmetric positive definite matrix.
/// `factor` may be called repeatedly for matrices with the same pattern.
class DirectSolver {
public:
    DirectSolver();
    ~DirectSolver();
    DirectSolver(DirectSolver&&) noexcept;
    DirectSolver& operator=(DirectSolver&&) noexcept;

    /// Throws NoConvergence if the matrix is not numerically positive definite.
    void factor(const SparseMatrix& a);
    std::vector<double> solve(std::span<const double> rhs) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

struct EigenPair {
    double eigenvalue = 0.0;
    std::vector<double> vector;  ///< M-normalized
    double residual = 0.0;       ///< |(A - lambda M) x| / |M x|
};

struct EigenOptions {
    double tol = 1e-8;
    int max_iter = 1000;
    std::uint64_t seed = 0x5eed;
    /// Residual below which the shift moves to the current Rayleigh quotient.
    double shift_switch = 1e-3;
};

struct EigenResult {
    std::vector<EigenPair> pairs;
    bool cluster_warning = false;
    int iterations = 0;
    int factorizations = 0;
};

/// Smallest k eigenpairs of A x = lambda M x in nondecreasing order. Block
/// shifted inverse iteration with Rayleigh-Ritz, locking of converged pairs
/// and M-orthogonal deflation against them. The shift starts at 0 and moves
/// to the Rayleigh quotient of the lowest unconverged pair once its residual
/// drops below `shift_switch`. Throws NoConvergence.
EigenResult smallest_eigenpairs(const SparseMatrix& a, const SparseMatrix& m, int k, const EigenOptions& options = {});

}  // namespace torsionlab
