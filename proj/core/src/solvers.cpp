#include "torsionlab/solvers.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "torsionlab/errors.hpp"

namespace torsionlab {

CgResult cg_solve(const SparseMatrix& a, std::span<const double> rhs, double tol, int max_iter,
                  std::span<const double> initial) {
    const std::size_t n = a.rows();
    if (a.cols() != n || rhs.size() != n) throw InvalidParameter("cg_solve: dimension mismatch");
    if (!(tol > 0)) throw InvalidParameter("cg_solve: tolerance must be positive");
    if (max_iter <= 0) max_iter = static_cast<int>(10 * n + 100);

    CgResult result;
    result.solution.assign(n, 0.0);
    const double rhs_norm = norm2(rhs);
    if (rhs_norm == 0.0) {
        result.stats.converged = true;
        return result;
    }
    std::vector<double>& x = result.solution;
    if (!initial.empty()) {
        if (initial.size() != n) throw InvalidParameter("cg_solve: initial guess has wrong length");
        std::copy(initial.begin(), initial.end(), x.begin());
    }

    std::vector<double> inv_diag = a.diagonal();
    for (double& d : inv_diag) {
        if (!(d > 0)) throw InvalidParameter("cg_solve: matrix diagonal must be positive");
        d = 1.0 / d;
    }

    std::vector<double> r(n), z(n), p(n), ap(n);
    auto true_residual = [&] {
        a.multiply(x, ap);
        for (std::size_t i = 0; i < n; ++i) r[i] = rhs[i] - ap[i];
        return norm2(r) / rhs_norm;
    };
    auto restart = [&] {
        for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
        p = z;
        return dot(r, z);
    };

    double rel = true_residual();
    double rz = restart();
    int it = 0;
    while (true) {
        if (rel <= tol) {
            // guard against drift of the recursively updated residual
            rel = true_residual();
            if (rel <= tol) break;
            rz = restart();
        }
        if (it >= max_iter) break;
        a.multiply(p, ap);
        const double pap = dot(p, ap);
        if (!(pap > 0)) throw InvalidParameter("cg_solve: matrix is not positive definite");
        const double alpha = rz / pap;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
        const double rz_next = dot(r, z);
        const double beta = rz_next / rz;
        rz = rz_next;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
        ++it;
        rel = norm2(r) / rhs_norm;
    }
    result.stats.iterations = it;
    result.stats.relative_residual = rel;
    result.stats.converged = rel <= tol;
    if (!result.stats.converged) {
        std::ostringstream msg;
        msg << "conjugate gradients stopped after " << it << " iterations with relative residual " << rel;
        throw NoConvergence(msg.str());
    }
    return result;
}

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Eigen::MatrixXd;
using Eigen::VectorXd;

SpMat to_eigen(const SparseMatrix& a) {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(a.nnz());
    const auto offsets = a.row_offsets();
    const auto cols = a.col_indices();
    const auto vals = a.values();
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = offsets[i]; k < offsets[i + 1]; ++k)
            trip.emplace_back(static_cast<int>(i), cols[k], vals[k]);
    SpMat out(static_cast<Eigen::Index>(a.rows()), static_cast<Eigen::Index>(a.cols()));
    out.setFromTriplets(trip.begin(), trip.end());
    return out;
}

/// Basis of range(y) with B^T M B = I; numerically dependent directions are
/// dropped.
MatrixXd m_orthonormalize(const MatrixXd& y, const SpMat& m) {
    MatrixXd basis = y;
    for (int pass = 0; pass < 2; ++pass) {
        if (basis.cols() == 0) return basis;
        const MatrixXd mb = m * basis;
        MatrixXd gram = basis.transpose() * mb;
        gram = 0.5 * (gram + gram.transpose()).eval();
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(gram);
        const VectorXd& ev = es.eigenvalues();
        const double top = ev.maxCoeff();
        std::vector<Eigen::Index> keep;
        for (Eigen::Index j = ev.size() - 1; j >= 0; --j)
            if (ev(j) > 1e-13 * top) keep.push_back(j);
        MatrixXd transform(basis.cols(), static_cast<Eigen::Index>(keep.size()));
        for (std::size_t c = 0; c < keep.size(); ++c)
            transform.col(static_cast<Eigen::Index>(c)) = es.eigenvectors().col(keep[c]) / std::sqrt(ev(keep[c]));
        basis = basis * transform;
    }
    return basis;
}

void deflate(MatrixXd& y, const MatrixXd& q, const MatrixXd& mq) {
    if (q.cols() == 0) return;
    for (int pass = 0; pass < 2; ++pass) y -= q * (mq.transpose() * y);
}

class ShiftedFactor {
public:
    ShiftedFactor(const SpMat& a, const SpMat& m) : a_(a), m_(m) {
        scale_ = 0.0;
        for (Eigen::Index i = 0; i < a.rows(); ++i) {
            const double mi = m.coeff(i, i);
            if (mi > 0) scale_ = std::max(scale_, std::abs(a.coeff(i, i)) / mi);
        }
        if (scale_ == 0.0) scale_ = 1.0;
    }

    /// Factors A - sigma M, nudging the shift downward if the factorization
    /// breaks down. Returns the shift actually used.
    double factor(double sigma) {
        double nudge = 1e-10 * scale_;
        for (int attempt = 0; attempt < 40; ++attempt) {
            const SpMat shifted = a_ - sigma * m_;
            ldlt_.compute(shifted);
            if (ldlt_.info() == Eigen::Success) {
                const VectorXd d = ldlt_.vectorD();
                if (d.allFinite() && d.cwiseAbs().minCoeff() > 0) {
                    ++count_;
                    return sigma;
                }
            }
            sigma -= nudge;
            nudge *= 4.0;
        }
        throw NoConvergence("eigensolver: shifted matrix could not be factorized");
    }

    MatrixXd solve(const MatrixXd& rhs) const { return ldlt_.solve(rhs); }
    int count() const { return count_; }

private:
    const SpMat& a_;
    const SpMat& m_;
    double scale_ = 1.0;
    int count_ = 0;
    Eigen::SimplicialLDLT<SpMat, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt_;
};

}  // namespace

struct DirectSolver::Impl {
    Eigen::SimplicialLDLT<SpMat, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt;
    std::size_t n = 0;
    std::size_t nnz = 0;
    bool analyzed = false;
};

DirectSolver::DirectSolver() : impl_(std::make_unique<Impl>()) {}
DirectSolver::~DirectSolver() = default;
DirectSolver::DirectSolver(DirectSolver&&) noexcept = default;
DirectSolver& DirectSolver::operator=(DirectSolver&&) noexcept = default;

void DirectSolver::factor(const SparseMatrix& a) {
    if (a.rows() != a.cols()) throw InvalidParameter("direct solve needs a square matrix");
    const SpMat e = to_eigen(a);
    if (!impl_->analyzed || impl_->n != a.rows() || impl_->nnz != a.nnz()) {
        impl_->ldlt.analyzePattern(e);
        impl_->n = a.rows();
        impl_->nnz = a.nnz();
        impl_->analyzed = true;
    }
    impl_->ldlt.factorize(e);
    if (impl_->ldlt.info() != Eigen::Success || !(impl_->ldlt.vectorD().minCoeff() > 0))
        throw NoConvergence("direct solve: matrix is not positive definite");
}

std::vector<double> DirectSolver::solve(std::span<const double> rhs) const {
    if (!impl_->analyzed) throw InvalidParameter("direct solve before factorization");
    if (rhs.size() != impl_->n) throw InvalidParameter("right-hand side length differs from matrix size");
    const Eigen::Map<const VectorXd> b(rhs.data(), static_cast<Eigen::Index>(rhs.size()));
    const VectorXd x = impl_->ldlt.solve(b);
    return {x.data(), x.data() + x.size()};
}

EigenResult smallest_eigenpairs(const SparseMatrix& a_in, const SparseMatrix& m_in, int k,
                                const EigenOptions& options) {
    const auto n = static_cast<Eigen::Index>(a_in.rows());
    if (a_in.cols() != a_in.rows() || m_in.rows() != a_in.rows() || m_in.cols() != a_in.rows())
        throw InvalidParameter("eigensolver: dimension mismatch");
    if (k < 1 || k > n) throw InvalidParameter("eigensolver: need 1 <= k <= n");
    if (!(options.tol > 0)) throw InvalidParameter("eigensolver: tolerance must be positive");

    const SpMat a = to_eigen(a_in);
    const SpMat m = to_eigen(m_in);
    const Eigen::Index block = std::min<Eigen::Index>(n, k + std::max(k, 8));

    std::mt19937_64 rng(options.seed);
    std::normal_distribution<double> normal;
    auto random_block = [&](Eigen::Index rows, Eigen::Index cols) {
        MatrixXd r(rows, cols);
        for (Eigen::Index j = 0; j < cols; ++j)
            for (Eigen::Index i = 0; i < rows; ++i) r(i, j) = normal(rng);
        return r;
    };

    ShiftedFactor factor(a, m);
    double sigma = factor.factor(0.0);
    Eigen::Index shift_target = -1;

    MatrixXd q(n, 0), mq(n, 0);
    std::vector<double> locked_values, locked_residuals;
    MatrixXd x = random_block(n, block);

    EigenResult result;
    int it = 0;
    for (; it < options.max_iter && q.cols() < k; ++it) {
        const Eigen::Index active = std::min<Eigen::Index>(block, n - q.cols());
        if (x.cols() < active) {
            MatrixXd grown(n, active);
            grown << x, random_block(n, active - x.cols());
            x = std::move(grown);
        }
        MatrixXd y = factor.solve(m * x);
        if (!y.allFinite()) {
            sigma = factor.factor(sigma - 1e-8 * std::max(1.0, std::abs(sigma)));
            continue;
        }
        deflate(y, q, mq);
        y = m_orthonormalize(y, m);
        deflate(y, q, mq);
        y = m_orthonormalize(y, m);
        if (y.cols() == 0) {
            x = random_block(n, active);
            continue;
        }

        const MatrixXd ay = a * y;
        MatrixXd h = y.transpose() * ay;
        h = 0.5 * (h + h.transpose()).eval();
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(h);
        const VectorXd theta = es.eigenvalues();
        x = y * es.eigenvectors();
        const MatrixXd ax = ay * es.eigenvectors();
        const MatrixXd mx = m * x;

        const Eigen::Index wanted = std::min<Eigen::Index>(k - q.cols(), x.cols());
        std::vector<double> residual(static_cast<std::size_t>(wanted));
        for (Eigen::Index j = 0; j < wanted; ++j)
            residual[static_cast<std::size_t>(j)] = (ax.col(j) - theta(j) * mx.col(j)).norm() / mx.col(j).norm();

        Eigen::Index lock = 0;
        while (lock < wanted && residual[static_cast<std::size_t>(lock)] <= options.tol) ++lock;
        if (lock > 0) {
            MatrixXd q_new(n, q.cols() + lock), mq_new(n, q.cols() + lock);
            q_new << q, x.leftCols(lock);
            mq_new << mq, mx.leftCols(lock);
            q = std::move(q_new);
            mq = std::move(mq_new);
            for (Eigen::Index j = 0; j < lock; ++j) {
                locked_values.push_back(theta(j));
                locked_residuals.push_back(residual[static_cast<std::size_t>(j)]);
            }
            x = x.rightCols(x.cols() - lock).eval();
        }
        if (q.cols() >= k) break;

        if (lock < wanted && residual[static_cast<std::size_t>(lock)] < options.shift_switch &&
            shift_target != q.cols()) {
            sigma = factor.factor(theta(lock));
            shift_target = q.cols();
        }
    }
    result.iterations = it;
    result.factorizations = factor.count();
    if (q.cols() < k) {
        std::ostringstream msg;
        msg << "eigensolver converged " << q.cols() << " of " << k << " eigenpairs in " << it << " iterations";
        throw NoConvergence(msg.str());
    }

    std::vector<std::size_t> order(static_cast<std::size_t>(k));
    for (std::size_t j = 0; j < order.size(); ++j) order[j] = j;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return locked_values[i] < locked_values[j]; });
    for (std::size_t j : order) {
        EigenPair pair;
        pair.eigenvalue = locked_values[j];
        pair.residual = locked_residuals[j];
        const auto col = q.col(static_cast<Eigen::Index>(j));
        pair.vector.assign(col.data(), col.data() + n);
        result.pairs.push_back(std::move(pair));
    }
    for (std::size_t j = 1; j < result.pairs.size(); ++j) {
        const double gap = result.pairs[j].eigenvalue - result.pairs[j - 1].eigenvalue;
        if (gap < options.tol) result.cluster_warning = true;
    }
    return result;
}

}  // namespace torsionlab
