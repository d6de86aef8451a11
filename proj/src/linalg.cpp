#include "ocprom/linalg.hpp"

#include <Eigen/SparseLU>
#include <Eigen/IterativeLinearSolvers>

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>

namespace ocprom {

namespace {

// One-sided Jacobi: orthogonalize the columns of W = A (copied) by plane
// rotations; singular values are the resulting column norms, U the
// normalized columns, and V accumulates the rotations.
SvdResult jacobi_svd_tall(const DenseMatrix& a)
{
    const Eigen::Index m = a.rows();
    const Eigen::Index n = a.cols();
    DenseMatrix w = a;
    DenseMatrix v = DenseMatrix::Identity(n, n);

    const double eps = 1e-15;
    const int max_sweeps = 60;
    bool converged = false;
    int sweep = 0;
    for (; sweep < max_sweeps && !converged; ++sweep) {
        converged = true;
        for (Eigen::Index p = 0; p < n - 1; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const double app = w.col(p).squaredNorm();
                const double aqq = w.col(q).squaredNorm();
                const double apq = w.col(p).dot(w.col(q));
                if (std::abs(apq) <= eps * std::sqrt(app * aqq)) continue;
                converged = false;

                const double tau = (aqq - app) / (2.0 * apq);
                const double t = (tau >= 0.0)
                                     ? 1.0 / (tau + std::sqrt(1.0 + tau * tau))
                                     : 1.0 / (tau - std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;

                for (Eigen::Index i = 0; i < m; ++i) {
                    const double wp = w(i, p);
                    const double wq = w(i, q);
                    w(i, p) = c * wp - s * wq;
                    w(i, q) = s * wp + c * wq;
                }
                for (Eigen::Index i = 0; i < n; ++i) {
                    const double vp = v(i, p);
                    const double vq = v(i, q);
                    v(i, p) = c * vp - s * vq;
                    v(i, q) = s * vp + c * vq;
                }
            }
        }
    }
    if (!converged) {
        throw std::runtime_error("svd: one-sided Jacobi did not converge after " +
                                 std::to_string(sweep) + " sweeps");
    }

    Vector sigma(n);
    for (Eigen::Index j = 0; j < n; ++j) sigma[j] = w.col(j).norm();

    std::vector<Eigen::Index> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index i, Eigen::Index j) { return sigma[i] > sigma[j]; });

    SvdResult r;
    r.u.resize(m, n);
    r.sigma.resize(n);
    r.vt.resize(n, n);
    const double sigma_floor = sigma.maxCoeff() * 1e-300;
    for (Eigen::Index j = 0; j < n; ++j) {
        const Eigen::Index src = order[static_cast<size_t>(j)];
        r.sigma[j] = sigma[src];
        if (sigma[src] > sigma_floor && sigma[src] > 0.0) {
            r.u.col(j) = w.col(src) / sigma[src];
        } else {
            // Numerically zero column: any unit vector orthogonal to the rest
            // would do; keep the raw direction to stay deterministic.
            r.u.col(j).setZero();
            r.u(j % m, j) = 1.0;
        }
        r.vt.row(j) = v.col(src).transpose();
    }
    return r;
}

}  // namespace

SvdResult svd(const DenseMatrix& a)
{
    if (a.rows() < 1 || a.cols() < 1) {
        throw std::invalid_argument("svd: empty matrix");
    }
    if (!a.allFinite()) {
        throw std::invalid_argument("svd: matrix has non-finite entries");
    }
    if (a.rows() >= a.cols()) return jacobi_svd_tall(a);

    // Wide matrix: factor the transpose and swap the roles of U and V.
    SvdResult t = jacobi_svd_tall(a.transpose());
    SvdResult r;
    r.u = t.vt.transpose();
    r.sigma = std::move(t.sigma);
    r.vt = t.u.transpose();
    return r;
}

Vector solve_sparse(const SparseMatrix& a, const Vector& b, SparseSolverKind kind)
{
    if (a.rows() != a.cols())
        throw SolveError("solve_sparse: matrix is not square");
    if (a.cols() != b.size())
        throw SolveError("solve_sparse: dimension mismatch");

    Vector x;
    if (kind == SparseSolverKind::ConjugateGradient) {
        Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper> cg;
        cg.setTolerance(1e-13);
        cg.setMaxIterations(10 * a.rows());
        cg.compute(a);
        x = cg.solve(b);
        if (cg.info() != Eigen::Success) {
            throw SolveError("solve_sparse: CG did not converge, final residual estimate " +
                             std::to_string(cg.error()));
        }
    } else {
        Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
        lu.compute(a);
        if (lu.info() != Eigen::Success) {
            throw SolveError("solve_sparse: LU factorization failed (singular or near-singular pivot): " +
                             lu.lastErrorMessage());
        }
        x = lu.solve(b);
    }

    const double bnorm = b.norm();
    const double res = (a * x - b).norm();
    if (bnorm > 0.0 && !(res <= 1e-10 * bnorm)) {
        // One step of iterative refinement usually recovers the contract.
        if (kind == SparseSolverKind::DirectLU) {
            Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
            lu.compute(a);
            x += lu.solve(b - a * x);
        }
        const double res2 = (a * x - b).norm();
        if (!(res2 <= 1e-10 * bnorm)) {
            throw SolveError("solve_sparse: residual contract violated, |Ax-b|/|b| = " +
                             std::to_string(res2 / bnorm));
        }
    }
    if (!x.allFinite()) throw SolveError("solve_sparse: non-finite solution");
    return x;
}

struct SparseFactorization::Impl {
    Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
    SparseMatrix a;
};

SparseFactorization::SparseFactorization(const SparseMatrix& a)
    : impl_(std::make_unique<Impl>())
{
    impl_->a = a;
    impl_->lu.compute(impl_->a);
    if (impl_->lu.info() != Eigen::Success) {
        throw SolveError("SparseFactorization: LU failed: " + impl_->lu.lastErrorMessage());
    }
}

SparseFactorization::~SparseFactorization() = default;
SparseFactorization::SparseFactorization(SparseFactorization&&) noexcept = default;
SparseFactorization& SparseFactorization::operator=(SparseFactorization&&) noexcept = default;

Vector SparseFactorization::solve(const Vector& b) const
{
    Vector x = impl_->lu.solve(b);
    // Single refinement step; keeps repeated KKT solves on contract.
    x += impl_->lu.solve(b - impl_->a * x);
    return x;
}

}  // namespace ocprom
