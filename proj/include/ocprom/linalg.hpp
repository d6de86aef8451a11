#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace ocprom {

using Vector = Eigen::VectorXd;
using DenseMatrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

struct SvdResult {
    DenseMatrix u;       // left singular vectors, one column per singular value
    Vector sigma;        // non-negative, non-increasing
    DenseMatrix vt;      // right singular vectors, transposed
};

// Thin SVD via one-sided Jacobi rotations on the columns of A (or A^T when
// rows < cols). Accurate for the modest matrix sizes handled here.
SvdResult svd(const DenseMatrix& a);

enum class SparseSolverKind {
    ConjugateGradient,   // symmetric positive definite systems
    DirectLU,            // general square systems, incl. saddle-point KKT
};

struct SolveError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Solves A x = b to a relative residual of 1e-10. CG for SPD inputs,
// sparse LU with partial pivoting otherwise.
Vector solve_sparse(const SparseMatrix& a, const Vector& b,
                    SparseSolverKind kind = SparseSolverKind::DirectLU);

// Reusable factorization for repeated solves against a fixed matrix.
class SparseFactorization {
public:
    explicit SparseFactorization(const SparseMatrix& a);
    ~SparseFactorization();
    SparseFactorization(SparseFactorization&&) noexcept;
    SparseFactorization& operator=(SparseFactorization&&) noexcept;
    SparseFactorization(const SparseFactorization&) = delete;
    SparseFactorization& operator=(const SparseFactorization&) = delete;

    Vector solve(const Vector& b) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace ocprom
