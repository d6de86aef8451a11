#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ocprom/linalg.hpp"
#include "ocprom/optimize.hpp"
#include "ocprom/rng.hpp"

using namespace ocprom;

namespace {

DenseMatrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed)
{
    SplitMix64 rng(seed);
    DenseMatrix a(rows, cols);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = rng.next_uniform(-1.0, 1.0);
    return a;
}

}  // namespace

TEST_CASE("svd of the identity")
{
    const SvdResult s = svd(DenseMatrix::Identity(2, 2));
    CHECK(s.sigma[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s.sigma[1] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("svd of a rank-1 outer product")
{
    Vector a(3), b(4);
    a << 1, -2, 2;
    b << 0.5, 1, -1, 2;
    const SvdResult s = svd(a * b.transpose());
    CHECK(s.sigma[0] == doctest::Approx(a.norm() * b.norm()).epsilon(1e-12));
    for (Eigen::Index i = 1; i < s.sigma.size(); ++i) CHECK(s.sigma[i] < 1e-12);
}

TEST_CASE("svd agrees with an eigendecomposition of A'A")
{
    const DenseMatrix a = random_matrix(8, 5, 101);
    const SvdResult s = svd(a);

    // Independent oracle: eigenvalues of A'A are the squared singular values.
    Eigen::SelfAdjointEigenSolver<DenseMatrix> eig(a.transpose() * a);
    Vector expected = eig.eigenvalues().reverse();
    for (Eigen::Index i = 0; i < 5; ++i)
        CHECK(s.sigma[i] * s.sigma[i] == doctest::Approx(expected[i]).epsilon(1e-9));

    CHECK((s.u.transpose() * s.u - DenseMatrix::Identity(5, 5)).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((s.vt * s.vt.transpose() - DenseMatrix::Identity(5, 5)).cwiseAbs().maxCoeff() < 1e-10);
    const DenseMatrix rec = s.u * s.sigma.asDiagonal() * s.vt;
    CHECK((a - rec).norm() <= 1e-9 * a.norm());
}

TEST_CASE("svd handles wide matrices and non-increasing order")
{
    const DenseMatrix a = random_matrix(4, 9, 77);
    const SvdResult s = svd(a);
    for (Eigen::Index i = 1; i < s.sigma.size(); ++i) CHECK(s.sigma[i] <= s.sigma[i - 1]);
    CHECK((s.u * s.sigma.asDiagonal() * s.vt - a).norm() <= 1e-9 * a.norm());
}

TEST_CASE("Eckart-Young: truncation error equals the tail of the spectrum")
{
    SplitMix64 seeds(3);
    for (int trial = 0; trial < 5; ++trial) {
        const DenseMatrix a = random_matrix(20, 12, seeds.next_u64());
        const SvdResult s = svd(a);
        for (Eigen::Index k : {1, 4, 9}) {
            const DenseMatrix ak = s.u.leftCols(k) *
                                   s.sigma.head(k).asDiagonal() *
                                   s.vt.topRows(k);
            const double tail = std::sqrt(s.sigma.tail(s.sigma.size() - k).squaredNorm());
            CHECK((a - ak).norm() == doctest::Approx(tail).epsilon(1e-8));
        }
    }
}

TEST_CASE("solve_sparse on the identity returns b")
{
    SparseMatrix eye(4, 4);
    eye.setIdentity();
    Vector b(4);
    b << 1, -2, 3, 0.5;
    CHECK((solve_sparse(eye, b) - b).norm() < 1e-14);
}

TEST_CASE("solve_sparse matches hand elimination on a 2x2 system")
{
    std::vector<Triplet> trips{{0, 0, 2.0}, {0, 1, 1.0}, {1, 0, 1.0}, {1, 1, 3.0}};
    SparseMatrix a(2, 2);
    a.setFromTriplets(trips.begin(), trips.end());
    Vector b(2);
    b << 3, 4;
    const Vector x = solve_sparse(a, b);
    CHECK(x[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(x[1] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("solve_sparse matches a dense LU oracle on the 1D Laplacian")
{
    const Eigen::Index n = 40;
    std::vector<Triplet> trips;
    for (Eigen::Index i = 0; i < n; ++i) {
        trips.emplace_back(i, i, 2.0);
        if (i > 0) trips.emplace_back(i, i - 1, -1.0);
        if (i + 1 < n) trips.emplace_back(i, i + 1, -1.0);
    }
    SparseMatrix a(n, n);
    a.setFromTriplets(trips.begin(), trips.end());
    const Vector b = Vector::Ones(n);

    const Vector dense = DenseMatrix(a).fullPivLu().solve(b);
    for (SparseSolverKind kind : {SparseSolverKind::DirectLU, SparseSolverKind::ConjugateGradient}) {
        const Vector x = solve_sparse(a, b, kind);
        CHECK((x - dense).norm() <= 1e-9 * dense.norm());
        CHECK((a * x - b).norm() <= 1e-10 * b.norm());
    }
}

TEST_CASE("solve_sparse rejects singular systems")
{
    SparseMatrix a(2, 2);
    std::vector<Triplet> trips{{0, 0, 1.0}, {1, 0, 1.0}};  // rank 1
    a.setFromTriplets(trips.begin(), trips.end());
    Vector b(2);
    b << 1, 2;
    CHECK_THROWS_AS(solve_sparse(a, b), SolveError);
}

TEST_CASE("minimize reaches the center of a quadratic bowl")
{
    Vector c(3);
    c << 1.0, -2.0, 0.5;
    const Objective f = [&](const Vector& x, Vector& g) {
        g = 2.0 * (x - c);
        return (x - c).squaredNorm();
    };
    for (OptimizerKind kind : {OptimizerKind::Lbfgs, OptimizerKind::Adam}) {
        OptimizerConfig cfg;
        cfg.kind = kind;
        cfg.max_iterations = kind == OptimizerKind::Lbfgs ? 100 : 20000;
        cfg.gradient_tolerance = 1e-8;
        cfg.step_size = 0.05;
        const MinimizeResult res = minimize(f, Vector::Zero(3), cfg);
        CHECK(res.converged);
        CHECK((res.x - c).norm() < 1e-7);
    }
}

TEST_CASE("minimize solves Rosenbrock from the classical start")
{
    const Objective f = [](const Vector& x, Vector& g) {
        const double a = 1.0, b = 100.0;
        g.resize(2);
        g[0] = -2.0 * (a - x[0]) - 4.0 * b * x[0] * (x[1] - x[0] * x[0]);
        g[1] = 2.0 * b * (x[1] - x[0] * x[0]);
        const double r1 = a - x[0], r2 = x[1] - x[0] * x[0];
        return r1 * r1 + b * r2 * r2;
    };
    Vector x0(2);
    x0 << -1.2, 1.0;
    OptimizerConfig cfg;
    cfg.max_iterations = 500;
    cfg.gradient_tolerance = 1e-10;
    const MinimizeResult res = minimize(f, x0, cfg);
    CHECK(res.converged);
    CHECK(std::abs(res.history.back()) < 1e-8);

    // Grid refinement near (1,1): no nearby point does better.
    Vector g(2);
    const double f_star = f(res.x, g);
    for (double dx : {-1e-4, 0.0, 1e-4})
        for (double dy : {-1e-4, 0.0, 1e-4}) {
            Vector probe = res.x;
            probe[0] += dx;
            probe[1] += dy;
            CHECK(f(probe, g) >= f_star - 1e-12);
        }
    CHECK((res.x - Vector::Ones(2)).norm() < 1e-5);
}

TEST_CASE("LBFGS behaves like CG on a quadratic with known Hessian")
{
    const Eigen::Index n = 6;
    DenseMatrix h = random_matrix(n, n, 55);
    h = h * h.transpose() + static_cast<double>(n) * DenseMatrix::Identity(n, n);
    const Vector b = random_matrix(n, 1, 56).col(0);
    const Objective f = [&](const Vector& x, Vector& g) {
        g = h * x - b;
        return 0.5 * x.dot(h * x) - b.dot(x);
    };
    OptimizerConfig cfg;
    cfg.max_iterations = static_cast<int>(n) + 2;
    cfg.gradient_tolerance = 1e-9;
    const MinimizeResult res = minimize(f, Vector::Zero(n), cfg);
    CHECK(res.converged);    // exact line minimizer => CG-like finite termination
    CHECK(res.iterations <= n + 2);
}

TEST_CASE("LBFGS history is monotone non-increasing")
{
    const Objective f = [](const Vector& x, Vector& g) {
        g = 4.0 * x.array().pow(3).matrix();
        return x.array().pow(4).sum();
    };
    OptimizerConfig cfg;
    cfg.max_iterations = 50;
    cfg.gradient_tolerance = 1e-12;
    const MinimizeResult res = minimize(f, Vector::Ones(4), cfg);
    for (size_t i = 1; i < res.history.size(); ++i)
        CHECK(res.history[i] <= res.history[i - 1] + 1e-15);
}

TEST_CASE("minimize reports non-finite objectives with the iteration")
{
    const Objective f = [](const Vector& x, Vector& g) {
        g = Vector::Constant(x.size(), std::nan(""));
        return std::nan("");
    };
    OptimizerConfig cfg;
    CHECK_THROWS_AS(minimize(f, Vector::Zero(2), cfg), OptimizeError);
}

TEST_CASE("finite differences: polynomial and linear exactness")
{
    const ScalarObjective sq = [](const Vector& x) { return x[0] * x[0]; };
    Vector x(1);
    x << 3.0;
    CHECK(finite_diff_gradient(sq, x, 1e-5)[0] == doctest::Approx(6.0).epsilon(1e-8));

    const ScalarObjective lin = [](const Vector& x) { return 2.0 * x[0] - 7.0 * x[1]; };
    Vector x2(2);
    x2 << 0.3, -4.0;
    for (double h : {1e-6, 1e-4, 1e-1}) {
        const Vector g = finite_diff_gradient(lin, x2, h);
        CHECK(g[0] == doctest::Approx(2.0).epsilon(1e-10));
        CHECK(g[1] == doctest::Approx(-7.0).epsilon(1e-10));
    }

    const ScalarObjective quad = [](const Vector& x) { return 3.0 * x[0] * x[0] + x[0] * x[1]; };
    for (double h : {1e-6, 1e-5, 1e-4}) {
        const Vector g = finite_diff_gradient(quad, x2, h);
        CHECK(g[0] == doctest::Approx(6.0 * x2[0] + x2[1]).epsilon(1e-7));
    }
    CHECK_THROWS_AS(finite_diff_gradient(sq, x, -1.0), std::invalid_argument);
}

TEST_CASE("SplitMix64 streams are deterministic and in range")
{
    SplitMix64 a(42), b(42), c(43);
    bool identical = true, differs = false;
    for (int i = 0; i < 100; ++i) {
        const double va = a.next_double();
        identical = identical && va == b.next_double();
        differs = differs || va != c.next_double();
        CHECK(va >= 0.0);
        CHECK(va < 1.0);
    }
    CHECK(identical);
    CHECK(differs);
}
