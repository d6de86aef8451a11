#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ocprom/ocp.hpp"
#include "ocprom/rng.hpp"

#include <cmath>

using namespace ocprom;

namespace {

SparseMatrix sparse_from(const DenseMatrix& d)
{
    return d.sparseView();
}

// A hand-sized linear-quadratic problem with dense operators, so the optimum
// can be cross-checked by eliminating the state equation brute-force.
OcpProblem toy_problem()
{
    OcpProblem p;
    DenseMatrix a(2, 2), b(2, 1), mobs(2, 2), mc(1, 1), kc(1, 1);
    a << 2.0, 0.3, 0.3, 1.5;
    b << 1.0, 0.25;
    mobs << 1.0, 0.0, 0.0, 0.5;
    mc << 1.0;
    kc << 0.0;
    p.ops.a = sparse_from(a);
    p.ops.b = sparse_from(b);
    p.ops.m_obs = sparse_from(mobs);
    p.ops.m = sparse_from(mobs);
    p.ops.mc = sparse_from(mc);
    p.ops.kc = sparse_from(kc);
    p.ops.robin_load = Vector::Zero(2);
    p.ops.control_dofs = {0};
    p.beta = 1e-3;
    p.beta_g = 0.0;
    p.box.lo = Vector::Constant(1, -1.0);
    p.box.hi = Vector::Constant(1, 1.0);
    Vector f(2);
    f << 1.0, -2.0;
    p.source_load = [f](const Scenario&) { return f; };
    return p;
}

// Brute force: y(u) = A^{-1}(B u + f), minimize the explicit quadratic in u.
Vector toy_optimum(const OcpProblem& p)
{
    const DenseMatrix a = DenseMatrix(p.ops.a);
    const DenseMatrix b = DenseMatrix(p.ops.b);
    const DenseMatrix mobs = DenseMatrix(p.ops.m_obs);
    const DenseMatrix r = DenseMatrix(p.regularization());
    Scenario mu;
    mu.params = Vector::Zero(1);
    const Vector f = p.rhs_load(mu);
    const DenseMatrix s = a.inverse() * b;         // dy/du
    const Vector y0 = a.inverse() * f;
    // d/du [ (y0 + S u)' Mobs (y0 + S u) + u' R u ] = 0
    const DenseMatrix h = s.transpose() * mobs * s + r;
    return h.ldlt().solve(-s.transpose() * mobs * y0);
}

const OcpProblem& cooling16()
{
    static const OcpProblem p = [] {
        auto mesh = std::make_shared<Mesh>(build_mesh(16, 0.15, 0.2, 0.3));
        ParameterBox box;
        box.lo = Vector(2);
        box.hi = Vector(2);
        box.lo << -M_PI / 2, 0.4;
        box.hi << M_PI / 2, 0.9;
        return make_cooling_problem(mesh, 1.0, 1.0, 125.0, 1e-8, 1e-8, box);
    }();
    return p;
}

Scenario scenario(double theta, double r)
{
    Scenario mu;
    mu.params = Vector(2);
    mu.params << theta, r;
    return mu;
}

}  // namespace

TEST_CASE("direct KKT solve matches the brute-force QP oracle")
{
    const OcpProblem p = toy_problem();
    Scenario mu;
    mu.params = Vector::Zero(1);
    const OptimalPair sol = solve_direct(p, mu);
    const Vector u_star = toy_optimum(p);
    CHECK((sol.u - u_star).norm() < 1e-10 * (1.0 + u_star.norm()));

    // The returned state satisfies the state equation.
    const Vector residual = p.ops.a * sol.y - p.ops.b * sol.u - p.rhs_load(mu);
    CHECK(residual.norm() < 1e-10);

    // Cost matches its definition.
    CHECK(sol.cost == doctest::Approx(eval_cost(p, sol.y, sol.u)).epsilon(1e-12));
}

TEST_CASE("KKT system is symmetric with the documented block layout")
{
    const KktSystem kkt = assemble_kkt(cooling16(), scenario(0.1, 0.6));
    const DenseMatrix k = DenseMatrix(kkt.k);
    CHECK((k - k.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(kkt.rhs.head(kkt.n_state + kkt.n_control).norm() == 0.0);
    CHECK(kkt.rhs.tail(kkt.n_state).norm() > 0.0);
}

TEST_CASE("reduced-cost gradient matches finite differences")
{
    const OcpProblem& p = cooling16();
    const Scenario mu = scenario(-0.22, 0.44);
    SplitMix64 rng(5);
    Vector u(p.ops.n_control());
    for (Eigen::Index i = 0; i < u.size(); ++i) u[i] = rng.next_uniform(-1.0, 1.0);

    Vector grad;
    reduced_cost(p, mu, u, &grad);
    const Vector fd = finite_diff_gradient(
        [&](const Vector& v) { return reduced_cost(p, mu, v); }, u, 1e-5);
    CHECK((grad - fd).norm() <= 1e-5 * fd.norm());
}

TEST_CASE("direct and indirect solvers agree")
{
    const OcpProblem& p = cooling16();
    const Scenario mu = scenario(0.8, 0.7);
    const OptimalPair direct = solve_direct(p, mu);

    OptimizerConfig cfg;
    cfg.max_iterations = 5000;
    cfg.gradient_tolerance = 1e-10;
    cfg.lbfgs_memory = 30;
    const OptimalPair indirect = solve_indirect(p, mu, cfg);

    const auto mnorm = [&](const Vector& v) { return std::sqrt(v.dot(p.ops.m * v)); };
    CHECK(mnorm(direct.y - indirect.y) <= 1e-5 * mnorm(direct.y));
    const auto mcnorm = [&](const Vector& v) { return std::sqrt(v.dot(p.ops.mc * v)); };
    CHECK(mcnorm(direct.u - indirect.u) <= 1e-5 * mcnorm(direct.u));
    // Adjoint scaling convention matches the KKT block form.
    REQUIRE(direct.p);
    REQUIRE(indirect.p);
    CHECK((*direct.p - *indirect.p).norm() <= 1e-4 * direct.p->norm());
}

TEST_CASE("optimal control actually cools the obstacle boundary")
{
    const OcpProblem& p = cooling16();
    const Scenario mu = scenario(-0.22, 0.44);
    const OptimalPair sol = solve_direct(p, mu);
    const Vector y_free = solve_sparse(p.ops.a, p.rhs_load(mu));
    const double controlled = sol.y.dot(p.ops.m_obs * sol.y);
    const double uncontrolled = y_free.dot(p.ops.m_obs * y_free);
    CHECK(controlled < 0.01 * uncontrolled);
}

TEST_CASE("unsteady cost gradient matches finite differences")
{
    OcpProblem p = toy_problem();
    p.unsteady = UnsteadyConfig{0.5, 4, Vector()};
    Scenario mu;
    mu.params = Vector::Zero(1);

    SplitMix64 rng(9);
    DenseMatrix u(1, 4);
    for (Eigen::Index i = 0; i < u.size(); ++i) u.data()[i] = rng.next_uniform(-1.0, 1.0);

    DenseMatrix grad;
    unsteady_cost(p, mu, u, &grad);
    const Eigen::Map<const Vector> grad_flat(grad.data(), grad.size());
    const Vector fd = finite_diff_gradient(
        [&](const Vector& v) {
            const Eigen::Map<const DenseMatrix> vm(v.data(), 1, 4);
            return unsteady_cost(p, mu, DenseMatrix(vm));
        },
        Eigen::Map<const Vector>(u.data(), u.size()), 1e-6);
    CHECK((grad_flat - fd).norm() <= 1e-4 * fd.norm());
}

TEST_CASE("unsteady cost equals a hand-rolled backward-Euler recomputation")
{
    OcpProblem p = toy_problem();
    const int steps = 3;
    const double t_final = 0.6;
    p.unsteady = UnsteadyConfig{t_final, steps, Vector()};
    Scenario mu;
    mu.params = Vector::Zero(1);

    DenseMatrix u(1, steps);
    u << 0.4, -0.2, 0.1;
    DenseMatrix y_traj;
    const double cost = unsteady_cost(p, mu, u, nullptr, &y_traj);

    // Oracle: dense march plus rectangle-rule cost accumulation.
    const double dt = t_final / steps;
    const DenseMatrix a = DenseMatrix(p.ops.a);
    const DenseMatrix m = DenseMatrix(p.ops.m);
    const DenseMatrix mobs = DenseMatrix(p.ops.m_obs);
    const DenseMatrix r = DenseMatrix(p.regularization());
    const Vector f = p.rhs_load(mu);
    Vector y = Vector::Zero(2);
    double expected = 0.0;
    for (int k = 0; k < steps; ++k) {
        const Vector uk = u.col(k);
        y = (m / dt + a).fullPivLu().solve(m * y / dt + DenseMatrix(p.ops.b) * uk + f);
        expected += dt * (y.dot(mobs * y) + uk.dot(r * uk));
        CHECK((y - y_traj.col(k)).norm() < 1e-10);
    }
    CHECK(cost == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("solve_unsteady drives the cost below the zero-control cost")
{
    OcpProblem p = toy_problem();
    p.unsteady = UnsteadyConfig{0.5, 4, Vector()};
    Scenario mu;
    mu.params = Vector::Zero(1);

    OptimizerConfig cfg;
    cfg.max_iterations = 2000;
    cfg.gradient_tolerance = 1e-12;
    const OptimalPair sol = solve_unsteady(p, mu, cfg);
    CHECK(sol.u_traj.cols() == 4);
    CHECK(sol.y_traj.cols() == 4);
    const double zero_cost = unsteady_cost(p, mu, DenseMatrix::Zero(1, 4));
    CHECK(sol.cost < zero_cost);
    // Near-zero gradient at the reported optimum.
    DenseMatrix grad;
    unsteady_cost(p, mu, sol.u_traj, &grad);
    CHECK(grad.norm() < 1e-8);
}

TEST_CASE("problem validation rejects bad constants")
{
    OcpProblem p = toy_problem();
    p.beta = 0.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}
