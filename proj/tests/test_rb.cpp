#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ocprom/rb.hpp"
#include "ocprom/snapshots.hpp"

#include <chrono>
#include <memory>

using namespace ocprom;

namespace {

struct Fixture {
    std::shared_ptr<Mesh> mesh;
    OcpProblem problem;
    std::vector<Scenario> scenarios;
    SnapshotSet snaps;
    DenseMatrix adjoints;

    explicit Fixture(int n_mesh, int n_scen)
    {
        mesh = std::make_shared<Mesh>(build_mesh(n_mesh, 0.15, 0.2, 0.3));
        ParameterBox box;
        box.lo = Vector(2);
        box.hi = Vector(2);
        box.lo << -1.5707963, 0.4;
        box.hi << 1.5707963, 0.9;
        problem = make_cooling_problem(mesh, 1.0, 1.0, 125.0, 1e-8, 1e-8, box);
        scenarios = sample_scenarios(box, n_scen, 11);
        snaps = generate(problem, scenarios, 1, 11);
        adjoints.resize(snaps.y.rows(), snaps.columns());
        DirectSolver solver(problem);
        for (Eigen::Index c = 0; c < snaps.columns(); ++c) {
            const OptimalPair pair = solver.solve(scenarios[static_cast<size_t>(c)]);
            adjoints.col(c) = *pair.p;
        }
    }
};

}  // namespace

TEST_CASE("aggregated space is orthonormal and deduplicates repeated columns")
{
    Fixture fx(16, 8);
    AggregatedSpace space =
        build_aggregated(fx.snaps.y, fx.snaps.y, fx.snaps.u, 5, 5, 4);

    // V_p = V_y: the second MGS pass finds nothing new, so all five adjoint
    // columns are dropped and n_yp stays 5.
    CHECK(space.dropped_columns == 5);
    CHECK(space.n_yp() == 5);

    const DenseMatrix gram = space.v_yp.transpose() * space.v_yp;
    CHECK((gram - DenseMatrix::Identity(5, 5)).norm() <= 1e-10);
}

TEST_CASE("aggregated space spans both snapshot families")
{
    Fixture fx(16, 6);
    AggregatedSpace space =
        build_aggregated(fx.snaps.y, fx.adjoints, fx.snaps.u, 6, 6, 5);
    CHECK(space.n_yp() >= 6);

    const DenseMatrix proj = space.v_yp * space.v_yp.transpose();
    for (Eigen::Index c = 0; c < fx.snaps.columns(); ++c) {
        const Vector y = fx.snaps.y.col(c);
        CHECK((y - proj * y).norm() <= 1e-8 * y.norm());
        const Vector p = fx.adjoints.col(c);
        CHECK((p - proj * p).norm() <= 1e-8 * std::max(p.norm(), 1e-30));
    }
}

TEST_CASE("reduced operator is the exact projection of the KKT matrix")
{
    Fixture fx(16, 4);
    AggregatedSpace space =
        build_aggregated(fx.snaps.y, fx.adjoints, fx.snaps.u, 4, 4, 3);
    RbSolver rb(fx.problem, space);
    CHECK(rb.reduced_dim() == 2 * space.n_yp() + space.n_u());

    // Rebuild the block trial matrix and verify the Galerkin property: the
    // projected residual of the lifted solve vanishes even though the control
    // basis is truncated, and V' K V inherits the KKT symmetry.
    const KktSystem kkt = assemble_kkt(fx.problem, fx.scenarios[0]);
    const Eigen::Index nh = space.v_yp.rows();
    const Eigen::Index nc = space.v_u.v.rows();
    DenseMatrix v = DenseMatrix::Zero(2 * nh + nc, rb.reduced_dim());
    v.block(0, 0, nh, space.n_yp()) = space.v_yp;
    v.block(nh, space.n_yp(), nc, space.n_u()) = space.v_u.v;
    v.block(nh + nc, space.n_yp() + space.n_u(), nh, space.n_yp()) = space.v_yp;

    const DenseMatrix k_n = v.transpose() * (kkt.k * v);
    CHECK((k_n - k_n.transpose()).norm() <= 1e-10 * k_n.norm());

    const RbSolution sol = rb.solve(fx.scenarios[0]);
    Vector lift(2 * nh + nc);
    lift << sol.y, sol.u, sol.p;
    const Vector projected_residual = v.transpose() * (kkt.k * lift - kkt.rhs);
    CHECK(projected_residual.norm() <= 1e-8 * kkt.rhs.norm());
}

TEST_CASE("full-rank reduced solve reproduces the training optima")
{
    Fixture fx(16, 6);
    AggregatedSpace space = build_aggregated(fx.snaps.y, fx.adjoints, fx.snaps.u,
                                             fx.snaps.columns(), fx.snaps.columns(),
                                             fx.snaps.columns());
    RbSolver rb(fx.problem, space);
    DirectSolver fom(fx.problem);
    for (const Scenario& mu : fx.scenarios) {
        const OptimalPair truth = fom.solve(mu);
        const RbSolution sol = rb.solve(mu);
        CHECK((sol.y - truth.y).norm() <= 1e-6 * truth.y.norm());
        CHECK((sol.u - truth.u).norm() <= 1e-6 * truth.u.norm());
        CHECK(sol.cost == doctest::Approx(truth.cost).epsilon(1e-6));
        CHECK(sol.kkt_residual <= 1e-6);
    }
}

TEST_CASE("a single snapshot is reproduced exactly at its own scenario")
{
    Fixture fx(16, 1);
    AggregatedSpace space =
        build_aggregated(fx.snaps.y, fx.adjoints, fx.snaps.u, 1, 1, 1);
    RbSolver rb(fx.problem, space);
    const RbSolution sol = rb.solve(fx.scenarios[0]);
    CHECK((sol.y - fx.snaps.y.col(0)).norm() <= 1e-8 * fx.snaps.y.col(0).norm());
    CHECK((sol.u - fx.snaps.u.col(0)).norm() <= 1e-8 * fx.snaps.u.col(0).norm());
}

TEST_CASE("online queries beat fresh full-order solves")
{
    Fixture fx(24, 10);
    AggregatedSpace space =
        build_aggregated(fx.snaps.y, fx.adjoints, fx.snaps.u, 8, 8, 6);
    RbSolver rb(fx.problem, space);
    const std::vector<Scenario> queries = sample_scenarios(fx.problem.box, 5, 99);

    using clock = std::chrono::steady_clock;
    const auto t0 = clock::now();
    for (const Scenario& mu : queries) (void)solve_direct(fx.problem, mu);
    const auto t1 = clock::now();
    for (const Scenario& mu : queries) (void)rb.solve(mu);
    const auto t2 = clock::now();

    const double fom = std::chrono::duration<double>(t1 - t0).count();
    const double rom = std::chrono::duration<double>(t2 - t1).count();
    CHECK(rom * 10.0 < fom);
}
