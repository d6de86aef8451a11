#include "ocprom/ocp.hpp"

#include <cmath>

namespace ocprom {

void OcpProblem::validate() const
{
    if (!(beta > 0.0)) throw std::invalid_argument("OcpProblem: beta must be > 0");
    if (beta_g < 0.0) throw std::invalid_argument("OcpProblem: beta_g must be >= 0");
    box.validate();
    if (!source_load) throw std::invalid_argument("OcpProblem: missing source load");
    if (unsteady) {
        if (unsteady->steps < 1 || !(unsteady->final_time > 0.0))
            throw std::invalid_argument("OcpProblem: bad unsteady config");
    }
}

SparseMatrix OcpProblem::regularization() const
{
    SparseMatrix r = beta * ops.mc + beta_g * ops.kc;
    r.makeCompressed();
    return r;
}

Vector OcpProblem::rhs_load(const Scenario& mu) const
{
    return source_load(mu) + ops.robin_load;
}

OcpProblem make_cooling_problem(std::shared_ptr<const Mesh> mesh, double nu, double gamma,
                                double y_ext, double beta, double beta_g,
                                const ParameterBox& box)
{
    OcpProblem p;
    p.ops = assemble(*mesh, nu, gamma, y_ext);
    p.beta = beta;
    p.beta_g = beta_g;
    p.box = box;
    p.nu = nu;
    p.gamma = gamma;
    p.y_ext = y_ext;
    p.mesh_hash = mesh->content_hash();
    p.source_load = [mesh](const Scenario& mu) { return gaussian_source(*mesh, mu); };
    p.validate();
    return p;
}

KktSystem assemble_kkt(const OcpProblem& problem, const Scenario& mu)
{
    if (problem.unsteady)
        throw std::invalid_argument("assemble_kkt: steady problems only");

    const Eigen::Index ny = problem.ops.n_state();
    const Eigen::Index nu = problem.ops.n_control();
    const SparseMatrix reg = problem.regularization();

    // Unknown ordering (y, u, p). The first-order conditions are scaled so
    // the system is symmetric; this leaves the minimizer unchanged.
    std::vector<Triplet> trips;
    trips.reserve(static_cast<size_t>(problem.ops.m_obs.nonZeros() + reg.nonZeros() +
                                      2 * problem.ops.a.nonZeros() +
                                      2 * problem.ops.b.nonZeros()));
    auto add_block = [&](const SparseMatrix& m, Eigen::Index row0, Eigen::Index col0,
                         double scale, bool transpose) {
        for (Eigen::Index k = 0; k < m.outerSize(); ++k) {
            for (SparseMatrix::InnerIterator it(m, k); it; ++it) {
                const Eigen::Index r = transpose ? it.col() : it.row();
                const Eigen::Index c = transpose ? it.row() : it.col();
                trips.emplace_back(static_cast<int>(row0 + r), static_cast<int>(col0 + c),
                                   scale * it.value());
            }
        }
    };
    const Eigen::Index oy = 0, ou = ny, op = ny + nu;
    add_block(problem.ops.m_obs, oy, oy, 1.0, false);
    add_block(problem.ops.a, oy, op, 1.0, true);
    add_block(reg, ou, ou, 1.0, false);
    add_block(problem.ops.b, ou, op, -1.0, true);
    add_block(problem.ops.a, op, oy, 1.0, false);
    add_block(problem.ops.b, op, ou, -1.0, false);

    KktSystem sys;
    sys.n_state = ny;
    sys.n_control = nu;
    sys.k.resize(2 * ny + nu, 2 * ny + nu);
    sys.k.setFromTriplets(trips.begin(), trips.end());
    sys.k.makeCompressed();
    sys.rhs = Vector::Zero(2 * ny + nu);
    sys.rhs.tail(ny) = problem.rhs_load(mu);
    return sys;
}

DirectSolver::DirectSolver(const OcpProblem& problem)
    : problem_(problem),
      kkt_(assemble_kkt(problem, Scenario{Vector::Zero(problem.box.dim()), std::nullopt})),
      factorization_(kkt_.k)
{
}

OptimalPair DirectSolver::solve(const Scenario& mu) const
{
    const Eigen::Index ny = kkt_.n_state;
    const Eigen::Index nu = kkt_.n_control;
    Vector rhs = Vector::Zero(2 * ny + nu);
    rhs.tail(ny) = problem_.rhs_load(mu);
    const Vector q = factorization_.solve(rhs);

    OptimalPair pair;
    pair.y = q.head(ny);
    pair.u = q.segment(ny, nu);
    pair.p = q.tail(ny);
    pair.cost = eval_cost(problem_, pair.y, pair.u);
    pair.solver_iterations = 1;

    const double scale = rhs.norm();
    const double res = (kkt_.k * q - rhs).norm();
    if (scale > 0.0 && !(res <= 1e-9 * scale))
        throw SolveError("solve_direct: KKT residual " + std::to_string(res / scale) +
                         " exceeds contract");
    return pair;
}

OptimalPair solve_direct(const OcpProblem& problem, const Scenario& mu)
{
    return DirectSolver(problem).solve(mu);
}

namespace {

// Shared machinery for the reduced-cost path: A is symmetric, so one
// factorization serves both the state and the adjoint solves.
struct ReducedCostEvaluator {
    const OcpProblem& problem;
    SparseMatrix reg;
    SparseFactorization a_fact;
    Vector f;

    ReducedCostEvaluator(const OcpProblem& p, const Scenario& mu)
        : problem(p), reg(p.regularization()), a_fact(p.ops.a), f(p.rhs_load(mu))
    {
    }

    double operator()(const Vector& u, Vector* grad, Vector* y_out = nullptr,
                      Vector* p_out = nullptr) const
    {
        const Vector y = a_fact.solve(problem.ops.b * u + f);
        const Vector obs = problem.ops.m_obs * y;
        const Vector ru = reg * u;
        const double cost = y.dot(obs) + u.dot(ru);
        if (grad) {
            const Vector p = a_fact.solve(2.0 * obs);
            *grad = 2.0 * ru + problem.ops.b.transpose() * p;
            if (p_out) *p_out = p;
        }
        if (y_out) *y_out = y;
        return cost;
    }
};

}  // namespace

double reduced_cost(const OcpProblem& problem, const Scenario& mu, const Vector& u, Vector* grad)
{
    return ReducedCostEvaluator(problem, mu)(u, grad);
}

OptimalPair solve_indirect(const OcpProblem& problem, const Scenario& mu,
                           const OptimizerConfig& cfg)
{
    if (problem.unsteady)
        throw std::invalid_argument("solve_indirect: steady problems only");
    ReducedCostEvaluator eval(problem, mu);

    const Objective objective = [&](const Vector& u, Vector& g) {
        Vector grad;
        const double c = eval(u, &grad);
        g = grad;
        return c;
    };

    const Vector u0 = Vector::Zero(problem.ops.n_control());
    MinimizeResult res = minimize(objective, u0, cfg);

    OptimalPair pair;
    Vector y, p;
    Vector grad;
    pair.cost = eval(res.x, &grad, &y, &p);
    pair.u = std::move(res.x);
    pair.y = std::move(y);
    // Match the symmetric KKT scaling: the multiplier there is -p/2 of the
    // descent-loop adjoint.
    pair.p = Vector(-0.5 * p);
    pair.solver_iterations = res.iterations;
    return pair;
}

double unsteady_cost(const OcpProblem& problem, const Scenario& mu, const DenseMatrix& u_traj,
                     DenseMatrix* grad, DenseMatrix* y_traj_out)
{
    if (!problem.unsteady)
        throw std::invalid_argument("unsteady_cost: problem has no unsteady config");
    const auto& cfg = *problem.unsteady;
    const Eigen::Index ny = problem.ops.n_state();
    const Eigen::Index nu = problem.ops.n_control();
    const int nt = cfg.steps;
    if (u_traj.rows() != nu || u_traj.cols() != nt)
        throw std::invalid_argument("unsteady_cost: control trajectory dimension mismatch");

    const double dt = cfg.final_time / nt;
    const SparseMatrix reg = problem.regularization();
    SparseMatrix sys = problem.ops.m / dt + problem.ops.a;
    sys.makeCompressed();
    SparseFactorization fact(sys);   // symmetric, reused for the adjoint march
    const Vector f = problem.rhs_load(mu);

    Vector y = cfg.initial_state.size() ? cfg.initial_state : Vector::Zero(ny);
    DenseMatrix y_traj(ny, nt);
    double cost = 0.0;
    for (int k = 0; k < nt; ++k) {
        const Vector rhs = problem.ops.m * (y / dt) + problem.ops.b * u_traj.col(k) + f;
        y = fact.solve(rhs);
        y_traj.col(k) = y;
        const Vector uk = u_traj.col(k);
        cost += dt * (y.dot(problem.ops.m_obs * y) + uk.dot(reg * uk));
    }

    if (grad) {
        grad->resize(nu, nt);
        Vector p = Vector::Zero(ny);   // p(T) = 0
        for (int k = nt - 1; k >= 0; --k) {
            const Vector rhs = problem.ops.m * (p / dt) + 2.0 * dt * (problem.ops.m_obs * y_traj.col(k));
            p = fact.solve(rhs);
            grad->col(k) = 2.0 * dt * (reg * u_traj.col(k)) + problem.ops.b.transpose() * p;
        }
    }
    if (y_traj_out) *y_traj_out = std::move(y_traj);
    return cost;
}

OptimalPair solve_unsteady(const OcpProblem& problem, const Scenario& mu,
                           const OptimizerConfig& cfg)
{
    if (!problem.unsteady)
        throw std::invalid_argument("solve_unsteady: problem has no unsteady config");
    const Eigen::Index nu = problem.ops.n_control();
    const int nt = problem.unsteady->steps;

    const Objective objective = [&](const Vector& x, Vector& g) {
        const DenseMatrix u = Eigen::Map<const DenseMatrix>(x.data(), nu, nt);
        DenseMatrix gu;
        const double c = unsteady_cost(problem, mu, u, &gu);
        g = Eigen::Map<const Vector>(gu.data(), gu.size());
        return c;
    };

    MinimizeResult res = minimize(objective, Vector::Zero(nu * nt), cfg);

    OptimalPair pair;
    pair.u_traj = Eigen::Map<const DenseMatrix>(res.x.data(), nu, nt);
    DenseMatrix y_traj;
    pair.cost = unsteady_cost(problem, mu, pair.u_traj, nullptr, &y_traj);
    pair.y_traj = std::move(y_traj);
    pair.solver_iterations = res.iterations;
    return pair;
}

double eval_cost(const OcpProblem& problem, const Vector& y, const Vector& u)
{
    if (y.size() != problem.ops.n_state() || u.size() != problem.ops.n_control())
        throw std::invalid_argument("eval_cost: dimension mismatch");
    return y.dot(problem.ops.m_obs * y) + problem.beta * u.dot(problem.ops.mc * u) +
           problem.beta_g * u.dot(problem.ops.kc * u);
}

}  // namespace ocprom
