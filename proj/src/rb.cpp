#include "ocprom/rb.hpp"

#include <stdexcept>
#include <string>

namespace ocprom {

AggregatedSpace build_aggregated(const DenseMatrix& state_snaps, const DenseMatrix& adjoint_snaps,
                                 const DenseMatrix& control_snaps, Eigen::Index n_y,
                                 Eigen::Index n_p, Eigen::Index n_u, double drop_tol)
{
    if (state_snaps.rows() != adjoint_snaps.rows())
        throw std::invalid_argument("build_aggregated: state/adjoint dimension mismatch");

    AggregatedSpace space;
    space.v_y = pod_fit(state_snaps, n_y);
    space.v_p = pod_fit(adjoint_snaps, n_p);
    space.v_u = pod_fit(control_snaps, n_u);

    // Modified Gram-Schmidt over [V_y V_p] with re-orthogonalization; directions
    // of the adjoint space already covered by the state space collapse to
    // near-zero remainders and are dropped.
    DenseMatrix cat(state_snaps.rows(), n_y + n_p);
    cat.leftCols(n_y) = space.v_y.v;
    cat.rightCols(n_p) = space.v_p.v;

    DenseMatrix q(cat.rows(), cat.cols());
    Eigen::Index kept = 0;
    for (Eigen::Index j = 0; j < cat.cols(); ++j) {
        Vector w = cat.col(j);
        const double norm0 = w.norm();
        for (int pass = 0; pass < 2; ++pass)
            for (Eigen::Index i = 0; i < kept; ++i) w -= q.col(i).dot(w) * q.col(i);
        const double norm1 = w.norm();
        if (norm1 <= drop_tol * norm0) {
            ++space.dropped_columns;
            continue;
        }
        q.col(kept++) = w / norm1;
    }
    space.v_yp = q.leftCols(kept);
    return space;
}

RbSolver::RbSolver(const OcpProblem& problem, AggregatedSpace space)
    : problem_(problem), space_(std::move(space))
{
    Scenario origin;
    origin.params = Vector::Zero(problem.box.dim());
    kkt_ = assemble_kkt(problem, origin);

    const Eigen::Index nh = kkt_.n_state;
    const Eigen::Index nhu = kkt_.n_control;
    const Eigen::Index nyp = space_.n_yp();
    const Eigen::Index nu = space_.n_u();
    if (space_.v_yp.rows() != nh || space_.v_u.v.rows() != nhu)
        throw std::invalid_argument("RbSolver: basis dimensions do not match the problem");

    DenseMatrix v = DenseMatrix::Zero(2 * nh + nhu, 2 * nyp + nu);
    v.block(0, 0, nh, nyp) = space_.v_yp;
    v.block(nh, nyp, nhu, nu) = space_.v_u.v;
    v.block(nh + nhu, nyp + nu, nh, nyp) = space_.v_yp;

    k_n_ = v.transpose() * (kkt_.k * v);
    lu_.compute(k_n_);
    if (!lu_.isInvertible())
        throw std::runtime_error(
            "RbSolver: reduced KKT matrix is singular (rank " + std::to_string(lu_.rank()) +
            " of " + std::to_string(k_n_.rows()) + "); try larger state/adjoint ranks");
}

RbSolution RbSolver::solve(const Scenario& mu) const
{
    const Eigen::Index nh = kkt_.n_state;
    const Eigen::Index nhu = kkt_.n_control;
    const Eigen::Index nyp = space_.n_yp();
    const Eigen::Index nu = space_.n_u();

    const Vector f = problem_.rhs_load(mu);

    // rhs = [0; 0; f], so only the adjoint-block rows of s_N are nonzero.
    Vector s_n = Vector::Zero(2 * nyp + nu);
    s_n.tail(nyp) = space_.v_yp.transpose() * f;

    const Vector q = lu_.solve(s_n);

    RbSolution sol;
    sol.y = space_.v_yp * q.head(nyp);
    sol.u = space_.v_u.v * q.segment(nyp, nu);
    sol.p = space_.v_yp * q.tail(nyp);
    sol.cost = eval_cost(problem_, sol.y, sol.u);

    Vector x(2 * nh + nhu);
    x.head(nh) = sol.y;
    x.segment(nh, nhu) = sol.u;
    x.tail(nh) = sol.p;
    Vector rhs = Vector::Zero(2 * nh + nhu);
    rhs.tail(nh) = f;
    sol.kkt_residual = (kkt_.k * x - rhs).norm() / rhs.norm();
    return sol;
}

}  // namespace ocprom
