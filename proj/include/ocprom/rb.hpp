#pragma once

#include "ocprom/ocp.hpp"
#include "ocprom/reduction.hpp"

namespace ocprom {

// Aggregated state-adjoint trial space plus the control basis: the block
// projector is diag(V_yp, V_u, V_yp) so the reduced KKT matrix stays square
// and symmetric.
struct AggregatedSpace {
    PodBasis v_y;
    PodBasis v_p;
    DenseMatrix v_yp;     // orthonormalized [V_y V_p], possibly fewer columns
    PodBasis v_u;
    int dropped_columns = 0;   // rank-deficient directions removed during MGS

    Eigen::Index n_yp() const { return v_yp.cols(); }
    Eigen::Index n_u() const { return v_u.n; }
};

// POD on state/adjoint/control snapshots, then a modified Gram-Schmidt pass
// over [V_y V_p]; columns whose remainder falls below `drop_tol` times the
// original norm are dropped (counted in the result).
AggregatedSpace build_aggregated(const DenseMatrix& state_snaps, const DenseMatrix& adjoint_snaps,
                                 const DenseMatrix& control_snaps, Eigen::Index n_y,
                                 Eigen::Index n_p, Eigen::Index n_u, double drop_tol = 1e-10);

struct RbSolution {
    Vector y;
    Vector u;
    Vector p;
    double cost = 0.0;
    double kkt_residual = 0.0;   // full-order relative KKT residual of the lift
};

// Galerkin-projected KKT solver. The reduced matrix V' K_h V is formed and
// factorized once; each query assembles the full-order rhs (the Gaussian
// source is nonaffine in mu) and projects it.
class RbSolver {
public:
    RbSolver(const OcpProblem& problem, AggregatedSpace space);

    RbSolution solve(const Scenario& mu) const;

    const AggregatedSpace& space() const { return space_; }
    Eigen::Index reduced_dim() const { return k_n_.rows(); }

private:
    const OcpProblem& problem_;
    AggregatedSpace space_;
    KktSystem kkt_;
    DenseMatrix k_n_;
    Eigen::FullPivLU<DenseMatrix> lu_;
};

}  // namespace ocprom
