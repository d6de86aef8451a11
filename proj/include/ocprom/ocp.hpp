#pragma once

#include "ocprom/fem.hpp"
#include "ocprom/linalg.hpp"
#include "ocprom/mesh.hpp"
#include "ocprom/optimize.hpp"
#include "ocprom/scenario.hpp"

#include <functional>
#include <memory>
#include <optional>

namespace ocprom {

struct UnsteadyConfig {
    double final_time = 1.0;
    int steps = 1;
    Vector initial_state;   // empty means zero
};

// A parametrized linear-quadratic optimal control problem: steady (or
// backward-Euler unsteady) state equation A y = B u + f(mu) with cost
//   J(y, u) = y' Mobs y + beta u' Mc u + beta_g u' Kc u.
struct OcpProblem {
    FemOperators ops;
    double beta = 1e-8;
    double beta_g = 1e-8;
    ParameterBox box;
    double nu = 1.0;
    double gamma = 1.0;
    double y_ext = 125.0;
    std::uint64_t mesh_hash = 0;   // provenance of the assembled operators
    // Scenario-dependent source load, excluding the Robin boundary term.
    std::function<Vector(const Scenario&)> source_load;
    std::optional<UnsteadyConfig> unsteady;

    void validate() const;
    SparseMatrix regularization() const;              // beta*Mc + beta_g*Kc
    Vector rhs_load(const Scenario& mu) const;        // source_load(mu) + robin_load
};

// The Test-2 thermal-cooling problem on the given mesh; keeps the mesh alive
// for per-scenario source quadrature.
OcpProblem make_cooling_problem(std::shared_ptr<const Mesh> mesh, double nu, double gamma,
                                double y_ext, double beta, double beta_g,
                                const ParameterBox& box);

struct KktSystem {
    SparseMatrix k;      // symmetric blocks [[Mobs,0,A'],[0,R,-B'],[A,-B,0]]
    Vector rhs;          // [0; 0; f(mu)]
    Eigen::Index n_state = 0;
    Eigen::Index n_control = 0;
};

struct OptimalPair {
    Vector y;
    Vector u;
    std::optional<Vector> p;
    double cost = 0.0;
    int solver_iterations = 0;
    // Unsteady trajectories, one column per time step (empty for steady).
    DenseMatrix y_traj;
    DenseMatrix u_traj;
};

KktSystem assemble_kkt(const OcpProblem& problem, const Scenario& mu);

// All-at-once KKT solver with a reusable factorization (the KKT matrix does
// not depend on the scenario).
class DirectSolver {
public:
    explicit DirectSolver(const OcpProblem& problem);
    OptimalPair solve(const Scenario& mu) const;

private:
    const OcpProblem& problem_;
    KktSystem kkt_;
    SparseFactorization factorization_;
};

OptimalPair solve_direct(const OcpProblem& problem, const Scenario& mu);

// Adjoint-based descent on the reduced cost J(y(u), u).
OptimalPair solve_indirect(const OcpProblem& problem, const Scenario& mu,
                           const OptimizerConfig& cfg);

// Reduced-cost value and gradient at a given control (exposed for gradient
// verification).
double reduced_cost(const OcpProblem& problem, const Scenario& mu, const Vector& u,
                    Vector* grad = nullptr);

// Backward-Euler forward march / backward adjoint march over the stacked
// time-grid control.
OptimalPair solve_unsteady(const OcpProblem& problem, const Scenario& mu,
                           const OptimizerConfig& cfg);

double unsteady_cost(const OcpProblem& problem, const Scenario& mu, const DenseMatrix& u_traj,
                     DenseMatrix* grad = nullptr, DenseMatrix* y_traj_out = nullptr);

double eval_cost(const OcpProblem& problem, const Vector& y, const Vector& u);

}  // namespace ocprom
