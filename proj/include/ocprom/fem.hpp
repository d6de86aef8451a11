#pragma once

#include "ocprom/linalg.hpp"
#include "ocprom/mesh.hpp"
#include "ocprom/scenario.hpp"

namespace ocprom {

// Assembled P1 operators for the thermal-cooling problem. All matrices are
// stated on the full node set except Mc/Kc/B columns, which are indexed by
// the control degrees of freedom (nodes touching a control triangle).
struct FemOperators {
    SparseMatrix a;          // nu * stiffness + outer Robin mass + gamma * obstacle mass
    SparseMatrix m;          // domain mass
    SparseMatrix m_obs;      // boundary mass on the obstacle ring
    SparseMatrix mc;         // control mass, assembled over control triangles only
    SparseMatrix kc;         // control stiffness, assembled over control triangles only
    SparseMatrix b;          // control-to-state coupling, n_state x n_control
    Vector robin_load;       // gamma * y_ext * obstacle boundary load
    std::vector<int> control_dofs;  // ascending node ids of the control DOFs

    Eigen::Index n_state() const { return a.rows(); }
    Eigen::Index n_control() const { return mc.rows(); }
};

FemOperators assemble(const Mesh& mesh, double nu, double gamma, double y_ext);

// Pointwise heat source for scenario mu, s = 5000 exp(-40 |x - x_s|^2) with
// the source center at (r cos theta, r sin theta).
double gaussian_source_value(const Scenario& mu, double x1, double x2);

// Load vector (s, phi_i) via a per-triangle quadrature rule; order 2 = 3-point
// mid-edge rule (the default), order 5 = 7-point rule (quadrature checks).
Vector gaussian_source(const Mesh& mesh, const Scenario& mu, int quadrature_order = 2);

}  // namespace ocprom
