#include "ocprom/fem.hpp"

#include <cmath>
#include <stdexcept>

namespace ocprom {

namespace {

struct LocalGeometry {
    double area;
    // Gradients of the three barycentric shape functions.
    double gx[3];
    double gy[3];
};

LocalGeometry local_geometry(const Mesh& mesh, int t)
{
    const auto& tri = mesh.triangles[static_cast<size_t>(t)];
    const auto& p0 = mesh.nodes[tri[0]];
    const auto& p1 = mesh.nodes[tri[1]];
    const auto& p2 = mesh.nodes[tri[2]];
    LocalGeometry g;
    g.area = mesh.triangle_area(t);
    const double inv2a = 1.0 / (2.0 * g.area);
    g.gx[0] = (p1[1] - p2[1]) * inv2a;
    g.gy[0] = (p2[0] - p1[0]) * inv2a;
    g.gx[1] = (p2[1] - p0[1]) * inv2a;
    g.gy[1] = (p0[0] - p2[0]) * inv2a;
    g.gx[2] = (p0[1] - p1[1]) * inv2a;
    g.gy[2] = (p1[0] - p0[0]) * inv2a;
    return g;
}

void add_local_mass(std::vector<Triplet>& out, const std::array<int, 3>& tri, double area,
                    const int* col_map = nullptr)
{
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            const double v = area / 12.0 * (i == j ? 2.0 : 1.0);
            const int row = tri[i];
            const int col = col_map ? col_map[j] : tri[j];
            out.emplace_back(row, col, v);
        }
    }
}

void add_local_stiffness(std::vector<Triplet>& out, const std::array<int, 3>& tri,
                         const LocalGeometry& g, double coeff)
{
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            out.emplace_back(tri[i], tri[j],
                             coeff * g.area * (g.gx[i] * g.gx[j] + g.gy[i] * g.gy[j]));
}

SparseMatrix from_triplets(Eigen::Index rows, Eigen::Index cols, std::vector<Triplet>& trips)
{
    SparseMatrix m(rows, cols);
    m.setFromTriplets(trips.begin(), trips.end());
    m.makeCompressed();
    return m;
}

}  // namespace

FemOperators assemble(const Mesh& mesh, double nu, double gamma, double y_ext)
{
    if (!(nu > 0.0)) throw std::invalid_argument("assemble: nu must be > 0");
    if (gamma < 0.0) throw std::invalid_argument("assemble: gamma must be >= 0");

    const Eigen::Index n = static_cast<Eigen::Index>(mesh.nodes.size());
    FemOperators ops;

    // Control DOFs and the local index of each node within them.
    std::vector<bool> is_control_node(mesh.nodes.size(), false);
    for (size_t t = 0; t < mesh.triangles.size(); ++t) {
        if (!mesh.in_control_region[t]) continue;
        for (int v : mesh.triangles[t]) is_control_node[v] = true;
    }
    std::vector<int> local_index(mesh.nodes.size(), -1);
    for (size_t v = 0; v < mesh.nodes.size(); ++v) {
        if (is_control_node[v]) {
            local_index[v] = static_cast<int>(ops.control_dofs.size());
            ops.control_dofs.push_back(static_cast<int>(v));
        }
    }
    if (ops.control_dofs.empty())
        throw std::runtime_error("assemble: control region contains no triangles");
    const Eigen::Index nc = static_cast<Eigen::Index>(ops.control_dofs.size());

    std::vector<Triplet> ta, tm, tmobs, tmc, tkc, tb;
    for (size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tri = mesh.triangles[t];
        const LocalGeometry g = local_geometry(mesh, static_cast<int>(t));
        add_local_stiffness(ta, tri, g, nu);
        add_local_mass(tm, tri, g.area);
        if (mesh.in_control_region[t]) {
            const std::array<int, 3> ltri = {local_index[tri[0]], local_index[tri[1]],
                                             local_index[tri[2]]};
            add_local_mass(tmc, ltri, g.area);
            add_local_stiffness(tkc, ltri, g, 1.0);
            // Coupling rows use global state ids, columns control-local ids.
            const int cols[3] = {ltri[0], ltri[1], ltri[2]};
            add_local_mass(tb, tri, g.area, cols);
        }
    }

    ops.robin_load = Vector::Zero(n);
    for (const auto& e : mesh.boundary_edges) {
        const auto& pa = mesh.nodes[e.a];
        const auto& pb = mesh.nodes[e.b];
        const double len = std::hypot(pa[0] - pb[0], pa[1] - pb[1]);
        const double coeff = (e.marker == BoundaryMarker::Outer) ? 1.0 : gamma;
        // Edge mass len/6 * [[2,1],[1,2]].
        const int idx[2] = {e.a, e.b};
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                ta.emplace_back(idx[i], idx[j], coeff * len / 6.0 * (i == j ? 2.0 : 1.0));
        if (e.marker == BoundaryMarker::Obstacle) {
            for (int i = 0; i < 2; ++i) {
                for (int j = 0; j < 2; ++j)
                    tmobs.emplace_back(idx[i], idx[j], len / 6.0 * (i == j ? 2.0 : 1.0));
                ops.robin_load[idx[i]] += gamma * y_ext * len / 2.0;
            }
        }
    }

    ops.a = from_triplets(n, n, ta);
    ops.m = from_triplets(n, n, tm);
    ops.m_obs = from_triplets(n, n, tmobs);
    ops.mc = from_triplets(nc, nc, tmc);
    ops.kc = from_triplets(nc, nc, tkc);
    ops.b = from_triplets(n, nc, tb);
    return ops;
}

double gaussian_source_value(const Scenario& mu, double x1, double x2)
{
    const double cx = mu.r() * std::cos(mu.theta());
    const double cy = mu.r() * std::sin(mu.theta());
    const double d2 = (x1 - cx) * (x1 - cx) + (x2 - cy) * (x2 - cy);
    return 5000.0 * std::exp(-40.0 * d2);
}

Vector gaussian_source(const Mesh& mesh, const Scenario& mu, int quadrature_order)
{
    // Quadrature points in barycentric coordinates with weights summing to 1.
    struct QPoint {
        double l0, l1, l2, w;
    };
    std::vector<QPoint> rule;
    if (quadrature_order <= 2) {
        // Mid-edge rule, exact for degree 2.
        rule = {{0.5, 0.5, 0.0, 1.0 / 3.0},
                {0.0, 0.5, 0.5, 1.0 / 3.0},
                {0.5, 0.0, 0.5, 1.0 / 3.0}};
    } else {
        // 7-point rule, exact for degree 5.
        const double a = (6.0 + std::sqrt(15.0)) / 21.0;
        const double b = (6.0 - std::sqrt(15.0)) / 21.0;
        const double wa = (155.0 + std::sqrt(15.0)) / 1200.0;
        const double wb = (155.0 - std::sqrt(15.0)) / 1200.0;
        rule = {{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 9.0 / 40.0},
                {a, a, 1.0 - 2.0 * a, wa},
                {a, 1.0 - 2.0 * a, a, wa},
                {1.0 - 2.0 * a, a, a, wa},
                {b, b, 1.0 - 2.0 * b, wb},
                {b, 1.0 - 2.0 * b, b, wb},
                {1.0 - 2.0 * b, b, b, wb}};
    }

    Vector load = Vector::Zero(static_cast<Eigen::Index>(mesh.nodes.size()));
    for (size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tri = mesh.triangles[t];
        const auto& p0 = mesh.nodes[tri[0]];
        const auto& p1 = mesh.nodes[tri[1]];
        const auto& p2 = mesh.nodes[tri[2]];
        const double area = mesh.triangle_area(static_cast<int>(t));
        for (const auto& q : rule) {
            const double x = q.l0 * p0[0] + q.l1 * p1[0] + q.l2 * p2[0];
            const double y = q.l0 * p0[1] + q.l1 * p1[1] + q.l2 * p2[1];
            const double s = gaussian_source_value(mu, x, y);
            load[tri[0]] += area * q.w * s * q.l0;
            load[tri[1]] += area * q.w * s * q.l1;
            load[tri[2]] += area * q.w * s * q.l2;
        }
    }
    return load;
}

}  // namespace ocprom
