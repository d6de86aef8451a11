#include "ocprom/mesh.hpp"

#include "ocprom/binio.hpp"

#include <cmath>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace ocprom {

namespace {

double signed_area(const std::array<double, 2>& a, const std::array<double, 2>& b,
                   const std::array<double, 2>& c)
{
    return 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]));
}

}  // namespace

double Mesh::triangle_area(int t) const
{
    const auto& tri = triangles[static_cast<size_t>(t)];
    return signed_area(nodes[tri[0]], nodes[tri[1]], nodes[tri[2]]);
}

std::array<double, 2> Mesh::centroid(int t) const
{
    const auto& tri = triangles[static_cast<size_t>(t)];
    return {(nodes[tri[0]][0] + nodes[tri[1]][0] + nodes[tri[2]][0]) / 3.0,
            (nodes[tri[0]][1] + nodes[tri[1]][1] + nodes[tri[2]][1]) / 3.0};
}

double Mesh::boundary_length(BoundaryMarker marker) const
{
    double len = 0.0;
    for (const auto& e : boundary_edges) {
        if (e.marker != marker) continue;
        const double dx = nodes[e.a][0] - nodes[e.b][0];
        const double dy = nodes[e.a][1] - nodes[e.b][1];
        len += std::hypot(dx, dy);
    }
    return len;
}

double Mesh::total_area() const
{
    double area = 0.0;
    for (size_t t = 0; t < triangles.size(); ++t)
        area += triangle_area(static_cast<int>(t));
    return area;
}

void Mesh::write(std::ostream& out) const
{
    out.precision(17);
    out << nodes.size() << "\n";
    for (const auto& p : nodes) out << p[0] << " " << p[1] << "\n";
    out << triangles.size() << "\n";
    for (const auto& t : triangles) out << t[0] << " " << t[1] << " " << t[2] << "\n";
    out << boundary_edges.size() << "\n";
    for (const auto& e : boundary_edges)
        out << e.a << " " << e.b << " " << (e.marker == BoundaryMarker::Outer ? 0 : 1) << "\n";
    for (size_t t = 0; t < triangles.size(); ++t)
        out << (in_control_region[t] ? 1 : 0) << "\n";
}

std::uint64_t Mesh::content_hash() const
{
    std::ostringstream os;
    write(os);
    const std::string s = os.str();
    Fnv1a h;
    h.update(s.data(), s.size());
    return h.digest();
}

Mesh build_mesh(int n, double obstacle_radius, double annulus_inner, double annulus_outer)
{
    if (n < 16) throw std::invalid_argument("build_mesh: grid resolution must be >= 16");
    if (!(obstacle_radius > 0.0 && obstacle_radius < annulus_inner &&
          annulus_inner < annulus_outer && annulus_outer < 1.0))
        throw std::invalid_argument(
            "build_mesh: require 0 < obstacle radius < annulus inner < annulus outer < 1");

    const int nn = n + 1;
    const double h = 2.0 / n;
    auto node_id = [nn](int i, int j) { return j * nn + i; };

    std::vector<std::array<double, 2>> grid_nodes(static_cast<size_t>(nn) * nn);
    for (int j = 0; j < nn; ++j)
        for (int i = 0; i < nn; ++i)
            grid_nodes[node_id(i, j)] = {-1.0 + i * h, -1.0 + j * h};

    auto inside_hole = [&](const std::array<double, 2>& p) {
        return std::hypot(p[0], p[1]) < obstacle_radius;
    };

    // Two CCW triangles per cell; drop any triangle with a vertex strictly
    // inside the hole or with its centroid inside. The remaining ring of
    // nodes sits at radius >= obstacle_radius and is snapped inward.
    std::vector<std::array<int, 3>> tris;
    tris.reserve(static_cast<size_t>(2) * n * n);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const int v00 = node_id(i, j), v10 = node_id(i + 1, j);
            const int v01 = node_id(i, j + 1), v11 = node_id(i + 1, j + 1);
            for (const auto& t : {std::array<int, 3>{v00, v10, v11},
                                  std::array<int, 3>{v00, v11, v01}}) {
                const auto& a = grid_nodes[t[0]];
                const auto& b = grid_nodes[t[1]];
                const auto& c = grid_nodes[t[2]];
                if (inside_hole(a) || inside_hole(b) || inside_hole(c)) continue;
                const std::array<double, 2> cent = {(a[0] + b[0] + c[0]) / 3.0,
                                                    (a[1] + b[1] + c[1]) / 3.0};
                if (inside_hole(cent)) continue;
                tris.push_back(t);
            }
        }
    }

    // Compact the node set to those actually referenced.
    std::vector<int> remap(grid_nodes.size(), -1);
    Mesh mesh;
    mesh.obstacle_radius = obstacle_radius;
    mesh.annulus_inner = annulus_inner;
    mesh.annulus_outer = annulus_outer;
    for (auto& t : tris) {
        for (int& v : t) {
            if (remap[v] < 0) {
                remap[v] = static_cast<int>(mesh.nodes.size());
                mesh.nodes.push_back(grid_nodes[v]);
            }
            v = remap[v];
        }
    }
    mesh.triangles = std::move(tris);

    // Boundary edges: appear in exactly one triangle.
    std::map<std::pair<int, int>, int> edge_count;
    for (const auto& t : mesh.triangles) {
        for (int k = 0; k < 3; ++k) {
            int a = t[k], b = t[(k + 1) % 3];
            if (a > b) std::swap(a, b);
            edge_count[{a, b}]++;
        }
    }

    // Ring nodes: endpoints of boundary edges not on the outer square.
    const double outer_tol = 1e-12;
    auto on_square = [&](const std::array<double, 2>& p) {
        return std::abs(std::abs(p[0]) - 1.0) < outer_tol ||
               std::abs(std::abs(p[1]) - 1.0) < outer_tol;
    };
    std::vector<bool> on_ring(mesh.nodes.size(), false);
    for (const auto& [edge, count] : edge_count) {
        if (count != 1) continue;
        if (!on_square(mesh.nodes[edge.first]) || !on_square(mesh.nodes[edge.second])) {
            on_ring[edge.first] = true;
            on_ring[edge.second] = true;
        }
    }
    // A ring node that happens to sit on the square would be a meshing bug;
    // the precondition obstacle_radius < 1 keeps the two sets disjoint.
    for (size_t v = 0; v < mesh.nodes.size(); ++v) {
        if (!on_ring[v]) continue;
        auto& p = mesh.nodes[v];
        const double r = std::hypot(p[0], p[1]);
        p[0] *= obstacle_radius / r;
        p[1] *= obstacle_radius / r;
    }

    for (size_t t = 0; t < mesh.triangles.size(); ++t) {
        if (!(mesh.triangle_area(static_cast<int>(t)) > 0.0)) {
            const auto& tri = mesh.triangles[t];
            throw std::runtime_error("build_mesh: snapping degenerated triangle " +
                                     std::to_string(t) + " (" + std::to_string(tri[0]) + "," +
                                     std::to_string(tri[1]) + "," + std::to_string(tri[2]) + ")");
        }
    }

    for (const auto& [edge, count] : edge_count) {
        if (count != 1) continue;
        BoundaryEdge e;
        e.a = edge.first;
        e.b = edge.second;
        const bool obstacle = on_ring[e.a] && on_ring[e.b];
        const bool outer = on_square(mesh.nodes[e.a]) && on_square(mesh.nodes[e.b]);
        if (obstacle == outer)
            throw std::runtime_error("build_mesh: boundary edge with ambiguous marker");
        e.marker = obstacle ? BoundaryMarker::Obstacle : BoundaryMarker::Outer;
        mesh.boundary_edges.push_back(e);
    }

    mesh.in_control_region.resize(mesh.triangles.size());
    for (size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto c = mesh.centroid(static_cast<int>(t));
        const double r = std::hypot(c[0], c[1]);
        mesh.in_control_region[t] = (r >= annulus_inner && r <= annulus_outer);
    }

    return mesh;
}

}  // namespace ocprom
