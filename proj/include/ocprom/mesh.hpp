#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

namespace ocprom {

enum class BoundaryMarker : std::uint8_t { Outer, Obstacle };

struct BoundaryEdge {
    int a = 0;
    int b = 0;
    BoundaryMarker marker = BoundaryMarker::Outer;
};

// Triangulation of the square (-1,1)^2 with a circular hole at the origin.
// Built from a structured background grid: triangles near the hole are
// deleted and the resulting ring of nodes is snapped onto the circle.
struct Mesh {
    std::vector<std::array<double, 2>> nodes;
    std::vector<std::array<int, 3>> triangles;    // counter-clockwise
    std::vector<BoundaryEdge> boundary_edges;
    std::vector<bool> in_control_region;          // per triangle, centroid in annulus

    double obstacle_radius = 0.0;
    double annulus_inner = 0.0;
    double annulus_outer = 0.0;

    double triangle_area(int t) const;
    std::array<double, 2> centroid(int t) const;
    double boundary_length(BoundaryMarker marker) const;
    double total_area() const;

    // Plain-text export: node count + "x y" lines, triangle count + "i j k"
    // lines, boundary edges "i j marker", then one subdomain flag per triangle.
    void write(std::ostream& out) const;
    std::uint64_t content_hash() const;
};

Mesh build_mesh(int n, double obstacle_radius, double annulus_inner, double annulus_outer);

}  // namespace ocprom
