#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ocprom/fem.hpp"
#include "ocprom/mesh.hpp"

#include <cmath>

using namespace ocprom;

namespace {

const Mesh& mesh32()
{
    static const Mesh m = build_mesh(32, 0.15, 0.2, 0.3);
    return m;
}

}  // namespace

TEST_CASE("mesh geometry: areas, hole, and ring snapping")
{
    const Mesh& m = mesh32();
    REQUIRE(!m.triangles.empty());
    double area = 0.0;
    for (int t = 0; t < static_cast<int>(m.triangles.size()); ++t) {
        CHECK(m.triangle_area(t) > 0.0);   // positive <=> counter-clockwise
        area += m.triangle_area(t);
    }
    const double h = 2.0 / 32.0;
    // The hole removes roughly pi r^2; the staircase-to-circle gap is O(h).
    CHECK(area == doctest::Approx(4.0 - M_PI * 0.15 * 0.15).epsilon(5 * h));
    CHECK(area == doctest::Approx(m.total_area()).epsilon(1e-12));

    int on_ring = 0;
    for (const auto& e : m.boundary_edges)
        if (e.marker == BoundaryMarker::Obstacle)
            for (int node : {e.a, e.b}) {
                const double r = std::hypot(m.nodes[node][0], m.nodes[node][1]);
                CHECK(r == doctest::Approx(0.15).epsilon(1e-12));
                ++on_ring;
            }
    CHECK(on_ring > 0);
}

TEST_CASE("mesh boundary lengths approximate the two boundaries")
{
    const Mesh& m = mesh32();
    CHECK(m.boundary_length(BoundaryMarker::Outer) == doctest::Approx(8.0).epsilon(1e-12));
    // Snapped polygon inscribed in the circle: length below, but close to, 2 pi r.
    const double ring = m.boundary_length(BoundaryMarker::Obstacle);
    CHECK(ring < 2.0 * M_PI * 0.15 + 1e-12);
    CHECK(ring > 0.9 * 2.0 * M_PI * 0.15);
}

TEST_CASE("mesh has a control region and a stable content hash")
{
    const Mesh& m = mesh32();
    int control = 0;
    for (size_t t = 0; t < m.triangles.size(); ++t)
        if (m.in_control_region[t]) {
            const auto c = m.centroid(static_cast<int>(t));
            const double r = std::hypot(c[0], c[1]);
            CHECK(r > 0.2);
            CHECK(r < 0.3);
            ++control;
        }
    CHECK(control > 0);

    const Mesh again = build_mesh(32, 0.15, 0.2, 0.3);
    CHECK(m.content_hash() == again.content_hash());
    const Mesh other = build_mesh(36, 0.15, 0.2, 0.3);
    CHECK(m.content_hash() != other.content_hash());
}

TEST_CASE("build_mesh rejects bad inputs")
{
    CHECK_THROWS_AS(build_mesh(8, 0.15, 0.2, 0.3), std::invalid_argument);
    CHECK_THROWS_AS(build_mesh(32, 0.3, 0.2, 0.3), std::invalid_argument);
}

TEST_CASE("mass matrix integrates constants exactly")
{
    const Mesh& m = mesh32();
    const FemOperators ops = assemble(m, 1.0, 1.0, 125.0);
    const Vector ones = Vector::Ones(ops.n_state());
    // 1' M 1 = |Omega|
    CHECK(ones.dot(ops.m * ones) == doctest::Approx(m.total_area()).epsilon(1e-12));
    // 1' M_obs 1 = |Gamma_obs|
    CHECK(ones.dot(ops.m_obs * ones) ==
          doctest::Approx(m.boundary_length(BoundaryMarker::Obstacle)).epsilon(1e-12));
    // Robin load applied to constants: gamma * y_ext * |Gamma_obs|
    CHECK(ones.dot(ops.robin_load) ==
          doctest::Approx(125.0 * m.boundary_length(BoundaryMarker::Obstacle)).epsilon(1e-12));
}

TEST_CASE("system matrix on constants reduces to the boundary masses")
{
    const Mesh& m = mesh32();
    const double gamma = 2.5;
    const FemOperators ops = assemble(m, 3.0, gamma, 125.0);
    const Vector ones = Vector::Ones(ops.n_state());
    // Stiffness kills constants, so 1' A 1 = |Gamma_d| + gamma |Gamma_obs|.
    const double expected = m.boundary_length(BoundaryMarker::Outer) +
                            gamma * m.boundary_length(BoundaryMarker::Obstacle);
    CHECK(ones.dot(ops.a * ones) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("control operators act on the control patch only")
{
    const Mesh& m = mesh32();
    const FemOperators ops = assemble(m, 1.0, 1.0, 125.0);
    REQUIRE(ops.n_control() > 0);
    CHECK(ops.b.rows() == ops.n_state());
    CHECK(ops.b.cols() == ops.n_control());
    CHECK(ops.mc.rows() == ops.n_control());
    CHECK(ops.kc.rows() == ops.n_control());

    // 1' Mc 1 = |Omega_c|
    double control_area = 0.0;
    for (size_t t = 0; t < m.triangles.size(); ++t)
        if (m.in_control_region[t]) control_area += m.triangle_area(static_cast<int>(t));
    const Vector ones_c = Vector::Ones(ops.n_control());
    CHECK(ones_c.dot(ops.mc * ones_c) == doctest::Approx(control_area).epsilon(1e-12));

    // Kc kills constants; B on constants integrates phi_i over Omega_c.
    CHECK((ops.kc * ones_c).norm() < 1e-12);
    const Vector b1 = ops.b * ones_c;
    CHECK(b1.sum() == doctest::Approx(control_area).epsilon(1e-12));

    // Control DOF node ids are sorted and unique.
    for (size_t i = 1; i < ops.control_dofs.size(); ++i)
        CHECK(ops.control_dofs[i] > ops.control_dofs[i - 1]);
}

TEST_CASE("gaussian source load agrees with a higher-order quadrature oracle")
{
    const Mesh& m = mesh32();
    Scenario mu;
    mu.params = Vector(2);
    mu.params << -0.22, 0.44;

    CHECK(gaussian_source_value(mu, 0.44 * std::cos(-0.22), 0.44 * std::sin(-0.22)) ==
          doctest::Approx(5000.0).epsilon(1e-12));

    const Vector f2 = gaussian_source(m, mu, 2);
    const Vector f5 = gaussian_source(m, mu, 5);
    // Both rules integrate the same smooth integrand; they agree to the
    // quadrature error, far tighter than either is to the true integral.
    CHECK((f2 - f5).norm() <= 2e-2 * f5.norm());
    // Total heat input approximates the Gaussian mass 5000 * pi / 40.
    CHECK(f5.sum() == doctest::Approx(5000.0 * M_PI / 40.0).epsilon(2e-2));
}

TEST_CASE("operator matrices are symmetric")
{
    const FemOperators ops = assemble(mesh32(), 1.0, 1.0, 125.0);
    CHECK((DenseMatrix(ops.a) - DenseMatrix(ops.a).transpose()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((DenseMatrix(ops.mc) - DenseMatrix(ops.mc).transpose()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((DenseMatrix(ops.kc) - DenseMatrix(ops.kc).transpose()).cwiseAbs().maxCoeff() < 1e-12);
}
