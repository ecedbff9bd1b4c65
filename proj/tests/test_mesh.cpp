#include <catch_amalgamated.hpp>

#include "cdii/mesh.hpp"

#include <algorithm>
#include <sstream>

using namespace cdii;
using Catch::Approx;

TEST_CASE("uniform mesh sizes", "[mesh]") {
  const Mesh m4 = build_uniform_mesh(4);
  CHECK(m4.node_count() == 16);
  CHECK(m4.triangle_count() == 18);
  CHECK(m4.h() == Approx(1.0 / 3.0));

  const Mesh m2 = build_uniform_mesh(2);
  CHECK(m2.node_count() == 4);
  CHECK(m2.triangle_count() == 2);
  CHECK(m2.h() == 1.0);

  CHECK_THROWS_AS(build_uniform_mesh(1), std::invalid_argument);
  CHECK_THROWS_AS(build_uniform_mesh(0), std::invalid_argument);
}

TEST_CASE("triangle count, areas and orientation", "[mesh][property]") {
  for (Index n = 2; n <= 12; ++n) {
    const Mesh mesh = build_uniform_mesh(n);
    CHECK(mesh.triangle_count() == 2 * (n - 1) * (n - 1));
    double total = 0.0;
    for (Index t = 0; t < mesh.triangle_count(); ++t) {
      CHECK(mesh.area(t) == Approx(mesh.h() * mesh.h() / 2.0).epsilon(1e-13));
      const auto tri = mesh.triangles().row(t);
      const Eigen::Vector2d a = mesh.node(tri(1)) - mesh.node(tri(0));
      const Eigen::Vector2d b = mesh.node(tri(2)) - mesh.node(tri(0));
      CHECK(a.x() * b.y() - a.y() * b.x() > 0.0);
      total += mesh.area(t);
    }
    CHECK(std::abs(total - 1.0) < 1e-12);
  }
}

TEST_CASE("node adjacency of the 4x4 grid", "[mesh]") {
  const Mesh mesh = build_uniform_mesh(4);
  // Node 9 is interior, at (1/3, 2/3).
  CHECK(adjacent_triangles(mesh, 9).size() == 6);
  // Southwest corner: one triangle; southeast and northwest corners: two.
  CHECK(adjacent_triangles(mesh, mesh.node_id(0, 0)).size() == 1);
  CHECK(adjacent_triangles(mesh, mesh.node_id(3, 0)).size() == 2);
  CHECK(adjacent_triangles(mesh, mesh.node_id(0, 3)).size() == 2);
  CHECK(adjacent_triangles(mesh, mesh.node_id(3, 3)).size() == 1);
  // Triangle 10 sits in the cell spanned by nodes 6 (SW) and 11 (NE).
  const auto tri = mesh.triangles().row(10);
  CHECK(tri(0) == 6);
  CHECK(std::find(tri.data(), tri.data() + 3, 11) == tri.data() + 3);
  CHECK(mesh.triangles()(11, 0) == 11);
}

TEST_CASE("basis gradients follow the plane formulas", "[mesh]") {
  const Mesh unit = build_uniform_mesh(2);
  const LocalGradients odd = basis_gradients(unit, 0);
  CHECK(odd.row(0).isApprox(Eigen::RowVector2d(-1, -1)));
  CHECK(odd.row(1).isApprox(Eigen::RowVector2d(1, 0)));
  CHECK(odd.row(2).isApprox(Eigen::RowVector2d(0, 1)));

  // Even triangle: gradient set {(1,1), (0,-1), (-1,0)}; vertex order is NE, NW, SE
  // so the stored triangle stays counterclockwise.
  const LocalGradients even = basis_gradients(unit, 1);
  CHECK(even.row(0).isApprox(Eigen::RowVector2d(1, 1)));
  CHECK(even.row(1).isApprox(Eigen::RowVector2d(-1, 0)));
  CHECK(even.row(2).isApprox(Eigen::RowVector2d(0, -1)));

  CHECK_THROWS_AS(basis_gradients(unit, 2), std::out_of_range);
  CHECK_THROWS_AS(basis_gradients(unit, -1), std::out_of_range);

  // Plane formulas anchored at the southwest (odd) or northeast (even) grid point.
  const Mesh mesh = build_uniform_mesh(5);
  const double h = mesh.h();
  for (Index t = 0; t < mesh.triangle_count(); ++t) {
    const auto tri = mesh.triangles().row(t);
    const LocalGradients g = basis_gradients(mesh, t);
    CHECK(g.colwise().sum().norm() < 1e-12);
    if (t % 2 == 0) {
      CHECK(g.row(0).isApprox(Eigen::RowVector2d(-1, -1) / h));
      CHECK(g.row(1).isApprox(Eigen::RowVector2d(1, 0) / h));
      CHECK(g.row(2).isApprox(Eigen::RowVector2d(0, 1) / h));
    } else {
      CHECK(g.row(0).isApprox(Eigen::RowVector2d(1, 1) / h));
      CHECK(g.row(1).isApprox(Eigen::RowVector2d(-1, 0) / h));
      CHECK(g.row(2).isApprox(Eigen::RowVector2d(0, -1) / h));
    }
    // Partition of unity at centroid and vertices.
    CHECK(barycentric(mesh, t, mesh.centroid(t)).sum() == Approx(1.0).epsilon(1e-14));
    for (int v = 0; v < 3; ++v) {
      const Eigen::Vector3d lam = barycentric(mesh, t, mesh.node(tri(v)));
      CHECK(lam.sum() == Approx(1.0).epsilon(1e-14));
      CHECK(lam[v] == Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("boundary edges", "[mesh][property]") {
  for (Index n : {2, 3, 7}) {
    const Mesh mesh = build_uniform_mesh(n);
    CHECK(mesh.boundary_edges().size() == static_cast<std::size_t>(4 * (n - 1)));
    for (Side side : {Side::bottom, Side::right, Side::top, Side::left}) {
      const auto count = std::count_if(mesh.boundary_edges().begin(), mesh.boundary_edges().end(),
                                       [&](const BoundaryEdge& e) { return e.side == side; });
      CHECK(count == n - 1);
    }
    for (const auto& e : mesh.boundary_edges()) {
      CHECK((mesh.node(e.nodes[1]) - mesh.node(e.nodes[0])).norm() == Approx(mesh.h()));
      // Exactly one triangle contains both end nodes, and it is the recorded one.
      int owners = 0;
      for (Index t = 0; t < mesh.triangle_count(); ++t) {
        const auto tri = mesh.triangles().row(t);
        auto has = [&](Index v) { return tri(0) == v || tri(1) == v || tri(2) == v; };
        if (has(e.nodes[0]) && has(e.nodes[1])) {
          ++owners;
          CHECK(t == e.triangle);
        }
      }
      CHECK(owners == 1);
    }
  }
}

TEST_CASE("locate_electrodes", "[mesh]") {
  const Mesh mesh = build_uniform_mesh(4);
  SECTION("full bottom side") {
    const ElectrodeSpan spans[] = {{Side::bottom, 0.0, 1.0}, {Side::top, 0.0, 1.0}};
    const double z[] = {8.3e-3, 8.3e-3};
    const ElectrodeSetup setup = locate_electrodes(mesh, spans, z);
    REQUIRE(setup.size() == 2);
    CHECK(setup[0].edges.size() == 3);
    CHECK(setup[0].length == Approx(1.0));
    CHECK(setup[1].length == Approx(1.0));
    CHECK(setup[0].z == 8.3e-3);
    CHECK(setup.nodes_of(mesh, 0) == std::vector<Index>{0, 1, 2, 3});
    CHECK(setup.electrode_of_node(mesh, 15) == 1);
    CHECK(setup.electrode_of_node(mesh, 5) == -1);
  }
  SECTION("partial span is contiguous") {
    const ElectrodeSpan spans[] = {{Side::left, 1.0 / 3.0, 1.0}, {Side::right, 0.0, 2.0 / 3.0}};
    const double z[] = {1.0, 2.0};
    const ElectrodeSetup setup = locate_electrodes(mesh, spans, z);
    CHECK(setup[0].edges.size() == 2);
    CHECK(setup[0].length == Approx(2.0 / 3.0));
    CHECK(setup[1].edges[1] == setup[1].edges[0] + 1);
  }
  SECTION("overlap is rejected") {
    const ElectrodeSpan spans[] = {{Side::bottom, 0.0, 2.0 / 3.0}, {Side::bottom, 1.0 / 3.0, 1.0}};
    const double z[] = {1.0, 1.0};
    CHECK_THROWS_AS(locate_electrodes(mesh, spans, z), ElectrodeSpanError);
  }
  SECTION("touching spans share a node but no edge") {
    const ElectrodeSpan spans[] = {{Side::bottom, 0.0, 1.0 / 3.0}, {Side::bottom, 1.0 / 3.0, 1.0}};
    const double z[] = {1.0, 1.0};
    CHECK_NOTHROW(locate_electrodes(mesh, spans, z));
  }
  SECTION("misaligned interval") {
    const ElectrodeSpan spans[] = {{Side::bottom, 0.0, 0.5}, {Side::top, 0.0, 1.0}};
    const double z[] = {1.0, 1.0};
    try {
      locate_electrodes(mesh, spans, z);
      FAIL("expected ElectrodeSpanError");
    } catch (const ElectrodeSpanError& e) {
      CHECK(e.electrode() == 0);
      CHECK(e.field() == "interval");
    }
  }
  SECTION("non-positive impedance") {
    const ElectrodeSpan spans[] = {{Side::bottom, 0.0, 1.0}, {Side::top, 0.0, 1.0}};
    const double z[] = {1.0, 0.0};
    try {
      locate_electrodes(mesh, spans, z);
      FAIL("expected ElectrodeSpanError");
    } catch (const ElectrodeSpanError& e) {
      CHECK(e.electrode() == 1);
      CHECK(e.field() == "z");
    }
  }
}

TEST_CASE("mesh csv dump", "[mesh]") {
  std::ostringstream out;
  write_mesh_csv(out, build_uniform_mesh(2));
  const std::string text = out.str();
  CHECK(text.find("id,x,y\n0,0,0\n1,1,0\n") != std::string::npos);
  CHECK(text.find("id,v0,v1,v2\n0,0,1,2\n1,3,2,1\n") != std::string::npos);
}
