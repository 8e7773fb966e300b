#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "mpet/mesh.hpp"

using namespace mpet;

TEST_CASE("smallest mesh has the expected entity counts") {
  const TriMesh mesh = build_unit_square_mesh(1);
  CHECK(mesh.num_cells() == 2);
  CHECK(mesh.num_vertices() == 4);
  CHECK(mesh.num_edges() == 5);
  int boundary = 0;
  for (int e = 0; e < mesh.num_edges(); ++e)
    boundary += mesh.is_boundary_edge(e) ? 1 : 0;
  CHECK(boundary == 4);
}

TEST_CASE("entity counts follow the closed forms") {
  for (int N : {2, 3, 16, 64}) {
    const TriMesh mesh = build_unit_square_mesh(N);
    CHECK(mesh.num_cells() == 2 * N * N);
    CHECK(mesh.num_vertices() == (N + 1) * (N + 1));
    CHECK(mesh.num_edges() == 3 * N * N + 2 * N);
    // Euler relation for a disc-like complex.
    CHECK(mesh.num_vertices() - mesh.num_edges() + mesh.num_cells() == 1);
  }
}

TEST_CASE("brute-force edge enumeration matches the edge list at N=16") {
  const TriMesh mesh = build_unit_square_mesh(16);
  std::set<std::pair<int, int>> unique_edges;
  for (const auto &cell : mesh.cells)
    for (int k = 0; k < 3; ++k) {
      int a = cell[k], b = cell[(k + 1) % 3];
      if (a > b)
        std::swap(a, b);
      unique_edges.insert({a, b});
    }
  CHECK(int(unique_edges.size()) == 3 * 16 * 16 + 2 * 16);
  CHECK(mesh.num_edges() == int(unique_edges.size()));
  for (const auto &e : mesh.edges) {
    CHECK(e[0] < e[1]);
    CHECK(unique_edges.count({e[0], e[1]}) == 1);
  }
}

TEST_CASE("cells are CCW with area h^2/2 and areas sum to one") {
  const TriMesh mesh = build_unit_square_mesh(7);
  const double expected = 0.5 * mesh.h * mesh.h;
  double total = 0.0;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    CHECK(mesh.cell_area(c) == doctest::Approx(expected).epsilon(1e-14));
    CHECK(mesh.cell_area(c) > 0.0);
    total += mesh.cell_area(c);
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("interior edges are shared with opposite signs") {
  const TriMesh mesh = build_unit_square_mesh(5);
  std::vector<int> sign_sum(mesh.num_edges(), 0);
  std::vector<int> refs(mesh.num_edges(), 0);
  for (int c = 0; c < mesh.num_cells(); ++c)
    for (const auto &[e, sign] : mesh.cell_edges[c]) {
      sign_sum[e] += sign;
      refs[e] += 1;
    }
  for (int e = 0; e < mesh.num_edges(); ++e) {
    if (mesh.is_boundary_edge(e)) {
      CHECK(refs[e] == 1);
    } else {
      CHECK(refs[e] == 2);
      CHECK(sign_sum[e] == 0);
    }
  }
}

TEST_CASE("sign convention gives outward normals") {
  const TriMesh mesh = build_unit_square_mesh(3);
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const Vector2 centroid = mesh.cell_centroid(c);
    for (const auto &[e, sign] : mesh.cell_edges[c]) {
      const Vector2 outward = double(sign) * mesh.edge_normal(e);
      CHECK(outward.dot(mesh.edge_midpoint(e) - centroid) > 0.0);
    }
  }
}

TEST_CASE("boundary tags partition the boundary") {
  SUBCASE("N=1 bottom edge") {
    const TriMesh mesh = build_unit_square_mesh(1);
    const auto gamma1 = boundary_edges(mesh, BoundaryTag::Gamma1);
    REQUIRE(gamma1.size() == 1);
    const auto &e = mesh.edges[gamma1[0]];
    CHECK(mesh.vertices[e[0]].y() == 0.0);
    CHECK(mesh.vertices[e[1]].y() == 0.0);
  }
  SUBCASE("N=16 has 16 edges per tag, disjoint, covering") {
    const TriMesh mesh = build_unit_square_mesh(16);
    std::set<int> all;
    for (BoundaryTag tag : kAllBoundaryTags) {
      const auto edges = boundary_edges(mesh, tag);
      CHECK(edges.size() == 16);
      all.insert(edges.begin(), edges.end());
    }
    CHECK(all.size() == 64);
    int boundary = 0;
    for (int e = 0; e < mesh.num_edges(); ++e)
      boundary += mesh.is_boundary_edge(e) ? 1 : 0;
    CHECK(boundary == 64);
  }
  SUBCASE("N=4 left edges all at x=0") {
    const TriMesh mesh = build_unit_square_mesh(4);
    const auto gamma4 = boundary_edges(mesh, BoundaryTag::Gamma4);
    CHECK(gamma4.size() == 4);
    for (int e : gamma4) {
      CHECK(mesh.vertices[mesh.edges[e][0]].x() == 0.0);
      CHECK(mesh.vertices[mesh.edges[e][1]].x() == 0.0);
    }
  }
}

TEST_CASE("N = 0 is rejected") {
  CHECK_THROWS_AS(build_unit_square_mesh(0), std::invalid_argument);
}

TEST_CASE("mesh dump lists every entity once") {
  const TriMesh mesh = build_unit_square_mesh(2);
  std::ostringstream os;
  dump_mesh(mesh, os);
  const std::string text = os.str();
  auto count = [&text](const std::string &word) {
    size_t pos = 0, hits = 0;
    while ((pos = text.find(word, pos)) != std::string::npos) {
      ++hits;
      pos += word.size();
    }
    return hits;
  };
  CHECK(count("vertex ") == size_t(mesh.num_vertices()));
  CHECK(count("cell ") == size_t(mesh.num_cells()));
  CHECK(count("edge ") == size_t(mesh.num_edges()));
}
