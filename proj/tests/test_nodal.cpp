#include <doctest.h>

#include <cmath>

#include "nodalab/nodal.hpp"

using namespace nodalab;

namespace {

const Grid& rect64() {
  static const Grid g = build_grid(DomainSpec::rectangle(1.0, 0.618), 64);
  return g;
}

const std::vector<EigenPair>& rect_spectrum() {
  static const auto s = lowest_eigenpairs(assemble_operator(rect64()), 13);
  return s;
}

}  // namespace

TEST_CASE("deficiency is n - nu") {
  CHECK(nodal_deficiency(6, 4) == 2);
  CHECK(nodal_deficiency(1, 1) == 0);
  CHECK_THROWS(nodal_deficiency(2, 3));
}

TEST_CASE("partition graph examples") {
  SUBCASE("path on two vertices") {
    const PartitionGraph g = partition_graph(2, {{1, 2}});
    CHECK(g.bipartite);
    CHECK(g.is_tree);
    CHECK(g.color[0] == -g.color[1]);
  }
  SUBCASE("3x2 grid graph") {
    const Partition p = build_straight_partition(rect64(), 3, 2);
    const PartitionGraph g = partition_graph(p);
    CHECK(g.edges.size() == 7);
    CHECK(g.bipartite);
    CHECK_FALSE(g.is_tree);
  }
  SUBCASE("triangle") {
    const PartitionGraph g = partition_graph(3, {{1, 2}, {2, 3}, {1, 3}});
    CHECK_FALSE(g.bipartite);
    CHECK_FALSE(g.is_tree);
  }
}

TEST_CASE("rectangle deficiency table at coarse resolution") {
  const int expected[12][2] = {{1, 1}, {2, 2}, {3, 2}, {4, 3}, {5, 4},  {6, 4},
                               {7, 6}, {8, 3}, {9, 8}, {10, 6}, {11, 5}, {12, 9}};
  const auto table = deficiency_table(rect_spectrum(), rect64(), 12);
  REQUIRE(table.size() == 12);
  for (int i = 0; i < 12; ++i) {
    CAPTURE(i);
    CHECK(table[i].n == expected[i][0]);
    CHECK(table[i].nu == expected[i][1]);
    CHECK(table[i].nu <= table[i].n);
    CHECK(table[i].bipartite);
    if (table[i].genericity.generic()) CHECK(table[i].is_tree);
  }
}

TEST_CASE("nodal domains carry the eigenvalue as ground energy") {
  for (int n : {2, 3, 4}) {
    const EigenPair& e = rect_spectrum()[n - 1];
    const Partition p = nodal_partition(e, rect64());
    for (int j = 1; j <= p.nu; ++j)
      CHECK(std::abs(subdomain_groundstate(p, rect64(), j).lambda - e.lambda) / e.lambda < 1e-2);
  }
}

TEST_CASE("a crossing makes a partition non-generic") {
  // (2,2) product mode: index 5 on this rectangle.
  const auto r = genericity_check(rect_spectrum(), 4, rect64());
  CHECK(r.simple_eigenvalue);
  CHECK_FALSE(r.generic());
  CHECK(genericity_check(rect_spectrum(), 2, rect64()).generic());
}

TEST_CASE("degenerate eigenvalues are flagged") {
  const Grid g = build_grid(DomainSpec::rectangle(1.0, 1.0), 32);
  const auto s = lowest_eigenpairs(assemble_operator(g), 4);
  CHECK_FALSE(genericity_check(s, 1, g).simple_eigenvalue);
  CHECK_FALSE(genericity_check(s, 2, g).simple_eigenvalue);
  const auto table = deficiency_table(s, g, 3);
  CHECK(table.size() == 1);
}

TEST_CASE("contours of a product mode are straight") {
  const EigenPair& e = rect_spectrum()[1];  // (2,1): x = 1/2
  const auto curves = zero_contours(e.psi, rect64());
  REQUIRE(curves.size() == 1);
  CHECK(curves[0].kind == CurveKind::boundary_attached);
  for (const Vec2& x : curves[0].points) CHECK(std::abs(x.x - 0.5) < 0.5 / 64);
}

TEST_CASE("disk nodal partitions are bipartite; generic ones are trees") {
  const Grid g = build_grid(DomainSpec::disk(0.5), 96);
  const auto s = lowest_eigenpairs(assemble_operator(g), 11);
  const auto table = deficiency_table(s, g, 10);
  CHECK(table.size() >= 3);
  for (const NodalReport& r : table) {
    CAPTURE(r.n);
    CHECK(r.bipartite);
    CHECK(r.nu <= r.n);
    if (r.genericity.generic()) CHECK(r.is_tree);
  }
  // The radial ground state has one nodal domain; the first radial excitation two.
  CHECK(table.front().nu == 1);
}

TEST_CASE("sign components ignore the dead band") {
  const Grid g = build_grid(DomainSpec::rectangle(1.0, 1.0), 16);
  std::vector<double> psi(g.size(), 0.0);
  for (int k = 0; k < g.size(); ++k)
    if (g.mask[k]) psi[k] = g.position(k).x - 0.5;
  int count = 0;
  const auto comp = sign_components(psi, g, count);
  CHECK(count == 2);
  CHECK(comp[g.index(8, 8)] == 0);
}
