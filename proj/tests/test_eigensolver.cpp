#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "nodalab/eigensolver.hpp"
#include "nodalab/partition.hpp"

using namespace nodalab;

namespace {

std::vector<double> rectangle_spectrum(double a, double b, int count) {
  std::vector<double> out;
  for (int m = 1; m <= count; ++m)
    for (int k = 1; k <= count; ++k) out.push_back(kPi * kPi * (m * m / (a * a) + k * k / (b * b)));
  std::sort(out.begin(), out.end());
  out.resize(count);
  return out;
}

double max_rel_error(int res, int count) {
  const Grid g = build_grid(DomainSpec::rectangle(1.0, 0.618), res);
  const auto pairs = lowest_eigenpairs(assemble_operator(g), count);
  const auto exact = rectangle_spectrum(1.0, 0.618, count);
  double err = 0.0;
  for (int i = 0; i < count; ++i) err = std::max(err, std::abs(pairs[i].lambda - exact[i]) / exact[i]);
  return err;
}

}  // namespace

TEST_CASE("rectangle eigenvalues converge at second order") {
  const double e32 = max_rel_error(32, 6);
  const double e64 = max_rel_error(64, 6);
  CHECK(e64 < 1e-2);
  CHECK(e32 / e64 > 3.5);
}

TEST_CASE("eigenpairs are sorted, normalised, orthogonal and accurate") {
  const Grid g = build_grid(DomainSpec::rectangle(1.0, 0.618), 48);
  const DiscreteOperator op = assemble_operator(g);
  const auto pairs = lowest_eigenpairs(op, 8);
  REQUIRE(pairs.size() == 8);
  const double h2 = g.h * g.h;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    CHECK(pairs[i].n == static_cast<int>(i) + 1);
    if (i > 0) CHECK(pairs[i].lambda >= pairs[i - 1].lambda);
    CHECK(pairs[i].residual <= 1e-9 * std::max(1.0, pairs[i].lambda));
    CHECK(rayleigh_quotient(pairs[i].psi, op) == doctest::Approx(pairs[i].lambda).epsilon(1e-10));
    for (std::size_t j = 0; j <= i; ++j) {
      double dot = 0.0;
      for (int k = 0; k < g.size(); ++k) dot += pairs[i].psi[k] * pairs[j].psi[k];
      CHECK(h2 * dot == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-8));
    }
  }
}

TEST_CASE("fixed seed gives identical results") {
  const Grid g = build_grid(DomainSpec::disk(0.5), 40);
  const DiscreteOperator op = assemble_operator(g);
  const auto a = lowest_eigenpairs(op, 4);
  const auto b = lowest_eigenpairs(op, 4);
  for (int i = 0; i < 4; ++i) {
    CHECK(a[i].lambda == b[i].lambda);
    CHECK(a[i].psi == b[i].psi);
  }
}

TEST_CASE("disk ground state approaches j01^2 / r^2") {
  const double j01 = 2.404825557695773;
  const Grid g = build_grid(DomainSpec::disk(0.5), 128);
  const auto pairs = lowest_eigenpairs(assemble_operator(g), 1);
  CHECK(pairs[0].lambda == doctest::Approx(j01 * j01 / 0.25).epsilon(5e-3));
}

TEST_CASE("a constant potential shifts the spectrum") {
  DomainSpec d = DomainSpec::rectangle(1.0, 0.618);
  const Grid g0 = build_grid(d, 32);
  d.potential = [](Vec2) { return 7.5; };
  const Grid g1 = build_grid(d, 32);
  const auto a = lowest_eigenpairs(assemble_operator(g0), 3);
  const auto b = lowest_eigenpairs(assemble_operator(g1), 3);
  for (int i = 0; i < 3; ++i) CHECK(b[i].lambda - a[i].lambda == doctest::Approx(7.5).epsilon(1e-9));
}

TEST_CASE("subdomain ground state of a half rectangle") {
  const Grid g = build_grid(DomainSpec::rectangle(1.0, 0.618), 64);
  const Partition p = build_straight_partition(g, 2, 1);
  const double exact = kPi * kPi * (4.0 + 1.0 / (0.618 * 0.618));
  for (int j = 1; j <= 2; ++j) {
    const EigenPair e = subdomain_groundstate(p, g, j);
    CHECK(e.lambda == doctest::Approx(exact).epsilon(5e-3));
    int outside = 0;
    double low = 0.0;
    for (int k = 0; k < g.size(); ++k) {
      if (p.labels[k] != j && e.psi[k] != 0.0) ++outside;
      if (p.labels[k] == j) low = std::min(low, e.psi[k]);
    }
    CHECK(outside == 0);
    CHECK(low >= 0.0);
  }
}

TEST_CASE("block operator holds every subdomain") {
  const Grid g = build_grid(DomainSpec::rectangle(1.0, 0.618), 48);
  const Partition p = build_straight_partition(g, 3, 1);
  const DiscreteOperator all = assemble_operator(g, p, kAllLabels);
  int total = 0;
  for (int j = 1; j <= p.nu; ++j) total += assemble_operator(g, p, j).dimension();
  CHECK(all.dimension() == total);
  const auto pairs = lowest_eigenpairs(all, 3);
  // Three congruent cells: a threefold ground energy.
  CHECK(pairs[2].lambda == doctest::Approx(pairs[0].lambda).epsilon(1e-9));
}

TEST_CASE("requests beyond the operator size fail") {
  const Grid g = build_grid(DomainSpec::rectangle(1.0, 1.0), 8);
  CHECK_THROWS(lowest_eigenpairs(assemble_operator(g), 1000));
}
