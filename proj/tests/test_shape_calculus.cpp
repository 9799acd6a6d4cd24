#include <doctest.h>

#include <cmath>
#include <numeric>

#include <Eigen/LU>

#include "nodalab/shape_calculus.hpp"
#include "nodalab/studies.hpp"

using namespace nodalab;

namespace {

const Grid& rect96() {
  static const Grid g = build_grid(DomainSpec::rectangle(1.0, 0.618), 96);
  return g;
}

}  // namespace

TEST_CASE("simplex weights") {
  const auto u = SimplexWeights::uniform(4);
  CHECK(std::accumulate(u.c.begin(), u.c.end(), 0.0) == doctest::Approx(1.0));
  const auto n = SimplexWeights::normalized({2.0, -1.0, 2.0});
  CHECK(n.c[0] == doctest::Approx(0.5));
  CHECK(n.c[1] == 0.0);
  CHECK_THROWS(SimplexWeights::normalized({-1.0, 0.0}));
}

TEST_CASE("rigid shift of a half rectangle: dlambda/dL = -2 pi^2 / L^3") {
  const Partition p = build_straight_partition(rect96(), 2, 1);
  const PartitionState st = evaluate_partition(p, rect96());
  const ModeBasis basis = ModeBasis::build(p.interfaces, 2);
  const Eigen::MatrixXd J = xi_jacobian(st, basis);
  const double exact = 2.0 * kPi * kPi / 0.125;
  // The constant mode enlarges one cell and shrinks the other.
  CHECK(std::abs(J(0, 0)) == doctest::Approx(exact).epsilon(3e-2));
  CHECK(J(0, 0) == doctest::Approx(-J(1, 0)).epsilon(1e-6));
}

TEST_CASE("Hadamard formula matches finite differences") {
  const Grid g = build_grid(DomainSpec::rectangle(1.0, 0.618), 96);
  const HadamardCheck h = hadamard_check(build_straight_partition(g, 1, 2), g, 3, 1e-3);
  CHECK(h.max_error < 5e-2);
  CHECK(h.entries.size() == 2 * 4);
}

TEST_CASE("Jacobian columns have two entries of opposite sign") {
  const Partition p = build_straight_partition(rect96(), 3, 1);
  const PartitionState st = evaluate_partition(p, rect96());
  const ModeBasis basis = ModeBasis::build(p.interfaces, 3);
  const Eigen::MatrixXd J = xi_jacobian(st, basis);
  CHECK(jacobian_column_structure(J, basis));
  Eigen::MatrixXd bad = J;
  bad.col(1).setConstant(1.0);
  CHECK_FALSE(jacobian_column_structure(bad, basis));
  bad = J;
  bad(0, 0) = -bad(0, 0);
  CHECK_FALSE(jacobian_column_structure(bad, basis));
}

TEST_CASE("column structure survives a curved interface") {
  const Partition p = build_straight_partition(rect96(), 2, 1);
  const ModeBasis basis = ModeBasis::build(p.interfaces, 3);
  Eigen::VectorXd a = Eigen::VectorXd::Zero(basis.dimension());
  a[1] = 0.01;
  a[2] = -0.01;
  const Partition q = displace_interfaces(p, PerturbationCoords::from(basis, a), rect96());
  const ModeBasis qb = ModeBasis::build(q.interfaces, 3);
  CHECK(jacobian_column_structure(xi_jacobian(evaluate_partition(q, rect96()), qb), qb));
}

TEST_CASE("Lambda_c at a nodal partition: masses, gradient and matched derivatives") {
  const auto spec = lowest_eigenpairs(assemble_operator(rect96()), 3);
  const Partition p = nodal_partition(spec[2], rect96());
  const SimplexWeights c = psi_masses(p, spec[2].psi, rect96());
  CHECK(c.size() == 2);
  CHECK(c.c[0] + c.c[1] == doctest::Approx(1.0));
  CHECK(c.c[0] == doctest::Approx(0.5).epsilon(1e-3));
  const PartitionState st = evaluate_partition(p, rect96());
  CHECK(lambda_c(st, c) == doctest::Approx(spec[2].lambda).epsilon(1e-3));
  const auto cr = criticality_residual(st, spec[2].psi, rect96(), ModeBasis::build(p.interfaces, 3));
  CHECK(cr.gradient_norm < 1e-2 * spec[2].lambda);
  CHECK(matched_derivative_check(st, c).max_mismatch < 5e-2);
}

TEST_CASE("criticality contrast against a displaced partition") {
  const auto spec = lowest_eigenpairs(assemble_operator(rect96()), 4);
  const Partition p = nodal_partition(spec[3], rect96());
  const CriticalityStudy s = criticality_study(p, spec[3], rect96(), 3);
  CHECK(s.generic);
  CHECK(s.gradient_norm <= 0.05 * s.gradient_norm_displaced);
}

TEST_CASE("grad Lambda_c agrees with a difference quotient") {
  const Partition p = build_straight_partition(rect96(), 2, 1);
  const ModeBasis basis = ModeBasis::build(p.interfaces, 2);
  PerturbationCoords c0 = PerturbationCoords::from(basis, Eigen::Vector3d(0.01, 0.005, 0.0));
  const Partition q = displace_interfaces(p, c0, rect96());
  const SimplexWeights w{{0.3, 0.7}};
  const Eigen::VectorXd g = grad_lambda_c(evaluate_partition(q, rect96()), w, ModeBasis::build(q.interfaces, 2));
  // Directional check along the constant mode of the displaced chart.
  const ModeBasis qb = ModeBasis::build(q.interfaces, 2);
  const double eps = 1e-3;
  auto value = [&](double t) {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(qb.dimension());
    a[0] = t;
    return lambda_c(displace_interfaces(q, PerturbationCoords::from(qb, a), rect96()), w, rect96());
  };
  const double fd = (value(eps) - value(-eps)) / (2.0 * eps);
  CHECK(g[0] == doctest::Approx(fd).epsilon(5e-2));
}

TEST_CASE("pushing a raised interface back lowers Lambda_c") {
  const Partition p = build_straight_partition(rect96(), 1, 2);
  PerturbationCoords c = PerturbationCoords::zero(p, 2);
  c.a[0] = 0.05;
  const Partition q = displace_interfaces(p, c, rect96());
  const ModeBasis qb = ModeBasis::build(q.interfaces, 2);
  const SimplexWeights w = SimplexWeights::uniform(2);
  const Eigen::VectorXd g = grad_lambda_c(evaluate_partition(q, rect96()), w, qb);
  auto value = [&](double t) {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(qb.dimension());
    a[0] = t;
    return lambda_c(displace_interfaces(q, PerturbationCoords::from(qb, a), rect96()), w, rect96());
  };
  const double fd = (value(1e-3) - value(-1e-3)) / 2e-3;
  CHECK(g[0] > 0.0);
  CHECK(g[0] == doctest::Approx(fd).epsilon(3e-2));
}

TEST_CASE("constant modes are transversal to the diagonal") {
  auto check = [](const Partition& p, const Grid& g) {
    const ModeBasis basis = ModeBasis::build(p.interfaces, 2);
    const Eigen::MatrixXd J = xi_jacobian(evaluate_partition(p, g), basis);
    Eigen::MatrixXd C(p.nu, basis.interface_count());
    for (int s = 0; s < basis.interface_count(); ++s) C.col(s) = J.col(basis.offsets[s]);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(C);
    lu.setThreshold(1e-8);
    CHECK(lu.rank() >= p.nu - 1);
  };
  check(build_straight_partition(rect96(), 4, 1), rect96());
  check(build_junction_partition(rect96(), 2, 2, JunctionSplit::horizontal), rect96());
}
