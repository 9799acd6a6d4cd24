#include "nodalab/studies.hpp"

#include <algorithm>
#include <cmath>

#include "nodalab/parallel.hpp"

namespace nodalab {

double rectangle_eigenvalue(const DomainSpec& domain, int m, int k) {
  return kPi * kPi * (m * m / (domain.a * domain.a) + k * k / (domain.b * domain.b));
}

int rectangle_mode_index(const DomainSpec& domain, int m, int k) {
  if (domain.kind != DomainKind::rectangle || domain.potential)
    throw ConfigError("mode indices need a rectangle with zero potential");
  if (m < 1 || k < 1) throw ConfigError("mode indices must be at least 1");
  const double lam = rectangle_eigenvalue(domain, m, k);
  int below = 0;
  for (int i = 1; rectangle_eigenvalue(domain, i, 1) <= lam * (1.0 + 1e-9); ++i) {
    for (int j = 1;; ++j) {
      const double mu = rectangle_eigenvalue(domain, i, j);
      if (mu > lam * (1.0 + 1e-9)) break;
      if (i == m && j == k) continue;
      if (std::abs(mu - lam) <= 1e-9 * lam) throw ConfigError("eigenvalue of the requested mode is not simple");
      ++below;
    }
  }
  return below + 1;
}

std::pair<int, int> rectangle_mode_at(const DomainSpec& domain, int n) {
  if (domain.kind != DomainKind::rectangle || domain.potential)
    throw ConfigError("mode indices need a rectangle with zero potential");
  if (n < 1) throw ConfigError("eigenvalue index must be at least 1");
  for (int m = 1; m <= n; ++m)
    for (int k = 1; k <= n; ++k)
      if (rectangle_mode_index(domain, m, k) == n) return {m, k};
  throw ConfigError("eigenvalue index out of range");
}

HadamardCheck hadamard_check(const Partition& p, const Grid& grid, int K, double eps, const SolverOptions& opt) {
  if (!(eps > 0.0)) throw ConfigError("finite-difference step must be positive");
  HadamardCheck out;
  out.eps = eps;
  const ModeBasis basis = ModeBasis::build(p.interfaces, K);
  const Eigen::MatrixXd J = xi_jacobian(evaluate_partition(p, grid, opt, true), basis);
  const double scale = J.cwiseAbs().maxCoeff();
  const int dim = basis.dimension();
  Eigen::MatrixXd fd(p.nu, dim);
  parallel_for(dim, [&](int idx) {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(dim);
    a[idx] = eps;
    const Eigen::VectorXd plus =
        xi_map(evaluate_partition(displace_interfaces(p, PerturbationCoords::from(basis, a), grid), grid, opt, false));
    a[idx] = -eps;
    const Eigen::VectorXd minus =
        xi_map(evaluate_partition(displace_interfaces(p, PerturbationCoords::from(basis, a), grid), grid, opt, false));
    fd.col(idx) = (plus - minus) / (2.0 * eps);
  });
  for (int idx = 0; idx < dim; ++idx) {
    for (int j = 0; j < p.nu; ++j) {
      HadamardEntry e;
      e.interface = basis.entries[idx].interface;
      e.mode = basis.label(idx);
      e.subdomain = j + 1;
      e.formula = J(j, idx);
      e.finite_difference = fd(j, idx);
      e.error = std::abs(e.finite_difference - e.formula) / std::max(std::abs(e.formula), 1e-2 * scale);
      out.max_error = std::max(out.max_error, e.error);
      out.entries.push_back(e);
    }
  }
  return out;
}

bool jacobian_column_structure(const Eigen::MatrixXd& J, const ModeBasis& basis) {
  if (J.cols() != basis.dimension()) throw ConfigError("Jacobian and basis sizes differ");
  const double floor = 1e-9 * J.cwiseAbs().maxCoeff();
  for (int c = 0; c < J.cols(); ++c) {
    int count = 0;
    double lo = 0.0, hi = 0.0;
    for (int j = 0; j < J.rows(); ++j) {
      if (std::abs(J(j, c)) <= floor) continue;
      ++count;
      lo = std::min(lo, J(j, c));
      hi = std::max(hi, J(j, c));
    }
    if (count > 2) return false;
    if (basis.entries[c].kind == ModeBasis::Entry::Kind::constant && (count != 2 || !(lo < 0.0 && hi > 0.0)))
      return false;
  }
  return true;
}

CriticalityStudy criticality_study(const Partition& p, const EigenPair& pair, const Grid& grid, int K,
                                   double amplitude, const SolverOptions& opt) {
  if (K < 1) throw ConfigError("criticality needs K >= 1");
  CriticalityStudy out;
  out.n = pair.n;
  out.lambda = pair.lambda;
  out.amplitude = amplitude;
  out.generic = p.generic();
  out.nu = p.nu;
  const ModeBasis basis = ModeBasis::build(p.interfaces, K);
  const PartitionState st = evaluate_partition(p, grid, opt, true);
  const CriticalityResult cr = criticality_residual(st, pair.psi, grid, basis);
  out.c = cr.c;
  out.gradient_norm = cr.gradient_norm;

  Eigen::VectorXd a = Eigen::VectorXd::Zero(basis.dimension());
  for (int s = 0; s < basis.interface_count(); ++s) a[basis.offsets[s] + 1] = amplitude;
  const Partition q = displace_interfaces(p, PerturbationCoords::from(basis, a), grid);
  out.gradient_norm_displaced = grad_lambda_c(evaluate_partition(q, grid, opt, true), cr.c, basis).norm();

  const MatchedDerivativeResult md = matched_derivative_check(st, cr.c);
  out.matched_mismatch = md.max_mismatch;
  out.per_interface = md.per_interface;
  return out;
}

std::vector<std::pair<std::string, Partition>> rectangle_mode_charts(const Grid& grid, int m, int k) {
  std::vector<std::pair<std::string, Partition>> charts;
  if (m > 1 && k > 1) {
    charts.emplace_back("vertical lines cut at crossings", build_junction_partition(grid, m, k, JunctionSplit::vertical));
    charts.emplace_back("horizontal lines cut at crossings",
                        build_junction_partition(grid, m, k, JunctionSplit::horizontal));
  } else {
    charts.emplace_back("straight lines", build_straight_partition(grid, m, k));
  }
  return charts;
}

MorseStudy morse_study(const Grid& grid, int m, int k, int K, const HessianOptions& opt) {
  MorseStudy out;
  out.m = m;
  out.k = k;
  out.n = rectangle_mode_index(grid.domain, m, k);
  out.nu = m * k;
  out.deficiency = nodal_deficiency(out.n, out.nu);
  for (auto& [name, p] : rectangle_mode_charts(grid, m, k)) {
    out.branch_names.push_back(name);
    out.branches.push_back(hessian_of_lambda(p, ModeBasis::build(p.interfaces, K), grid, opt));
  }
  for (int b = 1; b < static_cast<int>(out.branches.size()); ++b) {
    const HessianReport& cur = out.branches[b];
    const HessianReport& best = out.branches[out.chosen];
    if (cur.morse_index > best.morse_index || (cur.morse_index == best.morse_index && cur.mu0_index > best.mu0_index))
      out.chosen = b;
  }
  return out;
}

}  // namespace nodalab
