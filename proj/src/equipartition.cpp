#include "nodalab/equipartition.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "nodalab/parallel.hpp"

namespace nodalab {

namespace {

constexpr double kRankTol = 1e-8;

int numeric_rank(const Eigen::MatrixXd& A) {
  if (A.rows() == 0 || A.cols() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
  const auto& s = svd.singularValues();
  int r = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s[i] > kRankTol * s[0]) ++r;
  return r;
}

Eigen::VectorXd evaluate_xi(const Partition& q, const Grid& grid, const SolverOptions& opt) {
  return xi_map(evaluate_partition(q, grid, opt, false));
}

std::string describe(const Eigen::VectorXd& a) {
  std::ostringstream os;
  os << '[';
  for (int i = 0; i < a.size(); ++i) os << (i ? ", " : "") << a[i];
  os << ']';
  return os.str();
}

}  // namespace

Eigen::VectorXd equipartition_residual(const Eigen::VectorXd& xi) {
  const int nu = static_cast<int>(xi.size());
  if (nu <= 1) return Eigen::VectorXd(0);
  return xi.head(nu - 1).array() - xi[nu - 1];
}

Eigen::VectorXd equipartition_residual(const Partition& p, const Grid& grid, const SolverOptions& opt) {
  if (p.nu <= 1) return Eigen::VectorXd(0);
  return equipartition_residual(evaluate_xi(p, grid, opt));
}

Eigen::MatrixXd residual_jacobian(const Eigen::MatrixXd& J) {
  const int nu = static_cast<int>(J.rows());
  if (nu <= 1) return Eigen::MatrixXd(0, J.cols());
  return J.topRows(nu - 1).rowwise() - J.row(nu - 1);
}

std::vector<int> projection_modes(const ModeBasis& basis, const Eigen::MatrixXd& J) {
  const int need = static_cast<int>(J.rows()) - 1;
  if (need <= 0) return {};
  const Eigen::MatrixXd D = residual_jacobian(J);
  std::vector<int> cols;
  for (int s = 0; s < basis.interface_count(); ++s) cols.push_back(basis.offsets[s]);
  auto rank_of = [&](const std::vector<int>& c) { return numeric_rank(D(Eigen::all, c)); };
  if (rank_of(cols) >= need) return cols;
  for (int s = 0; s < basis.interface_count(); ++s)
    if (basis.modes_on(s) > 1) cols.push_back(basis.offsets[s] + 1);
  std::sort(cols.begin(), cols.end());
  if (rank_of(cols) < need) throw ComputationError("transversality failure (non-generic)");
  return cols;
}

ProjectionResult project_to_equipartition(const Partition& p, const PerturbationCoords& coords, const Grid& grid,
                                          const ProjectionOptions& opt, const Eigen::MatrixXd* jacobian) {
  if (!graph_connected(p.nu, p.edges)) throw ComputationError("partition graph is not connected");
  ProjectionResult out;
  out.coords = coords;
  out.partition = displace_interfaces(p, coords, grid);
  if (p.nu <= 1) {
    out.xi = evaluate_xi(out.partition, grid, opt.solver);
    return out;
  }

  Eigen::MatrixXd J;
  if (jacobian) {
    J = *jacobian;
    out.xi = evaluate_xi(out.partition, grid, opt.solver);
  } else {
    const PartitionState st = evaluate_partition(out.partition, grid, opt.solver, true);
    J = xi_jacobian(st, coords.basis);
    out.xi = xi_map(st);
  }
  Eigen::VectorXd r = equipartition_residual(out.xi);
  out.residual_norm = r.norm();
  if (out.residual_norm <= opt.tol_rel * out.lambda()) return out;

  const std::vector<int> cols = projection_modes(coords.basis, J);
  Eigen::MatrixXd B = residual_jacobian(J)(Eigen::all, cols);

  for (int it = 0; it < opt.max_iters; ++it) {
    const Eigen::VectorXd step = -B.completeOrthogonalDecomposition().solve(r);
    // Halve the step while it makes the residual worse.
    double scale = 1.0;
    for (int tries = 0;; ++tries) {
      PerturbationCoords trial = out.coords;
      for (std::size_t i = 0; i < cols.size(); ++i) trial.a[cols[i]] += scale * step[i];
      Partition q;
      Eigen::VectorXd xi;
      bool ok = true;
      try {
        q = displace_interfaces(p, trial, grid);
        xi = evaluate_xi(q, grid, opt.solver);
      } catch (const ComputationError&) {
        if (tries >= 5) throw;
        ok = false;
      }
      if (ok) {
        const Eigen::VectorXd rn = equipartition_residual(xi);
        if (rn.norm() < r.norm() || tries >= 5) {
          const Eigen::VectorXd s = scale * step;
          B += ((rn - r) - B * s) * s.transpose() / s.squaredNorm();
          out.coords = std::move(trial);
          out.partition = std::move(q);
          out.xi = xi;
          r = rn;
          break;
        }
      }
      scale *= 0.5;
    }
    out.newton_iterations = it + 1;
    out.residual_norm = r.norm();
    if (out.residual_norm <= opt.tol_rel * out.lambda()) return out;
  }
  throw ComputationError("projection diverged");
}

Eigen::MatrixXd tangent_basis(const Eigen::MatrixXd& J) {
  const int dim = static_cast<int>(J.cols());
  const int need = static_cast<int>(J.rows()) - 1;
  if (need <= 0) return Eigen::MatrixXd::Identity(dim, dim);
  const Eigen::MatrixXd D = residual_jacobian(J);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(D, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  int rank = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s[i] > kRankTol * s[0]) ++rank;
  if (rank < need) throw ComputationError("transversality failure");
  return svd.matrixV().rightCols(dim - need);
}

Eigen::MatrixXd tangent_basis(const PartitionState& st, const ModeBasis& basis) {
  return tangent_basis(xi_jacobian(st, basis));
}

double lambda_on_E(const Partition& p, const PerturbationCoords& coords, const Grid& grid,
                   const ProjectionOptions& opt, const Eigen::MatrixXd* jacobian) {
  return project_to_equipartition(p, coords, grid, opt, jacobian).lambda();
}

MorseCounts morse_indices(const Eigen::VectorXd& eigenvalues, double tau) {
  MorseCounts m;
  for (int i = 0; i < eigenvalues.size(); ++i) {
    if (eigenvalues[i] < -tau) ++m.mu;
    if (eigenvalues[i] <= tau) ++m.mu0;
  }
  if (m.mu > m.mu0) throw ComputationError("Morse index exceeds mu0");
  m.nondegenerate = m.mu == m.mu0;
  return m;
}

HessianReport hessian_of_lambda(const Partition& p, const ModeBasis& basis, const Grid& grid,
                                const HessianOptions& opt) {
  if (!(opt.dt > 0.0)) throw ConfigError("dt must be positive");
  HessianReport rep;
  rep.basis = basis;
  rep.dt = opt.dt;
  rep.projection_tol = opt.projection.tol_rel;

  const PerturbationCoords zero = PerturbationCoords::from(basis, Eigen::VectorXd::Zero(basis.dimension()));
  const ProjectionResult base = project_to_equipartition(p, zero, grid, opt.projection);
  rep.base = base.coords.a;
  rep.lambda = base.lambda();

  const PartitionState st = evaluate_partition(base.partition, grid, opt.projection.solver, true);
  const Eigen::MatrixXd J = xi_jacobian(st, basis);
  const Eigen::MatrixXd T = tangent_basis(J);
  rep.tangent_basis = T;
  const Eigen::VectorXd grad = J.row(J.rows() - 1).transpose();
  rep.criticality = grad.norm() > 0.0 ? (T.transpose() * grad).norm() / grad.norm() : 0.0;
  rep.critical = rep.criticality <= kCriticalityThreshold;

  const int t = static_cast<int>(T.cols());
  struct Job {
    int a, b;
    double weight;
    Eigen::VectorXd x;
    bool fresh;
    bool lower;
  };
  std::vector<Job> jobs;
  const double dt = opt.dt;
  for (int a = 0; a < t; ++a) {
    jobs.push_back({a, a, 1.0, rep.base + 2.0 * dt * T.col(a), false, false});
    jobs.push_back({a, a, 1.0, rep.base - 2.0 * dt * T.col(a), false, false});
    for (int b = a + 1; b < t; ++b) {
      for (int pass = 0; pass < (opt.check_symmetry ? 2 : 1); ++pass) {
        const bool lower = pass == 1;
        const Eigen::VectorXd u = lower ? T.col(b) : T.col(a);
        const Eigen::VectorXd v = lower ? T.col(a) : T.col(b);
        jobs.push_back({a, b, 1.0, rep.base + dt * (u + v), lower, lower});
        jobs.push_back({a, b, -1.0, rep.base + dt * (u - v), lower, lower});
        jobs.push_back({a, b, -1.0, rep.base - dt * (u - v), lower, lower});
        jobs.push_back({a, b, 1.0, rep.base - dt * (u + v), lower, lower});
      }
    }
  }

  std::vector<double> values(jobs.size(), 0.0);
  parallel_for(static_cast<int>(jobs.size()), [&](int i) {
    const Job& job = jobs[i];
    try {
      values[i] = lambda_on_E(p, PerturbationCoords::from(basis, job.x), grid, opt.projection,
                              job.fresh ? nullptr : &J);
    } catch (const ComputationError& e) {
      throw ComputationError(std::string(e.what()) + " at displacement " + describe(job.x));
    }
  });
  rep.evaluations = static_cast<int>(jobs.size()) + 1;

  Eigen::MatrixXd raw = Eigen::MatrixXd::Zero(t, t);
  const double inv = 1.0 / (4.0 * dt * dt);
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const Job& job = jobs[i];
    if (job.a == job.b) {
      raw(job.a, job.a) += values[i] * inv;
    } else if (job.lower) {
      raw(job.b, job.a) += job.weight * values[i] * inv;
    } else {
      raw(job.a, job.b) += job.weight * values[i] * inv;
      if (!opt.check_symmetry) raw(job.b, job.a) += job.weight * values[i] * inv;
    }
  }
  for (int a = 0; a < t; ++a) raw(a, a) -= 2.0 * rep.lambda * inv;

  const double hn = raw.norm();
  rep.raw_asymmetry = hn > 0.0 ? (raw - raw.transpose()).norm() / hn : 0.0;
  rep.hessian = 0.5 * (raw + raw.transpose());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(rep.hessian);
  rep.eigenvalues = es.eigenvalues();
  rep.eigenvectors = es.eigenvectors();
  rep.tau = std::max(1e-3 * std::abs(rep.lambda), 10.0 * opt.projection.tol_rel * std::abs(rep.lambda) / (dt * dt));
  const MorseCounts m = morse_indices(rep.eigenvalues, rep.tau);
  rep.morse_index = m.mu;
  rep.mu0_index = m.mu0;
  rep.nondegenerate = m.nondegenerate;
  return rep;
}

Partition recentre_chart(const Partition& q, const Grid& grid) {
  std::vector<InterfaceCurve> curves = q.interfaces;
  attach_chart(curves, grid.domain);
  Partition r = rasterize_partition(curves, grid, q.anchors);
  r.rho = default_chart_radius(r.interfaces, grid.domain);
  return r;
}

namespace {

// Weights c on the simplex minimising ||J^T c||: the Lagrange multipliers of
// the constrained problem at a critical point.
SimplexWeights multiplier_weights(const Eigen::MatrixXd& J) {
  const int nu = static_cast<int>(J.rows());
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(nu + 1, nu + 1);
  K.topLeftCorner(nu, nu) = J * J.transpose();
  K.block(0, nu, nu, 1).setOnes();
  K.block(nu, 0, 1, nu).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nu + 1);
  rhs[nu] = 1.0;
  const Eigen::VectorXd sol = K.completeOrthogonalDecomposition().solve(rhs);
  std::vector<double> c(sol.data(), sol.data() + nu);
  try {
    return SimplexWeights::normalized(std::move(c));
  } catch (const ComputationError&) {
    return SimplexWeights::uniform(nu);
  }
}

}  // namespace

DescentResult minimize_lambda(const Partition& p, const PerturbationCoords& start, const Grid& grid,
                              const DescentOptions& opt) {
  DescentResult out;
  Partition chart = p;
  ModeBasis basis = start.basis;
  const int K = basis.K;

  ProjectionResult cur;
  try {
    cur = project_to_equipartition(chart, start, grid, opt.projection);
  } catch (const ComputationError& e) {
    const std::string what = e.what();
    if (what == "partition degenerated" || what == "perturbation too large") throw ComputationError("left generic chart");
    throw;
  }

  Eigen::VectorXd prev_a, prev_g;
  double last_step = 0.0;
  for (int iter = 0;; ++iter) {
    const PartitionState st = evaluate_partition(cur.partition, grid, opt.projection.solver, true);
    const Eigen::MatrixXd J = xi_jacobian(st, basis);
    const Eigen::MatrixXd T = tangent_basis(J);
    const Eigen::VectorXd tg = T.transpose() * J.row(J.rows() - 1).transpose();
    const Eigen::VectorXd g = T * tg;
    const double lambda = cur.lambda();
    out.gradient_norm = tg.norm();
    // The tangent projection of J^T c does not depend on c; the weights are
    // reported only.
    out.c = out.gradient_norm < opt.switch_rel * lambda ? multiplier_weights(J) : SimplexWeights::uniform(chart.nu);
    out.partition = cur.partition;
    if (!out.trace.empty() && lambda > out.trace.back().lambda * (1.0 + 1e-12))
      throw ComputationError("descent increased Lambda");
    out.trace.push_back({iter, lambda, out.gradient_norm, last_step});
    if (out.gradient_norm < opt.gradient_tol * lambda) {
      out.converged = true;
      break;
    }
    if (iter >= opt.max_iters) break;

    const PerturbationCoords dir = PerturbationCoords::from(basis, -g);
    const double dsup = dir.sup_norm(chart);
    if (!(dsup > 0.0)) break;
    double alpha = 0.01 / dsup;
    if (prev_a.size() == g.size()) {
      const Eigen::VectorXd s = cur.coords.a - prev_a;
      const Eigen::VectorXd y = g - prev_g;
      const double sy = s.dot(y);
      if (sy > 0.0) alpha = s.squaredNorm() / sy;
    }
    alpha = std::min(alpha, std::min(opt.max_step, 0.5 * chart.rho) / dsup);

    bool accepted = false;
    ProjectionResult next;
    for (int bt = 0; bt <= opt.max_backtracks; ++bt, alpha *= 0.5) {
      PerturbationCoords trial = cur.coords;
      trial.a += alpha * (-g);
      try {
        next = project_to_equipartition(chart, trial, grid, opt.projection, &J);
      } catch (const ComputationError& e) {
        const std::string what = e.what();
        if (what == "partition degenerated") throw ComputationError("left generic chart");
        continue;
      }
      if (next.lambda() <= lambda - opt.armijo * alpha * g.squaredNorm()) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;

    last_step = PerturbationCoords::from(basis, next.coords.a - cur.coords.a).sup_norm(chart);
    prev_a = cur.coords.a;
    prev_g = g;
    cur = std::move(next);

    if (cur.coords.sup_norm(chart) > 0.5 * chart.rho) {
      try {
        chart = recentre_chart(cur.partition, grid);
      } catch (const ComputationError&) {
        throw ComputationError("left generic chart");
      }
      basis = ModeBasis::build(chart.interfaces, K);
      cur = project_to_equipartition(chart, PerturbationCoords::from(basis, Eigen::VectorXd::Zero(basis.dimension())),
                                     grid, opt.projection);
      prev_a.resize(0);
      ++out.recharts;
    }
  }
  return out;
}

}  // namespace nodalab
