#include "nodalab/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <queue>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

namespace nodalab {

namespace {

using SpMat = Eigen::SparseMatrix<double>;

template <class ThetaFn>
DiscreteOperator build(const Grid& grid, const std::vector<std::uint8_t>& active, ThetaFn theta) {
  DiscreteOperator op;
  op.h = grid.h;
  op.row_of.assign(grid.size(), -1);
  for (int k = 0; k < grid.size(); ++k) {
    if (!active[k]) continue;
    op.row_of[k] = static_cast<int>(op.node_of.size());
    op.node_of.push_back(k);
  }
  const int n = op.dimension();
  const double ih2 = 1.0 / (grid.h * grid.h);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(5 * n);
  op.min_potential = n > 0 ? grid.potential[op.node_of[0]] : 0.0;
  for (int r = 0; r < n; ++r) {
    const int k = op.node_of[r];
    double diag = grid.potential[k];
    op.min_potential = std::min(op.min_potential, diag);
    for (int d = 0; d < 4; ++d) {
      const int nb = grid.neighbor(k, d);
      const double t = theta(k, d);
      if (nb >= 0 && active[nb] && t >= 1.0) {
        diag += ih2;
        trip.emplace_back(r, op.row_of[nb], -ih2);
      } else {
        diag += ih2 / std::max(t, kCutMin);
      }
    }
    trip.emplace_back(r, r, diag);
  }
  op.matrix.resize(n, n);
  op.matrix.setFromTriplets(trip.begin(), trip.end());
  return op;
}

bool coupled_connected(const DiscreteOperator& op) {
  const int n = op.dimension();
  if (n == 0) return false;
  std::vector<std::uint8_t> seen(n, 0);
  std::queue<int> q;
  q.push(0);
  seen[0] = 1;
  int reached = 0;
  while (!q.empty()) {
    const int r = q.front();
    q.pop();
    ++reached;
    for (SpMat::InnerIterator it(op.matrix, r); it; ++it) {
      const int c = static_cast<int>(it.row());
      if (c != r && !seen[c]) {
        seen[c] = 1;
        q.push(c);
      }
    }
  }
  return reached == n;
}

// A residual within this multiple of eps |||A||y||| is accepted even above the
// requested tolerance: it is below what the stored vector can resolve.
constexpr double kRoundingFactor = 8.0;

// Rayleigh quotient and residual norm of a unit vector, accumulated in
// extended precision; at fine grids the residual sits near the rounding floor.
void rayleigh_residual(const SpMat& A, const Eigen::VectorXd& y, double& lambda, double& residual, double& floor) {
  const int n = static_cast<int>(y.size());
  std::vector<long double> Ay(n, 0.0L);
  Eigen::VectorXd absAy = Eigen::VectorXd::Zero(n);
  for (int c = 0; c < n; ++c)
    for (SpMat::InnerIterator it(A, c); it; ++it) absAy[it.row()] += std::abs(it.value() * y[c]);
  floor = std::numeric_limits<double>::epsilon() * absAy.norm();
  long double yy = 0.0L, yAy = 0.0L;
  for (int c = 0; c < n; ++c)
    for (SpMat::InnerIterator it(A, c); it; ++it) Ay[it.row()] += static_cast<long double>(it.value()) * y[c];
  for (int r = 0; r < n; ++r) {
    yy += static_cast<long double>(y[r]) * y[r];
    yAy += Ay[r] * y[r];
  }
  const long double lam = yAy / yy;
  long double rr = 0.0L;
  for (int r = 0; r < n; ++r) {
    const long double d = Ay[r] - lam * y[r];
    rr += d * d;
  }
  lambda = static_cast<double>(lam);
  residual = static_cast<double>(std::sqrt(rr / yy));
}

std::string residual_text(double r) {
  std::ostringstream os;
  os << "eigensolver failed: " << std::setprecision(3) << r;
  return os.str();
}

}  // namespace

Eigen::VectorXd DiscreteOperator::restrict(const std::vector<double>& grid_fn) const {
  Eigen::VectorXd v(dimension());
  for (int r = 0; r < dimension(); ++r) v[r] = grid_fn[node_of[r]];
  return v;
}

std::vector<double> DiscreteOperator::extend(const Eigen::VectorXd& v, int grid_size) const {
  std::vector<double> f(grid_size, 0.0);
  for (int r = 0; r < dimension(); ++r) f[node_of[r]] = v[r];
  return f;
}

DiscreteOperator assemble_operator(const Grid& grid) {
  return build(grid, grid.mask, [&](int k, int d) { return grid.boundary_theta[k][d]; });
}

DiscreteOperator assemble_operator(const Grid& grid, const Partition& p, int label) {
  std::vector<std::uint8_t> active(grid.size(), 0);
  for (int k = 0; k < grid.size(); ++k)
    active[k] = grid.mask[k] && (label == kAllLabels ? p.labels[k] > 0 : p.labels[k] == label);
  auto theta = [&](int k, int d) { return std::min(p.cut[k][d], grid.boundary_theta[k][d]); };
  if (label == kAllLabels) {
    // Couple only nodes of equal label.
    return build(grid, active, [&](int k, int d) {
      const int nb = grid.neighbor(k, d);
      if (nb >= 0 && p.labels[nb] != p.labels[k]) return std::min(theta(k, d), 1.0 - 1e-15);
      return theta(k, d);
    });
  }
  DiscreteOperator op = build(grid, active, theta);
  if (op.dimension() < kMinSubdomainNodes) throw ComputationError("subdomain under-resolved");
  if (!coupled_connected(op)) throw ComputationError("subdomain disconnected");
  return op;
}

std::vector<EigenPair> lowest_eigenpairs(const DiscreteOperator& op, int count, const SolverOptions& opt) {
  const int n = op.dimension();
  if (count < 1 || count > 20) throw ConfigError("eigenpair count must be between 1 and 20");
  if (count >= n) throw ConfigError("eigenpair count must be below the operator dimension");

  const double sigma = std::min(0.0, op.min_potential - 1.0);
  SpMat shifted = op.matrix;
  for (int r = 0; r < n; ++r) shifted.coeffRef(r, r) -= sigma;
  Eigen::SimplicialLLT<SpMat, Eigen::Lower, Eigen::AMDOrdering<int>> llt(shifted);
  if (llt.info() != Eigen::Success) throw ComputationError("eigensolver failed: factorization");

  std::mt19937 rng(opt.seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  Eigen::VectorXd start(n);
  for (int i = 0; i < n; ++i) start[i] = uni(rng);

  Eigen::MatrixXd locked(n, 0);
  std::vector<double> locked_val, locked_res;
  const int mmax = std::max(40, 4 * count + 20);
  double worst = 0.0;

  auto orth_locked = [&](Eigen::VectorXd& w) {
    if (locked.cols() > 0) w -= locked * (locked.transpose() * w);
  };
  auto random_start = [&] {
    for (int i = 0; i < n; ++i) start[i] = uni(rng);
  };
  auto kth_locked = [&] {
    std::vector<double> v = locked_val;
    std::nth_element(v.begin(), v.begin() + (count - 1), v.end());
    return v[count - 1];
  };
  // A Krylov space holds one direction per eigenspace, so copies of a
  // multiple eigenvalue can be missed. Once `count` pairs are locked, a run
  // from a fresh random vector looks for anything below the count-th value.
  bool verifying = false;

  for (int restart = 0; restart <= opt.max_restarts + count; ++restart) {
    const int need = verifying ? 1 : count - static_cast<int>(locked.cols());
    const int cap = std::min(mmax, n - static_cast<int>(locked.cols()));
    Eigen::MatrixXd V(n, cap);
    std::vector<double> alpha, beta;

    Eigen::VectorXd q = start;
    orth_locked(q);
    orth_locked(q);
    q.normalize();

    Eigen::MatrixXd ritz;
    std::vector<double> ritz_val, ritz_res;
    int converged = 0;
    for (int j = 0; j < cap; ++j) {
      V.col(j) = q;
      Eigen::VectorXd w = llt.solve(q);
      const double a = q.dot(w);
      alpha.push_back(a);
      w -= a * q;
      if (j > 0) w -= beta[j - 1] * V.col(j - 1);
      for (int pass = 0; pass < 2; ++pass) {
        w -= V.leftCols(j + 1) * (V.leftCols(j + 1).transpose() * w);
        orth_locked(w);
      }
      const double b = w.norm();
      beta.push_back(b);
      const int m = j + 1;
      const bool breakdown = b < 1e-12 * std::abs(a);
      const bool last = m == cap;
      if (m < need || (!breakdown && !last && m % 4 != 0)) {
        q = w / b;
        continue;
      }

      Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
      for (int i = 0; i < m; ++i) {
        T(i, i) = alpha[i];
        if (i + 1 < m) T(i, i + 1) = T(i + 1, i) = beta[i];
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
      const int take = std::min(need, m);
      // Largest theta of the inverse <-> smallest lambda.
      Eigen::MatrixXd S(m, take);
      ritz_val.assign(take, 0.0);
      for (int i = 0; i < take; ++i) {
        S.col(i) = es.eigenvectors().col(m - 1 - i);
        ritz_val[i] = sigma + 1.0 / es.eigenvalues()[m - 1 - i];
      }
      ritz = V.leftCols(m) * S;
      ritz_res.assign(take, 0.0);
      converged = 0;
      bool prefix = true;
      for (int i = 0; i < take; ++i) {
        ritz.col(i).normalize();
        double fl;
        rayleigh_residual(op.matrix, ritz.col(i), ritz_val[i], ritz_res[i], fl);
        if (prefix && ritz_res[i] <= std::max(opt.tol, kRoundingFactor * fl))
          ++converged;
        else
          prefix = false;
      }
      if (converged == need || breakdown || last) break;
      q = w / b;
    }

    // A stalled leading Ritz vector is polished by inverse iteration.
    if (converged < static_cast<int>(ritz_res.size())) {
      Eigen::VectorXd y = ritz.col(converged);
      for (int it = 0; it < 8; ++it) {
        y = llt.solve(y);
        orth_locked(y);
        orth_locked(y);
        y.normalize();
        double lam, res, fl;
        rayleigh_residual(op.matrix, y, lam, res, fl);
        if (res < ritz_res[converged]) {
          ritz.col(converged) = y;
          ritz_val[converged] = lam;
          ritz_res[converged] = res;
        }
        if (res <= std::max(opt.tol, kRoundingFactor * fl)) {
          ++converged;
          break;
        }
      }
    }

    if (verifying) {
      const double kth = kth_locked();
      if (converged == 0 || ritz_val[0] >= kth - 1e-10 * std::abs(kth)) break;
      converged = 1;
    }
    for (int i = 0; i < converged; ++i) {
      locked.conservativeResize(n, locked.cols() + 1);
      locked.col(locked.cols() - 1) = ritz.col(i);
      locked_val.push_back(ritz_val[i]);
      locked_res.push_back(ritz_res[i]);
    }
    if (static_cast<int>(locked.cols()) >= count) {
      if (count == 1 || locked.cols() >= n - 1) break;
      verifying = true;
      random_start();
      continue;
    }

    worst = 0.0;
    start = Eigen::VectorXd::Zero(n);
    for (int i = converged; i < static_cast<int>(ritz_res.size()); ++i) {
      worst = std::max(worst, ritz_res[i]);
      start += ritz.col(i);
    }
    if (start.norm() == 0.0) random_start();
  }
  if (static_cast<int>(locked.cols()) < count) throw ComputationError(residual_text(worst));

  std::vector<int> order(locked_val.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return locked_val[a] < locked_val[b]; });

  std::vector<EigenPair> out;
  const int gsize = static_cast<int>(op.row_of.size());
  for (int rank = 0; rank < count; ++rank) {
    const int i = order[rank];
    EigenPair e;
    e.lambda = locked_val[i];
    e.residual = locked_res[i];
    e.n = rank + 1;
    e.psi = op.extend(locked.col(i) / op.h, gsize);
    fix_sign(e.psi);
    out.push_back(std::move(e));
  }
  return out;
}

void fix_sign(std::vector<double>& psi) {
  double mx = 0.0;
  for (double v : psi) mx = std::max(mx, std::abs(v));
  for (double v : psi) {
    if (std::abs(v) > 0.01 * mx) {
      if (v < 0)
        for (double& u : psi) u = -u;
      return;
    }
  }
}

EigenPair subdomain_groundstate(const Partition& p, const Grid& grid, int label, const SolverOptions& opt) {
  if (label < 1 || label > p.nu) throw ComputationError("no such subdomain");
  const DiscreteOperator op = assemble_operator(grid, p, label);
  EigenPair e = lowest_eigenpairs(op, 1, opt).front();
  double sum = 0.0;
  for (double v : e.psi) sum += v;
  if (sum < 0)
    for (double& v : e.psi) v = -v;
  return e;
}

double rayleigh_quotient(const std::vector<double>& psi, const DiscreteOperator& op) {
  const Eigen::VectorXd v = op.restrict(psi);
  const double nn = v.squaredNorm();
  if (nn == 0.0) throw ComputationError("zero function");
  return v.dot(op.matrix * v) / nn;
}

namespace {

double ghost_value(const Grid& grid, const Partition& p, int label, const std::vector<double>& psi, int k) {
  double sum = 0.0;
  int cnt = 0;
  for (int d = 0; d < 4; ++d) {
    const int i = grid.neighbor(k, d);
    if (i < 0 || p.labels[i] != label) continue;
    const int od = opposite(d);
    const double theta = std::min(p.cut[i][od], grid.boundary_theta[i][od]);
    const int i2 = grid.neighbor(i, d);
    const bool inner_ok = i2 >= 0 && p.labels[i2] == label && std::min(p.cut[i][d], grid.boundary_theta[i][d]) >= 1.0;
    if (inner_ok)
      sum += -psi[i2] * (1.0 - theta) / (1.0 + theta);
    else
      sum += -psi[i] * (1.0 - theta) / std::max(theta, 1e-2);
    ++cnt;
  }
  return cnt ? sum / cnt : 0.0;
}

}  // namespace

bool interpolate_subdomain(const Grid& grid, const Partition& p, int label, const std::vector<double>& psi, Vec2 x,
                           double& value) {
  const double fx = (x.x - grid.origin.x) / grid.h;
  const double fy = (x.y - grid.origin.y) / grid.h;
  const int i0 = static_cast<int>(std::floor(fx));
  const int j0 = static_cast<int>(std::floor(fy));
  const double tx = fx - i0, ty = fy - j0;
  bool any = false;
  value = 0.0;
  for (int c = 0; c < 4; ++c) {
    const int di = c & 1, dj = c >> 1;
    const double w = (di ? tx : 1.0 - tx) * (dj ? ty : 1.0 - ty);
    if (!grid.in_box(i0 + di, j0 + dj)) continue;
    const int k = grid.index(i0 + di, j0 + dj);
    double v;
    if (p.labels[k] == label && grid.mask[k]) {
      v = psi[k];
      any = true;
    } else {
      v = ghost_value(grid, p, label, psi, k);
    }
    value += w * v;
  }
  return any;
}

bool outward_derivative(const Grid& grid, const Partition& p, int label, const std::vector<double>& psi, Vec2 x,
                        Vec2 n, Side side, double& value) {
  const Vec2 in = side == Side::right ? n : -n;
  const Vec2 p1 = x + in * grid.h;
  const Vec2 p2 = x + in * (2.0 * grid.h);
  for (Vec2 q : {p1, p2}) {
    const int k = grid.nearest_node(q);
    if (grid.inside(k) && p.labels[k] > 0 && p.labels[k] != label) return false;
  }
  double v1, v2;
  if (!interpolate_subdomain(grid, p, label, psi, p1, v1)) return false;
  if (!interpolate_subdomain(grid, p, label, psi, p2, v2)) return false;
  value = -(4.0 * v1 - v2) / (2.0 * grid.h);
  return true;
}

TraceSamples normal_derivative(const EigenPair& pair, const Partition& p, const Grid& grid, int s, int label,
                               Side side, int n_quad) {
  const InterfaceCurve& c = p.interfaces.at(s);
  const CurveQuadrature quad = curve_quadrature(c, n_quad);
  TraceSamples t;
  t.interface_id = s;
  t.sigma = quad.sigma;
  t.weight = quad.weights;
  t.value.assign(quad.points.size(), 0.0);
  t.valid.assign(quad.points.size(), 0);
  const int sign = side == Side::right ? +1 : -1;
  int good = 0;
  for (std::size_t q = 0; q < quad.points.size(); ++q) {
    if (label_beside(p, grid, quad.points[q], quad.normals[q], sign) != label) continue;
    double v;
    if (outward_derivative(grid, p, label, pair.psi, quad.points[q], quad.normals[q], side, v)) {
      t.value[q] = v;
      t.valid[q] = 1;
      ++good;
    }
  }
  if (2 * good < static_cast<int>(quad.points.size())) throw ComputationError("trace stencil out of domain");
  return t;
}

void write_spectrum_csv(const std::vector<EigenPair>& pairs, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << "n,lambda,residual\n" << std::setprecision(17);
  for (const auto& e : pairs) out << e.n << ',' << e.lambda << ',' << e.residual << '\n';
}

void write_grid_function(const Grid& grid, const std::vector<double>& f, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << std::setprecision(17) << grid.nx << ' ' << grid.ny << ' ' << grid.h << '\n';
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) out << (i ? "," : "") << f[grid.index(i, j)];
    out << '\n';
  }
}

}  // namespace nodalab
