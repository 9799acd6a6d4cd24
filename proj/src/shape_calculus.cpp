#include "nodalab/shape_calculus.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nodalab/nodal.hpp"
#include "nodalab/parallel.hpp"

namespace nodalab {

SimplexWeights SimplexWeights::uniform(int nu) { return {std::vector<double>(nu, 1.0 / nu)}; }

SimplexWeights SimplexWeights::basis(int nu, int j) {
  SimplexWeights w{std::vector<double>(nu, 0.0)};
  w.c.at(j - 1) = 1.0;
  return w;
}

SimplexWeights SimplexWeights::normalized(std::vector<double> raw) {
  double sum = 0.0;
  for (double& v : raw) {
    v = std::max(v, 0.0);
    sum += v;
  }
  if (!(sum > 0.0)) throw ComputationError("weights vanish");
  for (double& v : raw) v /= sum;
  return {std::move(raw)};
}

namespace {

InterfaceTrace trace_interface(const Partition& p, const Grid& grid, const std::vector<EigenPair>& ground, int s) {
  const InterfaceCurve& c = p.interfaces[s];
  InterfaceTrace t;
  t.interface_id = s;
  t.quad = curve_quadrature(c, default_quadrature_count(c, grid.h));
  const std::size_t nq = t.quad.points.size();
  t.left.assign(nq, 0);
  t.right.assign(nq, 0);
  t.d_left.assign(nq, 0.0);
  t.d_right.assign(nq, 0.0);
  for (std::size_t q = 0; q < nq; ++q) {
    const Vec2 x = t.quad.points[q];
    const Vec2 n = t.quad.normals[q];
    const int l = label_beside(p, grid, x, n, -1);
    const int r = label_beside(p, grid, x, n, +1);
    if (l == r) continue;
    double v;
    if (l > 0 && outward_derivative(grid, p, l, ground[l - 1].psi, x, n, Side::left, v)) {
      t.left[q] = l;
      t.d_left[q] = v;
    }
    if (r > 0 && outward_derivative(grid, p, r, ground[r - 1].psi, x, n, Side::right, v)) {
      t.right[q] = r;
      t.d_right[q] = v;
    }
  }
  return t;
}

}  // namespace

PartitionState evaluate_partition(const Partition& p, const Grid& grid, const SolverOptions& opt, bool with_traces) {
  PartitionState st;
  st.partition = p;
  st.ground.resize(p.nu);
  parallel_for(p.nu, [&](int j) { st.ground[j] = subdomain_groundstate(p, grid, j + 1, opt); });
  if (with_traces) {
    st.traces.resize(p.interfaces.size());
    parallel_for(static_cast<int>(p.interfaces.size()),
                 [&](int s) { st.traces[s] = trace_interface(p, grid, st.ground, s); });
  }
  return st;
}

double hadamard_derivative(const EigenPair& pair, const Partition& p, const Grid& grid, int s, int label, Side side,
                           const std::function<double(double)>& phi, int n_quad) {
  const InterfaceCurve& c = p.interfaces.at(s);
  if (n_quad <= 0) n_quad = default_quadrature_count(c, grid.h);
  const TraceSamples t = normal_derivative(pair, p, grid, s, label, side, n_quad);
  const CurveQuadrature quad = curve_quadrature(c, n_quad);
  const double sign = side == Side::left ? -1.0 : 1.0;
  double sum = 0.0;
  for (std::size_t q = 0; q < t.value.size(); ++q)
    if (t.valid[q]) sum += t.weight[q] * t.value[q] * t.value[q] * phi(t.sigma[q]) * quad.m_dot_n[q];
  return sign * sum;
}

Eigen::VectorXd xi_map(const PartitionState& st) {
  Eigen::VectorXd x(st.nu());
  for (int j = 0; j < st.nu(); ++j) x[j] = st.ground[j].lambda;
  return x;
}

Eigen::MatrixXd xi_jacobian(const PartitionState& st, const ModeBasis& basis) {
  if (st.traces.size() != st.partition.interfaces.size()) throw ComputationError("partition state lacks traces");
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(st.nu(), basis.dimension());
  for (int idx = 0; idx < basis.dimension(); ++idx) {
    const int s = basis.entries[idx].interface;
    const InterfaceCurve& c = st.partition.interfaces[s];
    const InterfaceTrace& t = st.traces[s];
    for (std::size_t q = 0; q < t.quad.points.size(); ++q) {
      const double g = t.quad.weights[q] * basis.value(idx, t.quad.sigma[q], c.ref_length, c.kind) * t.quad.m_dot_n[q];
      // Moving along +N enlarges the left subdomain and shrinks the right one.
      if (t.left[q] > 0) J(t.left[q] - 1, idx) -= g * t.d_left[q] * t.d_left[q];
      if (t.right[q] > 0) J(t.right[q] - 1, idx) += g * t.d_right[q] * t.d_right[q];
    }
  }
  return J;
}

double lambda_c(const PartitionState& st, const SimplexWeights& c) {
  if (c.size() != st.nu()) throw ComputationError("weights do not match the partition");
  double sum = 0.0;
  for (int j = 0; j < st.nu(); ++j) sum += c.c[j] * st.ground[j].lambda;
  return sum;
}

double lambda_c(const Partition& p, const SimplexWeights& c, const Grid& grid, const SolverOptions& opt) {
  return lambda_c(evaluate_partition(p, grid, opt, false), c);
}

Eigen::VectorXd grad_lambda_c(const PartitionState& st, const SimplexWeights& c, const ModeBasis& basis) {
  if (c.size() != st.nu()) throw ComputationError("weights do not match the partition");
  const Eigen::MatrixXd J = xi_jacobian(st, basis);
  const Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(c.c.data(), c.size());
  return J.transpose() * w;
}

SimplexWeights psi_masses(const Partition& p, const std::vector<double>& psi, const Grid& grid) {
  std::vector<double> m(p.nu, 0.0);
  for (int k = 0; k < grid.size(); ++k)
    if (p.labels[k] > 0) m[p.labels[k] - 1] += grid.h * grid.h * psi[k] * psi[k];
  return SimplexWeights::normalized(std::move(m));
}

CriticalityResult criticality_residual(const PartitionState& st, const std::vector<double>& psi, const Grid& grid,
                                       const ModeBasis& basis) {
  CriticalityResult r;
  r.c = psi_masses(st.partition, psi, grid);
  r.gradient = grad_lambda_c(st, r.c, basis);
  r.gradient_norm = r.gradient.norm();
  return r;
}

MatchedDerivativeResult matched_derivative_check(const PartitionState& st, const SimplexWeights& c) {
  const PartitionGraph g = partition_graph(st.partition);
  MatchedDerivativeResult out;
  for (const InterfaceTrace& t : st.traces) {
    std::vector<double> num, den;
    double den_max = 0.0;
    for (std::size_t q = 0; q < t.quad.points.size(); ++q) {
      const int l = t.left[q], r = t.right[q];
      if (l <= 0 || r <= 0 || l == r) continue;
      const double al = g.color[l - 1] * std::sqrt(c.c[l - 1]);
      const double ar = g.color[r - 1] * std::sqrt(c.c[r - 1]);
      // Derivatives along the common normal N: +outward on the left, -outward on the right.
      num.push_back(al * t.d_left[q]);
      den.push_back(-ar * t.d_right[q]);
      den_max = std::max(den_max, std::abs(den.back()));
    }
    std::vector<double> ratio;
    for (std::size_t i = 0; i < den.size(); ++i)
      if (std::abs(den[i]) > 0.1 * den_max) ratio.push_back(num[i] / den[i]);
    if (ratio.empty() || den_max == 0.0) throw ComputationError("trace too small to compare");
    std::sort(ratio.begin(), ratio.end());
    const double median = ratio[ratio.size() / 2];
    const double spread = (ratio.back() - ratio.front()) / std::abs(median);
    out.per_interface.push_back(median > 0 ? spread : std::numeric_limits<double>::infinity());
    out.max_mismatch = std::max(out.max_mismatch, out.per_interface.back());
  }
  return out;
}

MatchedDerivativeResult matched_derivative_check(const PartitionState& st, const std::vector<double>& psi,
                                                 const Grid& grid) {
  return matched_derivative_check(st, psi_masses(st.partition, psi, grid));
}

}  // namespace nodalab
