#pragma once

#include <functional>
#include <vector>

#include <Eigen/Core>

#include "nodalab/eigensolver.hpp"
#include "nodalab/partition.hpp"

namespace nodalab {

/// Weights c on the unit simplex: c_j >= 0, sum c_j = 1.
struct SimplexWeights {
  std::vector<double> c;

  static SimplexWeights uniform(int nu);
  static SimplexWeights basis(int nu, int j);
  /// Clips negatives and rescales to sum 1. Throws when nothing is left.
  static SimplexWeights normalized(std::vector<double> raw);
  int size() const { return static_cast<int>(c.size()); }
};

/// Ground-state traces on both sides of one interface at its quadrature
/// points. Labels are read locally (0 where the side is not resolved), so an
/// interface crossing others may border different subdomains along its length.
struct InterfaceTrace {
  int interface_id = -1;
  CurveQuadrature quad;
  std::vector<int> left, right;
  /// Outward normal derivatives of the respective ground states.
  std::vector<double> d_left, d_right;
};

/// A partition with its subdomain ground states and interface traces.
struct PartitionState {
  Partition partition;
  std::vector<EigenPair> ground;  // index label-1
  std::vector<InterfaceTrace> traces;

  int nu() const { return partition.nu; }
};

/// Solves every subdomain (concurrently) and, when `with_traces`, samples the
/// traces with n_quad = max(100, L/h) points per interface.
PartitionState evaluate_partition(const Partition& p, const Grid& grid, const SolverOptions& opt = {},
                                  bool with_traces = true);

/// lambda_1'(D) for the boundary displacement phi(sigma) M along interface s:
/// -sum w (d psi/dn)^2 phi (M.N) with the outward normal of D. `side` tells
/// on which side of the oriented interface D lies.
double hadamard_derivative(const EigenPair& pair, const Partition& p, const Grid& grid, int s, int label, Side side,
                           const std::function<double(double)>& phi, int n_quad = 0);

/// (lambda_1(P_1), ..., lambda_1(P_nu)).
Eigen::VectorXd xi_map(const PartitionState& st);

/// d Xi / d a: nu x dim, one column per basis mode.
Eigen::MatrixXd xi_jacobian(const PartitionState& st, const ModeBasis& basis);

double lambda_c(const PartitionState& st, const SimplexWeights& c);
double lambda_c(const Partition& p, const SimplexWeights& c, const Grid& grid, const SolverOptions& opt = {});

/// Gradient of Lambda_c in the mode coordinates: per interface
/// integral of (c_right (d psi_right)^2 - c_left (d psi_left)^2) phi (M.N).
Eigen::VectorXd grad_lambda_c(const PartitionState& st, const SimplexWeights& c, const ModeBasis& basis);

/// Discrete L^2 masses h^2 sum_{P_j} psi^2, rescaled to the simplex.
SimplexWeights psi_masses(const Partition& p, const std::vector<double>& psi, const Grid& grid);

struct CriticalityResult {
  SimplexWeights c;
  Eigen::VectorXd gradient;
  double gradient_norm = 0.0;
};

CriticalityResult criticality_residual(const PartitionState& st, const std::vector<double>& psi, const Grid& grid,
                                       const ModeBasis& basis);

struct MatchedDerivativeResult {
  double max_mismatch = 0.0;
  std::vector<double> per_interface;
};

/// Spread of r = (a_i d psi_i / dN) / (a_j d psi_j / dN) across each interface,
/// a_k = +-sqrt(c_k) by 2-colouring. Throws "trace too small to compare".
MatchedDerivativeResult matched_derivative_check(const PartitionState& st, const SimplexWeights& c);
MatchedDerivativeResult matched_derivative_check(const PartitionState& st, const std::vector<double>& psi,
                                                 const Grid& grid);

}  // namespace nodalab
