#pragma once

#include <vector>

#include <Eigen/Core>

#include "nodalab/shape_calculus.hpp"

namespace nodalab {

struct ProjectionOptions {
  /// Target for ||residual|| relative to max_j lambda_1(P_j).
  double tol_rel = 1e-6;
  int max_iters = 30;
  SolverOptions solver;
};

struct ProjectionResult {
  PerturbationCoords coords;
  double residual_norm = 0.0;
  int newton_iterations = 0;
  /// The projected partition and its subdomain energies.
  Partition partition;
  Eigen::VectorXd xi;

  double lambda() const { return xi.size() > 0 ? xi.maxCoeff() : 0.0; }
};

/// lambda_1(P_j) - lambda_1(P_nu), j = 1..nu-1.
Eigen::VectorXd equipartition_residual(const Eigen::VectorXd& xi);
Eigen::VectorXd equipartition_residual(const Partition& p, const Grid& grid, const SolverOptions& opt = {});

/// Rows J_j - J_nu of a Xi Jacobian.
Eigen::MatrixXd residual_jacobian(const Eigen::MatrixXd& J);

/// Columns of the basis used by the projection: the constant mode of every
/// interface, plus the first cosine mode of every interface when the constant
/// modes alone do not reach rank nu-1 (crossing interfaces).
/// Throws "transversality failure (non-generic)".
std::vector<int> projection_modes(const ModeBasis& basis, const Eigen::MatrixXd& J);

/// Newton iteration on the projection modes driving the equipartition
/// residual below tol_rel * Lambda. The Jacobian is the Hadamard Jacobian at
/// the starting point (or `jacobian` when given), refreshed by Broyden updates.
/// Throws "projection diverged" or "transversality failure (non-generic)".
ProjectionResult project_to_equipartition(const Partition& p, const PerturbationCoords& coords, const Grid& grid,
                                          const ProjectionOptions& opt = {},
                                          const Eigen::MatrixXd* jacobian = nullptr);

/// Orthonormal basis (columns) of the kernel of residual_jacobian(J).
/// Throws "transversality failure".
Eigen::MatrixXd tangent_basis(const Eigen::MatrixXd& J);
Eigen::MatrixXd tangent_basis(const PartitionState& st, const ModeBasis& basis);

/// Lambda of the projection of p displaced by `coords`.
double lambda_on_E(const Partition& p, const PerturbationCoords& coords, const Grid& grid,
                   const ProjectionOptions& opt = {}, const Eigen::MatrixXd* jacobian = nullptr);

struct MorseCounts {
  int mu = 0;
  int mu0 = 0;
  bool nondegenerate = false;
};

/// mu = #{e < -tau}, mu0 = #{e <= tau}.
MorseCounts morse_indices(const Eigen::VectorXd& eigenvalues, double tau);

struct HessianOptions {
  double dt = 1e-2;
  /// Projection used for every evaluation of Lambda.
  ProjectionOptions projection{1e-9, 30, {}};
  /// Recompute the lower triangle independently (fresh Jacobians) to measure
  /// the raw asymmetry; doubles the off-diagonal cost.
  bool check_symmetry = false;
};

struct HessianReport {
  ModeBasis basis;
  /// Coordinates of the projected base point.
  Eigen::VectorXd base;
  double lambda = 0.0;
  /// dim x (dim - nu + 1), orthonormal in the coefficient inner product.
  Eigen::MatrixXd tangent_basis;
  Eigen::MatrixXd hessian;
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;
  int morse_index = 0;
  int mu0_index = 0;
  bool nondegenerate = false;
  double dt = 0.0;
  double tau = 0.0;
  double projection_tol = 0.0;
  /// ||H - H^T|| / ||H|| before symmetrisation (0 unless check_symmetry).
  double raw_asymmetry = 0.0;
  /// ||T^T grad lambda|| / ||grad lambda|| at the base point.
  double criticality = 0.0;
  bool critical = false;
  int evaluations = 0;
};

/// Criticality threshold on HessianReport::criticality.
inline constexpr double kCriticalityThreshold = 5e-2;

/// Central 4-point finite-difference Hessian of Lambda on the tangent space of
/// the equipartitions at the projection of p, with zero band
/// tau = max(1e-3 |Lambda|, 10 tol_rel Lambda / dt^2).
HessianReport hessian_of_lambda(const Partition& p, const ModeBasis& basis, const Grid& grid,
                                const HessianOptions& opt = {});

struct DescentOptions {
  int max_iters = 40;
  /// Stop when the tangent gradient norm drops below gradient_tol * Lambda.
  double gradient_tol = 1e-3;
  /// Largest sup-norm displacement of one step.
  double max_step = 0.02;
  double armijo = 1e-4;
  int max_backtracks = 12;
  /// Weights switch from uniform to multipliers once ||g|| < switch_rel * Lambda.
  double switch_rel = 0.1;
  ProjectionOptions projection{1e-9, 30, {}};
};

struct DescentStep {
  int iteration = 0;
  double lambda = 0.0;
  double gradient_norm = 0.0;
  /// Sup-norm of the displacement that led to this iterate.
  double step = 0.0;
};

struct DescentResult {
  Partition partition;
  std::vector<DescentStep> trace;
  SimplexWeights c;
  double gradient_norm = 0.0;
  bool converged = false;
  int recharts = 0;
};

/// Projected gradient descent of Lambda on the equipartitions, starting from
/// p displaced by `start`. The chart is re-centred on the current curves when
/// the displacement reaches half its radius. Throws "left generic chart".
DescentResult minimize_lambda(const Partition& p, const PerturbationCoords& start, const Grid& grid,
                              const DescentOptions& opt = {});

/// A chart centred on the curves of q: reference parametrisation and
/// deformation field taken from the current points, fresh radius.
Partition recentre_chart(const Partition& q, const Grid& grid);

}  // namespace nodalab
