#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "nodalab/curve.hpp"
#include "nodalab/domain.hpp"
#include "nodalab/partition.hpp"

namespace nodalab {

/// Discrete Dirichlet operator H_h = -Laplace_h + V on a set of active nodes.
///
/// Grid edges that leave the active set at a fraction theta of h (domain
/// boundary or interface cut) contribute 1/(theta h^2) to the diagonal and no
/// coupling. With theta = 1 this is the plain 5-point stencil.
struct DiscreteOperator {
  Eigen::SparseMatrix<double> matrix;
  std::vector<int> node_of;   // matrix row -> grid node
  std::vector<int> row_of;    // grid node -> matrix row, -1 when Dirichlet
  double h = 0.0;
  double min_potential = 0.0;

  int dimension() const { return static_cast<int>(node_of.size()); }
  Eigen::VectorXd restrict(const std::vector<double>& grid_fn) const;
  std::vector<double> extend(const Eigen::VectorXd& v, int grid_size) const;
};

/// Whole-domain operator.
DiscreteOperator assemble_operator(const Grid& grid);

/// Passing this label assembles the block operator of all subdomains at once.
inline constexpr int kAllLabels = -1;

/// Operator on subdomain `label` of a partition.
/// Throws "subdomain disconnected" when its nodes are not 4-connected.
DiscreteOperator assemble_operator(const Grid& grid, const Partition& p, int label);

struct EigenPair {
  double lambda = 0.0;
  /// Grid function, normalised so that h^2 sum psi^2 = 1.
  std::vector<double> psi;
  double residual = 0.0;
  int n = 0;
};

struct SolverOptions {
  double tol = 1e-9;
  unsigned seed = 20240607u;
  int max_restarts = 12;
};

/// The `count` lowest eigenpairs by shift-invert Lanczos with full
/// reorthogonalisation and locking. Residuals are ||H psi - lambda psi|| in L^2.
/// Throws "eigensolver failed: <residual>".
std::vector<EigenPair> lowest_eigenpairs(const DiscreteOperator& op, int count, const SolverOptions& opt = {});

/// Ground state of subdomain `label`, positive inside, zero elsewhere.
EigenPair subdomain_groundstate(const Partition& p, const Grid& grid, int label, const SolverOptions& opt = {});

/// Q[psi] / ||psi||^2 for the quadratic form of `op`.
double rayleigh_quotient(const std::vector<double>& psi, const DiscreteOperator& op);

/// Sign fix for excited states: the first node with |psi| above 1% of the
/// maximum is made positive.
void fix_sign(std::vector<double>& psi);

enum class Side { left, right };

/// One-sided normal derivatives of a subdomain ground state along a curve.
///
/// `value[q]` is the derivative of psi with respect to the outward normal of
/// the subdomain at quadrature point q, from psi at distances h and 2h inside.
/// Points whose stencil enters another subdomain are marked invalid.
struct TraceSamples {
  int interface_id = -1;
  std::vector<double> sigma;
  std::vector<double> value;
  std::vector<double> weight;
  std::vector<std::uint8_t> valid;
};

/// psi interpolated bilinearly at `x`, treating nodes outside subdomain
/// `label` as ghosts extrapolated linearly across the cut.
/// Returns false when no corner of the cell belongs to the subdomain.
bool interpolate_subdomain(const Grid& grid, const Partition& p, int label, const std::vector<double>& psi,
                           Vec2 x, double& value);

/// Derivative of psi (ground state of `label`) along the outward normal of
/// `label` at curve point `x` with curve normal `n`; `side` says on which side
/// of the curve the subdomain lies.
bool outward_derivative(const Grid& grid, const Partition& p, int label, const std::vector<double>& psi, Vec2 x,
                        Vec2 n, Side side, double& value);

/// Traces of the ground state `pair` of subdomain `label` on interface `s`.
/// Throws "trace stencil out of domain" when most stencils are invalid.
TraceSamples normal_derivative(const EigenPair& pair, const Partition& p, const Grid& grid, int s, int label,
                               Side side, int n_quad);

/// CSV export: n, lambda, residual.
void write_spectrum_csv(const std::vector<EigenPair>& pairs, const std::string& path);

/// Grid dump: header line "nx ny h", then nx*ny values row by row.
void write_grid_function(const Grid& grid, const std::vector<double>& f, const std::string& path);

}  // namespace nodalab
