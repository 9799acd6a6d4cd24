#pragma once

#include <string>
#include <utility>
#include <vector>

#include "nodalab/equipartition.hpp"
#include "nodalab/nodal.hpp"

namespace nodalab {

/// Position n of the (m,k) product mode in the sorted Dirichlet spectrum of a
/// rectangle with V = 0. Throws ConfigError when the eigenvalue is not simple.
int rectangle_mode_index(const DomainSpec& domain, int m, int k);

/// The (m,k) product mode at position n of the sorted spectrum (V = 0).
/// Throws ConfigError when that eigenvalue is not simple.
std::pair<int, int> rectangle_mode_at(const DomainSpec& domain, int n);

/// pi^2 (m^2/a^2 + k^2/b^2).
double rectangle_eigenvalue(const DomainSpec& domain, int m, int k);

struct HadamardEntry {
  int interface = 0;
  std::string mode;
  int subdomain = 0;
  double formula = 0.0;
  double finite_difference = 0.0;
  double error = 0.0;
};

struct HadamardCheck {
  std::vector<HadamardEntry> entries;
  double max_error = 0.0;
  double eps = 0.0;
};

/// Compares every entry of xi_jacobian with central differences of the
/// subdomain energies (step eps). Errors are relative to
/// max(|formula|, 1e-2 max|J|), so entries vanishing by symmetry do not count
/// as failures of the formula.
HadamardCheck hadamard_check(const Partition& p, const Grid& grid, int K, double eps = 1e-3,
                             const SolverOptions& opt = {});

/// Every column has at most two entries above 1e-9 max|J|; columns of the
/// sign-definite (constant) modes have exactly two, of opposite signs.
bool jacobian_column_structure(const Eigen::MatrixXd& J, const ModeBasis& basis);

struct CriticalityStudy {
  int n = 0;
  double lambda = 0.0;
  int nu = 0;
  bool generic = true;
  SimplexWeights c;
  double gradient_norm = 0.0;
  /// Same weights, partition displaced by `amplitude` in every first cosine mode.
  double gradient_norm_displaced = 0.0;
  double amplitude = 0.0;
  double matched_mismatch = 0.0;
  std::vector<double> per_interface;
};

/// Criticality of the partition p of the eigenfunction `pair`, with weights
/// from its masses on the subdomains of p.
CriticalityStudy criticality_study(const Partition& p, const EigenPair& pair, const Grid& grid, int K,
                                   double amplitude = 0.02, const SolverOptions& opt = {});

struct MorseStudy {
  int m = 0, k = 0, n = 0, nu = 0, deficiency = 0;
  /// One report per chart; crossings are resolved both ways.
  std::vector<std::string> branch_names;
  std::vector<HessianReport> branches;
  int chosen = 0;

  const HessianReport& report() const { return branches.at(chosen); }
  bool equality() const { return report().morse_index == deficiency; }
};

/// Morse index of Lambda at the (m,k) nodal partition of a rectangle. When
/// both m and k exceed 1 the nodal lines cross; each crossing is resolved into
/// two T-junctions in both ways and the branch with the larger index is
/// chosen (ties: the larger mu0).
MorseStudy morse_study(const Grid& grid, int m, int k, int K, const HessianOptions& opt);

/// Partitions realising the charts of morse_study.
std::vector<std::pair<std::string, Partition>> rectangle_mode_charts(const Grid& grid, int m, int k);

}  // namespace nodalab
