#pragma once

#include <string>
#include <utility>
#include <vector>

#include "nodalab/eigensolver.hpp"
#include "nodalab/partition.hpp"

namespace nodalab {

struct GenericityReport {
  bool simple_eigenvalue = true;
  double min_gradient_on_nodal_set = 0.0;
  double max_gradient = 0.0;
  bool nodal_gradient_regular = true;
  bool boundary_normal_derivative_regular = true;
  bool interfaces_disjoint = true;

  bool generic() const {
    return simple_eigenvalue && nodal_gradient_regular && boundary_normal_derivative_regular && interfaces_disjoint;
  }
};

struct NodalReport {
  int n = 0;
  double lambda = 0.0;
  int nu = 0;
  int deficiency = 0;
  bool bipartite = false;
  bool is_tree = false;
  GenericityReport genericity;
};

struct PartitionGraph {
  int vertices = 0;
  std::vector<std::pair<int, int>> edges;
  bool bipartite = false;
  bool is_tree = false;
  /// +1/-1 per vertex (index label-1) when bipartite.
  std::vector<int> color;
};

/// Dead band for sign classification, relative to max|psi|.
inline constexpr double kDeadBand = 1e-8;

/// 4-connected components of {psi > t} and {psi < -t}, t = kDeadBand max|psi|.
/// Returns labels (0 inside the dead band or outside) and sets `count`.
std::vector<int> sign_components(const std::vector<double>& psi, const Grid& grid, int& count);

/// Zero contour of psi by marching squares on fully interior cells; chains
/// ending next to the boundary are extended onto it. Curves are resampled to
/// spacing h and carry their deformation field.
std::vector<InterfaceCurve> zero_contours(const std::vector<double>& psi, const Grid& grid);

/// Nodal partition of a full-domain eigenfunction.
///
/// When the rasterised contours reproduce the sign components the partition is
/// the contour partition; otherwise (touching or crossing nodal lines) the cut
/// fractions come from linear interpolation of psi along grid edges.
/// Throws "nodal domain under-resolved (refine grid)".
Partition nodal_partition(const EigenPair& pair, const Grid& grid);

/// Level-set partition: labels from sign components, cut fractions from sign
/// changes of psi along grid edges; `interfaces` from zero_contours.
Partition level_set_partition(const std::vector<double>& psi, const Grid& grid);

/// d = n - nu. Throws "Courant violation: check eigenvalue ordering/resolution".
int nodal_deficiency(int n, int nu);

PartitionGraph partition_graph(const Partition& p);
PartitionGraph partition_graph(int nu, const std::vector<std::pair<int, int>>& edges);

/// `spectrum` sorted; `index` is the position of `pair` in it.
GenericityReport genericity_check(const std::vector<EigenPair>& spectrum, int index, const Grid& grid);

/// One row per simple eigenvalue. The last pair only serves the gap test of
/// the one before it when `spectrum` holds one extra pair; rows are produced
/// for the first `rows` entries.
std::vector<NodalReport> deficiency_table(const std::vector<EigenPair>& spectrum, const Grid& grid, int rows);

void write_deficiency_csv(const std::vector<NodalReport>& table, const std::string& path);

}  // namespace nodalab
