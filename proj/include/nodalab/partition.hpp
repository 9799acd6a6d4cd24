#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "nodalab/curve.hpp"
#include "nodalab/domain.hpp"

namespace nodalab {

/// Subdomains must keep at least this many interior nodes.
inline constexpr int kMinSubdomainNodes = 16;

/// Interface cuts closer to a node than this fraction of h put the node on the
/// interface (Dirichlet).
inline constexpr double kCutMin = 1e-6;

/// A partition of the domain into labelled subdomains separated by interface
/// curves, rasterised on a grid.
///
/// Interfaces cut grid edges; `cut[k][d]` is the fraction of the edge leaving
/// node k in direction d at which the first interface crossing occurs (1 when
/// the edge is not cut). Nodes lying on an interface carry label 0.
struct Partition {
  std::vector<InterfaceCurve> interfaces;
  std::vector<int> labels;
  std::vector<std::array<double, 4>> cut;
  int nu = 0;
  /// Subdomain adjacencies (i < j), one per pair of labels sharing an interface.
  std::vector<std::pair<int, int>> edges;
  /// anchors[j-1] is a point deep inside subdomain j; keeps numbering stable
  /// under small displacements.
  std::vector<Vec2> anchors;
  /// Number of transversal intersections between distinct interfaces.
  int crossings = 0;
  /// Radius of the chart of nearby partitions (sup-norm of displacements).
  double rho = 0.0;

  int node_count(int label) const;
  bool generic() const { return crossings == 0; }
};

/// Labels and adjacency produced by rasterising interface curves.
/// Throws "subdomain under-resolved" or "partition degenerated".
Partition rasterize_partition(std::vector<InterfaceCurve> interfaces, const Grid& grid,
                              const std::vector<Vec2>& anchors = {});

/// Analytic nodal partition of the (m,k) product mode of a rectangle:
/// m*k congruent cells separated by straight boundary-attached lines.
Partition build_straight_partition(const Grid& grid, int m, int k);

enum class JunctionSplit { vertical, horizontal };

/// The same cells with the lines of one direction cut where they meet the
/// others: every crossing becomes two T-junctions, which separate along the
/// uncut line under perturbation. `vertical` cuts the vertical lines.
Partition build_junction_partition(const Grid& grid, int m, int k, JunctionSplit split);

/// True when one interface ends on the other or both end on a common one.
bool linked(const std::vector<InterfaceCurve>& curves, std::size_t s, std::size_t t);

/// Deformation fields and chart parametrisation for a set of curves; ends
/// resting on another interface slide along it.
void attach_chart(std::vector<InterfaceCurve>& curves, const DomainSpec& domain);

/// Minimum clearance between distinct non-crossing interfaces and between
/// interfaces and boundary pieces they do not end on.
double interface_clearance(const std::vector<InterfaceCurve>& curves, const DomainSpec& domain);

/// Default chart radius: a quarter of the clearance.
double default_chart_radius(const std::vector<InterfaceCurve>& curves, const DomainSpec& domain);

/// Label of the subdomain on side `sign` (+1 along n, -1 against it) of the
/// curve point `p`, sampled two grid spacings away. 0 if none is found.
int label_beside(const Partition& p, const Grid& grid, Vec2 point, Vec2 n, int sign);

/// Amplitudes of the truncated Fourier displacement of every interface.
struct PerturbationCoords {
  ModeBasis basis;
  Eigen::VectorXd a;

  static PerturbationCoords zero(const Partition& p, int K);
  static PerturbationCoords from(const ModeBasis& basis, Eigen::VectorXd values);
  int dimension() const { return basis.dimension(); }
  double displacement(const InterfaceCurve& c, int s, double sigma) const;
  /// Sup-norm of the induced displacement over all curve points.
  double sup_norm(const Partition& p) const;
};

/// Moves every curve point x(s) to x(s) + f(s) M(s), re-projects boundary
/// endpoints onto the boundary, and re-rasterises.
/// Throws "perturbation too large" (sup|f| > rho) or "partition degenerated".
Partition displace_interfaces(const Partition& p, const PerturbationCoords& coords, const Grid& grid);

/// Number of proper intersections between two polylines.
int count_intersections(const InterfaceCurve& a, const InterfaceCurve& b);
bool self_intersects(const InterfaceCurve& c);

/// Sup over corresponding points of the distance between the curves of two
/// partitions sharing a chart.
double curve_distance(const Partition& a, const Partition& b);

/// Subdomain adjacency read off the grid: labels a != b are adjacent when a
/// grid line goes from a to b directly or across one interface node. With a
/// level-set function, a step across an interface node must change its sign,
/// so domains meeting only at a crossing point are not adjacent.
std::vector<std::pair<int, int>> label_adjacency(const Grid& grid, const std::vector<int>& labels,
                                                 const std::vector<double>* level = nullptr);

/// A point deep inside each subdomain (one per label 1..nu).
std::vector<Vec2> deepest_points(const Grid& grid, const std::vector<int>& labels, int nu);

bool graph_connected(int nu, const std::vector<std::pair<int, int>>& edges);

/// Writes interface polylines as CSV with columns interface_id, s, x, y.
void write_interfaces_csv(const std::vector<InterfaceCurve>& curves, const std::string& path);

}  // namespace nodalab
