#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "nodalab/types.hpp"

namespace nodalab {

enum class DomainKind { rectangle, disk };

/// The domain Omega together with the potential V of H = -Laplace + V.
///
/// Rectangles occupy [0,a]x[0,b]; disks are centred at the origin.
struct DomainSpec {
  DomainKind kind = DomainKind::rectangle;
  double a = 1.0;
  double b = 1.0;
  double r = 1.0;
  /// Empty means V = 0.
  std::function<double(Vec2)> potential;
  /// Free-form description echoed into run manifests.
  std::string potential_name = "zero";

  static DomainSpec rectangle(double a, double b);
  static DomainSpec disk(double r);

  void validate() const;

  double potential_at(Vec2 p) const { return potential ? potential(p) : 0.0; }

  bool contains(Vec2 p) const;
  double area() const;
  double min_extent() const;
  Vec2 centroid() const;

  /// For `inside` in the domain, the fraction t in (0,1] of the segment
  /// inside -> outside at which it first meets the boundary (1 if it does not).
  double exit_fraction(Vec2 inside, Vec2 outside) const;

  /// Smallest t > 0 with `origin + t*dir` on the boundary, for `origin` close to
  /// the domain. Returns a negative value when the ray misses.
  double ray_to_boundary(Vec2 origin, Vec2 dir) const;

  Vec2 nearest_boundary_point(Vec2 p) const;
  double distance_to_boundary(Vec2 p) const;
  /// Unit tangent of the boundary at (or nearest to) `p`.
  Vec2 boundary_tangent(Vec2 p) const;

  /// Smooth pieces of the boundary: the four edges of a rectangle, one circle
  /// for the disk.
  int boundary_piece_count() const;
  int boundary_piece_of(Vec2 p) const;
  double distance_to_piece(Vec2 p, int piece) const;

  /// Corners of the rectangle (empty for the disk).
  std::vector<Vec2> corners() const;

  std::string describe() const;
};

/// Neighbour directions in a fixed order: +x, -x, +y, -y.
enum Dir : int { kEast = 0, kWest = 1, kNorth = 2, kSouth = 3 };
inline constexpr std::array<int, 4> kDi = {1, -1, 0, 0};
inline constexpr std::array<int, 4> kDj = {0, 0, 1, -1};
inline constexpr int opposite(int d) { return d ^ 1; }

/// Nodes closer to a boundary than this fraction of h are treated as lying on it.
inline constexpr double kThetaMin = 1e-3;

/// Uniform lattice covering the domain's bounding box.
///
/// `mask` marks the strictly interior nodes of Omega. For every masked node and
/// direction, `boundary_theta` is the distance to the domain boundary along that
/// grid line in units of h, capped at 1 (1 = neighbour is inside).
struct Grid {
  DomainSpec domain;
  int nx = 0;
  int ny = 0;
  double h = 0.0;
  Vec2 origin;
  std::vector<std::uint8_t> mask;
  std::vector<double> potential;
  std::vector<std::array<double, 4>> boundary_theta;

  int size() const { return nx * ny; }
  int index(int i, int j) const { return i + nx * j; }
  int col(int k) const { return k % nx; }
  int row(int k) const { return k / nx; }
  Vec2 position(int k) const { return {origin.x + h * col(k), origin.y + h * row(k)}; }
  Vec2 position(int i, int j) const { return {origin.x + h * i, origin.y + h * j}; }
  bool in_box(int i, int j) const { return i >= 0 && j >= 0 && i < nx && j < ny; }
  /// Neighbour index, or -1 outside the bounding box.
  int neighbor(int k, int d) const {
    const int i = col(k) + kDi[d];
    const int j = row(k) + kDj[d];
    return in_box(i, j) ? index(i, j) : -1;
  }
  bool inside(int k) const { return k >= 0 && mask[k] != 0; }
  int interior_count() const;
  /// Index of the node closest to `p` (clamped to the box).
  int nearest_node(Vec2 p) const;
};

/// Builds the lattice with spacing h = 1/resolution.
Grid build_grid(const DomainSpec& spec, int resolution);

}  // namespace nodalab
