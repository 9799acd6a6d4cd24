#pragma once

#include <array>
#include <optional>
#include <vector>

#include "nodalab/domain.hpp"
#include "nodalab/types.hpp"

namespace nodalab {

enum class CurveKind { closed, boundary_attached };

/// An oriented interface between two subdomains, stored as a polyline.
///
/// The unit normal N is the right-hand normal of the traversal direction and
/// points from `left_label` into `right_label`. Closed curves repeat their
/// first point at the end.
///
/// A curve also carries its chart data: `param` is the arclength of each point
/// on the reference (unperturbed) curve, `field` the deformation field M at the
/// reference point, and `ref_length` the reference length. Displacements are
/// expressed in these reference coordinates, so they survive repeated motion.
struct InterfaceCurve {
  CurveKind kind = CurveKind::boundary_attached;
  std::vector<Vec2> points;
  std::vector<double> param;
  std::vector<Vec2> field;
  double ref_length = 0.0;
  int left_label = 0;
  int right_label = 0;
  /// Interface on which each endpoint rests (-1: the domain boundary). An end
  /// resting on another interface forms a junction that may slide along it.
  std::array<int, 2> attached{-1, -1};

  double length() const;
  std::vector<double> arclength() const;
  /// Unit normals at the points (central differences, one-sided at open ends).
  std::vector<Vec2> normals() const;
  Vec2 midpoint() const;
};

/// Builds a curve from raw points, resampled to uniform arclength spacing close
/// to `spacing`. The chart data is reset to the new curve (M = N; see
/// `attach_deformation_field`).
InterfaceCurve make_curve(CurveKind kind, std::vector<Vec2> raw, double spacing);

/// Deformation field M on the curve points: the unit normal, blended near the
/// endpoints of boundary-attached curves into the tangent of the boundary.
/// `end_tangents` replaces the boundary tangent at ends resting elsewhere.
/// Throws "transversality violated" when M.N < 0.5 somewhere.
std::vector<Vec2> deformation_field(const InterfaceCurve& curve, const DomainSpec& domain,
                                    const std::array<std::optional<Vec2>, 2>& end_tangents = {});

/// Recomputes `field` and the chart parametrisation from the current points.
void attach_deformation_field(InterfaceCurve& curve, const DomainSpec& domain,
                              const std::array<std::optional<Vec2>, 2>& end_tangents = {});

/// Truncated Fourier basis of normal displacements on each interface:
/// 1, cos(m pi s/L) for boundary-attached curves, and 1, cos(2 pi m s/L),
/// sin(2 pi m s/L) for closed ones, m = 1..K.
struct ModeBasis {
  struct Entry {
    int interface = 0;
    enum class Kind { constant, cosine, sine } kind = Kind::constant;
    int order = 0;
  };

  int K = 4;
  std::vector<Entry> entries;
  std::vector<int> offsets;  // first entry index per interface

  static ModeBasis build(const std::vector<InterfaceCurve>& curves, int K);
  int dimension() const { return static_cast<int>(entries.size()); }
  int interface_count() const { return static_cast<int>(offsets.size()); }
  int modes_on(int s) const;
  /// Value of basis function `idx` at reference arclength `sigma` of a curve
  /// with reference length `L` and kind `kind`.
  double value(int idx, double sigma, double L, CurveKind kind) const;
  std::string label(int idx) const;
};

/// Quadrature points along a curve: uniform in current arclength, trapezoid
/// weights (sum = curve length). Carries the interpolated chart data.
struct CurveQuadrature {
  std::vector<Vec2> points;
  std::vector<Vec2> normals;
  std::vector<double> sigma;      // reference arclength
  std::vector<double> m_dot_n;    // M.N at the point
  std::vector<double> weights;
};

CurveQuadrature curve_quadrature(const InterfaceCurve& curve, int n_quad);

/// Default number of quadrature points: max(100, L/h).
int default_quadrature_count(const InterfaceCurve& curve, double h);

}  // namespace nodalab
