#include "nodalab/curve.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace nodalab {

double InterfaceCurve::length() const {
  double L = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) L += norm(points[i] - points[i - 1]);
  return L;
}

std::vector<double> InterfaceCurve::arclength() const {
  std::vector<double> s(points.size(), 0.0);
  for (std::size_t i = 1; i < points.size(); ++i) s[i] = s[i - 1] + norm(points[i] - points[i - 1]);
  return s;
}

std::vector<Vec2> InterfaceCurve::normals() const {
  const std::size_t n = points.size();
  std::vector<Vec2> out(n);
  if (n < 2) return out;
  for (std::size_t i = 0; i < n; ++i) {
    Vec2 t;
    if (kind == CurveKind::closed) {
      // points[n-1] == points[0]
      const std::size_t prev = (i == 0 || i == n - 1) ? n - 2 : i - 1;
      const std::size_t next = (i == n - 1) ? 1 : i + 1;
      t = points[next] - points[prev];
    } else if (i == 0) {
      t = points[1] - points[0];
    } else if (i == n - 1) {
      t = points[n - 1] - points[n - 2];
    } else {
      t = points[i + 1] - points[i - 1];
    }
    out[i] = right_normal(normalized(t));
  }
  return out;
}

Vec2 InterfaceCurve::midpoint() const {
  const auto s = arclength();
  const double half = s.back() / 2;
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (s[i] >= half) {
      const double seg = s[i] - s[i - 1];
      const double a = seg > 0 ? (half - s[i - 1]) / seg : 0.0;
      return points[i - 1] + (points[i] - points[i - 1]) * a;
    }
  }
  return points.front();
}

namespace {

std::vector<Vec2> resample_uniform(const std::vector<Vec2>& pts, int segments) {
  std::vector<double> s(pts.size(), 0.0);
  for (std::size_t i = 1; i < pts.size(); ++i) s[i] = s[i - 1] + norm(pts[i] - pts[i - 1]);
  const double L = s.back();
  std::vector<Vec2> out;
  out.reserve(segments + 1);
  std::size_t seg = 1;
  for (int q = 0; q <= segments; ++q) {
    const double target = L * q / segments;
    while (seg + 1 < pts.size() && s[seg] < target) ++seg;
    const double len = s[seg] - s[seg - 1];
    const double a = len > 0 ? std::clamp((target - s[seg - 1]) / len, 0.0, 1.0) : 0.0;
    out.push_back(pts[seg - 1] + (pts[seg] - pts[seg - 1]) * a);
  }
  out.back() = pts.back();
  out.front() = pts.front();
  return out;
}

}  // namespace

InterfaceCurve make_curve(CurveKind kind, std::vector<Vec2> raw, double spacing) {
  // Drop repeated points.
  std::vector<Vec2> pts;
  for (const Vec2& p : raw)
    if (pts.empty() || norm(p - pts.back()) > 1e-14) pts.push_back(p);
  if (kind == CurveKind::closed && norm(pts.front() - pts.back()) > 1e-14) pts.push_back(pts.front());
  if (pts.size() < 2) throw ComputationError("interface curve has fewer than two distinct points");

  double L = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) L += norm(pts[i] - pts[i - 1]);
  const int segments = std::max(3, static_cast<int>(std::ceil(L / spacing - 1e-9)));

  InterfaceCurve c;
  c.kind = kind;
  c.points = resample_uniform(pts, segments);
  c.param = c.arclength();
  c.ref_length = c.param.back();
  c.field = c.normals();
  return c;
}

std::vector<Vec2> deformation_field(const InterfaceCurve& curve, const DomainSpec& domain,
                                    const std::array<std::optional<Vec2>, 2>& end_tangents) {
  const auto N = curve.normals();
  if (curve.kind == CurveKind::closed) return N;

  const auto s = curve.arclength();
  const double L = s.back();
  const double blend = std::min(0.25 * L, 0.1);
  const std::size_t n = curve.points.size();

  auto end_tangent = [&](std::size_t i) {
    const auto& given = end_tangents[i == 0 ? 0 : 1];
    Vec2 t = given ? normalized(*given) : domain.boundary_tangent(curve.points[i]);
    if (dot(t, N[i]) < 0) t = -t;
    return t;
  };
  const Vec2 t0 = end_tangent(0);
  const Vec2 t1 = end_tangent(n - 1);

  std::vector<Vec2> M(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double d0 = s[i];
    const double d1 = L - s[i];
    Vec2 m = N[i];
    auto mix = [&](double dist, Vec2 t) {
      if (dist >= blend) return;
      const double c = std::cos(0.5 * kPi * dist / blend);
      const double w = c * c;
      m = m * (1.0 - w) + t * w;
    };
    mix(d0, t0);
    mix(d1, t1);
    M[i] = normalized(m);
    if (dot(M[i], N[i]) < 0.5) throw ComputationError("transversality violated");
  }
  // Exact boundary tangency at the endpoints.
  M.front() = t0;
  M.back() = t1;
  return M;
}

void attach_deformation_field(InterfaceCurve& curve, const DomainSpec& domain,
                              const std::array<std::optional<Vec2>, 2>& end_tangents) {
  curve.field = deformation_field(curve, domain, end_tangents);
  curve.param = curve.arclength();
  curve.ref_length = curve.param.back();
}

ModeBasis ModeBasis::build(const std::vector<InterfaceCurve>& curves, int K) {
  if (K < 0) throw ConfigError("mode cutoff K must be non-negative");
  ModeBasis b;
  b.K = K;
  for (std::size_t s = 0; s < curves.size(); ++s) {
    b.offsets.push_back(static_cast<int>(b.entries.size()));
    const int si = static_cast<int>(s);
    b.entries.push_back({si, Entry::Kind::constant, 0});
    for (int m = 1; m <= K; ++m) {
      b.entries.push_back({si, Entry::Kind::cosine, m});
      if (curves[s].kind == CurveKind::closed) b.entries.push_back({si, Entry::Kind::sine, m});
    }
  }
  return b;
}

int ModeBasis::modes_on(int s) const {
  const int end = (s + 1 < interface_count()) ? offsets[s + 1] : dimension();
  return end - offsets[s];
}

double ModeBasis::value(int idx, double sigma, double L, CurveKind kind) const {
  const Entry& e = entries[idx];
  const double period = (kind == CurveKind::closed) ? 2.0 : 1.0;
  switch (e.kind) {
    case Entry::Kind::constant:
      return 1.0;
    case Entry::Kind::cosine:
      return std::cos(period * kPi * e.order * sigma / L);
    case Entry::Kind::sine:
      return std::sin(period * kPi * e.order * sigma / L);
  }
  return 0.0;
}

std::string ModeBasis::label(int idx) const {
  const Entry& e = entries[idx];
  std::ostringstream os;
  os << "s" << e.interface << ":";
  switch (e.kind) {
    case Entry::Kind::constant:
      os << "const";
      break;
    case Entry::Kind::cosine:
      os << "cos" << e.order;
      break;
    case Entry::Kind::sine:
      os << "sin" << e.order;
      break;
  }
  return os.str();
}

int default_quadrature_count(const InterfaceCurve& curve, double h) {
  return std::max(100, static_cast<int>(std::ceil(curve.length() / h)));
}

CurveQuadrature curve_quadrature(const InterfaceCurve& curve, int n_quad) {
  if (n_quad < 2) throw ComputationError("quadrature needs at least two points");
  const auto s = curve.arclength();
  const auto N = curve.normals();
  const double L = s.back();
  const bool closed = curve.kind == CurveKind::closed;
  const int intervals = closed ? n_quad : n_quad - 1;
  const double w = L / intervals;

  CurveQuadrature q;
  q.points.reserve(n_quad);
  std::size_t seg = 1;
  for (int k = 0; k < n_quad; ++k) {
    const double target = L * k / intervals;
    while (seg + 1 < s.size() && s[seg] < target) ++seg;
    const double len = s[seg] - s[seg - 1];
    const double a = len > 0 ? std::clamp((target - s[seg - 1]) / len, 0.0, 1.0) : 0.0;
    const std::size_t i0 = seg - 1, i1 = seg;
    q.points.push_back(curve.points[i0] + (curve.points[i1] - curve.points[i0]) * a);
    const Vec2 n = normalized(N[i0] * (1 - a) + N[i1] * a);
    q.normals.push_back(n);
    const double sig = curve.param.empty() ? target : curve.param[i0] * (1 - a) + curve.param[i1] * a;
    q.sigma.push_back(sig);
    const Vec2 m = curve.field.empty() ? n : normalized(curve.field[i0] * (1 - a) + curve.field[i1] * a);
    q.m_dot_n.push_back(dot(m, n));
    const bool end = !closed && (k == 0 || k == n_quad - 1);
    q.weights.push_back(end ? 0.5 * w : w);
  }
  return q;
}

}  // namespace nodalab
