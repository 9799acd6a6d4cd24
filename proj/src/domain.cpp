#include "nodalab/domain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>

namespace nodalab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Edge {
  Vec2 a, b;
};

// Rectangle edges ordered bottom, right, top, left.
std::array<Edge, 4> rectangle_edges(double a, double b) {
  return {{{{0, 0}, {a, 0}}, {{a, 0}, {a, b}}, {{a, b}, {0, b}}, {{0, b}, {0, 0}}}};
}

Vec2 closest_on_segment(Vec2 p, const Edge& e) {
  const Vec2 d = e.b - e.a;
  const double len2 = dot(d, d);
  double t = len2 > 0 ? dot(p - e.a, d) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return e.a + d * t;
}

}  // namespace

DomainSpec DomainSpec::rectangle(double a, double b) {
  DomainSpec s;
  s.kind = DomainKind::rectangle;
  s.a = a;
  s.b = b;
  return s;
}

DomainSpec DomainSpec::disk(double r) {
  DomainSpec s;
  s.kind = DomainKind::disk;
  s.r = r;
  return s;
}

void DomainSpec::validate() const {
  if (kind == DomainKind::rectangle) {
    if (!(a > 0.0) || !(b > 0.0)) throw ConfigError("rectangle sides must be positive");
  } else if (!(r > 0.0)) {
    throw ConfigError("disk radius must be positive");
  }
}

bool DomainSpec::contains(Vec2 p) const {
  if (kind == DomainKind::rectangle) return p.x > 0.0 && p.x < a && p.y > 0.0 && p.y < b;
  return p.x * p.x + p.y * p.y < r * r;
}

double DomainSpec::area() const {
  return kind == DomainKind::rectangle ? a * b : kPi * r * r;
}

double DomainSpec::min_extent() const {
  return kind == DomainKind::rectangle ? std::min(a, b) : 2.0 * r;
}

Vec2 DomainSpec::centroid() const {
  return kind == DomainKind::rectangle ? Vec2{a / 2, b / 2} : Vec2{0, 0};
}

double DomainSpec::exit_fraction(Vec2 p, Vec2 q) const {
  const Vec2 d = q - p;
  const double t = ray_to_boundary(p, d);
  if (t < 0.0 || t > 1.0) return 1.0;
  return t;
}

double DomainSpec::ray_to_boundary(Vec2 o, Vec2 d) const {
  if (kind == DomainKind::disk) {
    // |o + t d|^2 = r^2
    const double A = dot(d, d);
    const double B = 2.0 * dot(o, d);
    const double C = dot(o, o) - r * r;
    const double disc = B * B - 4 * A * C;
    if (A == 0.0 || disc < 0.0) return -1.0;
    const double sq = std::sqrt(disc);
    const double t1 = (-B - sq) / (2 * A);
    const double t2 = (-B + sq) / (2 * A);
    if (t1 > 1e-14) return t1;
    if (t2 > 1e-14) return t2;
    return -1.0;
  }
  double best = kInf;
  const double tol = 1e-12 * std::max(a, b);
  auto try_t = [&](double t) {
    if (!(t > 1e-14) || t >= best) return;
    const Vec2 p = o + d * t;
    if (p.x >= -tol && p.x <= a + tol && p.y >= -tol && p.y <= b + tol) best = t;
  };
  if (d.x != 0.0) {
    try_t((0.0 - o.x) / d.x);
    try_t((a - o.x) / d.x);
  }
  if (d.y != 0.0) {
    try_t((0.0 - o.y) / d.y);
    try_t((b - o.y) / d.y);
  }
  return best == kInf ? -1.0 : best;
}

Vec2 DomainSpec::nearest_boundary_point(Vec2 p) const {
  if (kind == DomainKind::disk) {
    const double n = norm(p);
    if (n == 0.0) return {r, 0.0};
    return p * (r / n);
  }
  const auto edges = rectangle_edges(a, b);
  return closest_on_segment(p, edges[boundary_piece_of(p)]);
}

double DomainSpec::distance_to_boundary(Vec2 p) const { return norm(p - nearest_boundary_point(p)); }

Vec2 DomainSpec::boundary_tangent(Vec2 p) const {
  if (kind == DomainKind::disk) {
    const Vec2 q = nearest_boundary_point(p);
    return normalized(Vec2{-q.y, q.x});
  }
  const int piece = boundary_piece_of(p);
  return (piece == 0 || piece == 2) ? Vec2{1.0, 0.0} : Vec2{0.0, 1.0};
}

int DomainSpec::boundary_piece_count() const { return kind == DomainKind::rectangle ? 4 : 1; }

int DomainSpec::boundary_piece_of(Vec2 p) const {
  if (kind == DomainKind::disk) return 0;
  const auto edges = rectangle_edges(a, b);
  int best = 0;
  double best_d = kInf;
  for (int e = 0; e < 4; ++e) {
    const double d = norm(p - closest_on_segment(p, edges[e]));
    if (d < best_d) {
      best_d = d;
      best = e;
    }
  }
  return best;
}

double DomainSpec::distance_to_piece(Vec2 p, int piece) const {
  if (kind == DomainKind::disk) return std::abs(norm(p) - r);
  const auto edges = rectangle_edges(a, b);
  return norm(p - closest_on_segment(p, edges[piece]));
}

std::vector<Vec2> DomainSpec::corners() const {
  if (kind == DomainKind::disk) return {};
  return {{0, 0}, {a, 0}, {a, b}, {0, b}};
}

std::string DomainSpec::describe() const {
  std::ostringstream os;
  os.precision(17);
  if (kind == DomainKind::rectangle)
    os << "rect:" << a << "x" << b;
  else
    os << "disk:" << r;
  return os.str();
}

int Grid::interior_count() const {
  return static_cast<int>(std::count(mask.begin(), mask.end(), std::uint8_t{1}));
}

int Grid::nearest_node(Vec2 p) const {
  int i = static_cast<int>(std::lround((p.x - origin.x) / h));
  int j = static_cast<int>(std::lround((p.y - origin.y) / h));
  i = std::clamp(i, 0, nx - 1);
  j = std::clamp(j, 0, ny - 1);
  return index(i, j);
}

Grid build_grid(const DomainSpec& spec, int resolution) {
  spec.validate();
  if (resolution < 8) throw ConfigError("resolution must be at least 8 nodes per unit length");

  Grid g;
  g.domain = spec;
  g.h = 1.0 / resolution;
  if (spec.kind == DomainKind::rectangle) {
    g.origin = {0.0, 0.0};
    g.nx = static_cast<int>(std::ceil(spec.a * resolution - 1e-9)) + 1;
    g.ny = static_cast<int>(std::ceil(spec.b * resolution - 1e-9)) + 1;
  } else {
    const int m = static_cast<int>(std::ceil(spec.r * resolution - 1e-9));
    g.origin = {-m * g.h, -m * g.h};
    g.nx = g.ny = 2 * m + 1;
  }

  const int n = g.size();
  g.mask.assign(n, 0);
  g.potential.assign(n, 0.0);
  g.boundary_theta.assign(n, {1.0, 1.0, 1.0, 1.0});

  // A node is interior when it lies inside and is not within kThetaMin*h of
  // the boundary along any grid line.
  for (int k = 0; k < n; ++k) {
    const Vec2 p = g.position(k);
    if (!spec.contains(p)) continue;
    bool keep = true;
    for (int d = 0; d < 4; ++d) {
      const Vec2 q = p + Vec2{double(kDi[d]), double(kDj[d])} * g.h;
      if (spec.contains(q)) continue;
      const double theta = spec.exit_fraction(p, q);
      if (theta < kThetaMin) keep = false;
      g.boundary_theta[k][d] = std::min(1.0, theta);
    }
    if (keep) g.mask[k] = 1;
  }
  for (int k = 0; k < n; ++k) {
    if (!g.mask[k]) {
      g.boundary_theta[k] = {1.0, 1.0, 1.0, 1.0};
      continue;
    }
    const Vec2 p = g.position(k);
    g.potential[k] = spec.potential_at(p);
    if (!std::isfinite(g.potential[k])) throw ConfigError("potential is not finite inside the domain");
  }

  // Connectivity of the interior node set.
  int first = -1;
  for (int k = 0; k < n && first < 0; ++k)
    if (g.mask[k]) first = k;
  if (first < 0) throw ComputationError("domain discretization disconnected");
  std::vector<std::uint8_t> seen(n, 0);
  std::queue<int> q;
  q.push(first);
  seen[first] = 1;
  int reached = 0;
  while (!q.empty()) {
    const int k = q.front();
    q.pop();
    ++reached;
    for (int d = 0; d < 4; ++d) {
      const int nb = g.neighbor(k, d);
      if (nb >= 0 && g.mask[nb] && !seen[nb]) {
        seen[nb] = 1;
        q.push(nb);
      }
    }
  }
  if (reached != g.interior_count()) throw ComputationError("domain discretization disconnected");
  return g;
}

}  // namespace nodalab
