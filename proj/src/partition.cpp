#include "nodalab/partition.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <queue>

namespace nodalab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void mark_cut(const Grid& g, std::vector<std::array<double, 4>>& cut, int i, int j, int d, double t) {
  if (!g.in_box(i, j)) return;
  auto& c = cut[g.index(i, j)][d];
  c = std::min(c, std::max(t, 0.0));
}

// Records every crossing of segment p->q with the grid lines.
void cut_segment(const Grid& g, Vec2 p, Vec2 q, std::vector<std::array<double, 4>>& cut) {
  const double h = g.h;
  const Vec2 a = (p - g.origin) * (1.0 / h);
  const Vec2 b = (q - g.origin) * (1.0 / h);

  if (a.x != b.x) {
    const double lo = std::min(a.x, b.x), hi = std::max(a.x, b.x);
    for (int i = static_cast<int>(std::ceil(lo)); i <= static_cast<int>(std::floor(hi)); ++i) {
      const double s = (i - a.x) / (b.x - a.x);
      const double y = a.y + s * (b.y - a.y);
      const int j = static_cast<int>(std::floor(y));
      const double t = y - j;
      mark_cut(g, cut, i, j, kNorth, t);
      mark_cut(g, cut, i, j + 1, kSouth, 1.0 - t);
    }
  }
  if (a.y != b.y) {
    const double lo = std::min(a.y, b.y), hi = std::max(a.y, b.y);
    for (int j = static_cast<int>(std::ceil(lo)); j <= static_cast<int>(std::floor(hi)); ++j) {
      const double s = (j - a.y) / (b.y - a.y);
      const double x = a.x + s * (b.x - a.x);
      const int i = static_cast<int>(std::floor(x));
      const double t = x - i;
      mark_cut(g, cut, i, j, kEast, t);
      mark_cut(g, cut, i + 1, j, kWest, 1.0 - t);
    }
  }
}

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 d = b - a;
  const double len2 = dot(d, d);
  const double t = len2 > 0 ? std::clamp(dot(p - a, d) / len2, 0.0, 1.0) : 0.0;
  return norm(p - (a + d * t));
}

double polyline_distance(const InterfaceCurve& a, const InterfaceCurve& b) {
  double best = kInf;
  auto one_way = [&](const InterfaceCurve& u, const InterfaceCurve& v) {
    for (const Vec2& p : u.points)
      for (std::size_t i = 1; i < v.points.size(); ++i)
        best = std::min(best, point_segment_distance(p, v.points[i - 1], v.points[i]));
  };
  one_way(a, b);
  one_way(b, a);
  return best;
}

// 1 if segments p0p1 and q0q1 intersect, counting each crossing once along a
// polyline (half-open parameter ranges; `p_last`/`q_last` close the range).
int segments_cross(Vec2 p0, Vec2 p1, Vec2 q0, Vec2 q1, bool p_last, bool q_last) {
  const Vec2 r = p1 - p0;
  const Vec2 s = q1 - q0;
  const double denom = cross(r, s);
  if (std::abs(denom) < 1e-300) return 0;
  const Vec2 w = q0 - p0;
  const double t = cross(w, s) / denom;
  const double u = cross(w, r) / denom;
  const bool t_in = t >= 0.0 && (p_last ? t <= 1.0 : t < 1.0);
  const bool u_in = u >= 0.0 && (q_last ? u <= 1.0 : u < 1.0);
  return (t_in && u_in) ? 1 : 0;
}

std::vector<int> node_flood(const Grid& g, const std::vector<std::uint8_t>& open,
                            const std::vector<std::array<double, 4>>& cut, int& count) {
  const int n = g.size();
  std::vector<int> comp(n, 0);
  count = 0;
  std::queue<int> q;
  for (int k = 0; k < n; ++k) {
    if (!open[k] || comp[k]) continue;
    comp[k] = ++count;
    q.push(k);
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      for (int d = 0; d < 4; ++d) {
        if (cut[u][d] < 1.0) continue;
        const int v = g.neighbor(u, d);
        if (v < 0 || !open[v] || comp[v] || cut[v][opposite(d)] < 1.0) continue;
        comp[v] = count;
        q.push(v);
      }
    }
  }
  return comp;
}

Vec2 tangent_near(const InterfaceCurve& c, Vec2 p) {
  double best = kInf;
  Vec2 t{1.0, 0.0};
  for (std::size_t i = 1; i < c.points.size(); ++i) {
    const double d = point_segment_distance(p, c.points[i - 1], c.points[i]);
    if (d < best) {
      best = d;
      t = normalized(c.points[i] - c.points[i - 1]);
    }
  }
  return t;
}

// Where the line through `from` and `end` meets curve c, nearest to `end`.
bool meet_curve(const InterfaceCurve& c, Vec2 from, Vec2 end, Vec2& out) {
  const Vec2 r = end - from;
  double best = kInf;
  for (std::size_t i = 1; i < c.points.size(); ++i) {
    const Vec2 q0 = c.points[i - 1];
    const Vec2 s = c.points[i] - q0;
    const double denom = cross(r, s);
    if (std::abs(denom) < 1e-300) continue;
    const Vec2 w = q0 - from;
    const double t = cross(w, s) / denom;
    const double u = cross(w, r) / denom;
    if (u < -1e-12 || u > 1.0 + 1e-12) continue;
    const Vec2 x = from + r * t;
    const double d = norm(x - end);
    if (d < best) {
      best = d;
      out = x;
    }
  }
  return best < kInf;
}

}  // namespace

bool linked(const std::vector<InterfaceCurve>& curves, std::size_t s, std::size_t t) {
  const auto& a = curves[s].attached;
  const auto& b = curves[t].attached;
  const int si = static_cast<int>(s), ti = static_cast<int>(t);
  if (a[0] == ti || a[1] == ti || b[0] == si || b[1] == si) return true;
  for (int x : a)
    for (int y : b)
      if (x >= 0 && x == y) return true;
  return false;
}

void attach_chart(std::vector<InterfaceCurve>& curves, const DomainSpec& domain) {
  for (InterfaceCurve& c : curves) {
    std::array<std::optional<Vec2>, 2> ends;
    for (int e = 0; e < 2; ++e)
      if (c.attached[e] >= 0)
        ends[e] = tangent_near(curves.at(c.attached[e]), e == 0 ? c.points.front() : c.points.back());
    attach_deformation_field(c, domain, ends);
  }
}

int Partition::node_count(int label) const {
  return static_cast<int>(std::count(labels.begin(), labels.end(), label));
}

std::vector<std::pair<int, int>> label_adjacency(const Grid& grid, const std::vector<int>& labels,
                                                 const std::vector<double>* level) {
  std::map<std::pair<int, int>, int> seen;
  for (int k = 0; k < grid.size(); ++k) {
    const int a = labels[k];
    if (a <= 0) continue;
    for (int d = 0; d < 4; ++d) {
      const int n1 = grid.neighbor(k, d);
      if (!grid.inside(n1)) continue;
      int b = labels[n1];
      if (b == 0) {
        const int n2 = grid.neighbor(n1, d);
        if (!grid.inside(n2)) continue;
        if (level && (*level)[k] * (*level)[n2] >= 0.0) continue;
        b = labels[n2];
      }
      if (b > 0 && b != a) ++seen[{std::min(a, b), std::max(a, b)}];
    }
  }
  std::vector<std::pair<int, int>> edges;
  for (const auto& [e, c] : seen)
    if (c >= 2) edges.push_back(e);
  return edges;
}

std::vector<Vec2> deepest_points(const Grid& grid, const std::vector<int>& labels, int nu) {
  const int n = grid.size();
  std::vector<int> dist(n, -1);
  std::queue<int> q;
  for (int k = 0; k < n; ++k) {
    if (labels[k] <= 0) continue;
    bool border = false;
    for (int d = 0; d < 4 && !border; ++d) {
      const int nb = grid.neighbor(k, d);
      if (nb < 0 || labels[nb] != labels[k]) border = true;
    }
    if (border) {
      dist[k] = 0;
      q.push(k);
    }
  }
  while (!q.empty()) {
    const int u = q.front();
    q.pop();
    for (int d = 0; d < 4; ++d) {
      const int v = grid.neighbor(u, d);
      if (v < 0 || labels[v] != labels[u] || dist[v] >= 0) continue;
      dist[v] = dist[u] + 1;
      q.push(v);
    }
  }
  std::vector<int> best(nu, -1);
  for (int k = 0; k < n; ++k) {
    const int l = labels[k];
    if (l <= 0 || l > nu) continue;
    if (best[l - 1] < 0 || dist[k] > dist[best[l - 1]]) best[l - 1] = k;
  }
  std::vector<Vec2> out(nu);
  for (int j = 0; j < nu; ++j) {
    if (best[j] < 0) throw ComputationError("partition degenerated");
    out[j] = grid.position(best[j]);
  }
  return out;
}

bool graph_connected(int nu, const std::vector<std::pair<int, int>>& edges) {
  if (nu <= 1) return true;
  std::vector<int> parent(nu + 1);
  for (int i = 0; i <= nu; ++i) parent[i] = i;
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& [a, b] : edges) parent[find(a)] = find(b);
  const int root = find(1);
  for (int j = 2; j <= nu; ++j)
    if (find(j) != root) return false;
  return true;
}

int label_beside(const Partition& p, const Grid& grid, Vec2 point, Vec2 n, int sign) {
  for (double off : {2.0, 3.0, 1.5, 4.0}) {
    const Vec2 q = point + n * (sign * off * grid.h);
    const int k = grid.nearest_node(q);
    if (grid.inside(k) && p.labels[k] > 0) return p.labels[k];
  }
  return 0;
}

int count_intersections(const InterfaceCurve& a, const InterfaceCurve& b) {
  int count = 0;
  const std::size_t na = a.points.size(), nb = b.points.size();
  for (std::size_t i = 1; i < na; ++i)
    for (std::size_t j = 1; j < nb; ++j)
      count += segments_cross(a.points[i - 1], a.points[i], b.points[j - 1], b.points[j], i + 1 == na,
                              j + 1 == nb);
  return count;
}

bool self_intersects(const InterfaceCurve& c) {
  const std::size_t n = c.points.size();
  const std::size_t segs = n - 1;
  for (std::size_t i = 0; i < segs; ++i) {
    for (std::size_t j = i + 2; j < segs; ++j) {
      if (c.kind == CurveKind::closed && i == 0 && j == segs - 1) continue;
      if (segments_cross(c.points[i], c.points[i + 1], c.points[j], c.points[j + 1], true, true)) return true;
    }
  }
  return false;
}

double curve_distance(const Partition& a, const Partition& b) {
  if (a.interfaces.size() != b.interfaces.size()) throw ComputationError("partitions do not share a chart");
  double best = 0.0;
  for (std::size_t s = 0; s < a.interfaces.size(); ++s) {
    const auto& pa = a.interfaces[s].points;
    const auto& pb = b.interfaces[s].points;
    if (pa.size() != pb.size()) throw ComputationError("partitions do not share a chart");
    for (std::size_t i = 0; i < pa.size(); ++i) best = std::max(best, norm(pa[i] - pb[i]));
  }
  return best;
}

double interface_clearance(const std::vector<InterfaceCurve>& curves, const DomainSpec& domain) {
  double best = kInf;
  for (std::size_t s = 0; s < curves.size(); ++s) {
    for (std::size_t t = s + 1; t < curves.size(); ++t) {
      if (linked(curves, s, t) || count_intersections(curves[s], curves[t]) > 0) continue;
      best = std::min(best, polyline_distance(curves[s], curves[t]));
    }
    const auto& c = curves[s];
    std::vector<int> own;
    if (c.kind == CurveKind::boundary_attached) {
      if (c.attached[0] < 0) own.push_back(domain.boundary_piece_of(c.points.front()));
      if (c.attached[1] < 0) own.push_back(domain.boundary_piece_of(c.points.back()));
    }
    for (int piece = 0; piece < domain.boundary_piece_count(); ++piece) {
      if (std::find(own.begin(), own.end(), piece) != own.end()) continue;
      for (const Vec2& p : c.points) best = std::min(best, domain.distance_to_piece(p, piece));
    }
  }
  return best == kInf ? domain.min_extent() : best;
}

double default_chart_radius(const std::vector<InterfaceCurve>& curves, const DomainSpec& domain) {
  return 0.25 * interface_clearance(curves, domain);
}

Partition rasterize_partition(std::vector<InterfaceCurve> interfaces, const Grid& grid,
                              const std::vector<Vec2>& anchors) {
  const int n = grid.size();
  Partition p;
  p.cut.assign(n, {1.0, 1.0, 1.0, 1.0});

  for (const InterfaceCurve& c : interfaces) {
    std::vector<Vec2> pts = c.points;
    if (c.kind == CurveKind::boundary_attached && pts.size() >= 2) {
      // Overshoot the boundary so no grid edge slips past an endpoint; ends on
      // another interface overshoot only slightly.
      const Vec2 t0 = normalized(pts[1] - pts[0]);
      const Vec2 t1 = normalized(pts[pts.size() - 1] - pts[pts.size() - 2]);
      const double e0 = (c.attached[0] < 0 ? 2.0 : 0.05) * grid.h;
      const double e1 = (c.attached[1] < 0 ? 2.0 : 0.05) * grid.h;
      pts.insert(pts.begin(), pts.front() - t0 * e0);
      pts.push_back(pts.back() + t1 * e1);
    }
    for (std::size_t i = 1; i < pts.size(); ++i) cut_segment(grid, pts[i - 1], pts[i], p.cut);
  }

  std::vector<std::uint8_t> open(n, 0);
  for (int k = 0; k < n; ++k) {
    if (!grid.mask[k]) continue;
    bool on_curve = false;
    for (int d = 0; d < 4; ++d) on_curve = on_curve || p.cut[k][d] < kCutMin;
    open[k] = on_curve ? 0 : 1;
  }

  int ncomp = 0;
  const std::vector<int> comp = node_flood(grid, open, p.cut, ncomp);
  std::vector<int> size(ncomp + 1, 0);
  for (int k = 0; k < n; ++k) ++size[comp[k]];

  std::vector<int> label_of(ncomp + 1, 0);
  if (anchors.empty()) {
    int next = 0;
    for (int c = 1; c <= ncomp; ++c) {
      if (size[c] < kMinSubdomainNodes) throw ComputationError("subdomain under-resolved");
      label_of[c] = ++next;
    }
    p.nu = next;
  } else {
    p.nu = static_cast<int>(anchors.size());
    for (int j = 0; j < p.nu; ++j) {
      const int k = grid.nearest_node(anchors[j]);
      const int c = comp[k];
      if (c == 0 || label_of[c] != 0) throw ComputationError("partition degenerated");
      label_of[c] = j + 1;
    }
    for (int c = 1; c <= ncomp; ++c) {
      if (label_of[c] != 0) {
        if (size[c] < kMinSubdomainNodes) throw ComputationError("subdomain under-resolved");
      } else if (size[c] >= kMinSubdomainNodes) {
        throw ComputationError("partition degenerated");
      }
    }
  }

  p.labels.assign(n, 0);
  for (int k = 0; k < n; ++k) p.labels[k] = label_of[comp[k]];
  p.edges = label_adjacency(grid, p.labels);
  p.anchors = anchors.empty() ? deepest_points(grid, p.labels, p.nu) : anchors;

  for (std::size_t s = 0; s < interfaces.size(); ++s)
    for (std::size_t t = s + 1; t < interfaces.size(); ++t)
      if (!linked(interfaces, s, t)) p.crossings += count_intersections(interfaces[s], interfaces[t]);

  // Side labels by majority vote along the curve.
  p.interfaces = std::move(interfaces);
  for (InterfaceCurve& c : p.interfaces) {
    const auto normals = c.normals();
    std::map<int, int> left, right;
    for (std::size_t i = 0; i < c.points.size(); ++i) {
      ++left[label_beside(p, grid, c.points[i], normals[i], -1)];
      ++right[label_beside(p, grid, c.points[i], normals[i], +1)];
    }
    auto vote = [](const std::map<int, int>& m) {
      int best = 0, count = -1;
      for (const auto& [l, c] : m)
        if (l > 0 && c > count) {
          best = l;
          count = c;
        }
      return best;
    };
    c.left_label = vote(left);
    c.right_label = vote(right);
  }
  if (anchors.empty()) p.rho = default_chart_radius(p.interfaces, grid.domain);
  return p;
}

namespace {

Partition finish_straight(const Grid& grid, std::vector<InterfaceCurve> curves, int m, int k) {
  const DomainSpec& dom = grid.domain;
  attach_chart(curves, dom);
  std::vector<Vec2> anchors;
  for (int cj = 0; cj < k; ++cj)
    for (int ci = 0; ci < m; ++ci) anchors.push_back({(ci + 0.5) * dom.a / m, (cj + 0.5) * dom.b / k});
  const double rho = default_chart_radius(curves, dom);
  Partition p = rasterize_partition(std::move(curves), grid, anchors);
  p.rho = rho;
  return p;
}

}  // namespace

Partition build_straight_partition(const Grid& grid, int m, int k) {
  const DomainSpec& dom = grid.domain;
  if (dom.kind != DomainKind::rectangle) throw ConfigError("straight partitions need a rectangle");
  if (m < 1 || k < 1) throw ConfigError("mode indices must be at least 1");
  const double a = dom.a, b = dom.b;

  std::vector<InterfaceCurve> curves;
  for (int i = 1; i < m; ++i) {
    const double x = a * i / m;
    curves.push_back(make_curve(CurveKind::boundary_attached, {{x, 0.0}, {x, b}}, grid.h));
  }
  for (int j = 1; j < k; ++j) {
    const double y = b * j / k;
    curves.push_back(make_curve(CurveKind::boundary_attached, {{a, y}, {0.0, y}}, grid.h));
  }
  return finish_straight(grid, std::move(curves), m, k);
}

Partition build_junction_partition(const Grid& grid, int m, int k, JunctionSplit split) {
  const DomainSpec& dom = grid.domain;
  if (dom.kind != DomainKind::rectangle) throw ConfigError("straight partitions need a rectangle");
  if (m < 1 || k < 1) throw ConfigError("mode indices must be at least 1");
  const double a = dom.a, b = dom.b;

  std::vector<InterfaceCurve> curves;
  if (split == JunctionSplit::vertical) {
    for (int j = 1; j < k; ++j) {
      const double y = b * j / k;
      curves.push_back(make_curve(CurveKind::boundary_attached, {{a, y}, {0.0, y}}, grid.h));
    }
    for (int i = 1; i < m; ++i) {
      const double x = a * i / m;
      for (int j = 0; j < k; ++j) {
        InterfaceCurve c =
            make_curve(CurveKind::boundary_attached, {{x, b * j / k}, {x, b * (j + 1) / k}}, grid.h);
        c.attached = {j - 1, j + 1 < k ? j : -1};
        curves.push_back(std::move(c));
      }
    }
  } else {
    for (int i = 1; i < m; ++i) {
      const double x = a * i / m;
      curves.push_back(make_curve(CurveKind::boundary_attached, {{x, 0.0}, {x, b}}, grid.h));
    }
    for (int j = 1; j < k; ++j) {
      const double y = b * j / k;
      // Traversed from x = a to x = 0, as the full lines are.
      for (int i = m; i > 0; --i) {
        InterfaceCurve c =
            make_curve(CurveKind::boundary_attached, {{a * i / m, y}, {a * (i - 1) / m, y}}, grid.h);
        c.attached = {i < m ? i - 1 : -1, i - 2};
        curves.push_back(std::move(c));
      }
    }
  }
  return finish_straight(grid, std::move(curves), m, k);
}

PerturbationCoords PerturbationCoords::zero(const Partition& p, int K) {
  PerturbationCoords c;
  c.basis = ModeBasis::build(p.interfaces, K);
  c.a = Eigen::VectorXd::Zero(c.basis.dimension());
  return c;
}

PerturbationCoords PerturbationCoords::from(const ModeBasis& basis, Eigen::VectorXd values) {
  if (values.size() != basis.dimension()) throw ComputationError("coordinate vector has the wrong dimension");
  PerturbationCoords c;
  c.basis = basis;
  c.a = std::move(values);
  return c;
}

double PerturbationCoords::displacement(const InterfaceCurve& c, int s, double sigma) const {
  double f = 0.0;
  const int begin = basis.offsets[s];
  const int end = begin + basis.modes_on(s);
  for (int idx = begin; idx < end; ++idx)
    if (a[idx] != 0.0) f += a[idx] * basis.value(idx, sigma, c.ref_length, c.kind);
  return f;
}

double PerturbationCoords::sup_norm(const Partition& p) const {
  double best = 0.0;
  for (std::size_t s = 0; s < p.interfaces.size(); ++s) {
    const auto& c = p.interfaces[s];
    for (double sigma : c.param) best = std::max(best, std::abs(displacement(c, static_cast<int>(s), sigma)));
  }
  return best;
}

Partition displace_interfaces(const Partition& p, const PerturbationCoords& coords, const Grid& grid) {
  if (coords.basis.interface_count() != static_cast<int>(p.interfaces.size()))
    throw ComputationError("coordinates do not match the partition");
  if (coords.a.isZero(0.0)) return p;
  if (coords.sup_norm(p) > p.rho * (1.0 + 1e-12)) throw ComputationError("perturbation too large");

  std::vector<InterfaceCurve> moved = p.interfaces;
  for (std::size_t s = 0; s < moved.size(); ++s) {
    InterfaceCurve& c = moved[s];
    for (std::size_t i = 0; i < c.points.size(); ++i)
      c.points[i] = c.points[i] + c.field[i] * coords.displacement(c, static_cast<int>(s), c.param[i]);
    if (c.kind == CurveKind::closed) {
      c.points.back() = c.points.front();
    } else {
      if (c.attached[0] < 0) c.points.front() = grid.domain.nearest_boundary_point(c.points.front());
      if (c.attached[1] < 0) c.points.back() = grid.domain.nearest_boundary_point(c.points.back());
    }
  }
  for (InterfaceCurve& c : moved) {
    const std::size_t n = c.points.size();
    if (c.attached[0] >= 0 && !meet_curve(moved[c.attached[0]], c.points[1], c.points[0], c.points[0]))
      throw ComputationError("partition degenerated");
    if (c.attached[1] >= 0 && !meet_curve(moved[c.attached[1]], c.points[n - 2], c.points[n - 1], c.points[n - 1]))
      throw ComputationError("partition degenerated");
  }
  for (const InterfaceCurve& c : moved)
    if (self_intersects(c)) throw ComputationError("partition degenerated");
  for (std::size_t s = 0; s < moved.size(); ++s)
    for (std::size_t t = s + 1; t < moved.size(); ++t)
      if (!linked(moved, s, t) &&
          count_intersections(moved[s], moved[t]) != count_intersections(p.interfaces[s], p.interfaces[t]))
        throw ComputationError("partition degenerated");

  Partition q = rasterize_partition(std::move(moved), grid, p.anchors);
  if (q.nu != p.nu) throw ComputationError("partition degenerated");
  q.rho = p.rho;
  return q;
}

void write_interfaces_csv(const std::vector<InterfaceCurve>& curves, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << "interface_id,s,x,y\n" << std::setprecision(17);
  for (std::size_t id = 0; id < curves.size(); ++id) {
    const auto s = curves[id].arclength();
    for (std::size_t i = 0; i < s.size(); ++i)
      out << id << ',' << s[i] << ',' << curves[id].points[i].x << ',' << curves[id].points[i].y << '\n';
  }
}

}  // namespace nodalab
