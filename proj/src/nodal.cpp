#include "nodalab/nodal.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <queue>
#include <set>

namespace nodalab {

namespace {

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// Edge keys: 2*node for the edge to the east neighbour, 2*node+1 to the north.
struct ContourGraph {
  std::map<int, Vec2> point;
  std::map<int, std::vector<int>> adj;

  void link(int a, int b) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
};

bool cell_inside(const Grid& g, int i, int j) {
  if (!g.in_box(i, j) || !g.in_box(i + 1, j + 1)) return false;
  return g.mask[g.index(i, j)] && g.mask[g.index(i + 1, j)] && g.mask[g.index(i + 1, j + 1)] &&
         g.mask[g.index(i, j + 1)];
}

Vec2 extend_to_boundary(const Grid& g, Vec2 from, Vec2 end, bool& ok) {
  const Vec2 d = normalized(end - from);
  const double t = g.domain.ray_to_boundary(end, d);
  ok = true;
  if (t > 0.0 && t <= 3.0 * g.h) return end + d * t;
  if (g.domain.distance_to_boundary(end) <= 3.0 * g.h) return g.domain.nearest_boundary_point(end);
  ok = false;
  return end;
}

}  // namespace

std::vector<int> sign_components(const std::vector<double>& psi, const Grid& grid, int& count) {
  const double t = kDeadBand * max_abs(psi);
  const int n = grid.size();
  std::vector<int> comp(n, 0);
  count = 0;
  auto sgn = [&](int k) { return psi[k] > t ? 1 : (psi[k] < -t ? -1 : 0); };
  std::queue<int> q;
  for (int k = 0; k < n; ++k) {
    if (!grid.mask[k] || comp[k] || sgn(k) == 0) continue;
    const int s = sgn(k);
    comp[k] = ++count;
    q.push(k);
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      for (int d = 0; d < 4; ++d) {
        const int v = grid.neighbor(u, d);
        if (!grid.inside(v) || comp[v] || sgn(v) != s) continue;
        comp[v] = count;
        q.push(v);
      }
    }
  }
  return comp;
}

std::vector<InterfaceCurve> zero_contours(const std::vector<double>& psi, const Grid& grid) {
  const double t = kDeadBand * max_abs(psi);
  auto pos = [&](int k) { return psi[k] >= -t; };
  ContourGraph cg;
  auto crossing = [&](int key, int ka, int kb) {
    if (!cg.point.count(key)) {
      const double va = psi[ka], vb = psi[kb];
      const double s = (va == vb) ? 0.5 : std::clamp(va / (va - vb), 0.0, 1.0);
      cg.point[key] = grid.position(ka) + (grid.position(kb) - grid.position(ka)) * s;
    }
    return key;
  };

  for (int j = 0; j + 1 < grid.ny; ++j) {
    for (int i = 0; i + 1 < grid.nx; ++i) {
      if (!cell_inside(grid, i, j)) continue;
      const int c[4] = {grid.index(i, j), grid.index(i + 1, j), grid.index(i + 1, j + 1), grid.index(i, j + 1)};
      const bool s[4] = {pos(c[0]), pos(c[1]), pos(c[2]), pos(c[3])};
      // Cell edges: bottom c0-c1, right c1-c2, top c3-c2, left c0-c3.
      const int key[4] = {2 * c[0], 2 * c[1] + 1, 2 * c[3], 2 * c[0] + 1};
      const int ends[4][2] = {{c[0], c[1]}, {c[1], c[2]}, {c[3], c[2]}, {c[0], c[3]}};
      std::vector<int> crossed;
      for (int e = 0; e < 4; ++e)
        if (pos(ends[e][0]) != pos(ends[e][1])) crossed.push_back(e);
      if (crossed.size() == 2) {
        const int a = crossed[0], b = crossed[1];
        cg.link(crossing(key[a], ends[a][0], ends[a][1]), crossing(key[b], ends[b][0], ends[b][1]));
      } else if (crossed.size() == 4) {
        const double centre = 0.25 * (psi[c[0]] + psi[c[1]] + psi[c[2]] + psi[c[3]]);
        const bool centre_pos = centre >= -t;
        int k[4];
        for (int e = 0; e < 4; ++e) k[e] = crossing(key[e], ends[e][0], ends[e][1]);
        if (centre_pos == s[0]) {
          cg.link(k[0], k[1]);
          cg.link(k[2], k[3]);
        } else {
          cg.link(k[3], k[0]);
          cg.link(k[1], k[2]);
        }
      }
    }
  }

  std::vector<InterfaceCurve> curves;
  std::set<int> used;
  auto walk = [&](int start) {
    std::vector<Vec2> pts;
    int prev = -1, cur = start;
    while (true) {
      used.insert(cur);
      pts.push_back(cg.point[cur]);
      int next = -1;
      for (int nb : cg.adj[cur])
        if (nb != prev && !used.count(nb)) {
          next = nb;
          break;
        }
      if (next < 0) break;
      prev = cur;
      cur = next;
    }
    return pts;
  };

  for (const auto& [key, nbs] : cg.adj) {
    if (used.count(key) || nbs.size() != 1) continue;
    std::vector<Vec2> pts = walk(key);
    if (pts.size() < 3) continue;
    bool ok0 = false, ok1 = false;
    const Vec2 e0 = extend_to_boundary(grid, pts[1], pts[0], ok0);
    const Vec2 e1 = extend_to_boundary(grid, pts[pts.size() - 2], pts.back(), ok1);
    if (ok0) pts.insert(pts.begin(), e0);
    if (ok1) pts.push_back(e1);
    InterfaceCurve c = make_curve(CurveKind::boundary_attached, pts, grid.h);
    attach_deformation_field(c, grid.domain);
    curves.push_back(std::move(c));
  }
  for (const auto& [key, nbs] : cg.adj) {
    if (used.count(key)) continue;
    std::vector<Vec2> pts = walk(key);
    if (pts.size() < 4) continue;
    InterfaceCurve c = make_curve(CurveKind::closed, pts, grid.h);
    attach_deformation_field(c, grid.domain);
    curves.push_back(std::move(c));
  }
  return curves;
}

Partition level_set_partition(const std::vector<double>& psi, const Grid& grid) {
  int count = 0;
  Partition p;
  p.labels = sign_components(psi, grid, count);
  p.nu = count;
  p.cut.assign(grid.size(), {1.0, 1.0, 1.0, 1.0});
  for (int k = 0; k < grid.size(); ++k) {
    if (p.labels[k] <= 0) continue;
    for (int d = 0; d < 4; ++d) {
      const int nb = grid.neighbor(k, d);
      if (!grid.inside(nb) || p.labels[nb] <= 0 || p.labels[nb] == p.labels[k]) continue;
      p.cut[k][d] = psi[k] / (psi[k] - psi[nb]);
    }
  }
  p.edges = label_adjacency(grid, p.labels, &psi);
  p.anchors = deepest_points(grid, p.labels, p.nu);
  try {
    p.interfaces = zero_contours(psi, grid);
  } catch (const ComputationError&) {
    p.interfaces.clear();
  }
  for (std::size_t s = 0; s < p.interfaces.size(); ++s)
    for (std::size_t t = s + 1; t < p.interfaces.size(); ++t)
      p.crossings += count_intersections(p.interfaces[s], p.interfaces[t]);
  for (InterfaceCurve& c : p.interfaces) {
    const auto normals = c.normals();
    const std::size_t mid = c.points.size() / 2;
    c.left_label = label_beside(p, grid, c.points[mid], normals[mid], -1);
    c.right_label = label_beside(p, grid, c.points[mid], normals[mid], +1);
  }
  p.rho = default_chart_radius(p.interfaces, grid.domain);
  return p;
}

Partition nodal_partition(const EigenPair& pair, const Grid& grid) {
  int count = 0;
  const std::vector<int> comp = sign_components(pair.psi, grid, count);
  std::vector<int> size(count + 1, 0);
  for (int c : comp) ++size[c];
  for (int c = 1; c <= count; ++c)
    if (size[c] < kMinSubdomainNodes) throw ComputationError("nodal domain under-resolved (refine grid)");
  if (count == 1) return rasterize_partition({}, grid);

  try {
    std::vector<InterfaceCurve> curves = zero_contours(pair.psi, grid);
    const std::vector<Vec2> anchors = deepest_points(grid, comp, count);
    const double rho = default_chart_radius(curves, grid.domain);
    Partition p = rasterize_partition(std::move(curves), grid, anchors);
    int agree = 0, total = 0;
    for (int k = 0; k < grid.size(); ++k) {
      if (comp[k] == 0) continue;
      ++total;
      agree += p.labels[k] == comp[k];
    }
    if (p.nu == count && agree >= total - 2 * grid.nx - 2 * grid.ny) {
      p.rho = rho;
      return p;
    }
  } catch (const ComputationError&) {
  }
  return level_set_partition(pair.psi, grid);
}

int nodal_deficiency(int n, int nu) {
  if (nu < 1 || n < 1) throw ComputationError("nodal count must be positive");
  if (nu > n) throw ComputationError("Courant violation: check eigenvalue ordering/resolution");
  return n - nu;
}

PartitionGraph partition_graph(int nu, const std::vector<std::pair<int, int>>& edges) {
  PartitionGraph g;
  g.vertices = nu;
  g.edges = edges;
  std::vector<std::vector<int>> adj(nu + 1);
  for (const auto& [a, b] : edges) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  g.color.assign(nu, 0);
  g.bipartite = true;
  for (int s = 1; s <= nu; ++s) {
    if (g.color[s - 1]) continue;
    g.color[s - 1] = 1;
    std::queue<int> q;
    q.push(s);
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      for (int v : adj[u]) {
        if (!g.color[v - 1]) {
          g.color[v - 1] = -g.color[u - 1];
          q.push(v);
        } else if (g.color[v - 1] == g.color[u - 1]) {
          g.bipartite = false;
        }
      }
    }
  }
  g.is_tree = graph_connected(nu, edges) && static_cast<int>(edges.size()) == nu - 1;
  return g;
}

PartitionGraph partition_graph(const Partition& p) { return partition_graph(p.nu, p.edges); }

GenericityReport genericity_check(const std::vector<EigenPair>& spectrum, int index, const Grid& grid) {
  GenericityReport r;
  const double lam = spectrum.at(index).lambda;
  auto gap = [&](int other) { return std::abs(spectrum[other].lambda - lam) / std::abs(lam); };
  if (index > 0 && gap(index - 1) <= 1e-6) r.simple_eigenvalue = false;
  if (index + 1 < static_cast<int>(spectrum.size()) && gap(index + 1) <= 1e-6) r.simple_eigenvalue = false;

  const std::vector<double>& psi = spectrum[index].psi;
  const double t = kDeadBand * max_abs(psi);
  const double margin = 0.05 * grid.domain.min_extent();

  // Gradient on cells crossed by the zero contour, away from the boundary.
  double gmin = std::numeric_limits<double>::infinity(), gmax = 0.0;
  for (int j = 0; j + 1 < grid.ny; ++j) {
    for (int i = 0; i + 1 < grid.nx; ++i) {
      if (!cell_inside(grid, i, j)) continue;
      const double v0 = psi[grid.index(i, j)], v1 = psi[grid.index(i + 1, j)];
      const double v2 = psi[grid.index(i + 1, j + 1)], v3 = psi[grid.index(i, j + 1)];
      const double gx = ((v1 - v0) + (v2 - v3)) / (2 * grid.h);
      const double gy = ((v3 - v0) + (v2 - v1)) / (2 * grid.h);
      const double gn = std::hypot(gx, gy);
      gmax = std::max(gmax, gn);
      const bool mixed = std::min({v0, v1, v2, v3}) < -t && std::max({v0, v1, v2, v3}) >= -t;
      if (!mixed) continue;
      const Vec2 centre = grid.position(i, j) + Vec2{0.5 * grid.h, 0.5 * grid.h};
      if (grid.domain.distance_to_boundary(centre) < margin) continue;
      gmin = std::min(gmin, gn);
    }
  }
  r.max_gradient = gmax;
  r.min_gradient_on_nodal_set = std::isfinite(gmin) ? gmin : gmax;
  r.nodal_gradient_regular = r.min_gradient_on_nodal_set > 0.05 * gmax;

  // Boundary normal derivative proxy psi/(theta h) at nodes next to the boundary,
  // ordered along each smooth boundary piece.
  struct Sample {
    int piece;
    double s;
    double g;
  };
  std::vector<Sample> samples;
  const auto corners = grid.domain.corners();
  for (int k = 0; k < grid.size(); ++k) {
    if (!grid.mask[k]) continue;
    double theta = 1.0;
    bool near = false;
    for (int d = 0; d < 4; ++d) {
      const int nb = grid.neighbor(k, d);
      if (nb < 0 || !grid.mask[nb]) {
        near = true;
        theta = std::min(theta, grid.boundary_theta[k][d]);
      }
    }
    if (!near) continue;
    const Vec2 x = grid.position(k);
    bool by_corner = false;
    for (const Vec2& c : corners) by_corner = by_corner || norm(x - c) < margin;
    if (by_corner) continue;
    const int piece = grid.domain.boundary_piece_of(x);
    const Vec2 b = grid.domain.nearest_boundary_point(x);
    const double s = grid.domain.kind == DomainKind::disk ? std::atan2(b.y, b.x) : dot(b, grid.domain.boundary_tangent(b));
    samples.push_back({piece, s, psi[k] / (theta * grid.h)});
  }
  std::sort(samples.begin(), samples.end(),
            [](const Sample& a, const Sample& b) { return a.piece != b.piece ? a.piece < b.piece : a.s < b.s; });
  double bmax = 0.0;
  for (const auto& s : samples) bmax = std::max(bmax, std::abs(s.g));
  for (std::size_t i = 1; i + 1 < samples.size(); ++i) {
    const Sample &a = samples[i - 1], &m = samples[i], &b = samples[i + 1];
    if (a.piece != m.piece || b.piece != m.piece) continue;
    const bool local_min = std::abs(m.g) <= std::abs(a.g) && std::abs(m.g) <= std::abs(b.g);
    if (local_min && std::abs(m.g) < 0.01 * bmax && (a.g > 0) == (b.g > 0) && (a.g > 0) == (m.g > 0))
      r.boundary_normal_derivative_regular = false;
  }

  // Three or more nodal domains meeting within one node means crossing lines.
  int count = 0;
  const std::vector<int> comp = sign_components(psi, grid, count);
  for (int j = 1; j + 1 < grid.ny && r.interfaces_disjoint; ++j) {
    for (int i = 1; i + 1 < grid.nx; ++i) {
      int seen[9];
      int m = 0;
      for (int dj = -1; dj <= 1; ++dj)
        for (int di = -1; di <= 1; ++di) {
          const int c = comp[grid.index(i + di, j + dj)];
          if (c > 0 && std::find(seen, seen + m, c) == seen + m) seen[m++] = c;
        }
      if (m >= 3) {
        r.interfaces_disjoint = false;
        break;
      }
    }
  }
  return r;
}

std::vector<NodalReport> deficiency_table(const std::vector<EigenPair>& spectrum, const Grid& grid, int rows) {
  std::vector<NodalReport> table;
  const int n_rows = std::min<int>(rows, static_cast<int>(spectrum.size()));
  for (int idx = 0; idx < n_rows; ++idx) {
    NodalReport r;
    r.genericity = genericity_check(spectrum, idx, grid);
    if (!r.genericity.simple_eigenvalue) continue;
    r.n = idx + 1;
    r.lambda = spectrum[idx].lambda;
    int count = 0;
    const std::vector<int> comp = sign_components(spectrum[idx].psi, grid, count);
    std::vector<int> size(count + 1, 0);
    for (int c : comp) ++size[c];
    for (int c = 1; c <= count; ++c)
      if (size[c] < kMinSubdomainNodes) throw ComputationError("nodal domain under-resolved (refine grid)");
    r.nu = count;
    r.deficiency = nodal_deficiency(r.n, r.nu);
    const PartitionGraph g = partition_graph(count, label_adjacency(grid, comp, &spectrum[idx].psi));
    r.bipartite = g.bipartite;
    r.is_tree = g.is_tree;
    table.push_back(r);
  }
  return table;
}

void write_deficiency_csv(const std::vector<NodalReport>& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << "n,lambda,nu,d,bipartite,is_tree,generic\n" << std::setprecision(17);
  for (const auto& r : table)
    out << r.n << ',' << r.lambda << ',' << r.nu << ',' << r.deficiency << ',' << (r.bipartite ? "true" : "false")
        << ',' << (r.is_tree ? "true" : "false") << ',' << (r.genericity.generic() ? "true" : "false") << '\n';
}

}  // namespace nodalab
