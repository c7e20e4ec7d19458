#include "gibbslab/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <set>
#include <stdexcept>

#include "gibbslab/rng.hpp"
#include "gibbslab/union_find.hpp"

namespace gibbslab {

namespace {

using SitePair = std::pair<Site, Site>;

std::uint64_t edge_key(int u, int v) {
  if (u > v) std::swap(u, v);
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(u)) << 32) |
         static_cast<std::uint32_t>(v);
}

SitePair ordered(const Site& a, const Site& b) { return a < b ? SitePair{a, b} : SitePair{b, a}; }

Site shifted(const Site& s, int dx, int dy) { return Site{s.x + dx, s.y + dy, s.sheet}; }

}  // namespace

std::string to_string(LatticeKind kind) {
  switch (kind) {
    case LatticeKind::SquareL: return "SquareL";
    case LatticeKind::SquareDual: return "SquareDual";
    case LatticeKind::Triangular: return "Triangular";
    case LatticeKind::Hexagonal: return "Hexagonal";
    case LatticeKind::Medial: return "Medial";
  }
  return "?";
}

LatticeKind lattice_from_string(const std::string& name) {
  for (auto k : {LatticeKind::SquareL, LatticeKind::SquareDual, LatticeKind::Triangular,
                 LatticeKind::Hexagonal, LatticeKind::Medial})
    if (to_string(k) == name) return k;
  throw std::invalid_argument("unknown lattice kind: " + name);
}

int full_degree(LatticeKind kind) {
  switch (kind) {
    case LatticeKind::Triangular: return 6;
    case LatticeKind::Hexagonal: return 3;
    default: return 4;
  }
}

std::pair<double, double> embed(LatticeKind kind, const Site& s) {
  const double r3 = std::sqrt(3.0);
  switch (kind) {
    case LatticeKind::SquareL:
    case LatticeKind::SquareDual: return {double(s.x), double(s.y)};
    case LatticeKind::Triangular: return {s.x + 0.5 * s.y, 0.5 * r3 * s.y};
    case LatticeKind::Hexagonal: {
      const int u = s.x >= 0 ? s.x / 2 : -((-s.x + 1) / 2);
      const double off = (s.x - 2 * u) == 0 ? 1.0 / 3.0 : 2.0 / 3.0;
      const double a = u + off, b = s.y + off;
      return {a + 0.5 * b, 0.5 * r3 * b};
    }
    case LatticeKind::Medial: return {0.5 * s.x, 0.5 * s.y};
  }
  return {0, 0};
}

Domain Domain::from_edges(LatticeKind kind, const std::vector<SitePair>& input,
                          std::optional<std::vector<Site>> boundary) {
  std::vector<SitePair> list;
  list.reserve(input.size());
  for (const auto& [a, b] : input) {
    if (a == b) throw std::invalid_argument("self-loop edge");
    list.push_back(ordered(a, b));
  }
  std::sort(list.begin(), list.end());
  list.erase(std::unique(list.begin(), list.end()), list.end());

  Domain d;
  d.kind_ = kind;
  for (const auto& [a, b] : list) {
    d.vertices_.push_back(a);
    d.vertices_.push_back(b);
  }
  std::sort(d.vertices_.begin(), d.vertices_.end());
  d.vertices_.erase(std::unique(d.vertices_.begin(), d.vertices_.end()), d.vertices_.end());
  d.vertex_lookup_.reserve(d.vertices_.size() * 2);
  for (int i = 0; i < d.vertex_count(); ++i) d.vertex_lookup_[d.vertices_[i]] = i;

  for (const auto& [a, b] : list) {
    int u = d.vertex_lookup_.at(a), v = d.vertex_lookup_.at(b);
    if (u > v) std::swap(u, v);
    d.edges_.emplace_back(u, v);
  }
  std::sort(d.edges_.begin(), d.edges_.end());
  d.incident_.assign(d.vertices_.size(), {});
  d.edge_lookup_.reserve(d.edges_.size() * 2);
  std::uint64_t fp = mix64(static_cast<std::uint64_t>(kind) + 1);
  for (int e = 0; e < d.edge_count(); ++e) {
    const auto [u, v] = d.edges_[e];
    d.incident_[u].push_back({e, v});
    d.incident_[v].push_back({e, u});
    d.edge_lookup_[edge_key(u, v)] = e;
    for (const Site& s : {d.vertices_[u], d.vertices_[v]}) {
      fp = mix64(fp ^ static_cast<std::uint32_t>(s.x));
      fp = mix64(fp ^ static_cast<std::uint32_t>(s.y));
      fp = mix64(fp ^ static_cast<std::uint32_t>(s.sheet + 7));
    }
  }
  d.fingerprint_ = fp;

  d.boundary_flag_.assign(d.vertices_.size(), 0);
  if (boundary) {
    for (const Site& s : *boundary) {
      const int v = d.find_vertex(s);
      if (v < 0) throw std::invalid_argument("boundary site not in domain");
      d.boundary_flag_[v] = 1;
    }
  } else {
    const int full = full_degree(kind);
    for (int v = 0; v < d.vertex_count(); ++v)
      if (d.degree(v) < full) d.boundary_flag_[v] = 1;
  }
  for (int v = 0; v < d.vertex_count(); ++v)
    if (d.boundary_flag_[v]) d.boundary_.push_back(v);
  return d;
}

int Domain::find_vertex(const Site& s) const {
  const auto it = vertex_lookup_.find(s);
  return it == vertex_lookup_.end() ? -1 : it->second;
}

int Domain::find_edge(int u, int v) const {
  if (u < 0 || v < 0) return -1;
  const auto it = edge_lookup_.find(edge_key(u, v));
  return it == edge_lookup_.end() ? -1 : it->second;
}

int Domain::find_edge(const Site& a, const Site& b) const {
  return find_edge(find_vertex(a), find_vertex(b));
}

std::string to_json(const Domain& d) {
  std::string out = "{\"lattice\":\"" + to_string(d.lattice()) + "\",\"vertices\":[";
  for (int v = 0; v < d.vertex_count(); ++v) {
    const Site& s = d.vertex(v);
    out += (v ? ",[" : "[") + std::to_string(s.x) + "," + std::to_string(s.y);
    if (s.sheet != 0) out += "," + std::to_string(s.sheet);
    out += "]";
  }
  out += "],\"edges\":[";
  for (int e = 0; e < d.edge_count(); ++e)
    out += (e ? ",[" : "[") + std::to_string(d.edge(e).first) + "," + std::to_string(d.edge(e).second) + "]";
  out += "],\"boundary\":[";
  for (std::size_t i = 0; i < d.boundary().size(); ++i) out += (i ? "," : "") + std::to_string(d.boundary()[i]);
  return out + "]}";
}

std::pair<Site, Site> crossing_edge(const Site& from, int dir) {
  const auto [dx, dy] = kDiagonal[dir];
  return ordered(Site{from.x + dx, from.y, 0}, Site{from.x, from.y + dy, 0});
}

std::pair<Site, Site> crossing_edge(const Site& a, const Site& b) {
  const int dx = b.x - a.x, dy = b.y - a.y;
  if (std::abs(dx) != 1 || std::abs(dy) != 1) throw std::invalid_argument("not a diagonal edge");
  return ordered(Site{a.x + dx, a.y, 0}, Site{a.x, a.y + dy, 0});
}

Domain build_box(int n, LatticeKind kind) {
  if (n < 1) throw std::invalid_argument("box size must be >= 1");
  std::vector<SitePair> edges;
  auto inside = [&](const Site& s) {
    const auto [x, y] = embed(kind, s);
    const double eps = 1e-9;
    return std::abs(x) <= n + eps && std::abs(y) <= n + eps;
  };
  switch (kind) {
    case LatticeKind::SquareL:
    case LatticeKind::SquareDual: {
      const int parity = kind == LatticeKind::SquareL ? 0 : 1;
      for (int x = -n; x <= n; ++x)
        for (int y = -n; y <= n; ++y) {
          if (((x + y) & 1) != parity) continue;
          for (int dy : {1, -1}) {
            const Site a{x, y, 0}, b{x + 1, y + dy, 0};
            if (b.x <= n && std::abs(b.y) <= n) edges.emplace_back(a, b);
          }
        }
      break;
    }
    case LatticeKind::Triangular: {
      const int span = 2 * n + 2;
      for (int u = -3 * span; u <= 3 * span; ++u)
        for (int v = -span; v <= span; ++v) {
          const Site a{u, v, 0};
          if (!inside(a)) continue;
          for (const auto [du, dv] : {std::pair{1, 0}, std::pair{0, 1}, std::pair{-1, 1}}) {
            const Site b{u + du, v + dv, 0};
            if (inside(b)) edges.emplace_back(a, b);
          }
        }
      break;
    }
    case LatticeKind::Hexagonal: {
      const int span = 2 * n + 2;
      for (int u = -3 * span; u <= 3 * span; ++u)
        for (int v = -span; v <= span; ++v) {
          const Site up{2 * u, v, 0};
          if (!inside(up)) continue;
          for (const Site& b : {Site{2 * u + 1, v, 0}, Site{2 * u - 1, v, 0}, Site{2 * u + 1, v - 1, 0}})
            if (inside(b)) edges.emplace_back(up, b);
        }
      break;
    }
    case LatticeKind::Medial: {
      for (int x = -2 * n + 1; x <= 2 * n - 1; x += 2)
        for (int y = -2 * n + 1; y <= 2 * n - 1; y += 2) {
          const Site a{x, y, 0};
          if (x + 2 <= 2 * n - 1) edges.emplace_back(a, Site{x + 2, y, 0});
          if (y + 2 <= 2 * n - 1) edges.emplace_back(a, Site{x, y + 2, 0});
        }
      break;
    }
  }
  return Domain::from_edges(kind, edges);
}

Domain build_faces(const std::vector<Site>& centres) {
  std::vector<SitePair> edges;
  for (const Site& f : centres) {
    if (is_primal_point(f.x, f.y)) throw std::invalid_argument("face centres must be dual points");
    const Site c[4] = {shifted(f, 1, 0), shifted(f, 0, 1), shifted(f, -1, 0), shifted(f, 0, -1)};
    for (int i = 0; i < 4; ++i) edges.emplace_back(c[i], c[(i + 1) % 4]);
  }
  return Domain::from_edges(LatticeKind::SquareL, edges);
}

Domain build_face_block(int cols, int rows) {
  if (cols < 1 || rows < 1) throw std::invalid_argument("face block needs positive size");
  std::vector<Site> centres;
  for (int i = 0; i < cols; ++i)
    for (int j = 0; j < rows; ++j) centres.push_back(Site{1 + i + j, i - j, 0});
  return build_faces(centres);
}

Domain build_single_edge() { return build_path(1); }

Domain build_path(int k) {
  if (k < 1) throw std::invalid_argument("path needs at least one edge");
  std::vector<SitePair> edges;
  for (int i = 0; i < k; ++i) edges.emplace_back(Site{i, i % 2, 0}, Site{i + 1, (i + 1) % 2, 0});
  return Domain::from_edges(LatticeKind::SquareL, edges);
}

bool is_simply_connected(const Domain& d) {
  if (d.lattice() != LatticeKind::SquareL && d.lattice() != LatticeKind::SquareDual) return false;
  if (d.edge_count() == 0) return false;
  UnionFind uf(d.vertex_count());
  for (const auto& [u, v] : d.edges()) uf.unite(u, v);
  if (uf.components() != 1) return false;

  int x0 = d.vertex(0).x, x1 = x0, y0 = d.vertex(0).y, y1 = y0;
  for (const Site& s : d.vertices()) {
    if (s.sheet != 0) return false;
    x0 = std::min(x0, s.x);
    x1 = std::max(x1, s.x);
    y0 = std::min(y0, s.y);
    y1 = std::max(y1, s.y);
  }
  x0 -= 2, y0 -= 2, x1 += 2, y1 += 2;
  const int face_parity = d.lattice() == LatticeKind::SquareL ? 1 : 0;
  auto in_frame = [&](int x, int y) { return x >= x0 && x <= x1 && y >= y0 && y <= y1; };
  std::set<std::pair<int, int>> reached;
  std::deque<std::pair<int, int>> queue;
  for (int x = x0; x <= x0 + 1; ++x)
    if (((x + y0) & 1) == face_parity) {
      reached.insert({x, y0});
      queue.push_back({x, y0});
    }
  while (!queue.empty()) {
    const auto [x, y] = queue.front();
    queue.pop_front();
    for (int dir = 0; dir < 4; ++dir) {
      const int nx = x + kDiagonal[dir][0], ny = y + kDiagonal[dir][1];
      if (!in_frame(nx, ny) || reached.count({nx, ny})) continue;
      const auto [a, b] = crossing_edge(Site{x, y, 0}, dir);
      if (d.find_edge(a, b) >= 0) continue;
      reached.insert({nx, ny});
      queue.push_back({nx, ny});
    }
  }
  for (int x = x0; x <= x1; ++x)
    for (int y = y0; y <= y1; ++y) {
      if (((x + y) & 1) != face_parity || reached.count({x, y})) continue;
      for (int dir = 0; dir < 4; ++dir) {
        const auto [a, b] = crossing_edge(Site{x, y, 0}, dir);
        if (d.find_edge(a, b) < 0) return false;
      }
    }
  return true;
}

DualDomain dual_domain(const Domain& d) {
  if (d.lattice() != LatticeKind::SquareL && d.lattice() != LatticeKind::SquareDual)
    throw std::invalid_argument("dual_domain needs a square-lattice domain");
  if (!is_simply_connected(d)) throw std::domain_error("unsupported topology: domain is not simply connected");
  std::vector<SitePair> edges;
  edges.reserve(d.edge_count());
  for (const auto& [u, v] : d.edges()) edges.push_back(crossing_edge(d.vertex(u), d.vertex(v)));
  const LatticeKind kind =
      d.lattice() == LatticeKind::SquareL ? LatticeKind::SquareDual : LatticeKind::SquareL;
  DualDomain out;
  out.domain = Domain::from_edges(kind, edges);
  out.to_dual.resize(d.edge_count());
  out.to_primal.resize(d.edge_count());
  for (int e = 0; e < d.edge_count(); ++e) {
    const int f = out.domain.find_edge(edges[e].first, edges[e].second);
    out.to_dual[e] = f;
    out.to_primal[f] = e;
  }
  return out;
}

SlitDomain build_slit(int M, int N, int R) {
  if (M < 0 || N < 0 || (M & 1) || (N & 1)) throw std::invalid_argument("slit M and N must be even and nonnegative");
  if (M > R || N > R) throw std::invalid_argument("slit needs M, N <= R");
  const Domain box = build_box(R, LatticeKind::SquareL);
  auto split = [&](Site s, const Site& other) {
    if (s.y == 0 && (s.x < -M || s.x > N)) s.sheet = other.y > 0 ? 1 : -1;
    return s;
  };
  std::vector<SitePair> edges;
  for (const auto& [u, v] : box.edges()) {
    const Site a = box.vertex(u), b = box.vertex(v);
    edges.emplace_back(split(a, b), split(b, a));
  }
  SlitDomain out;
  out.M = M;
  out.N = N;
  out.R = R;
  out.domain = Domain::from_edges(LatticeKind::SquareL, edges);
  out.to_box_edge.resize(out.domain.edge_count());
  for (int e = 0; e < out.domain.edge_count(); ++e) {
    Site a = out.domain.vertex(out.domain.edge(e).first), b = out.domain.vertex(out.domain.edge(e).second);
    a.sheet = b.sheet = 0;
    out.to_box_edge[e] = box.find_edge(a, b);
  }
  for (int v : out.domain.boundary()) {
    const Site& s = out.domain.vertex(v);
    if (s.sheet > 0) out.boundary_plus.push_back(v);
    else if (s.sheet < 0) out.boundary_minus.push_back(v);
    else out.outer.push_back(v);
  }
  return out;
}

TriangleStar build_triangle_star() {
  // Coordinates are three times the triangular skew coordinates, so that the
  // centre O of the up triangle is an integer point.
  const Site A{0, 0, 0}, B{3, 0, 0}, C{0, 3, 0}, O{1, 1, 0};
  TriangleStar ts;
  ts.triangle = Domain::from_edges(LatticeKind::Triangular, {{A, B}, {B, C}, {C, A}},
                                   std::vector<Site>{A, B, C});
  ts.star = Domain::from_edges(LatticeKind::Triangular, {{O, A}, {O, B}, {O, C}},
                               std::vector<Site>{A, B, C});
  ts.triangle_terminals = {ts.triangle.find_vertex(A), ts.triangle.find_vertex(B),
                           ts.triangle.find_vertex(C)};
  ts.star_terminals = {ts.star.find_vertex(A), ts.star.find_vertex(B), ts.star.find_vertex(C)};
  ts.star_centre = ts.star.find_vertex(O);
  return ts;
}

std::array<Site, 6> face_neighbours(const Site& f) {
  return {Site{f.x + 1, f.y, 0}, Site{f.x, f.y + 1, 0}, Site{f.x - 1, f.y + 1, 0},
          Site{f.x - 1, f.y, 0}, Site{f.x, f.y - 1, 0}, Site{f.x + 1, f.y - 1, 0}};
}

std::pair<Site, Site> hex_edge_between(const Site& f, const Site& g) {
  const int du = g.x - f.x, dv = g.y - f.y;
  const int u = f.x, v = f.y;
  if (du == 1 && dv == 0) return ordered(Site{2 * u, v, 0}, Site{2 * u + 1, v - 1, 0});
  if (du == 0 && dv == 1) return ordered(Site{2 * u, v, 0}, Site{2 * u - 1, v, 0});
  if (du == -1 && dv == 1) return ordered(Site{2 * (u - 1), v, 0}, Site{2 * (u - 1) + 1, v, 0});
  if ((du == -1 && dv == 0) || (du == 0 && dv == -1) || (du == 1 && dv == -1))
    return hex_edge_between(g, f);
  throw std::invalid_argument("faces are not adjacent");
}

int FaceDomain::face_index(const Site& s) const {
  const auto inner_end = faces.begin() + inner_count;
  auto it = std::lower_bound(faces.begin(), inner_end, s);
  if (it != inner_end && *it == s) return static_cast<int>(it - faces.begin());
  it = std::lower_bound(inner_end, faces.end(), s);
  if (it != faces.end() && *it == s) return static_cast<int>(it - faces.begin());
  return -1;
}

FaceDomain build_hex_faces(std::vector<Site> inner) {
  if (inner.empty()) throw std::invalid_argument("face domain needs at least one face");
  std::sort(inner.begin(), inner.end());
  inner.erase(std::unique(inner.begin(), inner.end()), inner.end());
  std::set<Site> inner_set(inner.begin(), inner.end()), ring_set;
  for (const Site& f : inner)
    for (const Site& g : face_neighbours(f))
      if (!inner_set.count(g)) ring_set.insert(g);
  FaceDomain fd;
  fd.faces = inner;
  fd.inner_count = static_cast<int>(inner.size());
  fd.faces.insert(fd.faces.end(), ring_set.begin(), ring_set.end());

  std::map<SitePair, std::pair<int, int>> separating;
  for (const Site& f : inner)
    for (const Site& g : face_neighbours(f)) {
      const SitePair e = hex_edge_between(f, g);
      if (!separating.count(e)) separating[e] = {fd.face_index(f), fd.face_index(g)};
    }
  std::vector<SitePair> edges;
  for (const auto& [e, faces] : separating) edges.push_back(e);
  fd.graph = Domain::from_edges(LatticeKind::Hexagonal, edges);
  fd.edge_faces.resize(fd.graph.edge_count());
  for (const auto& [e, faces] : separating) fd.edge_faces[fd.graph.find_edge(e.first, e.second)] = faces;
  for (const Site& f : ring_set)
    for (const Site& g : face_neighbours(f))
      if (f < g && ring_set.count(g)) fd.ring_pairs.emplace_back(fd.face_index(f), fd.face_index(g));
  return fd;
}

Subdomain make_subdomain(const Domain& window, const std::vector<int>& window_edges) {
  std::vector<SitePair> edges;
  edges.reserve(window_edges.size());
  for (int e : window_edges) {
    const auto [u, v] = window.edge(e);
    edges.emplace_back(window.vertex(u), window.vertex(v));
  }
  Subdomain sub;
  sub.domain = Domain::from_edges(window.lattice(), edges);
  sub.to_window_vertex.resize(sub.domain.vertex_count());
  for (int v = 0; v < sub.domain.vertex_count(); ++v)
    sub.to_window_vertex[v] = window.find_vertex(sub.domain.vertex(v));
  sub.to_window_edge.resize(sub.domain.edge_count());
  for (int e = 0; e < sub.domain.edge_count(); ++e) {
    const auto [u, v] = sub.domain.edge(e);
    sub.to_window_edge[e] = window.find_edge(sub.to_window_vertex[u], sub.to_window_vertex[v]);
  }
  return sub;
}

std::vector<Domain> enumerate_bond_animals(int max_edges) {
  using Animal = std::vector<SitePair>;
  auto canonical = [](Animal a) {
    Site lo = a.front().first;
    for (const auto& [s, t] : a) lo = std::min({lo, s, t});
    for (auto& [s, t] : a) {
      s = shifted(s, -lo.x, -lo.y);
      t = shifted(t, -lo.x, -lo.y);
    }
    std::sort(a.begin(), a.end());
    return a;
  };
  std::vector<Domain> out;
  std::set<Animal> level = {canonical({{Site{0, 0, 0}, Site{1, 1, 0}}}),
                            canonical({{Site{0, 0, 0}, Site{1, -1, 0}}})};
  for (int k = 1; k <= max_edges; ++k) {
    for (const Animal& a : level) out.push_back(Domain::from_edges(LatticeKind::SquareL, a));
    if (k == max_edges) break;
    std::set<Animal> next;
    for (const Animal& a : level) {
      std::set<Site> verts;
      for (const auto& [s, t] : a) verts.insert(s), verts.insert(t);
      for (const Site& s : verts)
        for (const auto& d : kDiagonal) {
          const SitePair e = ordered(s, shifted(s, d[0], d[1]));
          if (std::find(a.begin(), a.end(), e) != a.end()) continue;
          Animal grown = a;
          grown.push_back(e);
          next.insert(canonical(grown));
        }
    }
    level = std::move(next);
  }
  return out;
}

}  // namespace gibbslab
