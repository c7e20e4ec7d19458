#include "gibbslab/exploration.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "gibbslab/rng.hpp"
#include "gibbslab/union_find.hpp"

namespace gibbslab {

bool in_box(const Site& s, int n) { return std::abs(s.x) <= n && std::abs(s.y) <= n; }

BoundaryCondition induced_bc(const Domain& window, const EdgeConfig& omega, const Subdomain& D, FrameRule rule) {
  omega.check_domain(window);
  std::vector<char> inside(window.edge_count(), 0);
  for (int e : D.to_window_edge) {
    if (e < 0) throw std::invalid_argument("subdomain edge is not a window edge");
    inside[e] = 1;
  }
  const int nv = window.vertex_count();
  UnionFind uf(nv + 1);
  for (int e = 0; e < window.edge_count(); ++e)
    if (!inside[e] && omega[e]) uf.unite(window.edge(e).first, window.edge(e).second);
  if (rule == FrameRule::WiredAtFrame)
    for (int v : window.boundary()) uf.unite(v, nv);
  std::map<int, std::vector<int>> groups;
  for (int v : D.domain.boundary()) groups[uf.find(D.to_window_vertex[v])].push_back(v);
  std::vector<std::vector<int>> blocks;
  for (auto& [root, members] : groups) blocks.push_back(std::move(members));
  return BoundaryCondition::from_blocks(D.domain, blocks);
}

int count_annulus_clusters(const Domain& window, const EdgeConfig& omega, int n) {
  omega.check_domain(window);
  if (n < 1) throw std::invalid_argument("annulus needs n >= 1");
  for (int x = -2 * n; x <= 2 * n; ++x)
    for (int y = -2 * n; y <= 2 * n; ++y)
      if (is_primal_point(x, y) && window.find_vertex(Site{x, y, 0}) < 0)
        throw std::invalid_argument("window does not contain Lambda_2n");
  UnionFind uf(window.vertex_count());
  for (int e = 0; e < window.edge_count(); ++e) {
    const auto [u, v] = window.edge(e);
    if (omega[e] && in_box(window.vertex(u), 2 * n) && in_box(window.vertex(v), 2 * n)) uf.unite(u, v);
  }
  std::vector<char> inner(window.vertex_count(), 0), outer(window.vertex_count(), 0);
  for (int v = 0; v < window.vertex_count(); ++v) {
    const Site& s = window.vertex(v);
    if (!in_box(s, 2 * n)) continue;
    if (in_box(s, n)) inner[uf.find(v)] = 1;
    if (std::max(std::abs(s.x), std::abs(s.y)) == 2 * n) outer[uf.find(v)] = 1;
  }
  int count = 0;
  for (int v = 0; v < window.vertex_count(); ++v) count += inner[v] && outer[v];
  return count;
}

std::string to_string(InterfaceStatus status) {
  switch (status) {
    case InterfaceStatus::ExitedWindow: return "exited-window";
    case InterfaceStatus::ReturnedToAxis: return "returned-to-axis";
    case InterfaceStatus::StepLimit: return "step-limit";
  }
  return "?";
}

InterfacePath trace_interface(const Domain& window, const EdgeConfig& omega, const Site& start, long max_steps) {
  omega.check_domain(window);
  if (start.y != 0 || (start.x & 1) == 0)
    throw std::invalid_argument("interface start must be an axis point between a primal and a dual vertex");
  const int n = (start.x - 1) / 2;
  Site P{n, 0, 0}, D{n + 1, 0, 0};
  int chirality = 1;
  if (!is_primal_point(n, 0)) {
    std::swap(P, D);
    chirality = -1;
  }
  if (window.find_vertex(P) < 0) throw std::invalid_argument("interface start lies outside the window");
  if (max_steps <= 0) max_steps = 4L * window.edge_count() + 16;
  InterfacePath path;
  for (long step = 0;; ++step) {
    if (step >= max_steps) {
      path.status = InterfaceStatus::StepLimit;
      break;
    }
    const int ux = D.x - P.x, uy = D.y - P.y;
    const int hx = chirality > 0 ? -uy : uy, hy = chirality > 0 ? ux : -ux;
    const Site centre{2 * P.x + ux + hx, 2 * P.y + uy + hy, 0};
    if (centre.y < 0) {
      path.status = InterfaceStatus::ReturnedToAxis;
      break;
    }
    const Site P2{D.x + hx, D.y + hy, 0}, D2{P.x + hx, P.y + hy, 0};
    const int e = window.find_edge(P, P2);
    if (e < 0) {
      path.status = InterfaceStatus::ExitedWindow;
      break;
    }
    path.medial.push_back(centre);
    if (omega[e]) {
      path.primal_side.push_back(e);
      P = P2;
    } else {
      path.dual_side.push_back(e);
      D = D2;
    }
  }
  return path;
}

std::optional<FirstHit> first_hit(const InterfacePath& path, int h) {
  for (std::size_t i = 0; i < path.medial.size(); ++i) {
    const Site& c = path.medial[i];
    if (c.y > 2 * h) {
      const int k = (c.x - 1) / 2;
      return FirstHit{static_cast<long>(i), c, k % 2 == 0 ? k : k + 1};
    }
  }
  return std::nullopt;
}

int median_first_hit(const std::vector<InterfacePath>& paths, int h) {
  std::vector<int> values;
  for (const auto& p : paths)
    if (const auto hit = first_hit(p, h)) values.push_back(hit->M);
  if (values.empty()) throw std::runtime_error("no interface reaches the requested height");
  std::sort(values.begin(), values.end());
  return values[(values.size() - 1) / 2];
}

void DuplicatedState::validate() const {
  if (!window) throw std::invalid_argument("duplicated state has no window");
  omega.check_domain(*window);
  omega_prime.check_domain(*window);
  if (((translation[0] + translation[1]) & 1) != 0)
    throw std::invalid_argument("translation must have even coordinate sum");
}

char to_char(ArcCase c) { return "abcd"[static_cast<int>(c)]; }

ArcCase arc_case_from_char(char c) {
  switch (c) {
    case 'a': return ArcCase::A;
    case 'b': return ArcCase::B;
    case 'c': return ArcCase::C;
    case 'd': return ArcCase::D;
  }
  throw std::invalid_argument(std::string("unknown shielding arc case: ") + c);
}

namespace {

int window_radius(const Domain& window) {
  int r = 0;
  for (const Site& s : window.vertices()) r = std::max({r, std::abs(s.x), std::abs(s.y)});
  return r;
}

}  // namespace

void ArcParams::validate(const Domain& window) const {
  if (n < 0) throw std::invalid_argument("arc scale n must be >= 0");
  if ((x & 1) || (y & 1)) throw std::invalid_argument("arc endpoints x and y must be even");
  if (!(x < -n && y > n)) throw std::invalid_argument("arc endpoints must lie outside Lambda_n on either side");
  if (h < n) throw std::invalid_argument("strip height h must be >= n");
  const int R = window_radius(window);
  const int ext = extent > 0 ? extent : R;
  if (ext > R) throw std::invalid_argument("arc extent exceeds the window");
  if (-x > ext || y + 1 > ext) throw std::invalid_argument("arc endpoints lie outside the extent");
}

std::vector<Site> ShieldingArc::curve() const {
  std::vector<Site> out;
  const bool dual_first = kind == ArcCase::B || kind == ArcCase::D;
  const auto& first = dual_first ? dual_path : primal_path;
  const auto& second = dual_first ? primal_path : dual_path;
  out.insert(out.end(), first.begin(), first.end());
  out.insert(out.end(), second.begin(), second.end());
  return out;
}

namespace {

using SiteSet = std::unordered_set<Site, SiteHash>;

Site step(const Site& s, int dir) { return Site{s.x + kDiagonal[dir][0], s.y + kDiagonal[dir][1], 0}; }

constexpr std::array<int, 4> kLeftStart = {1, 0, 3, 2};
constexpr std::array<int, 4> kRightStart = {0, 1, 2, 3};

struct Frame {
  Site site;
  int back;
  int k;
};

// Depth-first search whose neighbour order encodes the chirality: the
// left-hand rule tries back-1, back-2, back-3 (mod 4), the right-hand rule
// back+1, back+2, back+3. Returns the stack path from start to the first
// target reached.
template <class StepFn, class TargetFn>
std::optional<std::vector<Site>> chiral_dfs(const Site& start, int start_back, bool left, StepFn can_step,
                                            TargetFn is_target, SiteSet& visited) {
  const auto& start_order = left ? kLeftStart : kRightStart;
  std::vector<Frame> stack;
  visited.insert(start);
  stack.push_back({start, start_back, 0});
  while (!stack.empty()) {
    Frame& f = stack.back();
    const int options = f.back < 0 ? 4 : 3;
    if (f.k == options) {
      stack.pop_back();
      continue;
    }
    const int j = f.k++;
    const int dir = f.back < 0 ? start_order[j] : (left ? (f.back + 3 - j) % 4 : (f.back + 1 + j) % 4);
    const Site from = f.site;
    const Site next = step(from, dir);
    if (visited.count(next) || !can_step(from, dir, next)) continue;
    visited.insert(next);
    stack.push_back({next, (dir + 2) % 4, 0});
    if (is_target(next)) {
      std::vector<Site> path;
      path.reserve(stack.size());
      for (const Frame& g : stack) path.push_back(g.site);
      return path;
    }
  }
  return std::nullopt;
}

int direction(const Site& a, const Site& b) {
  for (int dir = 0; dir < 4; ++dir)
    if (step(a, dir) == b) return dir;
  return -1;
}

struct Transform {
  bool fx = false;
  bool fy = false;
  Site apply(const Site& s) const { return Site{fx ? -s.x : s.x, fy ? -s.y : s.y, s.sheet}; }
  bool identity() const { return !fx && !fy; }
};

EdgeConfig transformed(const Domain& window, const EdgeConfig& omega, const Transform& t) {
  if (t.identity()) return omega;
  EdgeConfig out(window);
  for (int e = 0; e < window.edge_count(); ++e) {
    const auto [u, v] = window.edge(e);
    const int f = window.find_edge(t.apply(window.vertex(u)), t.apply(window.vertex(v)));
    if (f < 0) throw std::invalid_argument("window is not symmetric under the arc reflections");
    out.set(f, omega[e]);
  }
  return out;
}

struct Region {
  int n;
  int extent;
  int hmax;  // < 0: no upper limit
  bool allowed(const Site& s) const {
    return s.y >= 0 && !in_box(s, n) && in_box(s, extent) && (hmax < 0 || s.y <= hmax);
  }
};

struct RawArc {
  std::vector<Site> primal;
  std::vector<Site> dual;
  std::optional<std::pair<Site, Site>> junction;
};

// Everything below works in the upper half-plane; reflections reduce the
// other settings to it.
class UpperExplorer {
 public:
  UpperExplorer(const Domain& window, const EdgeConfig& omega, const EdgeConfig& omega_prime, int R)
      : w_(window), om_(omega), op_(omega_prime), R_(R) {}

  auto primal_step(const Region& r) const {
    return [this, r](const Site& from, int, const Site& next) {
      if (!r.allowed(next)) return false;
      const int e = w_.find_edge(from, next);
      return e >= 0 && op_[e];
    };
  }

  auto dual_step(const Region& r, const std::unordered_set<int>* forbidden = nullptr) const {
    return [this, r, forbidden](const Site& from, int dir, const Site& next) {
      if (!r.allowed(next)) return false;
      const auto [a, b] = crossing_edge(from, dir);
      const int e = w_.find_edge(a, b);
      return e >= 0 && !om_[e] && !(forbidden && forbidden->count(e));
    };
  }

  std::optional<RawArc> case_a(int n, int x, int y, int extent) const {
    SiteSet visited;
    const Site target{y, 0, 0};
    auto path = chiral_dfs(Site{x, 0, 0}, -1, true, primal_step({n, extent, -1}),
                           [&](const Site& s) { return s == target; }, visited);
    if (!path) return std::nullopt;
    return RawArc{std::move(*path), {}, std::nullopt};
  }

  std::optional<RawArc> case_b(int n, int x, int y, int extent) const {
    SiteSet visited;
    const Site target{y + 1, 0, 0};
    auto path = chiral_dfs(Site{x + 1, 0, 0}, -1, true, dual_step({n, extent, -1}),
                           [&](const Site& s) { return s == target; }, visited);
    if (!path) return std::nullopt;
    return RawArc{{}, std::move(*path), std::nullopt};
  }

  // Steps 1 and 2: the explored primal path from (x,0) to the frame.
  std::optional<std::vector<Site>> promising_path(int n, int x, int h, int m) const {
    SiteSet visited;
    auto first = chiral_dfs(Site{x, 0, 0}, -1, true, primal_step({n, R_, h}),
                            [&](const Site& s) { return s.y == h && s.x >= m; }, visited);
    if (!first) return std::nullopt;
    auto on_frame = [&](const Site& s) { return s.y >= 1 && (std::abs(s.x) == R_ || s.y == R_); };
    const Site tip = first->back();
    if (on_frame(tip)) return first;
    SiteSet blocked(first->begin(), first->end());
    const int back = direction(tip, (*first)[first->size() - 2]);
    auto second = chiral_dfs(tip, back, true, primal_step({n, R_, -1}), on_frame, blocked);
    if (!second) return std::nullopt;
    first->insert(first->end(), second->begin() + 1, second->end());
    return first;
  }

  std::optional<RawArc> case_c(int n, int x, int y, int h, int m, int extent) const {
    const auto explored = promising_path(n, x, h, m);
    if (!explored) return std::nullopt;
    const auto& P = *explored;
    std::unordered_map<Site, int, SiteHash> index;
    for (std::size_t i = 0; i < P.size(); ++i) index.emplace(P[i], static_cast<int>(i));
    std::unordered_set<int> p_edges;
    for (std::size_t i = 0; i + 1 < P.size(); ++i) p_edges.insert(w_.find_edge(P[i], P[i + 1]));
    auto junction_index = [&](const Site& d) {
      int best = -1;
      for (const auto& [dx, dy] : {std::pair{1, 0}, std::pair{-1, 0}, std::pair{0, 1}, std::pair{0, -1}}) {
        const auto it = index.find(Site{d.x + dx, d.y + dy, 0});
        if (it != index.end() && it->second > 0 && (best < 0 || it->second < best)) best = it->second;
      }
      return best;
    };
    SiteSet visited;
    auto dual = chiral_dfs(Site{y + 1, 0, 0}, -1, false, dual_step({n, R_, h}, &p_edges),
                           [&](const Site& s) { return junction_index(s) >= 0; }, visited);
    if (!dual) return std::nullopt;
    const int j = junction_index(dual->back());
    RawArc arc;
    arc.primal.assign(P.begin(), P.begin() + j + 1);
    arc.dual.assign(dual->rbegin(), dual->rend());
    arc.junction = std::pair{arc.primal.back(), arc.dual.front()};
    for (const Site& s : arc.primal)
      if (!in_box(s, extent)) return std::nullopt;
    for (const Site& s : arc.dual)
      if (!in_box(s, extent)) return std::nullopt;
    return arc;
  }

 private:
  const Domain& w_;
  const EdgeConfig& om_;
  const EdgeConfig& op_;
  int R_;
};

struct Setting {
  Transform t;
  int x, y, m;
  ArcCase upper_case;
};

// Reflection and parameters reducing (kind, half-plane) to cases a, b, c in H.
Setting setting_for(const ArcParams& p, ArcCase kind) {
  Setting s{{kind == ArcCase::D, !p.upper}, p.x, p.y, p.m, kind};
  if (kind == ArcCase::D) {
    s.x = -p.y;
    s.y = -p.x - 2;
    s.m = -p.m;
    s.upper_case = ArcCase::C;
  }
  return s;
}

bool point_in_polygon(const std::vector<Site>& poly, long px2, long py2) {
  bool inside = false;
  const std::size_t k = poly.size();
  for (std::size_t i = 0, j = k - 1; i < k; j = i++) {
    const long xi = 2L * poly[i].x, yi = 2L * poly[i].y, xj = 2L * poly[j].x, yj = 2L * poly[j].y;
    if ((yi > py2) == (yj > py2)) continue;
    const long lhs = (px2 - xi) * (yj - yi), rhs = (py2 - yi) * (xj - xi);
    if (yj > yi ? lhs < rhs : lhs > rhs) inside = !inside;
  }
  return inside;
}

bool midpoint_inside(const Domain& window, int e, const std::vector<Site>& poly) {
  const Site& a = window.vertex(window.edge(e).first);
  const Site& b = window.vertex(window.edge(e).second);
  return point_in_polygon(poly, a.x + b.x, a.y + b.y);
}

bool in_half(const Site& s, bool upper) { return upper ? s.y >= 0 : s.y <= 0; }

void fill_edges_and_above(const Domain& window, ShieldingArc& arc) {
  arc.primal_edges.clear();
  arc.dual_edges.clear();
  for (std::size_t i = 0; i + 1 < arc.primal_path.size(); ++i)
    arc.primal_edges.push_back(window.find_edge(arc.primal_path[i], arc.primal_path[i + 1]));
  for (std::size_t i = 0; i + 1 < arc.dual_path.size(); ++i) {
    const auto [a, b] = crossing_edge(arc.dual_path[i], arc.dual_path[i + 1]);
    arc.dual_edges.push_back(window.find_edge(a, b));
  }
  const auto poly = arc.curve();
  std::unordered_set<int> on_arc(arc.primal_edges.begin(), arc.primal_edges.end());
  on_arc.insert(arc.dual_edges.begin(), arc.dual_edges.end());
  arc.above.clear();
  for (int e = 0; e < window.edge_count(); ++e) {
    const auto [u, v] = window.edge(e);
    if (!in_half(window.vertex(u), arc.upper) || !in_half(window.vertex(v), arc.upper)) continue;
    if (on_arc.count(e) || !midpoint_inside(window, e, poly)) arc.above.push_back(e);
  }
}

}  // namespace

std::optional<ShieldingArc> explore_shielding_arc(const DuplicatedState& state, const ArcParams& params,
                                                  ArcCase kind) {
  state.validate();
  const Domain& window = *state.window;
  params.validate(window);
  const int R = window_radius(window);
  const int extent = params.extent > 0 ? params.extent : R;
  const Setting s = setting_for(params, kind);
  const EdgeConfig om = transformed(window, state.omega, s.t);
  const EdgeConfig op = transformed(window, state.omega_prime, s.t);
  const UpperExplorer ex(window, om, op, R);
  std::optional<RawArc> raw;
  switch (s.upper_case) {
    case ArcCase::A: raw = ex.case_a(params.n, s.x, s.y, extent); break;
    case ArcCase::B: raw = ex.case_b(params.n, s.x, s.y, extent); break;
    default: raw = ex.case_c(params.n, s.x, s.y, params.h, s.m, extent); break;
  }
  if (!raw) return std::nullopt;
  auto back = [&](std::vector<Site> v) {
    for (Site& site : v) site = s.t.apply(site);
    return v;
  };
  ShieldingArc arc;
  arc.kind = kind;
  arc.upper = params.upper;
  arc.primal_path = back(std::move(raw->primal));
  arc.dual_path = back(std::move(raw->dual));
  if (kind == ArcCase::D) {
    std::reverse(arc.primal_path.begin(), arc.primal_path.end());
    std::reverse(arc.dual_path.begin(), arc.dual_path.end());
    arc.junction = std::pair{arc.dual_path.back(), arc.primal_path.front()};
  } else if (kind == ArcCase::C) {
    arc.junction = std::pair{arc.primal_path.back(), arc.dual_path.front()};
  }
  const auto curve = arc.curve();
  arc.start = curve.front();
  arc.end = curve.back();
  fill_edges_and_above(window, arc);
  return arc;
}

bool is_promising(const DuplicatedState& state, const ArcParams& params, ArcCase kind) {
  state.validate();
  const Domain& window = *state.window;
  params.validate(window);
  if (kind == ArcCase::B) return true;
  if (kind == ArcCase::A) return explore_shielding_arc(state, params, kind).has_value();
  const int R = window_radius(window);
  const Setting s = setting_for(params, kind);
  const EdgeConfig om = transformed(window, state.omega, s.t);
  const EdgeConfig op = transformed(window, state.omega_prime, s.t);
  return UpperExplorer(window, om, op, R).promising_path(params.n, s.x, params.h, s.m).has_value();
}

std::vector<std::string> validate_arc(const DuplicatedState& state, const ArcParams& params, const ShieldingArc& arc) {
  const Domain& window = *state.window;
  const int R = window_radius(window);
  const int extent = params.extent > 0 ? params.extent : R;
  std::vector<std::string> bad;
  auto fail = [&](const std::string& msg) { bad.push_back(std::string("case ") + to_char(arc.kind) + ": " + msg); };
  const Site X{params.x, 0, 0}, Y{params.y, 0, 0}, X1{params.x + 1, 0, 0}, Y1{params.y + 1, 0, 0};
  const bool has_primal = !arc.primal_path.empty(), has_dual = !arc.dual_path.empty();
  switch (arc.kind) {
    case ArcCase::A:
      if (has_dual || !has_primal) fail("must consist of primal edges only");
      else if (arc.primal_path.front() != X || arc.primal_path.back() != Y) fail("endpoints must be (x,0) and (y,0)");
      break;
    case ArcCase::B:
      if (has_primal || !has_dual) fail("must consist of dual edges only");
      else if (arc.dual_path.front() != X1 || arc.dual_path.back() != Y1) fail("endpoints must be (x+1,0) and (y+1,0)");
      break;
    case ArcCase::C:
    case ArcCase::D: {
      if (!has_primal || !has_dual || !arc.junction) {
        fail("needs a primal segment, a junction and a dual segment");
        break;
      }
      const bool c = arc.kind == ArcCase::C;
      if (c && (arc.primal_path.front() != X || arc.dual_path.back() != Y1)) fail("endpoints must be (x,0) and (y+1,0)");
      if (!c && (arc.dual_path.front() != X1 || arc.primal_path.back() != Y)) fail("endpoints must be (x+1,0) and (y,0)");
      const auto [j1, j2] = *arc.junction;
      const bool linked = c ? (j1 == arc.primal_path.back() && j2 == arc.dual_path.front())
                            : (j1 == arc.dual_path.back() && j2 == arc.primal_path.front());
      if (!linked || std::abs(j1.x - j2.x) + std::abs(j1.y - j2.y) != 1) fail("junction is not a single Z^2 edge");
      break;
    }
  }
  const auto curve = arc.curve();
  SiteSet seen;
  for (const Site& s : curve) {
    if (!seen.insert(s).second) fail("arc revisits a site");
    if (in_box(s, params.n)) fail("arc intersects Lambda_n");
    if (!in_half(s, arc.upper)) fail("arc leaves its half-plane");
    if (!in_box(s, extent)) fail("arc leaves Lambda_extent");
  }
  for (std::size_t i = 0; i + 1 < arc.primal_path.size(); ++i) {
    const int e = window.find_edge(arc.primal_path[i], arc.primal_path[i + 1]);
    if (e < 0) fail("primal segment uses a non-edge");
    else if (!state.omega_prime[e]) fail("primal segment edge closed in omega'");
  }
  std::unordered_set<int> crossed;
  for (std::size_t i = 0; i + 1 < arc.dual_path.size(); ++i) {
    if (direction(arc.dual_path[i], arc.dual_path[i + 1]) < 0) {
      fail("dual segment uses a non-edge");
      continue;
    }
    const auto [a, b] = crossing_edge(arc.dual_path[i], arc.dual_path[i + 1]);
    const int e = window.find_edge(a, b);
    if (e < 0) fail("dual segment leaves the window");
    else if (state.omega[e]) fail("dual segment edge closed in omega*");
    else crossed.insert(e);
  }
  for (std::size_t i = 0; i + 1 < arc.primal_path.size(); ++i)
    if (crossed.count(window.find_edge(arc.primal_path[i], arc.primal_path[i + 1])))
      fail("primal and dual segments cross");
  if (!bad.empty()) return bad;

  // Separation: Lambda_n lies inside the curve closed along the axis, the frame outside.
  std::unordered_set<int> on_curve(crossed.begin(), crossed.end());
  for (std::size_t i = 0; i + 1 < arc.primal_path.size(); ++i)
    on_curve.insert(window.find_edge(arc.primal_path[i], arc.primal_path[i + 1]));
  for (int e = 0; e < window.edge_count(); ++e) {
    if (on_curve.count(e)) continue;
    const auto [u, v] = window.edge(e);
    const Site &a = window.vertex(u), &b = window.vertex(v);
    if (!in_half(a, arc.upper) || !in_half(b, arc.upper)) continue;
    const bool inner = in_box(a, params.n) && in_box(b, params.n);
    // A frame vertex lying on the curve is touched, not enclosed.
    const bool frame = (window.is_boundary(u) && !seen.count(a)) || (window.is_boundary(v) && !seen.count(b));
    const bool inside = midpoint_inside(window, e, curve);
    if (inner && !inside) {
      fail("Lambda_n is not enclosed");
      break;
    }
    if (frame && inside) {
      fail("frame edge enclosed by the arc");
      break;
    }
  }

  if (arc.kind == ArcCase::C || arc.kind == ArcCase::D) {
    // Primal segment joined to the frame in omega' within the half-plane, off the dual segment.
    std::vector<char> reached(window.vertex_count(), 0);
    std::deque<int> queue;
    for (const Site& s : arc.primal_path) {
      const int v = window.find_vertex(s);
      reached[v] = 1;
      queue.push_back(v);
    }
    bool frame = false;
    while (!queue.empty() && !frame) {
      const int v = queue.front();
      queue.pop_front();
      if (window.is_boundary(v)) frame = true;
      for (const auto& inc : window.incident(v)) {
        if (reached[inc.other] || !state.omega_prime[inc.edge] || crossed.count(inc.edge)) continue;
        if (!in_half(window.vertex(inc.other), arc.upper)) continue;
        reached[inc.other] = 1;
        queue.push_back(inc.other);
      }
    }
    if (!frame) fail("primal segment is not joined to the frame in omega'");
  }
  return bad;
}

MonotonicityReport arc_monotonicity_check(const DuplicatedState& state, const ArcParams& params, ArcCase kind,
                                          int trials, std::uint64_t seed, int closures) {
  MonotonicityReport rep;
  const auto base = explore_shielding_arc(state, params, kind);
  const bool promising = is_promising(state, params, kind);
  std::vector<int> open;
  for (int e = 0; e < state.window->edge_count(); ++e)
    if (state.omega[e]) open.push_back(e);
  for (int t = 0; t < trials; ++t) {
    ++rep.instances;
    rep.promising += promising;
    rep.found += base.has_value();
    if (!base || !promising) continue;
    DuplicatedState modified = state;
    CounterStream rng(seed, static_cast<std::uint64_t>(t));
    if (closures < 0) {
      for (int e : open) modified.omega.set(e, false);
    } else {
      for (int c = 0; c < closures && !open.empty(); ++c) modified.omega.set(open[rng.below(open.size())], false);
    }
    const auto again = explore_shielding_arc(modified, params, kind);
    ++rep.checks;
    const bool lost = !again.has_value();
    const bool changed = closures == 0 && again && again->curve() != base->curve();
    if (lost || changed) {
      ++rep.violations;
      rep.details.push_back("trial " + std::to_string(t) + (lost ? ": arc lost after closing edges" : ": arc changed"));
    }
  }
  return rep;
}

std::vector<int> enclosed_edges(const Domain& window, const ShieldingArc& upper, const ShieldingArc& lower) {
  std::vector<Site> poly = upper.curve();
  const auto low = lower.curve();
  poly.insert(poly.end(), low.rbegin(), low.rend());
  std::unordered_set<int> on_curve;
  for (const ShieldingArc* a : {&upper, &lower}) {
    on_curve.insert(a->primal_edges.begin(), a->primal_edges.end());
    on_curve.insert(a->dual_edges.begin(), a->dual_edges.end());
  }
  std::vector<int> out;
  for (int e = 0; e < window.edge_count(); ++e)
    if (!on_curve.count(e) && midpoint_inside(window, e, poly)) out.push_back(e);
  return out;
}

int count_boundary_arcs(const ShieldingArc& upper, const ShieldingArc& lower) {
  auto runs = [](const ShieldingArc& a) {
    std::vector<char> out;
    const bool dual_first = a.kind == ArcCase::B || a.kind == ArcCase::D;
    if (dual_first ? a.dual_path.size() > 1 : a.primal_path.size() > 1) out.push_back(dual_first ? 'D' : 'P');
    if (dual_first ? a.primal_path.size() > 1 : a.dual_path.size() > 1) out.push_back(dual_first ? 'P' : 'D');
    return out;
  };
  std::vector<char> cycle = runs(upper);
  const auto low = runs(lower);
  cycle.insert(cycle.end(), low.rbegin(), low.rend());
  std::vector<char> merged;
  for (char c : cycle)
    if (merged.empty() || merged.back() != c) merged.push_back(c);
  while (merged.size() > 1 && merged.front() == merged.back()) merged.pop_back();
  return static_cast<int>(merged.size());
}

std::string to_string(BcKind kind) { return kind == BcKind::Free ? "free" : "wired"; }

BcKind bc_kind_from_string(const std::string& name) {
  if (name == "free") return BcKind::Free;
  if (name == "wired") return BcKind::Wired;
  throw std::invalid_argument("unknown boundary condition: " + name);
}

void ScanSpec::validate() const {
  if (R < 4) throw std::invalid_argument("scan window R must be >= 4");
  if (ladder.empty()) throw std::invalid_argument("scale ladder is empty");
  for (std::size_t k = 0; k < ladder.size(); ++k) {
    if (ladder[k] < 1 || (ladder[k] & 1)) throw std::invalid_argument("ladder entries must be even and positive");
    if (k > 0 && ladder[k] <= ladder[k - 1]) throw std::invalid_argument("ladder must be increasing");
    const int extent = k + 1 < ladder.size() ? ladder[k + 1] : R;
    if (ladder[k] + 3 > extent) throw std::invalid_argument("ladder does not fit inside the window");
  }
  if (((translation[0] + translation[1]) & 1) != 0)
    throw std::invalid_argument("translation must have even coordinate sum");
  if (trials < 1 || sweeps < 1) throw std::invalid_argument("trials and sweeps must be >= 1");
  if (case_order.empty()) throw std::invalid_argument("case order is empty");
  for (char c : case_order) arc_case_from_char(c);
  if (shared_stream && bc != bc_prime) throw std::invalid_argument("shared stream needs identical laws");
  if (workers < 1) throw std::invalid_argument("workers must be >= 1");
}

namespace {

EdgeConfig sample_window(const std::shared_ptr<const Domain>& big, BcKind kind, const FKParams& params, long sweeps,
                         std::uint64_t seed, std::uint64_t chain) {
  ChainSpec spec;
  spec.domain = big;
  spec.bc = kind == BcKind::Wired ? BoundaryCondition::wired(*big) : BoundaryCondition::free(*big);
  spec.params = params;
  spec.sweeps = sweeps;
  spec.burn_in = 0;
  spec.seed = seed;
  spec.chain_id = chain;
  spec.init = kind == BcKind::Wired ? InitRule::AllOpen : InitRule::AllClosed;
  return run_fk_chain(spec, {}).final_state;
}

// omega on the window read off a configuration of the big box shifted by t.
EdgeConfig restrict_shifted(const Domain& window, const Domain& big, const EdgeConfig& sample, int tx, int ty) {
  EdgeConfig out(window);
  for (int e = 0; e < window.edge_count(); ++e) {
    const auto [u, v] = window.edge(e);
    Site a = window.vertex(u), b = window.vertex(v);
    a.x -= tx, a.y -= ty, b.x -= tx, b.y -= ty;
    const int f = big.find_edge(a, b);
    if (f < 0) throw std::logic_error("shifted window edge missing from the sampling box");
    out.set(e, sample[f]);
  }
  return out;
}

struct TrialResult {
  std::vector<ScanRow> rows;
  std::vector<std::string> failures;
  long promising_upper = 0;
};

}  // namespace

ScanReport run_duplication_scan(const ScanSpec& spec) {
  spec.validate();
  const int tmax = std::max(std::abs(spec.translation[0]), std::abs(spec.translation[1]));
  const auto window = std::make_shared<const Domain>(build_box(spec.R, LatticeKind::SquareL));
  const auto big = std::make_shared<const Domain>(build_box(spec.R + tmax, LatticeKind::SquareL));
  std::vector<TrialResult> results(spec.trials);

  parallel_for(spec.trials, spec.workers, [&](long trial) {
    TrialResult& out = results[trial];
    const auto chain = static_cast<std::uint64_t>(trial);
    const EdgeConfig s = sample_window(big, spec.bc, spec.params, spec.sweeps, spec.seed, 2 * chain);
    const EdgeConfig s_prime = spec.shared_stream
                                   ? s
                                   : sample_window(big, spec.bc_prime, spec.params, spec.sweeps, spec.seed, 2 * chain + 1);
    DuplicatedState state;
    state.window = window;
    state.omega = restrict_shifted(*window, *big, s, 0, 0);
    state.omega_prime = restrict_shifted(*window, *big, s_prime, spec.translation[0], spec.translation[1]);
    state.translation = spec.translation;

    for (std::size_t k = 0; k < spec.ladder.size(); ++k) {
      const int n = spec.ladder[k];
      ArcParams p;
      p.n = n;
      p.x = -(n + 2);
      p.y = n + 2;
      p.extent = k + 1 < spec.ladder.size() ? spec.ladder[k + 1] : spec.R;
      p.h = spec.h_offset > 0 ? std::min(n + spec.h_offset, p.extent) : p.extent;
      p.m = spec.m;
      ScanRow row;
      row.trial = trial;
      row.scale = n;
      std::optional<ShieldingArc> arcs[2];
      for (int half = 0; half < 2; ++half) {
        p.upper = half == 0;
        for (char c : spec.case_order) {
          const ArcCase kind = arc_case_from_char(c);
          if (half == 0 && k == 0 && kind == ArcCase::C && is_promising(state, p, kind)) ++out.promising_upper;
          arcs[half] = explore_shielding_arc(state, p, kind);
          if (!arcs[half]) continue;
          for (const auto& msg : validate_arc(state, p, *arcs[half])) {
            ++row.invariant_failures;
            out.failures.push_back("trial " + std::to_string(trial) + " scale " + std::to_string(n) +
                                   (p.upper ? " upper " : " lower ") + msg);
          }
          break;
        }
      }
      row.upper_found = arcs[0].has_value();
      row.lower_found = arcs[1].has_value();
      if (arcs[0]) row.upper_case = to_char(arcs[0]->kind);
      if (arcs[1]) row.lower_case = to_char(arcs[1]->kind);
      row.arc_found = row.upper_found && row.lower_found;
      if (row.arc_found) {
        const auto inside = enclosed_edges(*window, *arcs[0], *arcs[1]);
        row.n_arcs = count_boundary_arcs(*arcs[0], *arcs[1]);
        if (row.n_arcs > 4) {
          ++row.invariant_failures;
          out.failures.push_back("trial " + std::to_string(trial) + ": enclosed domain has " +
                                 std::to_string(row.n_arcs) + " boundary arcs");
        }
        if (inside.empty()) {
          ++row.invariant_failures;
          out.failures.push_back("trial " + std::to_string(trial) + ": enclosed domain is empty");
        } else {
          const Subdomain D = make_subdomain(*window, inside);
          const BoundaryCondition xi = induced_bc(*window, state.omega, D, FrameRule::WiredAtFrame);
          const BoundaryCondition xi_prime = induced_bc(*window, state.omega_prime, D, FrameRule::WiredAtFrame);
          const BcOrder order = bc_compare(xi_prime, xi);
          row.bc_order = to_string(order);
          row.bc_dominates = order == BcOrder::Equal || order == BcOrder::Coarser;
        }
      }
      out.rows.push_back(row);
    }
  });

  ScanReport report;
  std::map<int, std::pair<long, long>> per_scale;  // successes, dominated
  for (auto& r : results) {
    for (auto& row : r.rows) {
      auto& [succ, dom] = per_scale[row.scale];
      if (row.arc_found) {
        ++succ;
        ++report.successes;
        if (row.bc_dominates) ++dom, ++report.dominated;
      }
      report.invariant_failures += row.invariant_failures;
      report.rows.push_back(row);
    }
    report.promising_upper += r.promising_upper;
    for (auto& f : r.failures) report.failure_details.push_back(std::move(f));
  }
  for (int n : spec.ladder) {
    ScaleSummary s;
    s.scale = n;
    s.successes = per_scale[n].first;
    s.dominated = per_scale[n].second;
    s.arc_frequency = bernoulli_estimate(s.successes, spec.trials);
    report.scales.push_back(s);
  }
  report.surrogates = {
      "Step 2 and the case c/d connection check stop at the frame of Lambda_R instead of infinity",
      "induced boundary conditions wire all clusters touching the window frame",
      "each scale searches for arcs inside Lambda of the next ladder entry (Lambda_R for the last)"};
  return report;
}

std::string to_string(OuterRule rule) {
  return rule == OuterRule::UpperFrameWired ? "upper-frame-wired" : "frame-free";
}

BoundaryCondition dobrushin_bc(const SlitDomain& slit, OuterRule rule) {
  std::vector<int> plus = slit.boundary_plus;
  if (rule == OuterRule::UpperFrameWired)
    for (int v : slit.outer)
      if (slit.domain.vertex(v).y > 0) plus.push_back(v);
  std::sort(plus.begin(), plus.end());
  return BoundaryCondition::from_blocks(slit.domain, {plus});
}

void GoodPointSpec::validate() const {
  if (samples < 8) throw std::invalid_argument("good points need at least 8 samples");
  if (burn_in < 0 || thin < 1) throw std::invalid_argument("burn-in must be >= 0 and thinning >= 1");
}

std::vector<GoodPoint> estimate_good_points(std::shared_ptr<const SlitDomain> slit, const GoodPointSpec& spec) {
  if (!slit) throw std::invalid_argument("no slit domain");
  spec.validate();
  const Domain& d = slit->domain;
  const std::shared_ptr<const Domain> dom(slit, &slit->domain);
  const FKHeatBath hb(dom, dobrushin_bc(*slit, spec.outer), spec.params);
  auto upper = [&](int v) {
    const Site& s = d.vertex(v);
    return s.y > 0 || (s.y == 0 && s.sheet >= 0);
  };
  EdgeConfig omega(d);
  for (int e = 0; e < d.edge_count(); ++e) omega.set(e, upper(d.edge(e).first) && upper(d.edge(e).second));

  std::vector<int> sources = slit->boundary_plus;
  if (spec.outer == OuterRule::UpperFrameWired)
    for (int v : slit->outer)
      if (d.vertex(v).y > 0) sources.push_back(v);
  std::vector<GoodPoint> points;
  std::vector<int> point_vertex;
  for (int x = -slit->M; x <= slit->N; x += 2) {
    const int v = d.find_vertex(Site{x, 0, 0});
    if (v < 0) throw std::logic_error("slit axis point missing");
    points.push_back({x, 0, spec.samples, {}});
    point_vertex.push_back(v);
  }
  std::vector<std::vector<double>> series(points.size());
  std::vector<std::uint32_t> mark(d.vertex_count(), 0);
  std::uint32_t stamp = 0;
  std::vector<int> queue;
  long sweep = 0;
  for (long b = 0; b < spec.burn_in; ++b) hb.sweep(omega, spec.seed, 0, static_cast<std::uint64_t>(sweep++));
  for (long s = 0; s < spec.samples; ++s) {
    for (int t = 0; t < spec.thin; ++t) hb.sweep(omega, spec.seed, 0, static_cast<std::uint64_t>(sweep++));
    ++stamp;
    queue.clear();
    for (int v : sources) {
      mark[v] = stamp;
      queue.push_back(v);
    }
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const int v = queue[head];
      for (const auto& inc : d.incident(v)) {
        if (!omega[inc.edge] || mark[inc.other] == stamp || !upper(inc.other)) continue;
        mark[inc.other] = stamp;
        queue.push_back(inc.other);
      }
    }
    for (std::size_t i = 0; i < points.size(); ++i) {
      const bool hit = mark[point_vertex[i]] == stamp;
      points[i].successes += hit;
      series[i].push_back(hit ? 1.0 : 0.0);
    }
  }
  for (std::size_t i = 0; i < points.size(); ++i) points[i].estimate = batch_means(series[i]);
  return points;
}

}  // namespace gibbslab
