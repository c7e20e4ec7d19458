#include "gibbslab/coupling.hpp"

#include <cmath>
#include <deque>

#include "gibbslab/union_find.hpp"

namespace gibbslab {

double dual_p(double p, double q) {
  if (!(p > 0.0 && p < 1.0) || !(q >= 1.0)) throw std::invalid_argument("dual_p needs p in (0,1), q >= 1");
  return q * (1.0 - p) / (q * (1.0 - p) + p);
}

Rational dual_p(const Rational& p, const Rational& q) {
  if (p <= 0 || p >= 1 || q < 1) throw std::invalid_argument("dual_p needs p in (0,1), q >= 1");
  Rational out = q * (1 - p) / (q * (1 - p) + p);
  out.canonicalize();
  return out;
}

double self_dual_p(double q) {
  if (!(q >= 1.0)) throw std::invalid_argument("self_dual_p needs q >= 1");
  const double s = std::sqrt(q);
  return s / (1.0 + s);
}

double star_triangle_y(double q) {
  if (!(q >= 1.0)) throw std::invalid_argument("p_c_tri needs q >= 1");
  double lo = 0.0, hi = std::max(1.0, q);
  while (hi - lo > 1e-13 * std::max(1.0, hi)) {
    const double mid = 0.5 * (lo + hi);
    (mid * mid * (mid + 3.0) < q ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double p_c_tri(double q) {
  const double y = star_triangle_y(q);
  return y / (1.0 + y);
}

double p_c_hex(double q) { return dual_p(p_c_tri(q), q); }

double x_c(double n) {
  if (!(n >= 0.0 && n <= 2.0)) throw std::invalid_argument("x_c needs n in [0,2]");
  return 1.0 / std::sqrt(2.0 + std::sqrt(2.0 - n));
}

ContextPtr self_dual_context(const Rational& q) {
  return AlgebraicContext::quotient({Rational(-q), Rational(0), Rational(1)}, std::sqrt(q.get_d()),
                                    "sqrt(" + q.get_str() + ")");
}

ContextPtr star_triangle_context(const Rational& q) {
  return AlgebraicContext::quotient({Rational(-q), Rational(0), Rational(3), Rational(1)},
                                    star_triangle_y(q.get_d()), "y");
}

EdgeConfig dual_config(const Domain& primal, const DualDomain& dual, const EdgeConfig& omega) {
  omega.check_domain(primal);
  if (static_cast<int>(dual.to_dual.size()) != primal.edge_count())
    throw std::invalid_argument("dual domain was not built from this domain");
  EdgeConfig out(dual.domain);
  for (int e = 0; e < primal.edge_count(); ++e) out.set(dual.to_dual[e], !omega[e]);
  return out;
}

std::pair<Site, Site> rho_edge(const Site& a, const Site& b) {
  auto [c, d] = crossing_edge(a, b);
  auto move = [](Site s) { return Site{s.x - 1, -s.y, 0}; };
  c = move(c);
  d = move(d);
  return c < d ? std::pair{c, d} : std::pair{d, c};
}

RhoMap rho_map(const Domain& window) {
  if (window.lattice() != LatticeKind::SquareL) throw std::invalid_argument("rho acts on SquareL windows");
  std::vector<std::pair<Site, Site>> edges;
  for (const auto& [u, v] : window.edges()) edges.push_back(rho_edge(window.vertex(u), window.vertex(v)));
  RhoMap map;
  map.image = Domain::from_edges(LatticeKind::SquareL, edges);
  map.sigma.resize(window.edge_count());
  for (int e = 0; e < window.edge_count(); ++e) map.sigma[e] = map.image.find_edge(edges[e].first, edges[e].second);
  return map;
}

EdgeConfig rho(const Domain& window, const RhoMap& map, const EdgeConfig& omega) {
  omega.check_domain(window);
  EdgeConfig out(map.image);
  for (int e = 0; e < window.edge_count(); ++e) out.set(map.sigma[e], !omega[e]);
  return out;
}

EdgeConfig rho_in_place(const Domain& window, const EdgeConfig& omega) {
  const RhoMap map = rho_map(window);
  if (map.image.fingerprint() != window.fingerprint())
    throw std::domain_error("window is not closed under the rho bijection");
  EdgeConfig out(window);
  for (int e = 0; e < window.edge_count(); ++e) out.set(map.sigma[e], !omega[e]);
  return out;
}

namespace {

int star_edge_to(const TriangleStar& ts, int terminal_slot) {
  return ts.star.find_edge(ts.star_centre, ts.star_terminals[terminal_slot]);
}

// Star config id connecting exactly the terminals grouped by `labels`.
std::uint64_t star_image(const TriangleStar& ts, const std::vector<int>& labels) {
  std::uint64_t id = 0;
  for (int t = 0; t < 3; ++t) {
    int same = 0;
    for (int s = 0; s < 3; ++s) same += labels[s] == labels[t];
    if (same > 1) id |= std::uint64_t{1} << star_edge_to(ts, t);
  }
  return id;
}

std::vector<int> triangle_terminals(const TriangleStar& ts) {
  return {ts.triangle_terminals.begin(), ts.triangle_terminals.end()};
}

}  // namespace

template <class S>
std::vector<std::vector<S>> star_triangle_kernel(const TriangleStar& ts, const S& y, const S& q) {
  const BoundaryCondition free = BoundaryCondition::free(ts.triangle);
  const S inv_q = S(1) / q;
  std::vector<std::vector<S>> kernel(8, std::vector<S>(8, S(0)));
  for (std::uint64_t t = 0; t < 8; ++t) {
    if (t == 0) {
      kernel[0][0] = y * y * y * inv_q;
      for (int slot = 0; slot < 3; ++slot) kernel[0][std::uint64_t{1} << star_edge_to(ts, slot)] = y * y * inv_q;
      continue;
    }
    const auto labels = terminal_partition(ts.triangle, free, EdgeConfig::from_id(ts.triangle, t),
                                           triangle_terminals(ts));
    kernel[t][star_image(ts, labels)] = S(1);
  }
  return kernel;
}

template std::vector<std::vector<double>> star_triangle_kernel(const TriangleStar&, const double&, const double&);
template std::vector<std::vector<Rational>> star_triangle_kernel(const TriangleStar&, const Rational&,
                                                                 const Rational&);
template std::vector<std::vector<Algebraic>> star_triangle_kernel(const TriangleStar&, const Algebraic&,
                                                                  const Algebraic&);

EdgeConfig star_triangle_map(const TriangleStar& ts, const EdgeConfig& triangle_config, double p, double q,
                             CounterStream& rng) {
  triangle_config.check_domain(ts.triangle);
  if (!(p > 0.0 && p < 1.0) || !(q >= 1.0)) throw std::invalid_argument("star_triangle_map needs p in (0,1), q >= 1");
  const double y = p / (1.0 - p);
  if (std::abs(y * y * y + 3.0 * y * y - q) > 1e-9)
    throw OffCriticalSurface("p is not on the star-triangle critical surface y^3 + 3y^2 = q");
  if (triangle_config.open_count() > 0) {
    const auto labels = terminal_partition(ts.triangle, BoundaryCondition::free(ts.triangle), triangle_config,
                                           triangle_terminals(ts));
    return EdgeConfig::from_id(ts.star, star_image(ts, labels));
  }
  const double u = rng.uniform();
  double acc = y * y * y / q;
  if (u < acc) return EdgeConfig(ts.star);
  for (int slot = 0; slot < 3; ++slot) {
    acc += y * y / q;
    if (u < acc || slot == 2) return EdgeConfig::from_id(ts.star, std::uint64_t{1} << star_edge_to(ts, slot));
  }
  return EdgeConfig(ts.star);
}

double es_joint_weight(const Domain& d, const PottsBoundary& tau, double p, const EdgeConfig& omega,
                       const PottsConfig& sigma) {
  omega.check_domain(d);
  if (!compatible(tau, sigma)) return 0.0;
  for (int e = 0; e < d.edge_count(); ++e)
    if (omega[e] && sigma.spins[d.edge(e).first] != sigma.spins[d.edge(e).second]) return 0.0;
  return std::pow(p / (1.0 - p), omega.open_count());
}

PottsConfig sample_sigma_given_omega(const Domain& d, const EdgeConfig& omega, const PottsBoundary& tau, int q,
                                     CounterStream& rng) {
  omega.check_domain(d);
  UnionFind uf(d.vertex_count());
  for (int e = 0; e < d.edge_count(); ++e)
    if (omega[e]) uf.unite(d.edge(e).first, d.edge(e).second);
  std::vector<int> colour(d.vertex_count(), 0);
  for (int v = 0; v < d.vertex_count(); ++v) {
    const int c = tau.colour[v];
    if (c == 0) continue;
    int& slot = colour[uf.find(v)];
    if (slot != 0 && slot != c)
      throw ColourConflict("a cluster touches boundary vertices of different colours");
    slot = c;
  }
  // Free clusters draw their colour in vertex order of their root.
  for (int v = 0; v < d.vertex_count(); ++v)
    if (uf.find(v) == v && colour[v] == 0) colour[v] = static_cast<int>(rng.below(q)) + 1;
  PottsConfig sigma;
  sigma.spins.resize(d.vertex_count());
  for (int v = 0; v < d.vertex_count(); ++v) sigma.spins[v] = colour[uf.find(v)];
  return sigma;
}

EdgeConfig sample_omega_given_sigma(const Domain& d, const PottsConfig& sigma, double p, CounterStream& rng) {
  EdgeConfig omega(d);
  for (int e = 0; e < d.edge_count(); ++e) {
    const double u = rng.uniform();
    if (sigma.spins[d.edge(e).first] == sigma.spins[d.edge(e).second]) omega.set(e, u < p);
  }
  return omega;
}

PottsConfig potts_from_fk(const Domain& d, const EdgeConfig& omega, int q, int frame_colour, CounterStream& rng,
                          const std::vector<int>* frame) {
  if (frame_colour < 0 || frame_colour > q) throw std::invalid_argument("frame colour out of range");
  PottsBoundary tau = PottsBoundary::free(d);
  if (frame_colour != 0)
    for (int v : frame ? *frame : d.boundary()) tau.colour[v] = frame_colour;
  return sample_sigma_given_omega(d, omega, tau, q, rng);
}

std::pair<FaceSpinConfig, FaceSpinConfig> loops_to_spins(const FaceDomain& fd, const LoopConfig& omega) {
  const int nf = static_cast<int>(fd.faces.size());
  if (static_cast<int>(omega.bits.size()) != fd.graph.edge_count())
    throw std::invalid_argument("loop configuration does not match domain");
  std::vector<std::vector<std::pair<int, int>>> adj(nf);
  for (int e = 0; e < fd.graph.edge_count(); ++e) {
    const auto [f, g] = fd.edge_faces[e];
    const int flip = omega.bits[e] ? -1 : 1;
    adj[f].push_back({g, flip});
    adj[g].push_back({f, flip});
  }
  for (const auto& [a, b] : fd.ring_pairs) {
    adj[a].push_back({b, 1});
    adj[b].push_back({a, 1});
  }
  FaceSpinConfig sigma;
  sigma.spins.assign(nf, 0);
  sigma.spins[0] = 1;
  std::deque<int> queue = {0};
  while (!queue.empty()) {
    const int f = queue.front();
    queue.pop_front();
    for (const auto [g, flip] : adj[f]) {
      const int want = sigma.spins[f] * flip;
      if (sigma.spins[g] == 0) {
        sigma.spins[g] = want;
        queue.push_back(g);
      } else if (sigma.spins[g] != want) {
        throw std::invalid_argument("loop configuration is not an even subgraph");
      }
    }
  }
  for (int s : sigma.spins)
    if (s == 0) throw std::invalid_argument("face adjacency is disconnected");
  FaceSpinConfig flipped = sigma;
  for (int& s : flipped.spins) s = -s;
  return {sigma, flipped};
}

LoopConfig spins_to_loops(const FaceDomain& fd, const FaceSpinConfig& sigma) {
  LoopConfig omega;
  omega.bits.resize(fd.graph.edge_count());
  for (int e = 0; e < fd.graph.edge_count(); ++e)
    omega.bits[e] = sigma.spins[fd.edge_faces[e].first] != sigma.spins[fd.edge_faces[e].second];
  return omega;
}

}  // namespace gibbslab
