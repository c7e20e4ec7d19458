#include "gibbslab/oracle.hpp"

#include <set>

#include "gibbslab/union_find.hpp"

namespace gibbslab {

FKScalars<Rational> fk_scalars_exact(const Rational& p, const Rational& q) {
  if (p <= 0 || p >= 1) throw std::invalid_argument("FK parameter p must lie in (0,1)");
  if (q < 1) throw std::invalid_argument("FK parameter q must be >= 1");
  return FKScalars<Rational>::from_p(p, Rational(1 - p), q);
}

void require_enumerable(int bits, const std::string& what) {
  if (bits > kMaxEnumerationBits)
    throw StateSpaceTooLarge(what + ": 2^" + std::to_string(bits) + " states exceeds the 2^26 limit",
                             std::pow(2.0, bits));
}

std::vector<FKExponent> fk_exponents(const Domain& d, const BoundaryCondition& xi) {
  require_enumerable(d.edge_count(), "FK edge configurations");
  if (xi.boundary() != d.boundary()) throw std::invalid_argument("boundary condition does not partition this domain's boundary");
  const int m = d.edge_count();
  const std::uint64_t total = std::uint64_t{1} << m;
  std::vector<FKExponent> out(total);
  UnionFind base(d.vertex_count());
  for (const auto& block : xi.blocks())
    for (std::size_t i = 1; i < block.size(); ++i) base.unite(block[0], block[i]);
  UnionFind uf;
  for (std::uint64_t id = 0; id < total; ++id) {
    uf = base;
    for (int e = 0; e < m; ++e)
      if ((id >> e) & 1) uf.unite(d.edge(e).first, d.edge(e).second);
    out[id] = {__builtin_popcountll(id), uf.components()};
  }
  return out;
}

Distribution<double> exact_fk(const Domain& d, const BoundaryCondition& xi, const FKParams& params) {
  return exact_fk(d, xi, fk_scalars(params));
}

std::vector<int> potts_digits(std::uint64_t id, int q, int vertices) {
  std::vector<int> spins(vertices);
  for (int v = 0; v < vertices; ++v) {
    spins[v] = static_cast<int>(id % q) + 1;
    id /= q;
  }
  return spins;
}

std::uint64_t potts_id(const PottsConfig& sigma, int q) {
  std::uint64_t id = 0;
  for (auto it = sigma.spins.rbegin(); it != sigma.spins.rend(); ++it) id = id * q + (*it - 1);
  return id;
}

Distribution<double> exact_potts(const Domain& d, const PottsBoundary& tau, const PottsParams& params) {
  return exact_potts(d, tau, params.q, std::exp(-1.0 / params.T));
}

FaceSpinConfig face_spins_from_id(const FaceDomain& fd, const SpinExterior& tau, std::uint64_t id) {
  FaceSpinConfig sigma;
  sigma.spins.resize(fd.faces.size());
  for (int f = 0; f < fd.inner_count; ++f) sigma.spins[f] = ((id >> f) & 1) ? -1 : 1;
  for (int i = 0; i < fd.ring_count(); ++i) sigma.spins[fd.inner_count + i] = tau.ring_spins.at(i);
  return sigma;
}

bool is_even_subgraph(const FaceDomain& fd, const LoopConfig& omega, const LoopBoundary& boundary) {
  std::vector<int> degree(fd.graph.vertex_count(), 0);
  for (int e = 0; e < fd.graph.edge_count(); ++e)
    if (omega.bits[e]) ++degree[fd.graph.edge(e).first], ++degree[fd.graph.edge(e).second];
  for (const auto& [a, b] : boundary.arcs) ++degree[a], ++degree[b];
  for (int a : boundary.infinite_ends) ++degree[a];
  for (int k : degree)
    if (k != 0 && k != 2) return false;
  return true;
}

std::vector<int> terminal_partition(const Domain& d, const BoundaryCondition& xi, const EdgeConfig& omega,
                                    const std::vector<int>& terminals) {
  UnionFind uf(d.vertex_count());
  for (const auto& block : xi.blocks())
    for (std::size_t i = 1; i < block.size(); ++i) uf.unite(block[0], block[i]);
  for (int e = 0; e < d.edge_count(); ++e)
    if (omega[e]) uf.unite(d.edge(e).first, d.edge(e).second);
  std::vector<int> labels(terminals.size());
  std::vector<int> roots;
  for (std::size_t i = 0; i < terminals.size(); ++i) {
    const int r = uf.find(terminals[i]);
    const auto it = std::find(roots.begin(), roots.end(), r);
    labels[i] = static_cast<int>(it - roots.begin());
    if (it == roots.end()) roots.push_back(r);
  }
  return labels;
}

std::vector<std::uint32_t> enumerate_monotone_events(int m) {
  if (m < 0 || m > 5) throw std::invalid_argument("monotone events are enumerated for m <= 5 only");
  // f(x) for x in {0,1}^m splits on the top bit into (f0, f1) with f0 <= f1.
  std::vector<std::uint32_t> level = {0u, 1u};
  for (int k = 1; k <= m; ++k) {
    const int half = 1 << (k - 1);
    std::vector<std::uint32_t> next;
    for (const auto f0 : level)
      for (const auto f1 : level)
        if ((f0 & ~f1) == 0) next.push_back(f0 | (f1 << half));
    std::sort(next.begin(), next.end());
    level = std::move(next);
  }
  return level;
}

SlackReport<double> check_fkg(const Domain& d, const BoundaryCondition& xi, const FKParams& params) {
  const auto dist = exact_fk(d, xi, params);
  return check_fkg(probability_vector(dist, d.edge_count()), d.edge_count());
}

SlackReport<double> check_cbc(const Domain& d, const BoundaryCondition& coarse, const BoundaryCondition& fine,
                              const FKParams& params) {
  const BcOrder order = bc_compare(coarse, fine);
  if (order != BcOrder::Equal && order != BcOrder::Coarser)
    throw std::invalid_argument("check_cbc needs the first boundary condition to be coarser");
  const int m = d.edge_count();
  return check_cbc(probability_vector(exact_fk(d, coarse, params), m),
                   probability_vector(exact_fk(d, fine, params), m), m);
}

std::uint64_t ExactSampler::sample(CounterStream& stream) const {
  const double u = stream.uniform() * cdf_.back();
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  const std::size_t i = it == cdf_.end() ? cdf_.size() - 1 : static_cast<std::size_t>(it - cdf_.begin());
  return ids_[i];
}

double total_variation(const Distribution<double>& a, const Distribution<double>& b) {
  std::map<std::uint64_t, double> diff;
  for (std::size_t i = 0; i < a.size(); ++i) diff[a.ids[i]] += a.probability(i);
  for (std::size_t i = 0; i < b.size(); ++i) diff[b.ids[i]] -= b.probability(i);
  double tv = 0.0;
  for (const auto& [id, v] : diff) tv += std::abs(v);
  return 0.5 * tv;
}

}  // namespace gibbslab
