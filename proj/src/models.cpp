#include "gibbslab/models.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

#include "gibbslab/union_find.hpp"

namespace gibbslab {

EdgeConfig::EdgeConfig(const Domain& d, bool open)
    : fingerprint_(d.fingerprint()), bits_(d.edge_count(), open ? 1 : 0) {}

EdgeConfig EdgeConfig::from_id(const Domain& d, std::uint64_t id) {
  if (d.edge_count() > 64) throw std::invalid_argument("config ids need at most 64 edges");
  EdgeConfig c(d);
  for (int e = 0; e < d.edge_count(); ++e) c.bits_[e] = (id >> e) & 1;
  return c;
}

EdgeConfig EdgeConfig::from_hex(const Domain& d, const std::string& hex) {
  EdgeConfig c(d);
  const int n = static_cast<int>(hex.size());
  for (int i = 0; i < n; ++i) {
    const char ch = hex[n - 1 - i];
    int nibble;
    if (ch >= '0' && ch <= '9') nibble = ch - '0';
    else if (ch >= 'a' && ch <= 'f') nibble = ch - 'a' + 10;
    else throw std::invalid_argument("config hex must be lowercase hexadecimal");
    for (int b = 0; b < 4; ++b) {
      const int e = 4 * i + b;
      if (!((nibble >> b) & 1)) continue;
      if (e >= d.edge_count()) throw std::invalid_argument("config hex has bits beyond the edge count");
      c.bits_[e] = 1;
    }
  }
  return c;
}

int EdgeConfig::open_count() const {
  int k = 0;
  for (auto b : bits_) k += b;
  return k;
}

std::uint64_t EdgeConfig::id() const {
  if (bits_.size() > 64) throw std::invalid_argument("config ids need at most 64 edges");
  std::uint64_t id = 0;
  for (std::size_t e = 0; e < bits_.size(); ++e)
    if (bits_[e]) id |= std::uint64_t{1} << e;
  return id;
}

std::string EdgeConfig::to_hex() const {
  const std::size_t digits = std::max<std::size_t>(1, (bits_.size() + 3) / 4);
  std::string out(digits, '0');
  for (std::size_t i = 0; i < digits; ++i) {
    int nibble = 0;
    for (int b = 0; b < 4; ++b) {
      const std::size_t e = 4 * i + b;
      if (e < bits_.size() && bits_[e]) nibble |= 1 << b;
    }
    out[digits - 1 - i] = "0123456789abcdef"[nibble];
  }
  return out;
}

void EdgeConfig::check_domain(const Domain& d) const {
  if (fingerprint_ != d.fingerprint() || static_cast<int>(bits_.size()) != d.edge_count())
    throw std::invalid_argument("edge configuration does not belong to this domain");
}

bool dominated_by(const EdgeConfig& a, const EdgeConfig& b) {
  if (a.bits_.size() != b.bits_.size()) throw std::invalid_argument("configs of different sizes");
  for (std::size_t e = 0; e < a.bits_.size(); ++e)
    if (a.bits_[e] > b.bits_[e]) return false;
  return true;
}

BoundaryCondition BoundaryCondition::free(const Domain& d) { return from_blocks(d, {}); }

BoundaryCondition BoundaryCondition::wired(const Domain& d) {
  return from_blocks(d, {d.boundary()});
}

BoundaryCondition BoundaryCondition::from_blocks(const Domain& d,
                                                 const std::vector<std::vector<int>>& blocks) {
  return from_blocks(d.boundary(), blocks);
}

BoundaryCondition BoundaryCondition::from_blocks(const std::vector<int>& boundary,
                                                 const std::vector<std::vector<int>>& blocks) {
  BoundaryCondition bc;
  bc.boundary_ = boundary;
  std::sort(bc.boundary_.begin(), bc.boundary_.end());
  std::set<int> seen;
  for (auto block : blocks) {
    if (block.empty()) continue;
    std::sort(block.begin(), block.end());
    for (int v : block) {
      if (!std::binary_search(bc.boundary_.begin(), bc.boundary_.end(), v))
        throw std::invalid_argument("block vertex " + std::to_string(v) + " is not on the boundary");
      if (!seen.insert(v).second)
        throw std::invalid_argument("boundary blocks overlap at vertex " + std::to_string(v));
    }
    bc.blocks_.push_back(block);
  }
  for (int v : bc.boundary_)
    if (!seen.count(v)) bc.blocks_.push_back({v});
  std::sort(bc.blocks_.begin(), bc.blocks_.end());
  return bc;
}

int BoundaryCondition::block_of(int v) const {
  for (std::size_t b = 0; b < blocks_.size(); ++b)
    if (std::binary_search(blocks_[b].begin(), blocks_[b].end(), v)) return static_cast<int>(b);
  return -1;
}

std::string BoundaryCondition::to_json() const {
  std::ostringstream os;
  os << '[';
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    if (b) os << ',';
    os << '[';
    for (std::size_t i = 0; i < blocks_[b].size(); ++i) os << (i ? "," : "") << blocks_[b][i];
    os << ']';
  }
  os << ']';
  return os.str();
}

std::string to_string(BcOrder o) {
  switch (o) {
    case BcOrder::Equal: return "equal";
    case BcOrder::Coarser: return "coarser";
    case BcOrder::Finer: return "finer";
    case BcOrder::Incomparable: return "incomparable";
  }
  return "?";
}

namespace {

// True when every block of fine lies inside one block of coarse.
bool refines(const BoundaryCondition& fine, const BoundaryCondition& coarse) {
  for (const auto& block : fine.blocks()) {
    const int target = coarse.block_of(block.front());
    for (int v : block)
      if (coarse.block_of(v) != target) return false;
  }
  return true;
}

}  // namespace

BcOrder bc_compare(const BoundaryCondition& a, const BoundaryCondition& b) {
  if (a.boundary() != b.boundary()) throw std::invalid_argument("boundary conditions on different boundary sets");
  const bool b_refines_a = refines(b, a);
  const bool a_refines_b = refines(a, b);
  if (a_refines_b && b_refines_a) return BcOrder::Equal;
  if (b_refines_a) return BcOrder::Coarser;
  if (a_refines_b) return BcOrder::Finer;
  return BcOrder::Incomparable;
}

std::vector<std::vector<std::vector<int>>> all_partitions(const std::vector<int>& items) {
  std::vector<std::vector<std::vector<int>>> out;
  const int n = static_cast<int>(items.size());
  std::vector<int> rgs(n, 0);
  auto emit = [&] {
    int blocks = 0;
    for (int v : rgs) blocks = std::max(blocks, v + 1);
    std::vector<std::vector<int>> part(blocks);
    for (int i = 0; i < n; ++i) part[rgs[i]].push_back(items[i]);
    out.push_back(std::move(part));
  };
  if (n == 0) {
    out.push_back({});
    return out;
  }
  // Restricted growth strings: rgs[i] <= 1 + max(rgs[0..i-1]).
  while (true) {
    emit();
    int i = n - 1;
    while (i > 0) {
      int prefix_max = 0;
      for (int j = 0; j < i; ++j) prefix_max = std::max(prefix_max, rgs[j]);
      if (rgs[i] <= prefix_max) break;
      --i;
    }
    if (i == 0) break;
    ++rgs[i];
    for (int j = i + 1; j < n; ++j) rgs[j] = 0;
  }
  return out;
}

FKParams::FKParams(double p_, double q_) : p(p_), q(q_) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("FK parameter p must lie in (0,1)");
  if (!(q >= 1.0)) throw std::invalid_argument("FK parameter q must be >= 1");
}

PottsParams::PottsParams(double T_, int q_) : T(T_), q(q_) {
  if (!(T > 0.0)) throw std::invalid_argument("Potts temperature must be positive");
  if (q < 2) throw std::invalid_argument("Potts q must be an integer >= 2");
}

namespace {

void fuse_blocks(UnionFind& uf, const BoundaryCondition& xi) {
  for (const auto& block : xi.blocks())
    for (std::size_t i = 1; i < block.size(); ++i) uf.unite(block[0], block[i]);
}

void check_boundary(const Domain& d, const BoundaryCondition& xi) {
  if (xi.boundary() != d.boundary()) throw std::invalid_argument("boundary condition does not partition this domain's boundary");
}

}  // namespace

int cluster_count(const Domain& d, const BoundaryCondition& xi, const EdgeConfig& omega) {
  omega.check_domain(d);
  check_boundary(d, xi);
  UnionFind uf(d.vertex_count());
  fuse_blocks(uf, xi);
  for (int e = 0; e < d.edge_count(); ++e)
    if (omega[e]) uf.unite(d.edge(e).first, d.edge(e).second);
  return uf.components();
}

Weight fk_weight(const Domain& d, const BoundaryCondition& xi, const FKParams& params,
                 const EdgeConfig& omega) {
  const int k = cluster_count(d, xi, omega);
  const int open = omega.open_count();
  const double log_w = open * std::log(params.y()) + k * std::log(params.q);
  return {std::pow(params.y(), open) * std::pow(params.q, k), log_w};
}

Weight fk_weight(const Domain& d, const BoundaryCondition& xi, const FKParams& params,
                 const EdgeConfig& omega, const FrameConvention& frame) {
  omega.check_domain(d);
  check_boundary(d, xi);
  UnionFind uf(d.vertex_count());
  fuse_blocks(uf, xi);
  for (int e = 0; e < d.edge_count(); ++e)
    if (omega[e]) uf.unite(d.edge(e).first, d.edge(e).second);
  std::set<int> framed;
  for (int v : frame.frame_vertices) framed.insert(uf.find(v));
  const int total = uf.components();
  const int ordinary = total - static_cast<int>(framed.size());
  const int open = omega.open_count();
  double log_w = open * std::log(params.y()) + ordinary * std::log(params.q);
  if (frame.merge) {
    if (!framed.empty()) log_w += std::log(params.q);
  } else {
    if (frame.q_prime < 1.0 || frame.q_prime > params.q)
      throw std::invalid_argument("frame weight q' must lie in [1, q]");
    log_w += framed.size() * std::log(frame.q_prime);
  }
  return {std::exp(log_w), log_w};
}

PottsBoundary PottsBoundary::free(const Domain& d) { return {std::vector<int>(d.vertex_count(), 0)}; }

PottsBoundary PottsBoundary::monochromatic(const Domain& d, int colour) {
  return on(d, d.boundary(), colour);
}

PottsBoundary PottsBoundary::on(const Domain& d, const std::vector<int>& vertices, int colour) {
  PottsBoundary tau = free(d);
  for (int v : vertices) {
    if (!d.is_boundary(v)) throw std::invalid_argument("Potts boundary colour on a non-boundary vertex");
    tau.colour[v] = colour;
  }
  return tau;
}

bool compatible(const PottsBoundary& tau, const PottsConfig& sigma) {
  if (tau.colour.size() != sigma.spins.size()) throw std::invalid_argument("spin/boundary size mismatch");
  for (std::size_t v = 0; v < tau.colour.size(); ++v)
    if (tau.colour[v] != 0 && tau.colour[v] != sigma.spins[v]) return false;
  return true;
}

int disagreement_count(const Domain& d, const PottsConfig& sigma) {
  int k = 0;
  for (const auto& [u, v] : d.edges()) k += sigma.spins[u] != sigma.spins[v];
  return k;
}

Weight potts_weight(const Domain& d, const PottsBoundary& tau, const PottsParams& params,
                    const PottsConfig& sigma) {
  if (static_cast<int>(sigma.spins.size()) != d.vertex_count())
    throw std::invalid_argument("spin configuration does not match domain");
  for (int s : sigma.spins)
    if (s < 1 || s > params.q) throw std::invalid_argument("spin value out of range");
  if (!compatible(tau, sigma)) throw std::invalid_argument("spin configuration incompatible with boundary colours");
  const double log_w = -disagreement_count(d, sigma) / params.T;
  return {std::exp(log_w), log_w};
}

double p_of_T(double T) {
  if (!(T > 0.0)) throw std::invalid_argument("temperature must be positive");
  return -std::expm1(-1.0 / T);
}

int LoopConfig::edge_count() const {
  int k = 0;
  for (auto b : bits) k += b;
  return k;
}

int loop_count(const FaceDomain& fd, const LoopConfig& omega, const LoopBoundary& boundary) {
  const Domain& g = fd.graph;
  if (static_cast<int>(omega.bits.size()) != g.edge_count()) throw std::invalid_argument("loop configuration does not match domain");
  const int sink = g.vertex_count();
  UnionFind uf(sink + 1);
  std::vector<int> degree(sink, 0);
  std::vector<char> used(sink + 1, 0);
  for (int e = 0; e < g.edge_count(); ++e) {
    if (!omega.bits[e]) continue;
    const auto [u, v] = g.edge(e);
    ++degree[u], ++degree[v];
    uf.unite(u, v);
    used[u] = used[v] = 1;
  }
  for (const auto& [a, b] : boundary.arcs) {
    if (!g.is_boundary(a) || !g.is_boundary(b)) throw std::invalid_argument("loop arc endpoint is not a boundary vertex");
    ++degree[a], ++degree[b];
    uf.unite(a, b);
    used[a] = used[b] = 1;
  }
  for (int a : boundary.infinite_ends) {
    if (!g.is_boundary(a)) throw std::invalid_argument("infinite strand end is not a boundary vertex");
    ++degree[a];
    uf.unite(a, sink);
    used[a] = 1;
  }
  for (int v = 0; v < sink; ++v)
    if (degree[v] != 0 && degree[v] != 2)
      throw std::invalid_argument("loop configuration has a vertex of degree " + std::to_string(degree[v]));
  std::set<int> loops;
  const int sink_root = uf.find(sink);
  for (int v = 0; v < sink; ++v)
    if (used[v] && uf.find(v) != sink_root) loops.insert(uf.find(v));
  return static_cast<int>(loops.size());
}

Weight loop_weight(const FaceDomain& fd, double n, double x, const LoopConfig& omega,
                   const LoopBoundary& boundary) {
  if (!(n >= 0.0) || !(x > 0.0)) throw std::invalid_argument("loop weights need n >= 0 and x > 0");
  const int loops = loop_count(fd, omega, boundary);
  const int edges = omega.edge_count();
  return {std::pow(n, loops) * std::pow(x, edges), loops * std::log(n) + edges * std::log(x)};
}

SpinExterior SpinExterior::constant(const FaceDomain& fd, int sign) {
  SpinExterior tau;
  tau.ring_spins.assign(fd.ring_count(), sign);
  for (int i = 0; i < fd.ring_count(); ++i) tau.infinite.push_back(i);
  return tau;
}

SpinExterior SpinExterior::flipped() const {
  SpinExterior out = *this;
  for (int& s : out.ring_spins) s = -s;
  return out;
}

bool agrees_outside(const FaceDomain& fd, const SpinExterior& tau, const FaceSpinConfig& sigma) {
  if (static_cast<int>(tau.ring_spins.size()) != fd.ring_count()) throw std::invalid_argument("exterior spins do not match the ring");
  for (int i = 0; i < fd.ring_count(); ++i)
    if (sigma.spins[fd.inner_count + i] != tau.ring_spins[i]) return false;
  return true;
}

int finite_spin_clusters(const FaceDomain& fd, const SpinExterior& tau, const FaceSpinConfig& sigma) {
  const int nf = static_cast<int>(fd.faces.size());
  if (static_cast<int>(sigma.spins.size()) != nf) throw std::invalid_argument("face spins do not match domain");
  if (!agrees_outside(fd, tau, sigma)) throw std::invalid_argument("face spins disagree with the exterior");
  UnionFind uf(nf);
  for (const auto& [f, g] : fd.edge_faces)
    if (sigma.spins[f] == sigma.spins[g]) uf.unite(f, g);
  for (const auto& [f, g] : fd.ring_pairs)
    if (sigma.spins[f] == sigma.spins[g]) uf.unite(f, g);
  for (const auto& group : tau.links)
    for (std::size_t i = 1; i < group.size(); ++i) {
      const int a = fd.inner_count + group[0], b = fd.inner_count + group[i];
      if (sigma.spins[a] != sigma.spins[b]) throw std::invalid_argument("exterior link joins faces of different sign");
      uf.unite(a, b);
    }
  std::set<int> infinite_roots;
  for (int i : tau.infinite) infinite_roots.insert(uf.find(fd.inner_count + i));
  std::set<int> finite;
  for (int f = 0; f < fd.inner_count; ++f)
    if (!infinite_roots.count(uf.find(f))) finite.insert(uf.find(f));
  return static_cast<int>(finite.size());
}

int spin_disagreements(const FaceDomain& fd, const FaceSpinConfig& sigma) {
  int k = 0;
  for (const auto& [f, g] : fd.edge_faces) k += sigma.spins[f] != sigma.spins[g];
  return k;
}

Weight spin_weight(const FaceDomain& fd, const SpinExterior& tau, double n, double x,
                   const FaceSpinConfig& sigma) {
  if (!(n >= 0.0) || !(x > 0.0)) throw std::invalid_argument("spin weights need n >= 0 and x > 0");
  for (int s : sigma.spins)
    if (s != 1 && s != -1) throw std::invalid_argument("face spins must be +1 or -1");
  const int k = finite_spin_clusters(fd, tau, sigma);
  const int dis = spin_disagreements(fd, sigma);
  return {std::pow(n, k) * std::pow(x, dis), k * std::log(n) + dis * std::log(x)};
}

}  // namespace gibbslab
