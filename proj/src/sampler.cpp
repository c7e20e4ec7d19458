#include "gibbslab/sampler.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "gibbslab/coupling.hpp"
#include "gibbslab/rng.hpp"
#include "gibbslab/union_find.hpp"

namespace gibbslab {

std::string to_string(InitRule rule) {
  switch (rule) {
    case InitRule::AllOpen: return "all-open";
    case InitRule::AllClosed: return "all-closed";
    case InitRule::Given: return "given";
  }
  return "?";
}

InitRule init_rule_from_string(const std::string& name) {
  if (name == "all-open" || name == "open" || name == "wired") return InitRule::AllOpen;
  if (name == "all-closed" || name == "closed" || name == "free") return InitRule::AllClosed;
  if (name == "given") return InitRule::Given;
  throw std::invalid_argument("unknown initial state rule: " + name);
}

void ChainSpec::validate() const {
  if (!domain) throw std::invalid_argument("chain has no domain");
  if (sweeps < 1) throw std::invalid_argument("sweep count must be >= 1");
  if (burn_in < 0 || burn_in >= sweeps) throw std::invalid_argument("burn-in must lie in [0, sweeps)");
  if (bc.boundary() != domain->boundary())
    throw std::invalid_argument("boundary condition does not partition the chain domain's boundary");
  if (init == InitRule::Given) initial.check_domain(*domain);
}

EdgeConfig ChainSpec::initial_state() const {
  if (init == InitRule::Given) return initial;
  return EdgeConfig(*domain, init == InitRule::AllOpen);
}

Estimate batch_means(const std::vector<double>& samples) {
  const long n = static_cast<long>(samples.size());
  if (n < 8) throw std::invalid_argument("batch means needs at least 8 samples");
  Estimate est;
  est.samples = n;
  est.batches = n >= 16 ? 16 : 8;
  double total = 0.0;
  for (double v : samples) total += v;
  est.mean = total / static_cast<double>(n);
  const long size = n / est.batches;
  std::vector<double> means(est.batches, 0.0);
  for (int b = 0; b < est.batches; ++b) {
    for (long i = 0; i < size; ++i) means[b] += samples[b * size + i];
    means[b] /= static_cast<double>(size);
  }
  double bar = 0.0;
  for (double m : means) bar += m;
  bar /= est.batches;
  double ss = 0.0;
  for (double m : means) ss += (m - bar) * (m - bar);
  est.se = std::sqrt(ss / (est.batches - 1) / est.batches);
  return est;
}

Estimate bernoulli_estimate(long successes, long trials) {
  if (trials < 1 || successes < 0 || successes > trials) throw std::invalid_argument("bad success count");
  Estimate est;
  est.samples = trials;
  est.batches = static_cast<int>(std::min<long>(trials, 1L << 30));
  est.mean = static_cast<double>(successes) / static_cast<double>(trials);
  est.se = std::sqrt(est.mean * (1.0 - est.mean) / static_cast<double>(trials));
  return est;
}

bool endpoints_connected_reference(const Domain& d, const BoundaryCondition& xi, const EdgeConfig& omega, int e) {
  omega.check_domain(d);
  if (e < 0 || e >= d.edge_count()) throw std::out_of_range("edge index out of range");
  UnionFind uf(d.vertex_count());
  for (const auto& block : xi.blocks())
    for (std::size_t i = 1; i < block.size(); ++i) uf.unite(block[0], block[i]);
  for (int f = 0; f < d.edge_count(); ++f)
    if (f != e && omega[f]) uf.unite(d.edge(f).first, d.edge(f).second);
  return uf.same(d.edge(e).first, d.edge(e).second);
}

double fk_heat_bath_prob(const Domain& d, const BoundaryCondition& xi, const FKParams& params,
                         const EdgeConfig& omega, int e) {
  const double y = params.y();
  return endpoints_connected_reference(d, xi, omega, e) ? y / (1.0 + y) : y / (y + params.q);
}

FKHeatBath::FKHeatBath(std::shared_ptr<const Domain> domain, const BoundaryCondition& xi, const FKParams& params)
    : domain_(std::move(domain)), params_(params) {
  if (!domain_) throw std::invalid_argument("heat bath needs a domain");
  if (xi.boundary() != domain_->boundary())
    throw std::invalid_argument("boundary condition does not partition the domain's boundary");
  const double y = params_.y();
  p_connected_ = y / (1.0 + y);
  p_separate_ = y / (y + params_.q);

  const int nv = domain_->vertex_count();
  std::vector<int> block_node(nv, -1);
  nodes_ = nv;
  std::vector<std::vector<int>> block_members;
  for (const auto& block : xi.blocks()) {
    if (block.size() < 2) continue;
    for (int v : block) block_node[v] = nodes_;
    block_members.push_back(block);
    ++nodes_;
  }
  offset_.assign(nodes_ + 1, 0);
  for (int v = 0; v < nv; ++v) offset_[v + 1] = domain_->degree(v) + (block_node[v] >= 0 ? 1 : 0);
  for (std::size_t b = 0; b < block_members.size(); ++b)
    offset_[nv + b + 1] = static_cast<int>(block_members[b].size());
  for (int i = 0; i < nodes_; ++i) offset_[i + 1] += offset_[i];
  adj_node_.resize(offset_[nodes_]);
  adj_edge_.resize(offset_[nodes_]);
  for (int v = 0; v < nv; ++v) {
    int k = offset_[v];
    for (const auto& inc : domain_->incident(v)) adj_node_[k] = inc.other, adj_edge_[k++] = inc.edge;
    if (block_node[v] >= 0) adj_node_[k] = block_node[v], adj_edge_[k] = -1;
  }
  for (std::size_t b = 0; b < block_members.size(); ++b) {
    int k = offset_[nv + b];
    for (int v : block_members[b]) adj_node_[k] = v, adj_edge_[k++] = -1;
  }
  mark_.assign(nodes_, 0);
  side_.assign(nodes_, 0);
  queue_a_.reserve(nodes_);
  queue_b_.reserve(nodes_);
}

bool FKHeatBath::endpoints_connected(const EdgeConfig& omega, int e) const {
  const auto [u, v] = domain_->edge(e);
  if (++stamp_ == 0) {
    std::fill(mark_.begin(), mark_.end(), 0);
    stamp_ = 1;
  }
  const auto& bits = omega.bits();
  auto& qa = queue_a_;
  auto& qb = queue_b_;
  qa.clear();
  qb.clear();
  qa.push_back(u);
  qb.push_back(v);
  mark_[u] = mark_[v] = stamp_;
  side_[u] = 0;
  side_[v] = 1;
  std::size_t ha = 0, hb = 0;
  while (ha < qa.size() && hb < qb.size()) {
    const bool grow_a = qa.size() - ha <= qb.size() - hb;
    auto& q = grow_a ? qa : qb;
    std::size_t& head = grow_a ? ha : hb;
    const std::uint8_t mine = grow_a ? 0 : 1;
    const int w = q[head++];
    for (int k = offset_[w]; k < offset_[w + 1]; ++k) {
      const int f = adj_edge_[k];
      if (f >= 0 && (f == e || !bits[f])) continue;
      const int z = adj_node_[k];
      if (mark_[z] == stamp_) {
        if (side_[z] != mine) return true;
        continue;
      }
      mark_[z] = stamp_;
      side_[z] = mine;
      q.push_back(z);
    }
  }
  return false;
}

double FKHeatBath::open_probability(const EdgeConfig& omega, int e) const {
  return endpoints_connected(omega, e) ? p_connected_ : p_separate_;
}

void FKHeatBath::sweep(EdgeConfig& omega, std::uint64_t seed, std::uint64_t chain, std::uint64_t sweep_index) const {
  for (int e = 0; e < domain_->edge_count(); ++e)
    omega.set(e, keyed_uniform(seed, chain, sweep_index, e) < open_probability(omega, e));
}

Observable edge_density_observable(const Domain& d) {
  const double m = d.edge_count();
  return {"edge_density", [m](const EdgeConfig& omega) { return omega.open_count() / m; }};
}

Observable central_density_observable(const Domain& d, int r) {
  std::vector<int> edges;
  for (int e = 0; e < d.edge_count(); ++e) {
    const Site& a = d.vertex(d.edge(e).first);
    const Site& b = d.vertex(d.edge(e).second);
    if (std::max({std::abs(a.x), std::abs(a.y), std::abs(b.x), std::abs(b.y)}) <= r) edges.push_back(e);
  }
  if (edges.empty()) throw std::invalid_argument("central region contains no edges");
  return {"central_density_r" + std::to_string(r), [edges](const EdgeConfig& omega) {
            int open = 0;
            for (int e : edges) open += omega[e];
            return static_cast<double>(open) / static_cast<double>(edges.size());
          }};
}

Observable edge_open_observable(int e, const std::string& name) {
  return {name, [e](const EdgeConfig& omega) { return omega[e] ? 1.0 : 0.0; }};
}

namespace {

struct Recorder {
  std::vector<std::vector<double>> columns;
  std::vector<std::vector<double>> trace;
  bool keep_trace;

  Recorder(std::size_t n, bool keep) : columns(n), keep_trace(keep) {}

  template <class Obs, class State>
  void record(const std::vector<Obs>& observables, const State& state) {
    std::vector<double> row(observables.size());
    for (std::size_t i = 0; i < observables.size(); ++i) {
      row[i] = observables[i].eval(state);
      columns[i].push_back(row[i]);
    }
    if (keep_trace) trace.push_back(std::move(row));
  }

  template <class Obs>
  void finish(const std::vector<Obs>& observables, std::vector<std::string>& names, std::vector<Estimate>& estimates) {
    for (std::size_t i = 0; i < observables.size(); ++i) {
      names.push_back(observables[i].name);
      estimates.push_back(batch_means(columns[i]));
    }
  }
};

void require_samples(long sweeps, long burn_in, bool any_observable) {
  if (any_observable && sweeps - burn_in < 8)
    throw std::invalid_argument("estimates need at least 8 recorded sweeps");
}

}  // namespace

ChainResult run_fk_chain(const ChainSpec& spec, const std::vector<Observable>& observables, bool keep_trace) {
  spec.validate();
  require_samples(spec.sweeps, spec.burn_in, !observables.empty());
  const FKHeatBath hb(spec.domain, spec.bc, spec.params);
  EdgeConfig omega = spec.initial_state();
  Recorder rec(observables.size(), keep_trace);
  for (long t = 0; t < spec.sweeps; ++t) {
    hb.sweep(omega, spec.seed, spec.chain_id, static_cast<std::uint64_t>(t));
    if (t >= spec.burn_in) rec.record(observables, omega);
  }
  ChainResult out;
  rec.finish(observables, out.names, out.estimates);
  out.final_state = std::move(omega);
  out.trace = std::move(rec.trace);
  out.first_recorded_sweep = spec.burn_in;
  return out;
}

SandwichResult run_sandwich(const ChainSpec& upper, const ChainSpec& lower, const std::vector<Observable>& observables,
                            bool keep_trace) {
  upper.validate();
  lower.validate();
  if (upper.domain->fingerprint() != lower.domain->fingerprint())
    throw std::invalid_argument("sandwich chains must share a domain");
  if (upper.params.p != lower.params.p || upper.params.q != lower.params.q)
    throw std::invalid_argument("sandwich chains must share parameters");
  if (upper.sweeps != lower.sweeps || upper.burn_in != lower.burn_in)
    throw std::invalid_argument("sandwich chains must share sweep counts");
  const BcOrder order = bc_compare(upper.bc, lower.bc);
  if (order != BcOrder::Equal && order != BcOrder::Coarser)
    throw std::invalid_argument("upper boundary condition must be coarser than or equal to the lower one");
  require_samples(upper.sweeps, upper.burn_in, !observables.empty());

  const FKHeatBath hb_up(upper.domain, upper.bc, upper.params);
  const FKHeatBath hb_low(lower.domain, lower.bc, lower.params);
  EdgeConfig up = upper.initial_state();
  EdgeConfig low = lower.initial_state();
  if (!dominated_by(low, up)) throw std::invalid_argument("sandwich initial states are not ordered");

  SandwichResult out;
  Recorder rec_up(observables.size(), keep_trace), rec_low(observables.size(), keep_trace);
  const int m = upper.domain->edge_count();
  for (long t = 0; t < upper.sweeps; ++t) {
    for (int e = 0; e < m; ++e) {
      const double u = keyed_uniform(upper.seed, upper.chain_id, static_cast<std::uint64_t>(t), e);
      up.set(e, u < hb_up.open_probability(up, e));
      low.set(e, u < hb_low.open_probability(low, e));
      if (low[e] && !up[e])
        throw OrderingViolation("sandwich ordering broken at sweep " + std::to_string(t) + ", edge " +
                                std::to_string(e));
    }
    if (!dominated_by(low, up)) throw OrderingViolation("sandwich ordering broken at sweep " + std::to_string(t));
    ++out.checks;
    if (out.coalesced_at < 0 && low == up) out.coalesced_at = t;
    if (t >= upper.burn_in) {
      rec_up.record(observables, up);
      rec_low.record(observables, low);
    }
  }
  rec_up.finish(observables, out.upper.names, out.upper.estimates);
  rec_low.finish(observables, out.lower.names, out.lower.estimates);
  out.upper.final_state = std::move(up);
  out.lower.final_state = std::move(low);
  out.upper.trace = std::move(rec_up.trace);
  out.lower.trace = std::move(rec_low.trace);
  out.upper.first_recorded_sweep = out.lower.first_recorded_sweep = upper.burn_in;
  return out;
}

void PottsChainSpec::validate() const {
  if (!domain) throw std::invalid_argument("chain has no domain");
  if (sweeps < 1) throw std::invalid_argument("sweep count must be >= 1");
  if (burn_in < 0 || burn_in >= sweeps) throw std::invalid_argument("burn-in must lie in [0, sweeps)");
  if (static_cast<int>(tau.colour.size()) != domain->vertex_count())
    throw std::invalid_argument("boundary colouring does not match domain");
  for (int v = 0; v < domain->vertex_count(); ++v) {
    const int c = tau.colour[v];
    if (c < 0 || c > params.q) throw std::invalid_argument("boundary colour out of range");
    if (c != 0 && !domain->is_boundary(v)) throw std::invalid_argument("boundary colour on an interior vertex");
  }
}

PottsObservable colour_fraction_observable(int colour) {
  return {"colour_" + std::to_string(colour) + "_fraction", [colour](const PottsConfig& sigma) {
            long hits = 0;
            for (int s : sigma.spins) hits += s == colour;
            return static_cast<double>(hits) / static_cast<double>(sigma.spins.size());
          }};
}

PottsObservable edge_agreement_observable(const Domain& d, int e) {
  const auto [u, v] = d.edge(e);
  return {"agree_e" + std::to_string(e),
          [u = u, v = v](const PottsConfig& sigma) { return sigma.spins[u] == sigma.spins[v] ? 1.0 : 0.0; }};
}

PottsChainResult run_potts_es_chain(const PottsChainSpec& spec, const std::vector<PottsObservable>& observables) {
  spec.validate();
  require_samples(spec.sweeps, spec.burn_in, !observables.empty());
  const Domain& d = *spec.domain;
  const double p = p_of_T(spec.params.T);
  PottsConfig sigma;
  sigma.spins.assign(d.vertex_count(), 1);
  for (int v = 0; v < d.vertex_count(); ++v)
    if (spec.tau.colour[v] != 0) sigma.spins[v] = spec.tau.colour[v];
  Recorder rec(observables.size(), false);
  for (long t = 0; t < spec.sweeps; ++t) {
    CounterStream rng(spec.seed, hash_key(spec.chain_id, static_cast<std::uint64_t>(t), 0xe5, 0));
    const EdgeConfig omega = sample_omega_given_sigma(d, sigma, p, rng);
    sigma = sample_sigma_given_omega(d, omega, spec.tau, spec.params.q, rng);
    if (t >= spec.burn_in) rec.record(observables, sigma);
  }
  PottsChainResult out;
  rec.finish(observables, out.names, out.estimates);
  out.final_state = std::move(sigma);
  return out;
}

void SpinChainSpec::validate() const {
  if (!faces) throw std::invalid_argument("chain has no face domain");
  if (sweeps < 1) throw std::invalid_argument("sweep count must be >= 1");
  if (burn_in < 0 || burn_in >= sweeps) throw std::invalid_argument("burn-in must lie in [0, sweeps)");
  if (!(n > 0.0) || !(x > 0.0)) throw std::invalid_argument("loop parameters need n > 0 and x > 0");
  if (static_cast<int>(tau.ring_spins.size()) != faces->ring_count())
    throw std::invalid_argument("exterior spins do not match the face ring");
  if (initial_sign != 1 && initial_sign != -1) throw std::invalid_argument("initial sign must be +1 or -1");
}

SpinObservable face_minus_observable(int face) {
  return {"face_" + std::to_string(face) + "_minus",
          [face](const FaceSpinConfig& sigma) { return sigma.spins[face] < 0 ? 1.0 : 0.0; }};
}

SpinObservable magnetization_observable(const FaceDomain& fd) {
  const int inner = fd.inner_count;
  return {"magnetization", [inner](const FaceSpinConfig& sigma) {
            double total = 0.0;
            for (int f = 0; f < inner; ++f) total += sigma.spins[f];
            return total / inner;
          }};
}

SpinChainResult run_spin_chain(const SpinChainSpec& spec, const std::vector<SpinObservable>& observables) {
  spec.validate();
  require_samples(spec.sweeps, spec.burn_in, !observables.empty());
  SpinChainResult out;
  if (spec.n < 1.0 || spec.n * spec.x * spec.x > 1.0)
    out.warnings.push_back("parameters outside n >= 1, n x^2 <= 1; positive association is not guaranteed");
  const FaceDomain& fd = *spec.faces;
  FaceSpinConfig sigma;
  sigma.spins.resize(fd.faces.size());
  for (int f = 0; f < fd.inner_count; ++f) sigma.spins[f] = spec.initial_sign;
  for (int i = 0; i < fd.ring_count(); ++i) sigma.spins[fd.inner_count + i] = spec.tau.ring_spins[i];
  Recorder rec(observables.size(), false);
  for (long t = 0; t < spec.sweeps; ++t) {
    for (int f = 0; f < fd.inner_count; ++f) {
      sigma.spins[f] = 1;
      const double plus = spin_weight(fd, spec.tau, spec.n, spec.x, sigma).log_value;
      sigma.spins[f] = -1;
      const double minus = spin_weight(fd, spec.tau, spec.n, spec.x, sigma).log_value;
      const double p_minus = 1.0 / (1.0 + std::exp(plus - minus));
      sigma.spins[f] = keyed_uniform(spec.seed, spec.chain_id, static_cast<std::uint64_t>(t), f) < p_minus ? -1 : 1;
    }
    if (t >= spec.burn_in) rec.record(observables, sigma);
  }
  rec.finish(observables, out.names, out.estimates);
  out.final_state = std::move(sigma);
  return out;
}

DichotomyResult run_dichotomy(const FKParams& params, int n, long sweeps, long burn_in, std::uint64_t seed,
                              int central_radius, int workers) {
  if (central_radius < 1 || central_radius > n) throw std::invalid_argument("central radius must lie in [1, n]");
  const auto box = std::make_shared<const Domain>(build_box(n, LatticeKind::SquareL));
  const std::vector<Observable> obs = {edge_density_observable(*box), central_density_observable(*box, central_radius)};
  ChainResult results[2];
  parallel_for(2, workers, [&](long side) {
    ChainSpec spec;
    spec.domain = box;
    spec.bc = side == 0 ? BoundaryCondition::wired(*box) : BoundaryCondition::free(*box);
    spec.params = params;
    spec.sweeps = sweeps;
    spec.burn_in = burn_in;
    spec.seed = seed;
    spec.chain_id = static_cast<std::uint64_t>(side);
    spec.init = side == 0 ? InitRule::AllOpen : InitRule::AllClosed;
    results[side] = run_fk_chain(spec, obs);
  });
  DichotomyResult out;
  out.central_radius = central_radius;
  out.wired = {results[0].estimates[0], results[0].estimates[1]};
  out.free = {results[1].estimates[0], results[1].estimates[1]};
  out.gap = out.wired.density.mean - out.free.density.mean;
  out.gap_se = std::hypot(out.wired.density.se, out.free.density.se);
  out.central_gap = out.wired.central.mean - out.free.central.mean;
  out.central_gap_se = std::hypot(out.wired.central.se, out.free.central.se);
  return out;
}

void parallel_for(long count, int workers, const std::function<void(long)>& fn) {
  if (workers <= 1 || count <= 1) {
    for (long i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<long> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  const int threads = static_cast<int>(std::min<long>(workers, count));
  for (int w = 0; w < threads; ++w)
    pool.emplace_back([&] {
      for (long i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next = count;
        }
      }
    });
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace gibbslab
