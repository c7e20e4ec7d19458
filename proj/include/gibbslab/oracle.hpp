#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "gibbslab/exact.hpp"
#include "gibbslab/lattice.hpp"
#include "gibbslab/models.hpp"
#include "gibbslab/rng.hpp"

namespace gibbslab {

inline constexpr int kMaxEnumerationBits = 26;
inline constexpr int kMaxRationalEdges = 12;

class StateSpaceTooLarge : public std::runtime_error {
 public:
  StateSpaceTooLarge(const std::string& what, double states)
      : std::runtime_error(what), states_(states) {}
  double states() const { return states_; }

 private:
  double states_;
};

// Unnormalised weight table; probability(i) = weights[i] / total.
template <class S>
struct Distribution {
  std::vector<std::uint64_t> ids;
  std::vector<S> weights;
  S total = S(0);

  std::size_t size() const { return ids.size(); }
  S probability(std::size_t i) const { return weights[i] / total; }
  std::vector<S> probabilities() const {
    std::vector<S> out;
    out.reserve(weights.size());
    for (std::size_t i = 0; i < weights.size(); ++i) out.push_back(probability(i));
    return out;
  }
  // Index of a config id, -1 if it has zero weight.
  long index_of(std::uint64_t id) const {
    const auto it = std::lower_bound(ids.begin(), ids.end(), id);
    return it != ids.end() && *it == id ? static_cast<long>(it - ids.begin()) : -1;
  }
  void push(std::uint64_t id, S w) {
    total = total + w;
    ids.push_back(id);
    weights.push_back(std::move(w));
  }
};

// FK weights a^|omega| b^(|E|-|omega|) q^k, proportional to Eq. weight with
// y = a/b; keeping a and b separate avoids division in exact rings.
template <class S>
struct FKScalars {
  S a;
  S b;
  S q;
  static FKScalars from_y(S y, S q) { return {std::move(y), S(1), std::move(q)}; }
  static FKScalars from_p(S p, S one_minus_p, S q) { return {std::move(p), std::move(one_minus_p), std::move(q)}; }
};

inline FKScalars<double> fk_scalars(const FKParams& params) {
  return FKScalars<double>::from_y(params.y(), params.q);
}
FKScalars<Rational> fk_scalars_exact(const Rational& p, const Rational& q);

void require_enumerable(int bits, const std::string& what);

struct FKExponent {
  int open;
  int clusters;
};
// (|omega|, k(omega^xi)) for every config id.
std::vector<FKExponent> fk_exponents(const Domain& d, const BoundaryCondition& xi);

template <class S>
Distribution<S> exact_fk(const Domain& d, const BoundaryCondition& xi, const FKScalars<S>& s) {
  require_enumerable(d.edge_count(), "FK edge configurations");
  const auto exps = fk_exponents(d, xi);
  const int m = d.edge_count();
  const auto apow = power_table(s.a, m), bpow = power_table(s.b, m);
  const auto qpow = power_table(s.q, d.vertex_count());
  Distribution<S> out;
  out.ids.reserve(exps.size());
  out.weights.reserve(exps.size());
  for (std::uint64_t id = 0; id < exps.size(); ++id) {
    const auto [open, k] = exps[id];
    out.push(id, apow[open] * bpow[m - open] * qpow[k]);
  }
  return out;
}

Distribution<double> exact_fk(const Domain& d, const BoundaryCondition& xi, const FKParams& params);

// Potts configurations are mixed-radix ids: sum over v of (sigma_v - 1) q^v.
std::vector<int> potts_digits(std::uint64_t id, int q, int vertices);
std::uint64_t potts_id(const PottsConfig& sigma, int q);

template <class S>
Distribution<S> exact_potts(const Domain& d, const PottsBoundary& tau, int q, const S& u) {
  const double states = std::pow(double(q), d.vertex_count());
  if (states > double(1 << kMaxEnumerationBits))
    throw StateSpaceTooLarge("Potts state space q^|V| exceeds 2^26", states);
  const auto total = static_cast<std::uint64_t>(states + 0.5);
  const auto upow = power_table(u, d.edge_count());
  Distribution<S> out;
  PottsConfig sigma;
  for (std::uint64_t id = 0; id < total; ++id) {
    sigma.spins = potts_digits(id, q, d.vertex_count());
    if (!compatible(tau, sigma)) continue;
    out.push(id, upow[disagreement_count(d, sigma)]);
  }
  return out;
}

Distribution<double> exact_potts(const Domain& d, const PottsBoundary& tau, const PottsParams& params);

// Edwards-Sokal joint law, id = omega_id + 2^|E| * potts_id(sigma), weights
// a^|omega| b^(|E|-|omega|) on compatible pairs.
template <class S>
Distribution<S> exact_es(const Domain& d, const PottsBoundary& tau, int q, const S& a, const S& b) {
  const int m = d.edge_count();
  const double states = std::pow(double(q), d.vertex_count()) * std::pow(2.0, m);
  if (states > double(1 << kMaxEnumerationBits))
    throw StateSpaceTooLarge("Edwards-Sokal state space exceeds 2^26", states);
  const auto apow = power_table(a, m), bpow = power_table(b, m);
  const auto spins_total = static_cast<std::uint64_t>(std::pow(double(q), d.vertex_count()) + 0.5);
  Distribution<S> out;
  PottsConfig sigma;
  for (std::uint64_t sid = 0; sid < spins_total; ++sid) {
    sigma.spins = potts_digits(sid, q, d.vertex_count());
    if (!compatible(tau, sigma)) continue;
    std::uint64_t mono = 0;
    for (int e = 0; e < m; ++e)
      if (sigma.spins[d.edge(e).first] == sigma.spins[d.edge(e).second]) mono |= std::uint64_t{1} << e;
    // Compatible omegas are exactly the subsets of the monochromatic edges.
    for (std::uint64_t w = 0; w < (std::uint64_t{1} << m); ++w) {
      if ((w & ~mono) != 0) continue;
      const int open = __builtin_popcountll(w);
      out.push(w + (sid << m), apow[open] * bpow[m - open]);
    }
  }
  std::vector<std::size_t> order(out.ids.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto x, auto y) { return out.ids[x] < out.ids[y]; });
  Distribution<S> sorted;
  for (auto i : order) sorted.push(out.ids[i], out.weights[i]);
  return sorted;
}

// Marginal of a joint table under id -> key(id); keys sorted ascending.
template <class S>
Distribution<S> marginal(const Distribution<S>& joint, const std::function<std::uint64_t(std::uint64_t)>& key) {
  std::map<std::uint64_t, S> acc;
  for (std::size_t i = 0; i < joint.size(); ++i) {
    auto [it, fresh] = acc.try_emplace(key(joint.ids[i]), joint.weights[i]);
    if (!fresh) it->second = it->second + joint.weights[i];
  }
  Distribution<S> out;
  for (auto& [k, w] : acc) out.push(k, w);
  return out;
}

// Face spins: bit i of the id set means inner face i has spin -1.
FaceSpinConfig face_spins_from_id(const FaceDomain& fd, const SpinExterior& tau, std::uint64_t id);

template <class S>
Distribution<S> exact_spin(const FaceDomain& fd, const SpinExterior& tau, const S& n, const S& x) {
  require_enumerable(fd.inner_count, "face spin configurations");
  const auto npow = power_table(n, fd.inner_count);
  const auto xpow = power_table(x, fd.graph.edge_count());
  Distribution<S> out;
  for (std::uint64_t id = 0; id < (std::uint64_t{1} << fd.inner_count); ++id) {
    const FaceSpinConfig sigma = face_spins_from_id(fd, tau, id);
    out.push(id, npow[finite_spin_clusters(fd, tau, sigma)] * xpow[spin_disagreements(fd, sigma)]);
  }
  return out;
}

bool is_even_subgraph(const FaceDomain& fd, const LoopConfig& omega, const LoopBoundary& boundary);

template <class S>
Distribution<S> exact_loop(const FaceDomain& fd, const S& n, const S& x, const LoopBoundary& boundary = {}) {
  const int m = fd.graph.edge_count();
  require_enumerable(m, "loop configurations");
  const auto npow = power_table(n, m);
  const auto xpow = power_table(x, m);
  Distribution<S> out;
  LoopConfig omega;
  omega.bits.assign(m, 0);
  for (std::uint64_t id = 0; id < (std::uint64_t{1} << m); ++id) {
    for (int e = 0; e < m; ++e) omega.bits[e] = (id >> e) & 1;
    if (!is_even_subgraph(fd, omega, boundary)) continue;
    out.push(id, npow[loop_count(fd, omega, boundary)] * xpow[omega.edge_count()]);
  }
  return out;
}

template <class S>
S exact_event_probability(const Distribution<S>& dist, const std::function<bool(std::uint64_t)>& event) {
  S acc = S(0);
  for (std::size_t i = 0; i < dist.size(); ++i)
    if (event(dist.ids[i])) acc = acc + dist.weights[i];
  return acc / dist.total;
}

// Restricted-growth labels of the terminals' partition induced by omega^xi.
std::vector<int> terminal_partition(const Domain& d, const BoundaryCondition& xi, const EdgeConfig& omega,
                                    const std::vector<int>& terminals);

template <class S>
struct PartitionDistribution {
  std::map<std::vector<int>, S> weights;
  S total = S(0);
  S probability(const std::vector<int>& labels) const {
    const auto it = weights.find(labels);
    return it == weights.end() ? S(0) : it->second / total;
  }
};

template <class S>
PartitionDistribution<S> connectivity_distribution(const Domain& d, const BoundaryCondition& xi,
                                                   const FKScalars<S>& s, const std::vector<int>& terminals) {
  if (terminals.size() > 8) throw std::invalid_argument("at most 8 terminals");
  const Distribution<S> dist = exact_fk(d, xi, s);
  PartitionDistribution<S> out;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    const auto labels = terminal_partition(d, xi, EdgeConfig::from_id(d, dist.ids[i]), terminals);
    auto [it, fresh] = out.weights.try_emplace(labels, dist.weights[i]);
    if (!fresh) it->second = it->second + dist.weights[i];
  }
  out.total = dist.total;
  return out;
}

// All up-sets of {0,1}^m as bitmasks over config ids (m <= 5).
std::vector<std::uint32_t> enumerate_monotone_events(int m);

template <class S>
struct SlackReport {
  S min_slack = S(0);
  std::uint32_t event_a = 0;
  std::uint32_t event_b = 0;
  std::size_t checked = 0;
};

// Probability vector indexed by config id (length 2^m).
template <class S>
std::vector<S> probability_vector(const Distribution<S>& dist, int m) {
  std::vector<S> out(std::size_t{1} << m, S(0));
  for (std::size_t i = 0; i < dist.size(); ++i) out[dist.ids[i]] = dist.probability(i);
  return out;
}

template <class S>
std::vector<S> event_probabilities(const std::vector<S>& probs, const std::vector<std::uint32_t>& events) {
  std::vector<S> out;
  out.reserve(events.size());
  for (const auto mask : events) {
    S acc = S(0);
    for (std::size_t c = 0; c < probs.size(); ++c)
      if ((mask >> c) & 1) acc = acc + probs[c];
    out.push_back(acc);
  }
  return out;
}

// phi[A and B] - phi[A] phi[B] over all pairs of monotone events.
template <class S>
SlackReport<S> check_fkg(const std::vector<S>& probs, int m) {
  const auto events = enumerate_monotone_events(m);
  const auto phi = event_probabilities(probs, events);
  std::unordered_map<std::uint32_t, std::size_t> index;
  for (std::size_t i = 0; i < events.size(); ++i) index[events[i]] = i;
  SlackReport<S> rep;
  bool first = true;
  for (std::size_t i = 0; i < events.size(); ++i)
    for (std::size_t j = i; j < events.size(); ++j) {
      const S slack = phi[index.at(events[i] & events[j])] - phi[i] * phi[j];
      ++rep.checked;
      if (first || slack < rep.min_slack) {
        rep.min_slack = slack;
        rep.event_a = events[i];
        rep.event_b = events[j];
        first = false;
      }
    }
  return rep;
}

// phi_coarse[A] - phi_fine[A] over all monotone events.
template <class S>
SlackReport<S> check_cbc(const std::vector<S>& coarse, const std::vector<S>& fine, int m) {
  const auto events = enumerate_monotone_events(m);
  const auto a = event_probabilities(coarse, events), b = event_probabilities(fine, events);
  SlackReport<S> rep;
  for (std::size_t i = 0; i < events.size(); ++i) {
    const S slack = a[i] - b[i];
    if (i == 0 || slack < rep.min_slack) {
      rep.min_slack = slack;
      rep.event_a = events[i];
    }
    ++rep.checked;
  }
  return rep;
}

SlackReport<double> check_fkg(const Domain& d, const BoundaryCondition& xi, const FKParams& params);
// Requires bc_compare(coarse, fine) in {Equal, Coarser}.
SlackReport<double> check_cbc(const Domain& d, const BoundaryCondition& coarse, const BoundaryCondition& fine,
                              const FKParams& params);

// Inverse-CDF sampler over a distribution's support.
class ExactSampler {
 public:
  template <class S>
  explicit ExactSampler(const Distribution<S>& dist) : ids_(dist.ids) {
    double acc = 0.0;
    const double total = to_double(dist.total);
    for (const auto& w : dist.weights) {
      acc += to_double(w) / total;
      cdf_.push_back(acc);
    }
  }
  std::uint64_t sample(CounterStream& stream) const;

 private:
  std::vector<std::uint64_t> ids_;
  std::vector<double> cdf_;
};

template <class S>
std::uint64_t exact_sample(const Distribution<S>& dist, std::uint64_t seed) {
  CounterStream stream(seed, 0);
  return ExactSampler(dist).sample(stream);
}

// Total-variation distance between two float tables over the same ids.
double total_variation(const Distribution<double>& a, const Distribution<double>& b);

// a and b define the same law: a.w[i] * b.total == b.w[i] * a.total on the
// union of supports. Exact for exact scalars.
template <class S>
bool same_law(const Distribution<S>& a, const Distribution<S>& b) {
  std::size_t i = 0, j = 0;
  const S zero = S(0);
  while (i < a.size() || j < b.size()) {
    const std::uint64_t ia = i < a.size() ? a.ids[i] : UINT64_MAX;
    const std::uint64_t jb = j < b.size() ? b.ids[j] : UINT64_MAX;
    const std::uint64_t id = std::min(ia, jb);
    const S wa = ia == id ? a.weights[i++] : zero;
    const S wb = jb == id ? b.weights[j++] : zero;
    if (!(wa * b.total == wb * a.total)) return false;
  }
  return true;
}

template <class S>
bool same_law(const PartitionDistribution<S>& a, const PartitionDistribution<S>& b) {
  std::map<std::vector<int>, std::pair<S, S>> joined;
  for (const auto& [k, w] : a.weights) joined.try_emplace(k, S(0), S(0)).first->second.first = w;
  for (const auto& [k, w] : b.weights) joined.try_emplace(k, S(0), S(0)).first->second.second = w;
  for (const auto& [k, ww] : joined)
    if (!(ww.first * b.total == ww.second * a.total)) return false;
  return true;
}

}  // namespace gibbslab
