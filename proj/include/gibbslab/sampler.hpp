#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "gibbslab/lattice.hpp"
#include "gibbslab/models.hpp"
#include "gibbslab/oracle.hpp"

namespace gibbslab {

enum class InitRule { AllOpen, AllClosed, Given };
std::string to_string(InitRule rule);
InitRule init_rule_from_string(const std::string& name);

struct ChainSpec {
  std::shared_ptr<const Domain> domain;
  BoundaryCondition bc;
  FKParams params{0.5, 1.0};
  long sweeps = 1;
  long burn_in = 0;
  std::uint64_t seed = 0;
  std::uint64_t chain_id = 0;
  InitRule init = InitRule::AllClosed;
  EdgeConfig initial;  // read when init == Given

  void validate() const;
  EdgeConfig initial_state() const;
};

struct Estimate {
  double mean = 0.0;
  double se = 0.0;
  int batches = 0;
  long samples = 0;
};

// Batch-means estimate. Uses 16 batches when there are at least 16 samples,
// otherwise 8; trailing samples that do not fill a batch are dropped from the
// error estimate only.
Estimate batch_means(const std::vector<double>& samples);

// Standard error of a 0/1 success count.
Estimate bernoulli_estimate(long successes, long trials);

// Conditional probability that e is open given the rest of omega, computed
// with a fresh union-find over omega minus e and the blocks of xi.
double fk_heat_bath_prob(const Domain& d, const BoundaryCondition& xi, const FKParams& params,
                         const EdgeConfig& omega, int e);
bool endpoints_connected_reference(const Domain& d, const BoundaryCondition& xi, const EdgeConfig& omega, int e);

// Heat-bath engine. Connectivity of the endpoints of e off e is decided by a
// bidirectional breadth-first search that grows the smaller frontier first;
// every non-trivial block of xi is an extra node adjacent to its members.
class FKHeatBath {
 public:
  FKHeatBath(std::shared_ptr<const Domain> domain, const BoundaryCondition& xi, const FKParams& params);

  const Domain& domain() const { return *domain_; }
  bool endpoints_connected(const EdgeConfig& omega, int e) const;
  double open_probability(const EdgeConfig& omega, int e) const;
  // One sweep in edge order; edge e uses keyed_uniform(seed, chain, sweep, e).
  void sweep(EdgeConfig& omega, std::uint64_t seed, std::uint64_t chain, std::uint64_t sweep_index) const;

 private:
  std::shared_ptr<const Domain> domain_;
  FKParams params_;
  double p_connected_;
  double p_separate_;
  int nodes_;
  std::vector<int> offset_;
  std::vector<int> adj_node_;
  std::vector<int> adj_edge_;  // -1 for links to a block node
  mutable std::vector<std::uint32_t> mark_;
  mutable std::vector<std::uint8_t> side_;
  mutable std::uint32_t stamp_ = 0;
  mutable std::vector<int> queue_a_, queue_b_;
};

// One-sweep transition matrix T[from][to] over config ids, exact in S.
template <class S>
std::vector<std::vector<S>> sweep_transition_matrix(const Domain& d, const BoundaryCondition& xi,
                                                    const FKScalars<S>& s) {
  const int m = d.edge_count();
  if (m > 8) throw StateSpaceTooLarge("transition matrix limited to 8 edges", std::pow(4.0, m));
  const std::size_t states = std::size_t{1} << m;
  std::vector<std::vector<S>> current(states, std::vector<S>(states, S(0)));
  for (std::size_t i = 0; i < states; ++i) current[i][i] = S(1);
  const S open_connected = s.a / (s.a + s.b);
  const S open_separate = s.a / (s.a + s.b * s.q);
  for (int e = 0; e < m; ++e) {
    std::vector<std::vector<S>> next(states, std::vector<S>(states, S(0)));
    for (std::size_t mid = 0; mid < states; ++mid) {
      const EdgeConfig omega = EdgeConfig::from_id(d, mid);
      const S p_open = endpoints_connected_reference(d, xi, omega, e) ? open_connected : open_separate;
      const std::size_t with = mid | (std::size_t{1} << e);
      const std::size_t without = mid & ~(std::size_t{1} << e);
      for (std::size_t from = 0; from < states; ++from) {
        if (current[from][mid] == S(0)) continue;
        next[from][with] = next[from][with] + current[from][mid] * p_open;
        next[from][without] = next[from][without] + current[from][mid] * (S(1) - p_open);
      }
    }
    current = std::move(next);
  }
  return current;
}

struct Observable {
  std::string name;
  std::function<double(const EdgeConfig&)> eval;
};

Observable edge_density_observable(const Domain& d);
// Density over edges whose both endpoints lie in [-r, r]^2.
Observable central_density_observable(const Domain& d, int r);
Observable edge_open_observable(int e, const std::string& name);

struct ChainResult {
  std::vector<std::string> names;
  std::vector<Estimate> estimates;
  EdgeConfig final_state;
  std::vector<std::vector<double>> trace;  // one row per recorded sweep, if kept
  long first_recorded_sweep = 0;
};

ChainResult run_fk_chain(const ChainSpec& spec, const std::vector<Observable>& observables, bool keep_trace = false);

class OrderingViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct SandwichResult {
  ChainResult upper;
  ChainResult lower;
  long checks = 0;
  long coalesced_at = -1;  // first sweep after which both states agree
};

// Two chains driven by the uniforms of `upper` (its seed and chain id). The
// upper boundary condition must be coarser than or equal to the lower one and
// the initial states ordered. Throws OrderingViolation if the lower state ever
// exceeds the upper one.
SandwichResult run_sandwich(const ChainSpec& upper, const ChainSpec& lower, const std::vector<Observable>& observables,
                            bool keep_trace = false);

struct PottsChainSpec {
  std::shared_ptr<const Domain> domain;
  PottsBoundary tau;
  PottsParams params{1.0, 2};
  long sweeps = 1;
  long burn_in = 0;
  std::uint64_t seed = 0;
  std::uint64_t chain_id = 0;
  void validate() const;
};

struct PottsObservable {
  std::string name;
  std::function<double(const PottsConfig&)> eval;
};

PottsObservable colour_fraction_observable(int colour);
PottsObservable edge_agreement_observable(const Domain& d, int e);

struct PottsChainResult {
  std::vector<std::string> names;
  std::vector<Estimate> estimates;
  PottsConfig final_state;
};

// Alternates omega | sigma and sigma | omega from the all-colour-1 state
// (boundary colours forced to tau).
PottsChainResult run_potts_es_chain(const PottsChainSpec& spec, const std::vector<PottsObservable>& observables);

struct SpinChainSpec {
  std::shared_ptr<const FaceDomain> faces;
  SpinExterior tau;
  double n = 1.0;
  double x = 0.5;
  long sweeps = 1;
  long burn_in = 0;
  std::uint64_t seed = 0;
  std::uint64_t chain_id = 0;
  int initial_sign = 1;
  void validate() const;
};

struct SpinObservable {
  std::string name;
  std::function<double(const FaceSpinConfig&)> eval;
};

SpinObservable face_minus_observable(int face);
SpinObservable magnetization_observable(const FaceDomain& fd);

struct SpinChainResult {
  std::vector<std::string> names;
  std::vector<Estimate> estimates;
  FaceSpinConfig final_state;
  std::vector<std::string> warnings;
};

// Single-face heat bath in face order, weights recomputed in full.
SpinChainResult run_spin_chain(const SpinChainSpec& spec, const std::vector<SpinObservable>& observables);

struct DichotomySide {
  Estimate density;
  Estimate central;
};

struct DichotomyResult {
  DichotomySide wired;
  DichotomySide free;
  int central_radius = 0;
  double gap = 0.0;  // wired minus free edge density
  double gap_se = 0.0;
  double central_gap = 0.0;
  double central_gap_se = 0.0;
};

// Wired-start chain under WIRED against free-start chain under FREE on
// Lambda_n, independent streams (chain ids 0 and 1).
DichotomyResult run_dichotomy(const FKParams& params, int n, long sweeps, long burn_in, std::uint64_t seed,
                              int central_radius, int workers = 1);

// Runs fn(i) for i in [0, count) on up to `workers` threads.
void parallel_for(long count, int workers, const std::function<void(long)>& fn);

}  // namespace gibbslab
