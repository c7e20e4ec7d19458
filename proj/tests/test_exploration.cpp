#include <doctest.h>

#include <algorithm>
#include <set>
#include <stdexcept>

#include "gibbslab/coupling.hpp"
#include "gibbslab/exploration.hpp"
#include "gibbslab/union_find.hpp"

using namespace gibbslab;

namespace {

EdgeConfig bernoulli_config(const Domain& d, double p, CounterStream& rng) {
  EdgeConfig omega(d);
  for (int e = 0; e < d.edge_count(); ++e) omega.set(e, rng.uniform() < p);
  return omega;
}

DuplicatedState make_state(int R, const EdgeConfig& omega, const EdgeConfig& omega_prime) {
  DuplicatedState s;
  s.window = std::make_shared<const Domain>(build_box(R, LatticeKind::SquareL));
  s.omega = omega;
  s.omega_prime = omega_prime;
  return s;
}

ArcParams arc_params(int n, bool upper) {
  ArcParams p;
  p.n = n;
  p.x = -(n + 2);
  p.y = n + 2;
  p.h = n + 2;
  p.upper = upper;
  return p;
}

// Clusters of the open edges inside Lambda_2n that meet both Lambda_n and the frame of Lambda_2n.
std::set<int> crossing_roots(const Domain& w, const EdgeConfig& omega, int n, UnionFind& uf) {
  for (int e = 0; e < w.edge_count(); ++e) {
    const auto [u, v] = w.edge(e);
    if (omega[e] && in_box(w.vertex(u), 2 * n) && in_box(w.vertex(v), 2 * n)) uf.unite(u, v);
  }
  std::set<int> inner, outer;
  for (int v = 0; v < w.vertex_count(); ++v) {
    const Site& s = w.vertex(v);
    if (in_box(s, n)) inner.insert(uf.find(v));
    if (in_box(s, 2 * n) && std::max(std::abs(s.x), std::abs(s.y)) == 2 * n) outer.insert(uf.find(v));
  }
  std::set<int> both;
  std::set_intersection(inner.begin(), inner.end(), outer.begin(), outer.end(), std::inserter(both, both.begin()));
  return both;
}

}  // namespace

TEST_CASE("annulus crossing clusters") {
  const Domain w = build_box(6, LatticeKind::SquareL);
  CHECK(count_annulus_clusters(w, EdgeConfig(w), 2) == 0);
  CHECK(count_annulus_clusters(w, EdgeConfig(w, true), 2) == 1);
  CHECK(count_annulus_clusters(w, EdgeConfig(w, true), 3) == 1);
  CHECK_THROWS_AS(count_annulus_clusters(w, EdgeConfig(w), 4), std::invalid_argument);

  CounterStream rng(12, 0);
  for (int trial = 0; trial < 50; ++trial) {
    const EdgeConfig omega = bernoulli_config(w, 0.5, rng);
    UnionFind uf(w.vertex_count());
    CHECK(count_annulus_clusters(w, omega, 2) == static_cast<int>(crossing_roots(w, omega, 2, uf).size()));
  }
}

TEST_CASE("property: opening one edge changes the annulus count by at most one") {
  const Domain w = build_box(4, LatticeKind::SquareL);
  const int n = 2;
  CounterStream rng(13, 0);
  for (int trial = 0; trial < 300; ++trial) {
    EdgeConfig lo = bernoulli_config(w, 0.5, rng);
    const int e = static_cast<int>(rng.below(w.edge_count()));
    lo.set(e, false);
    EdgeConfig hi = lo;
    hi.set(e, true);
    const int delta = count_annulus_clusters(w, hi, n) - count_annulus_clusters(w, lo, n);
    CHECK(std::abs(delta) <= 1);
    if (delta == -1) {
      // Only when both endpoint clusters were already crossing.
      UnionFind uf(w.vertex_count());
      const auto roots = crossing_roots(w, lo, n, uf);
      CHECK(roots.count(uf.find(w.edge(e).first)) == 1);
      CHECK(roots.count(uf.find(w.edge(e).second)) == 1);
    }
  }
}

TEST_CASE("induced boundary conditions") {
  const Domain w = build_box(3, LatticeKind::SquareL);
  const Domain inner = build_box(1, LatticeKind::SquareL);
  std::vector<int> edges;
  for (const auto& [u, v] : inner.edges()) edges.push_back(w.find_edge(inner.vertex(u), inner.vertex(v)));
  const Subdomain D = make_subdomain(w, edges);
  CHECK(D.domain.edge_count() == 4);
  CHECK(induced_bc(w, EdgeConfig(w, true), D, FrameRule::FreeAtFrame).is_wired());
  CHECK(induced_bc(w, EdgeConfig(w), D, FrameRule::FreeAtFrame).is_free());
  CHECK(induced_bc(w, EdgeConfig(w), D, FrameRule::WiredAtFrame).is_free());

  std::vector<int> all(w.edge_count());
  for (int e = 0; e < w.edge_count(); ++e) all[e] = e;
  const Subdomain whole = make_subdomain(w, all);
  CHECK(induced_bc(w, EdgeConfig(w), whole, FrameRule::WiredAtFrame).is_wired());
  CHECK(induced_bc(w, EdgeConfig(w), whole, FrameRule::FreeAtFrame).is_free());
}

TEST_CASE("property: interface paths respect the configuration") {
  const Domain w = build_box(8, LatticeKind::SquareL);
  CounterStream rng(21, 0);
  for (int trial = 0; trial < 40; ++trial) {
    const EdgeConfig omega = bernoulli_config(w, 0.5, rng);
    const InterfacePath path = trace_interface(w, omega, Site{1, 0, 0});
    CHECK(path.status != InterfaceStatus::StepLimit);
    for (int e : path.primal_side) CHECK(omega[e]);
    for (int e : path.dual_side) CHECK_FALSE(omega[e]);
    CHECK(path.medial.size() == path.primal_side.size() + path.dual_side.size());
    for (std::size_t i = 0; i < path.medial.size(); ++i) {
      CHECK((path.medial[i].x & 1) == 1);
      CHECK((path.medial[i].y & 1) == 1);
      if (i == 0) continue;
      const int dx = std::abs(path.medial[i].x - path.medial[i - 1].x);
      const int dy = std::abs(path.medial[i].y - path.medial[i - 1].y);
      CHECK(((dx == 2 && dy == 0) || (dx == 0 && dy == 2)));
    }
  }
  CHECK_THROWS_AS(trace_interface(w, EdgeConfig(w), Site{2, 0, 0}), std::invalid_argument);
}

TEST_CASE("first hits and their median") {
  InterfacePath a, b, c;
  a.medial = {{1, 1, 0}, {1, 3, 0}, {3, 5, 0}};
  b.medial = {{1, 1, 0}, {-1, 3, 0}, {-3, 5, 0}};
  c.medial = {{1, 1, 0}};
  const auto hit = first_hit(a, 2);
  REQUIRE(hit.has_value());
  CHECK(hit->index == 2);
  CHECK(hit->M == 2);
  CHECK_FALSE(first_hit(c, 2).has_value());
  CHECK(first_hit(b, 2)->M == -2);
  CHECK(median_first_hit({a, b, c}, 2) == -2);
  CHECK_THROWS(median_first_hit({c}, 2));
}

TEST_CASE("shielding arcs exist in the extreme configurations") {
  const int R = 12, n = 2;
  const Domain w = build_box(R, LatticeKind::SquareL);
  const DuplicatedState state = make_state(R, EdgeConfig(w), EdgeConfig(w, true));
  for (bool upper : {true, false})
    for (ArcCase kind : {ArcCase::A, ArcCase::B, ArcCase::C, ArcCase::D}) {
      const ArcParams p = arc_params(n, upper);
      CHECK(is_promising(state, p, kind));
      const auto arc = explore_shielding_arc(state, p, kind);
      REQUIRE(arc.has_value());
      CHECK(arc->kind == kind);
      CHECK(validate_arc(state, p, *arc).empty());
      CHECK((arc->junction.has_value() == (kind == ArcCase::C || kind == ArcCase::D)));
    }
  // No primal arc when omega' is closed; no dual arc when omega is open.
  const DuplicatedState none = make_state(R, EdgeConfig(w, true), EdgeConfig(w));
  for (ArcCase kind : {ArcCase::A, ArcCase::B, ArcCase::C, ArcCase::D})
    CHECK_FALSE(explore_shielding_arc(none, arc_params(n, true), kind).has_value());
}

TEST_CASE("arc parameters are validated") {
  const Domain w = build_box(8, LatticeKind::SquareL);
  const DuplicatedState state = make_state(8, EdgeConfig(w), EdgeConfig(w, true));
  ArcParams p = arc_params(2, true);
  p.x = -3;
  CHECK_THROWS_AS(explore_shielding_arc(state, p, ArcCase::A), std::invalid_argument);
  p = arc_params(2, true);
  p.extent = 20;
  CHECK_THROWS_AS(explore_shielding_arc(state, p, ArcCase::A), std::invalid_argument);
  DuplicatedState odd = state;
  odd.translation = {1, 0};
  CHECK_THROWS_AS(odd.validate(), std::invalid_argument);
  CHECK(arc_case_from_char('c') == ArcCase::C);
  CHECK_THROWS(arc_case_from_char('e'));
}

TEST_CASE("property: every arc found on random states passes validation") {
  const int R = 10;
  const Domain w = build_box(R, LatticeKind::SquareL);
  CounterStream rng(40, 0);
  int found = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const double p = 0.3 + 0.4 * rng.uniform();
    const DuplicatedState state = make_state(R, bernoulli_config(w, p, rng), bernoulli_config(w, p, rng));
    for (bool upper : {true, false})
      for (ArcCase kind : {ArcCase::A, ArcCase::B, ArcCase::C, ArcCase::D}) {
        const ArcParams params = arc_params(2, upper);
        const auto arc = explore_shielding_arc(state, params, kind);
        if (!arc) continue;
        ++found;
        const auto problems = validate_arc(state, params, *arc);
        CHECK_MESSAGE(problems.empty(), (problems.empty() ? "" : problems.front()));
        if (kind == ArcCase::C || kind == ArcCase::D) CHECK(is_promising(state, params, kind));
      }
  }
  CHECK(found > 20);
}

TEST_CASE("property: closing omega edges never destroys an arc") {
  const int R = 10;
  const Domain w = build_box(R, LatticeKind::SquareL);
  CounterStream rng(41, 0);
  long checks = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const DuplicatedState state = make_state(R, bernoulli_config(w, 0.45, rng), bernoulli_config(w, 0.55, rng));
    for (ArcCase kind : {ArcCase::A, ArcCase::B, ArcCase::C, ArcCase::D}) {
      const auto rep = arc_monotonicity_check(state, arc_params(2, true), kind, 5, trial, 3);
      CHECK(rep.violations == 0);
      checks += rep.checks;
      const auto all = arc_monotonicity_check(state, arc_params(2, false), kind, 1, trial, -1);
      CHECK(all.violations == 0);
    }
  }
  CHECK(checks > 0);
}

TEST_CASE("enclosed domain of two primal arcs") {
  const int R = 10, n = 2;
  const Domain w = build_box(R, LatticeKind::SquareL);
  const DuplicatedState state = make_state(R, EdgeConfig(w), EdgeConfig(w, true));
  const auto up = explore_shielding_arc(state, arc_params(n, true), ArcCase::A);
  const auto down = explore_shielding_arc(state, arc_params(n, false), ArcCase::A);
  REQUIRE(up.has_value());
  REQUIRE(down.has_value());
  CHECK(count_boundary_arcs(*up, *down) == 1);
  const auto inside = enclosed_edges(w, *up, *down);
  const std::set<int> inside_set(inside.begin(), inside.end());
  const Domain core = build_box(n, LatticeKind::SquareL);
  for (const auto& [u, v] : core.edges()) CHECK(inside_set.count(w.find_edge(core.vertex(u), core.vertex(v))) == 1);
  for (int v : w.boundary())
    for (const auto& inc : w.incident(v)) CHECK(inside_set.count(inc.edge) == 0);

  const auto dual_up = explore_shielding_arc(state, arc_params(n, true), ArcCase::B);
  REQUIRE(dual_up.has_value());
  CHECK(count_boundary_arcs(*dual_up, *down) == 2);
  const auto c_up = explore_shielding_arc(state, arc_params(n, true), ArcCase::C);
  const auto d_down = explore_shielding_arc(state, arc_params(n, false), ArcCase::D);
  REQUIRE(c_up.has_value());
  REQUIRE(d_down.has_value());
  const int k = count_boundary_arcs(*c_up, *d_down);
  CHECK(k >= 1);
  CHECK(k <= 4);
}

TEST_CASE("duplication scan: induced conditions dominate on every success") {
  ScanSpec spec;
  spec.params = FKParams(0.7, 1.0);
  spec.bc = BcKind::Free;
  spec.bc_prime = BcKind::Wired;
  spec.R = 14;
  spec.ladder = {4, 8};
  spec.trials = 12;
  spec.sweeps = 30;
  spec.seed = 3;
  const ScanReport rep = run_duplication_scan(spec);
  CHECK(rep.rows.size() == 24);
  CHECK(rep.invariant_failures == 0);
  CHECK(rep.successes > 0);
  CHECK(rep.dominated == rep.successes);
  for (const auto& row : rep.rows)
    if (row.arc_found) CHECK(row.n_arcs <= 4);

  ScanSpec parallel = spec;
  parallel.workers = 2;
  const ScanReport again = run_duplication_scan(parallel);
  REQUIRE(again.rows.size() == rep.rows.size());
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    CHECK(again.rows[i].arc_found == rep.rows[i].arc_found);
    CHECK(again.rows[i].bc_order == rep.rows[i].bc_order);
  }

  ScanSpec bad = spec;
  bad.ladder = {3};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = spec;
  bad.shared_stream = true;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("Dobrushin conditions and good points on a slit") {
  const auto slit = std::make_shared<const SlitDomain>(build_slit(4, 4, 10));
  const auto xi = dobrushin_bc(*slit, OuterRule::UpperFrameWired);
  const int block = xi.block_of(slit->boundary_plus.front());
  for (int v : slit->boundary_plus) CHECK(xi.block_of(v) == block);
  for (int v : slit->boundary_minus) CHECK(xi.block_of(v) != block);
  const auto xi_free = dobrushin_bc(*slit, OuterRule::FrameFree);
  for (int v : slit->outer) CHECK(xi_free.block_of(v) != xi_free.block_of(slit->boundary_plus.front()));

  GoodPointSpec spec;
  spec.params = FKParams(0.97, 2.0);
  spec.samples = 400;
  spec.burn_in = 50;
  spec.seed = 6;
  const auto points = estimate_good_points(slit, spec);
  CHECK(points.size() == 5);
  for (const auto& gp : points) {
    CHECK(gp.samples == 400);
    CHECK(gp.estimate.mean == doctest::Approx(gp.successes / 400.0));
    CHECK(gp.estimate.mean > 0.8);
  }
  spec.params = FKParams(0.03, 2.0);
  for (const auto& gp : estimate_good_points(slit, spec))
    if (std::abs(gp.x) < 4) CHECK(gp.estimate.mean < 0.3);
}
