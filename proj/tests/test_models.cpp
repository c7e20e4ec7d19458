#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "gibbslab/models.hpp"

using namespace gibbslab;

namespace {

LoopConfig all_loop_edges(const FaceDomain& fd, bool on) {
  LoopConfig omega;
  omega.bits.assign(fd.graph.edge_count(), on ? 1 : 0);
  return omega;
}

FaceSpinConfig constant_spins(const FaceDomain& fd, int sign) {
  FaceSpinConfig s;
  s.spins.assign(fd.faces.size(), sign);
  return s;
}

// Disjoint union of two domains, translated far apart.
Domain disjoint_union(const Domain& a, const Domain& b, int shift) {
  std::vector<std::pair<Site, Site>> edges;
  for (const auto& [u, v] : a.edges()) edges.emplace_back(a.vertex(u), a.vertex(v));
  for (const auto& [u, v] : b.edges())
    edges.emplace_back(Site{b.vertex(u).x + shift, b.vertex(u).y}, Site{b.vertex(v).x + shift, b.vertex(v).y});
  return Domain::from_edges(LatticeKind::SquareL, edges);
}

}  // namespace

TEST_CASE("single-edge FK weights") {
  const Domain d = build_single_edge();
  const FKParams params(0.3, 2.5);
  const double y = 0.3 / 0.7;
  const EdgeConfig closed(d, false), open(d, true);
  CHECK(fk_weight(d, BoundaryCondition::free(d), params, closed).value == doctest::Approx(2.5 * 2.5));
  CHECK(fk_weight(d, BoundaryCondition::free(d), params, open).value == doctest::Approx(y * 2.5));
  CHECK(fk_weight(d, BoundaryCondition::wired(d), params, closed).value == doctest::Approx(2.5));
  const Weight w = fk_weight(d, BoundaryCondition::free(d), params, open);
  CHECK(w.log_value == doctest::Approx(std::log(w.value)));
}

TEST_CASE("log weights stay finite where linear weights overflow") {
  const Domain d = build_box(8, LatticeKind::SquareL);
  const Weight w = fk_weight(d, BoundaryCondition::free(d), FKParams(0.999999, 25.0), EdgeConfig(d, false));
  CHECK(std::isfinite(w.log_value));
  CHECK(w.log_value == doctest::Approx(d.vertex_count() * std::log(25.0)));
}

TEST_CASE("cluster counts") {
  const Domain box = build_box(2, LatticeKind::SquareL);
  CHECK(cluster_count(box, BoundaryCondition::free(box), EdgeConfig(box)) == box.vertex_count());
  const int interior = box.vertex_count() - static_cast<int>(box.boundary().size());
  CHECK(cluster_count(box, BoundaryCondition::wired(box), EdgeConfig(box)) == interior + 1);
  const Domain path = build_path(2);
  CHECK(cluster_count(path, BoundaryCondition::free(path), EdgeConfig(path, true)) == 1);
}

TEST_CASE("property: opening an edge lowers the cluster count by 0 or 1") {
  const Domain d = build_box(3, LatticeKind::SquareL);
  std::mt19937_64 gen(11);
  const std::vector<BoundaryCondition> bcs = {BoundaryCondition::free(d), BoundaryCondition::wired(d)};
  for (int trial = 0; trial < 200; ++trial) {
    EdgeConfig omega(d);
    for (int e = 0; e < d.edge_count(); ++e) omega.set(e, gen() & 1);
    const int e = static_cast<int>(gen() % d.edge_count());
    for (const auto& xi : bcs) {
      EdgeConfig lo = omega, hi = omega;
      lo.set(e, false);
      hi.set(e, true);
      const int diff = cluster_count(d, xi, lo) - cluster_count(d, xi, hi);
      CHECK((diff == 0 || diff == 1));
    }
  }
}

TEST_CASE("property: FK weights factor over disjoint unions with free conditions") {
  const Domain a = build_path(2), b = build_face_block(1, 1);
  const Domain u = disjoint_union(a, b, 20);
  const FKParams params(0.4, 3.0);
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 50; ++trial) {
    EdgeConfig wa(a), wb(b), wu(u);
    for (int e = 0; e < a.edge_count(); ++e) wa.set(e, gen() & 1);
    for (int e = 0; e < b.edge_count(); ++e) wb.set(e, gen() & 1);
    for (int e = 0; e < a.edge_count(); ++e) {
      const auto [p, q] = a.edge(e);
      wu.set(u.find_edge(a.vertex(p), a.vertex(q)), wa[e]);
    }
    for (int e = 0; e < b.edge_count(); ++e) {
      const auto [p, q] = b.edge(e);
      const Site s{b.vertex(p).x + 20, b.vertex(p).y}, t{b.vertex(q).x + 20, b.vertex(q).y};
      wu.set(u.find_edge(s, t), wb[e]);
    }
    const double whole = fk_weight(u, BoundaryCondition::free(u), params, wu).value;
    const double parts = fk_weight(a, BoundaryCondition::free(a), params, wa).value *
                         fk_weight(b, BoundaryCondition::free(b), params, wb).value;
    CHECK(whole == doctest::Approx(parts).epsilon(1e-12));
  }
}

TEST_CASE("frame convention: merged frame clusters or weight q'") {
  const Domain d = build_path(2);
  const FKParams params(0.5, 4.0);
  const EdgeConfig empty(d);
  FrameConvention merge{{d.find_vertex({0, 0, 0}), d.find_vertex({2, 0, 0})}, true, 1.0};
  // Two frame singletons merged into one cluster, plus the middle vertex.
  CHECK(fk_weight(d, BoundaryCondition::free(d), params, empty, merge).value == doctest::Approx(16.0));
  FrameConvention separate = merge;
  separate.merge = false;
  separate.q_prime = 2.0;
  CHECK(fk_weight(d, BoundaryCondition::free(d), params, empty, separate).value == doctest::Approx(4.0 * 2.0 * 2.0));
  separate.q_prime = 5.0;
  CHECK_THROWS_AS(fk_weight(d, BoundaryCondition::free(d), params, empty, separate), std::invalid_argument);
}

TEST_CASE("config checks reject foreign domains and bad parameters") {
  const Domain a = build_path(2), b = build_path(3);
  CHECK_THROWS(fk_weight(a, BoundaryCondition::free(a), FKParams(0.5, 2.0), EdgeConfig(b)));
  CHECK_THROWS_AS(FKParams(1.0, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(FKParams(0.5, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(PottsParams(0.0, 2), std::invalid_argument);
  CHECK_THROWS_AS(PottsParams(1.0, 1), std::invalid_argument);
}

TEST_CASE("edge config hex round trip, least significant bit first") {
  const Domain d = build_box(2, LatticeKind::SquareL);
  EdgeConfig c(d);
  c.set(0, true);
  c.set(5, true);
  CHECK(c.to_hex().back() == '1');
  CHECK(EdgeConfig::from_hex(d, c.to_hex()) == c);
  CHECK(c.open_count() == 2);
}

TEST_CASE("Potts weights") {
  const Domain d = build_single_edge();
  const PottsParams params(0.7, 2);
  const PottsBoundary tau = PottsBoundary::free(d);
  CHECK(potts_weight(d, tau, params, {{1, 1}}).value == doctest::Approx(1.0));
  CHECK(potts_weight(d, tau, params, {{1, 2}}).value == doctest::Approx(std::exp(-1.0 / 0.7)));
  const Domain tri = build_triangle_star().triangle;
  CHECK(potts_weight(tri, PottsBoundary::free(tri), PottsParams(1.0, 3), {{2, 2, 2}}).value == doctest::Approx(1.0));
  CHECK_THROWS(potts_weight(d, PottsBoundary::monochromatic(d, 1), params, {{2, 2}}));
}

TEST_CASE("property: Potts weight ratios match the agreement form at q=2") {
  const Domain d = build_box(1, LatticeKind::SquareL);
  const double T = 1.3;
  const PottsParams params(T, 2);
  const PottsBoundary tau = PottsBoundary::free(d);
  std::vector<PottsConfig> configs;
  for (int id = 0; id < 32; ++id) {
    PottsConfig s;
    for (int v = 0; v < 5; ++v) s.spins.push_back(((id >> v) & 1) + 1);
    configs.push_back(s);
  }
  auto agree_form = [&](const PottsConfig& s) {
    int agree = 0;
    for (const auto& [u, v] : d.edges()) agree += s.spins[u] == s.spins[v];
    return std::exp(agree / T);
  };
  for (const auto& a : configs)
    for (const auto& b : configs) {
      const double lhs = potts_weight(d, tau, params, a).value / potts_weight(d, tau, params, b).value;
      CHECK(lhs == doctest::Approx(agree_form(a) / agree_form(b)).epsilon(1e-12));
    }
}

TEST_CASE("loop weights") {
  const FaceDomain one = build_hex_faces({{0, 0, 0}});
  const double n = 1.5, x = 0.6;
  CHECK(loop_weight(one, n, x, all_loop_edges(one, false)).value == doctest::Approx(1.0));
  CHECK(loop_weight(one, n, x, all_loop_edges(one, true)).value == doctest::Approx(n * std::pow(x, 6)));
  const FaceDomain two = build_hex_faces({{0, 0, 0}, {2, 0, 0}});
  CHECK(two.graph.edge_count() == 12);
  CHECK(loop_weight(two, n, x, all_loop_edges(two, true)).value == doctest::Approx(n * n * std::pow(x, 12)));
  LoopConfig odd = all_loop_edges(one, false);
  odd.bits[0] = 1;
  CHECK_THROWS_AS(loop_weight(one, n, x, odd), std::invalid_argument);
}

TEST_CASE("spin weights") {
  const FaceDomain one = build_hex_faces({{0, 0, 0}});
  const double n = 2.0, x = 0.5;
  const SpinExterior plus = SpinExterior::constant(one, 1);
  CHECK(spin_weight(one, plus, n, x, constant_spins(one, 1)).value == doctest::Approx(1.0));
  FaceSpinConfig minus_centre = constant_spins(one, 1);
  minus_centre.spins[0] = -1;
  CHECK(spin_weight(one, plus, n, x, minus_centre).value == doctest::Approx(n * std::pow(x, 6)));

  const FaceDomain three = build_hex_faces({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}});
  const SpinExterior tau = SpinExterior::constant(three, 1);
  for (int id = 0; id < 8; ++id) {
    FaceSpinConfig s = constant_spins(three, 1);
    for (int f = 0; f < 3; ++f)
      if ((id >> f) & 1) s.spins[f] = -1;
    FaceSpinConfig flipped = s;
    for (int& v : flipped.spins) v = -v;
    CHECK(spin_weight(three, tau, n, x, s).value ==
          doctest::Approx(spin_weight(three, tau.flipped(), n, x, flipped).value));
  }
}

TEST_CASE("boundary-condition comparison") {
  const Domain d = build_face_block(1, 1);
  REQUIRE(d.boundary().size() == 4);
  const auto& b = d.boundary();
  const auto wired = BoundaryCondition::wired(d), free = BoundaryCondition::free(d);
  CHECK(bc_compare(wired, free) == BcOrder::Coarser);
  CHECK(bc_compare(free, wired) == BcOrder::Finer);
  CHECK(bc_compare(wired, wired) == BcOrder::Equal);
  const auto ab = BoundaryCondition::from_blocks(d, {{b[0], b[1]}, {b[2], b[3]}});
  const auto ac = BoundaryCondition::from_blocks(d, {{b[0], b[2]}, {b[1], b[3]}});
  CHECK(bc_compare(ab, ac) == BcOrder::Incomparable);
  CHECK_THROWS_AS(BoundaryCondition::from_blocks(d, {{b[0], b[1]}, {b[1], b[2]}}), std::invalid_argument);
  CHECK(free.is_free());
  CHECK(wired.is_wired());
}

TEST_CASE("property: bc_compare is a partial order on partitions of 5 vertices") {
  const Domain d = build_path(4);
  REQUIRE(d.boundary().size() == 5);
  std::vector<BoundaryCondition> all;
  for (const auto& part : all_partitions(d.boundary())) all.push_back(BoundaryCondition::from_blocks(d, part));
  CHECK(all.size() == 52);
  auto geq = [](const BoundaryCondition& a, const BoundaryCondition& b) {
    const auto o = bc_compare(a, b);
    return o == BcOrder::Equal || o == BcOrder::Coarser;
  };
  for (const auto& a : all) {
    CHECK(bc_compare(a, a) == BcOrder::Equal);
    for (const auto& b : all) {
      if (geq(a, b) && geq(b, a)) CHECK(a == b);
      if (bc_compare(a, b) == BcOrder::Coarser) CHECK(bc_compare(b, a) == BcOrder::Finer);
      for (const auto& c : all)
        if (geq(a, b) && geq(b, c)) CHECK(geq(a, c));
    }
  }
}

TEST_CASE("p_of_T") {
  CHECK(p_of_T(1.0) == doctest::Approx(1.0 - std::exp(-1.0)));
  CHECK(p_of_T(1.0 / std::log(2.0)) == doctest::Approx(0.5).epsilon(1e-15));
  double last = 1.0;
  for (double T = 0.1; T < 100.0; T *= 1.5) {
    const double p = p_of_T(T);
    CHECK(p < last);
    CHECK(p > 0.0);
    last = p;
  }
  CHECK(p_of_T(1e9) < 1e-8);
}
