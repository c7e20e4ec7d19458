#include "gibbslab/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "gibbslab/coupling.hpp"
#include "gibbslab/exact.hpp"
#include "gibbslab/exploration.hpp"
#include "gibbslab/oracle.hpp"
#include "gibbslab/sampler.hpp"

namespace gibbslab::cli {

namespace {

using json = nlohmann::ordered_json;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  return out;
}

int parse_int(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const long v = std::stol(text, &used);
    if (used != text.size() || v < INT32_MIN || v > INT32_MAX) throw std::invalid_argument("");
    return static_cast<int>(v);
  } catch (const std::exception&) {
    throw UsageError("parameter " + key + " expects an integer, got '" + text + "'");
  }
}

long parse_long(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const long v = std::stol(text, &used);
    if (used != text.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw UsageError("parameter " + key + " expects an integer, got '" + text + "'");
  }
}

Rational parse_exact(const std::string& key, const std::string& text) {
  try {
    return parse_rational(text);
  } catch (const std::exception&) {
    throw UsageError("parameter " + key + " expects a number, got '" + text + "'");
  }
}

class Params {
 public:
  std::map<std::string, std::string> values;

  const std::string& str(const std::string& key) const {
    const auto it = values.find(key);
    if (it == values.end()) throw std::logic_error("undeclared parameter " + key);
    return it->second;
  }
  void set(const std::string& key, const std::string& value) { values[key] = value; }
  int integer(const std::string& key) const { return parse_int(key, str(key)); }
  long big(const std::string& key) const { return parse_long(key, str(key)); }
  Rational rational(const std::string& key) const { return parse_exact(key, str(key)); }
  double real(const std::string& key) const { return rational(key).get_d(); }
  bool flag(const std::string& key) const {
    const std::string& v = str(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw UsageError("parameter " + key + " expects true or false, got '" + v + "'");
  }
  bool is_auto(const std::string& key) const { return str(key) == "auto"; }
};

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<json>> rows;
};

struct Outcome {
  json result = json::object();
  std::optional<Table> table;
  int code = kOk;
  std::vector<std::string> warnings;
};

struct Context {
  Params params;
  std::uint64_t seed = 1;
  int workers = 1;
  bool rational = false;
};

struct ParamDef {
  std::string name;
  std::string value;
  std::string help;
};

struct CommandDef {
  std::string group;  // empty for top-level commands
  std::string name;
  std::string help;
  std::vector<ParamDef> params;
  std::function<Outcome(Context&)> run;
  std::string full_name() const { return group.empty() ? name : group + " " + name; }
};

json scalar_json(double v) { return v; }
json scalar_json(const Rational& v) { return to_string(v); }
json scalar_json(const Algebraic& v) { return v.to_string(); }

double resolve_p(Context& ctx, double q) {
  if (ctx.params.str("p") == "auto") {
    const double p = self_dual_p(q);
    ctx.params.set("p", format_double(p));
    return p;
  }
  return ctx.params.real("p");
}

json sites_json(const Domain& d) {
  json edges = json::array();
  for (const auto& [u, v] : d.edges())
    edges.push_back({{d.vertex(u).x, d.vertex(u).y}, {d.vertex(v).x, d.vertex(v).y}});
  return edges;
}

PottsBoundary parse_potts_boundary(const Domain& d, const std::string& spec, int q) {
  if (spec == "free") return PottsBoundary::free(d);
  if (spec.rfind("mono:", 0) == 0) {
    const int c = parse_int("tau", spec.substr(5));
    if (c < 1 || c > q) throw UsageError("boundary colour must lie in 1..q");
    return PottsBoundary::monochromatic(d, c);
  }
  throw UsageError("unknown Potts boundary '" + spec + "' (free or mono:c)");
}

int parse_sign(const std::string& spec) {
  if (spec == "plus" || spec == "+") return 1;
  if (spec == "minus" || spec == "-") return -1;
  throw UsageError("unknown exterior sign '" + spec + "' (plus or minus)");
}

// ---------------------------------------------------------------- exact

template <class S>
json marginals_json(const Distribution<S>& dist, int bits) {
  json out = json::array();
  for (int e = 0; e < bits; ++e)
    out.push_back(scalar_json(exact_event_probability<S>(dist, [e](std::uint64_t id) { return (id >> e) & 1; })));
  return out;
}

std::string hex_id(std::uint64_t id) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%llx", static_cast<unsigned long long>(id));
  return buf;
}

template <class S>
Table distribution_table(const Distribution<S>& dist, const std::function<std::string(std::uint64_t)>& hex = hex_id) {
  Table table;
  table.columns = {"config_hex", "probability"};
  for (std::size_t i = 0; i < dist.size(); ++i) table.rows.push_back({hex(dist.ids[i]), scalar_json(dist.probability(i))});
  return table;
}

template <class S>
Outcome exact_fk_outcome(const Domain& d, const BoundaryCondition& xi, const FKScalars<S>& s, bool full) {
  const Distribution<S> dist = exact_fk(d, xi, s);
  Outcome out;
  out.result["domain"] = json::parse(to_json(d));
  out.result["Z"] = scalar_json(dist.total);
  out.result["marginals"] = marginals_json(dist, d.edge_count());
  if (full) out.table = distribution_table(dist, [&d](std::uint64_t id) { return EdgeConfig::from_id(d, id).to_hex(); });
  return out;
}

template <class S>
json agreement_json(const Domain& d, const Distribution<S>& dist, int q, int shift) {
  json out = json::array();
  for (int e = 0; e < d.edge_count(); ++e) {
    const auto [u, v] = d.edge(e);
    out.push_back(scalar_json(exact_event_probability<S>(dist, [&, u = u, v = v](std::uint64_t id) {
      const auto spins = potts_digits(id >> shift, q, d.vertex_count());
      return spins[u] == spins[v];
    })));
  }
  return out;
}

Outcome cmd_exact(Context& ctx) {
  const Params& P = ctx.params;
  const std::string model = P.str("model");
  const bool full = P.flag("full");
  if (model == "fk") {
    const Domain d = parse_domain(P.str("domain"));
    const BoundaryCondition xi = parse_bc(d, P.str("bc"));
    if (ctx.rational) {
      const Rational p = P.rational("p"), q = P.rational("q");
      fk_scalars_exact(p, q);
      return exact_fk_outcome(d, xi, FKScalars<Rational>::from_y(Rational(p / (1 - p)), q), full);
    }
    const FKParams params(P.real("p"), P.real("q"));
    return exact_fk_outcome(d, xi, fk_scalars(params), full);
  }
  if (model == "potts") {
    if (ctx.rational) throw UsageError("rational mode is not available for the Potts model");
    const Domain d = parse_domain(P.str("domain"));
    const int q = P.integer("q");
    const PottsParams params(P.real("T"), q);
    const auto tau = parse_potts_boundary(d, P.str("tau"), q);
    const auto dist = exact_potts(d, tau, params);
    Outcome out;
    out.result["Z"] = dist.total;
    out.result["agreement"] = agreement_json(d, dist, q, 0);
    if (full) out.table = distribution_table(dist);
    return out;
  }
  if (model == "es") {
    const Domain d = parse_domain(P.str("domain"));
    const int q = P.integer("q");
    const auto tau = parse_potts_boundary(d, P.str("tau"), q);
    Outcome out;
    const int m = d.edge_count();
    auto fill = [&](const auto& dist) {
      out.result["Z"] = scalar_json(dist.total);
      out.result["marginals"] = marginals_json(dist, m);
      out.result["agreement"] = agreement_json(d, dist, q, m);
      if (full) out.table = distribution_table(dist);
    };
    if (ctx.rational) {
      const Rational p = P.rational("p");
      fill(exact_es<Rational>(d, tau, q, p, Rational(1 - p)));
    } else {
      const double p = P.real("p");
      fill(exact_es<double>(d, tau, q, p, 1.0 - p));
    }
    return out;
  }
  if (model == "loop" || model == "spin") {
    const FaceDomain fd = parse_hex_faces(P.str("faces"));
    Outcome out;
    auto fill = [&](const auto& n, const auto& x) {
      using S = std::decay_t<decltype(n)>;
      if (model == "loop") {
        const auto dist = exact_loop<S>(fd, n, x);
        out.result["Z"] = scalar_json(dist.total);
        out.result["occupation"] = marginals_json(dist, fd.graph.edge_count());
        if (full) out.table = distribution_table(dist);
      } else {
        const auto tau = SpinExterior::constant(fd, parse_sign(P.str("tau")));
        const auto dist = exact_spin<S>(fd, tau, n, x);
        out.result["Z"] = scalar_json(dist.total);
        out.result["face_minus"] = marginals_json(dist, fd.inner_count);
        if (full) out.table = distribution_table(dist);
      }
    };
    if (ctx.rational)
      fill(P.rational("n"), P.rational("x"));
    else
      fill(P.real("n"), P.real("x"));
    return out;
  }
  throw UsageError("unknown model '" + model + "' (fk, potts, es, loop, spin)");
}

// ---------------------------------------------------------------- checks

template <class S>
struct MinTracker {
  bool any = false;
  S value = S(0);
  json witness;
  void offer(const S& v, const std::function<json()>& make) {
    if (!any || v < value) {
      any = true;
      value = v;
      witness = make();
    }
  }
};

// Minimum over monotone pairs of P(A and B) - P(A) P(B), computed on integer
// weights so the rational sweep stays cheap.
SlackReport<Rational> exact_fkg_slack(const Distribution<Rational>& dist, int m,
                                      const std::vector<std::uint32_t>& events,
                                      const std::unordered_map<std::uint32_t, std::size_t>& index) {
  mpz_class lcm = 1;
  for (const auto& w : dist.weights) mpz_lcm(lcm.get_mpz_t(), lcm.get_mpz_t(), w.get_den_mpz_t());
  std::vector<mpz_class> weight(std::size_t{1} << m, 0);
  for (std::size_t i = 0; i < dist.size(); ++i) {
    const Rational scaled = dist.weights[i] * lcm;
    weight[dist.ids[i]] = scaled.get_num();
  }
  mpz_class total = 0;
  for (const auto& w : weight) total += w;
  std::vector<mpz_class> phi(events.size(), 0);
  for (std::size_t k = 0; k < events.size(); ++k)
    for (std::size_t c = 0; c < weight.size(); ++c)
      if ((events[k] >> c) & 1) phi[k] += weight[c];
  SlackReport<Rational> rep;
  mpz_class best, t1, t2;
  bool first = true;
  for (std::size_t i = 0; i < events.size(); ++i)
    for (std::size_t j = i; j < events.size(); ++j) {
      mpz_mul(t1.get_mpz_t(), total.get_mpz_t(), phi[index.at(events[i] & events[j])].get_mpz_t());
      mpz_mul(t2.get_mpz_t(), phi[i].get_mpz_t(), phi[j].get_mpz_t());
      t1 -= t2;
      ++rep.checked;
      if (first || t1 < best) {
        best = t1;
        rep.event_a = events[i];
        rep.event_b = events[j];
        first = false;
      }
    }
  rep.min_slack = Rational(best, total * total);
  rep.min_slack.canonicalize();
  return rep;
}

Outcome check_fkg_cbc(Context& ctx, bool cbc) {
  const Params& P = ctx.params;
  const int max_edges = P.integer("edges");
  if (max_edges < 1 || max_edges > 4) throw UsageError("edges must lie in 1..4");
  const double tol = P.real("tol");
  const auto domains = enumerate_bond_animals(max_edges);
  std::map<int, std::size_t> event_counts;
  long configurations = 0;
  std::size_t checked = 0;
  MinTracker<double> fmin;
  MinTracker<Rational> rmin;

  for (const Domain& d : domains) {
    const int m = d.edge_count();
    const auto events = enumerate_monotone_events(m);
    event_counts[m] = events.size();
    std::unordered_map<std::uint32_t, std::size_t> index;
    for (std::size_t i = 0; i < events.size(); ++i) index[events[i]] = i;
    const auto parts = all_partitions(d.boundary());
    std::vector<BoundaryCondition> bcs;
    for (const auto& part : parts) bcs.push_back(BoundaryCondition::from_blocks(d, part));
    auto describe = [&](const BoundaryCondition& a, const BoundaryCondition* b, std::uint32_t ea, std::uint32_t eb) {
      json w = {{"domain", sites_json(d)}, {"bc", json::parse(a.to_json())}};
      if (b) w["fine_bc"] = json::parse(b->to_json());
      w["event_a"] = ea;
      if (!cbc) w["event_b"] = eb;
      return w;
    };
    if (ctx.rational) {
      const auto s = fk_scalars_exact(P.rational("p"), P.rational("q"));
      std::vector<std::vector<Rational>> phi;
      std::vector<Distribution<Rational>> dists;
      for (const auto& xi : bcs) {
        dists.push_back(exact_fk(d, xi, s));
        phi.push_back(event_probabilities(probability_vector(dists.back(), m), events));
      }
      for (std::size_t a = 0; a < bcs.size(); ++a) {
        if (!cbc) {
          const auto rep = exact_fkg_slack(dists[a], m, events, index);
          checked += rep.checked;
          ++configurations;
          rmin.offer(rep.min_slack, [&] { return describe(bcs[a], nullptr, rep.event_a, rep.event_b); });
          continue;
        }
        for (std::size_t b = 0; b < bcs.size(); ++b) {
          if (bc_compare(bcs[a], bcs[b]) != BcOrder::Coarser) continue;
          ++configurations;
          for (std::size_t k = 0; k < events.size(); ++k) {
            ++checked;
            const Rational slack = phi[a][k] - phi[b][k];
            if (!rmin.any || slack < rmin.value)
              rmin.offer(slack, [&] { return describe(bcs[a], &bcs[b], events[k], 0); });
          }
        }
      }
    } else {
      const FKParams params(P.real("p"), P.real("q"));
      for (std::size_t a = 0; a < bcs.size(); ++a) {
        if (!cbc) {
          const auto rep = check_fkg(d, bcs[a], params);
          checked += rep.checked;
          ++configurations;
          fmin.offer(rep.min_slack, [&] { return describe(bcs[a], nullptr, rep.event_a, rep.event_b); });
          continue;
        }
        for (std::size_t b = 0; b < bcs.size(); ++b) {
          if (bc_compare(bcs[a], bcs[b]) != BcOrder::Coarser) continue;
          ++configurations;
          const auto rep = check_cbc(d, bcs[a], bcs[b], params);
          checked += rep.checked;
          fmin.offer(rep.min_slack, [&] { return describe(bcs[a], &bcs[b], rep.event_a, 0); });
        }
      }
    }
  }
  Outcome out;
  json counts = json::object();
  for (const auto& [m, c] : event_counts) counts[std::to_string(m)] = c;
  out.result["domains"] = domains.size();
  out.result[cbc ? "bc_pairs" : "bc_instances"] = configurations;
  out.result["monotone_events"] = counts;
  out.result["checked"] = checked;
  bool pass;
  if (ctx.rational) {
    out.result["min_slack"] = to_string(rmin.value);
    pass = rmin.value >= 0;
  } else {
    out.result["min_slack"] = fmin.value;
    out.result["tolerance"] = -tol;
    pass = fmin.value >= -tol;
  }
  out.result["pass"] = pass;
  if (!pass) {
    out.result["witness"] = ctx.rational ? rmin.witness : fmin.witness;
    out.code = kCheckFailed;
  }
  return out;
}

template <class S>
Distribution<S> pushforward_dual(const Domain& d, const DualDomain& dd, const Distribution<S>& dist) {
  std::vector<std::pair<std::uint64_t, S>> items;
  for (std::size_t i = 0; i < dist.size(); ++i)
    items.emplace_back(dual_config(d, dd, EdgeConfig::from_id(d, dist.ids[i])).id(), dist.weights[i]);
  std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  Distribution<S> out;
  for (auto& [id, w] : items) out.push(id, w);
  return out;
}

template <class S>
bool duality_holds(const Domain& d, const DualDomain& dd, const S& y, const S& q) {
  const auto primal = pushforward_dual(d, dd, exact_fk(d, BoundaryCondition::free(d), FKScalars<S>::from_y(y, q)));
  const auto dual = exact_fk(dd.domain, BoundaryCondition::wired(dd.domain), FKScalars<S>::from_y(q / y, q));
  return same_law(primal, dual);
}

std::optional<Rational> exact_sqrt(const Rational& q) {
  mpz_class num, den;
  if (!mpz_perfect_square_p(q.get_num_mpz_t()) || !mpz_perfect_square_p(q.get_den_mpz_t())) return std::nullopt;
  mpz_sqrt(num.get_mpz_t(), q.get_num_mpz_t());
  mpz_sqrt(den.get_mpz_t(), q.get_den_mpz_t());
  return Rational(num, den);
}

Outcome check_duality(Context& ctx) {
  const Params& P = ctx.params;
  const Rational q = P.rational("q");
  const double tol = P.real("tol");
  const Domain d = build_face_block(2, 2);
  const DualDomain dd = dual_domain(d);
  Outcome out;
  bool pass = true;
  json rows = json::array();
  for (const std::string& item : split(P.str("p"), ',')) {
    json row = {{"p", item}};
    const bool self = item == "self-dual";
    const double p = self ? self_dual_p(q.get_d()) : parse_exact("p", item).get_d();
    row["p_value"] = p;
    row["p_dual"] = dual_p(p, q.get_d());
    const double y = p / (1.0 - p);
    const auto primal = pushforward_dual(d, dd, exact_fk(d, BoundaryCondition::free(d), FKScalars<double>::from_y(y, q.get_d())));
    const auto dual = exact_fk(dd.domain, BoundaryCondition::wired(dd.domain),
                               FKScalars<double>::from_y(q.get_d() / y, q.get_d()));
    const double tv = total_variation(primal, dual);
    row["tv"] = tv;
    bool ok = tv <= tol;
    if (ctx.rational) {
      bool exact_ok;
      if (!self) {
        const Rational pr = parse_exact("p", item);
        exact_ok = duality_holds<Rational>(d, dd, Rational(pr / (1 - pr)), q);
      } else if (const auto s = exact_sqrt(q)) {
        exact_ok = duality_holds<Rational>(d, dd, *s, q);
      } else {
        const auto ctxp = self_dual_context(q);
        exact_ok = duality_holds<Algebraic>(d, dd, Algebraic::generator(ctxp), Algebraic(q));
      }
      row["exact"] = exact_ok;
      ok = ok && exact_ok;
    }
    row["pass"] = ok;
    pass = pass && ok;
    rows.push_back(row);
  }
  out.result["domain"] = "block:2x2";
  out.result["cases"] = rows;
  out.result["pass"] = pass;
  if (!pass) out.code = kCheckFailed;
  return out;
}

template <class S>
std::vector<PartitionDistribution<S>> star_triangle_laws(const Domain& g,
                                                         const std::array<int, 3>& terminals, const S& y,
                                                         const S& q) {
  std::vector<PartitionDistribution<S>> laws;
  const std::vector<int> items = {0, 1, 2};
  for (const auto& part : all_partitions(items)) {
    std::vector<std::vector<int>> blocks;
    for (const auto& block : part) {
      std::vector<int> b;
      for (int i : block) b.push_back(terminals[i]);
      blocks.push_back(b);
    }
    laws.push_back(connectivity_distribution(g, BoundaryCondition::from_blocks(g, blocks), FKScalars<S>::from_y(y, q),
                                             {terminals.begin(), terminals.end()}));
  }
  return laws;
}

Outcome check_star_triangle(Context& ctx) {
  const Params& P = ctx.params;
  const Rational q = P.rational("q");
  const double tol = P.real("tol");
  const TriangleStar ts = build_triangle_star();
  const double y = star_triangle_y(q.get_d());
  const double qd = q.get_d();
  const auto tri = star_triangle_laws<double>(ts.triangle, ts.triangle_terminals, y, qd);
  const auto star = star_triangle_laws<double>(ts.star, ts.star_terminals, qd / y, qd);
  double max_tv = 0.0;
  for (std::size_t i = 0; i < tri.size(); ++i) {
    std::map<std::vector<int>, double> diff;
    for (const auto& [k, w] : tri[i].weights) diff[k] += w / tri[i].total;
    for (const auto& [k, w] : star[i].weights) diff[k] -= w / star[i].total;
    double tv = 0.0;
    for (const auto& [k, v] : diff) tv += std::abs(v);
    max_tv = std::max(max_tv, 0.5 * tv);
  }
  double max_row_error = 0.0;
  for (const auto& row : star_triangle_kernel(ts, y, qd)) {
    double sum = 0.0;
    for (double v : row) sum += v;
    max_row_error = std::max(max_row_error, std::abs(sum - 1.0));
  }
  Outcome out;
  out.result["p_c_tri"] = p_c_tri(qd);
  out.result["p_dual"] = p_c_hex(qd);
  out.result["partitions"] = tri.size();
  out.result["max_tv"] = max_tv;
  out.result["max_row_error"] = max_row_error;
  bool pass = max_tv <= tol && max_row_error <= tol;
  if (ctx.rational) {
    const auto ring = star_triangle_context(q);
    const Algebraic ya = Algebraic::generator(ring), qa(q);
    const auto tri_x = star_triangle_laws<Algebraic>(ts.triangle, ts.triangle_terminals, ya, qa);
    const auto star_x = star_triangle_laws<Algebraic>(ts.star, ts.star_terminals, qa / ya, qa);
    bool laws_equal = true;
    for (std::size_t i = 0; i < tri_x.size(); ++i) laws_equal = laws_equal && same_law(tri_x[i], star_x[i]);
    bool rows_one = true;
    for (const auto& row : star_triangle_kernel(ts, ya, qa)) {
      Algebraic sum(0);
      for (const auto& v : row) sum += v;
      rows_one = rows_one && sum == Algebraic(1);
    }
    out.result["exact_laws_equal"] = laws_equal;
    out.result["exact_rows_one"] = rows_one;
    out.result["ring"] = "Q[y]/(y^3+3y^2-" + q.get_str() + ")";
    pass = pass && laws_equal && rows_one;
  }
  out.result["pass"] = pass;
  if (!pass) out.code = kCheckFailed;
  return out;
}

Outcome check_es(Context& ctx) {
  const Params& P = ctx.params;
  const int q = P.integer("q");
  const double T = P.real("T");
  if (q < 2) throw UsageError("q must be an integer >= 2");
  const double t_value = std::exp(-1.0 / T);
  const auto ring = AlgebraicContext::polynomial(t_value, "t");
  const Algebraic t = Algebraic::generator(ring);
  const Algebraic p = Algebraic(1) - t;
  Outcome out;
  bool pass = true;
  json rows = json::array();
  for (const std::string name : {"edge", "path:2"}) {
    const Domain d = parse_domain(name);
    const int m = d.edge_count();
    const PottsBoundary tau = PottsBoundary::free(d);
    const auto joint = exact_es<Algebraic>(d, tau, q, p, t);
    const std::uint64_t mask = (std::uint64_t{1} << m) - 1;
    const auto omega_marg = marginal<Algebraic>(joint, [mask](std::uint64_t id) { return id & mask; });
    const auto sigma_marg = marginal<Algebraic>(joint, [m](std::uint64_t id) { return id >> m; });
    const bool fk_ok = same_law(omega_marg, exact_fk(d, BoundaryCondition::free(d), FKScalars<Algebraic>::from_p(p, t, Algebraic(q))));
    const bool potts_ok = same_law(sigma_marg, exact_potts<Algebraic>(d, tau, q, t));
    json row = {{"domain", name}, {"fk_marginal", fk_ok}, {"potts_marginal", potts_ok}};
    pass = pass && fk_ok && potts_ok;
    if (name == "edge") {
      const auto potts = exact_potts(d, tau, PottsParams(T, q));
      const double agree = exact_event_probability<double>(potts, [&](std::uint64_t id) {
        const auto spins = potts_digits(id, q, d.vertex_count());
        return spins[0] == spins[1];
      });
      row["agreement"] = agree;
      if (q == 2) {
        const double expected = 1.0 / (1.0 + t_value);
        row["agreement_expected"] = expected;
        const bool agree_ok = std::abs(agree - expected) <= 1e-12;
        row["agreement_ok"] = agree_ok;
        pass = pass && agree_ok;
      }
    }
    rows.push_back(row);
  }
  out.result["p"] = 1.0 - t_value;
  out.result["cases"] = rows;
  out.result["pass"] = pass;
  if (!pass) out.code = kCheckFailed;
  return out;
}

template <class S>
json loop_spin_case(const FaceDomain& fd, const S& n, const S& x, bool& pass) {
  const auto loops = exact_loop<S>(fd, n, x);
  S z_spin = S(0);
  long matched = 0, mismatched = 0;
  for (int sign : {1, -1}) {
    const SpinExterior tau = SpinExterior::constant(fd, sign);
    const auto spins = exact_spin<S>(fd, tau, n, x);
    z_spin = z_spin + spins.total;
    for (std::size_t i = 0; i < spins.size(); ++i) {
      const LoopConfig omega = spins_to_loops(fd, face_spins_from_id(fd, tau, spins.ids[i]));
      std::uint64_t id = 0;
      for (int e = 0; e < fd.graph.edge_count(); ++e)
        if (omega.bits[e]) id |= std::uint64_t{1} << e;
      const long k = loops.index_of(id);
      const bool ok = k >= 0 && loops.weights[k] == spins.weights[i];
      (ok ? matched : mismatched) += 1;
    }
  }
  const S twice = S(2) * loops.total;
  const bool z_ok = to_double(z_spin) == to_double(twice) && z_spin == twice;
  pass = pass && mismatched == 0 && z_ok;
  json row = {{"faces", fd.inner_count}, {"matched", matched}, {"mismatched", mismatched},
              {"Z_loop", scalar_json(loops.total)}, {"Z_spin", scalar_json(z_spin)}, {"Z_spin_is_twice_Z_loop", z_ok}};
  if (fd.inner_count == 1) {
    const auto i_empty = loops.index_of(0);
    row["P_loop"] = scalar_json(S(1) - loops.probability(static_cast<std::size_t>(i_empty)));
  }
  return row;
}

Outcome check_loop_spin(Context& ctx) {
  const Params& P = ctx.params;
  const int max_faces = P.integer("faces");
  if (max_faces < 1 || max_faces > 3) throw UsageError("faces must lie in 1..3");
  Outcome out;
  bool pass = true;
  json rows = json::array();
  for (int k = 1; k <= max_faces; ++k) {
    const FaceDomain fd = parse_hex_faces(std::to_string(k));
    if (ctx.rational)
      rows.push_back(loop_spin_case<Rational>(fd, P.rational("n"), P.rational("x"), pass));
    else
      rows.push_back(loop_spin_case<double>(fd, P.real("n"), P.real("x"), pass));
  }
  out.result["cases"] = rows;
  out.result["pass"] = pass;
  if (!pass) out.code = kCheckFailed;
  return out;
}

// ---------------------------------------------------------------- sample

json estimate_json(const Estimate& e) {
  return {{"mean", e.mean}, {"se", e.se}, {"batches", e.batches}, {"samples", e.samples}};
}

Outcome sample_fk(Context& ctx) {
  Params& P = ctx.params;
  const double q = P.real("q");
  const double p = resolve_p(ctx, q);
  ChainSpec spec;
  spec.domain = std::make_shared<const Domain>(parse_domain(P.str("domain")));
  spec.bc = parse_bc(*spec.domain, P.str("bc"));
  spec.params = FKParams(p, q);
  spec.sweeps = P.big("sweeps");
  spec.burn_in = P.big("burn-in");
  spec.seed = ctx.seed;
  spec.init = init_rule_from_string(P.str("init"));
  std::vector<Observable> obs = {edge_density_observable(*spec.domain)};
  if (P.flag("marginals"))
    for (int e = 0; e < spec.domain->edge_count(); ++e) obs.push_back(edge_open_observable(e, "edge_" + std::to_string(e)));
  const bool trace = P.flag("trace");
  const ChainResult res = run_fk_chain(spec, obs, trace);
  Outcome out;
  json est = json::object();
  for (std::size_t i = 0; i < res.names.size(); ++i) est[res.names[i]] = estimate_json(res.estimates[i]);
  out.result["estimates"] = est;
  out.result["final_state"] = res.final_state.to_hex();
  if (trace) {
    Table table;
    table.columns = {"sweep"};
    table.columns.insert(table.columns.end(), res.names.begin(), res.names.end());
    for (std::size_t r = 0; r < res.trace.size(); ++r) {
      std::vector<json> row = {res.first_recorded_sweep + static_cast<long>(r)};
      for (double v : res.trace[r]) row.push_back(v);
      table.rows.push_back(row);
    }
    out.table = table;
  }
  return out;
}

Outcome sample_potts(Context& ctx) {
  const Params& P = ctx.params;
  PottsChainSpec spec;
  spec.domain = std::make_shared<const Domain>(parse_domain(P.str("domain")));
  const int q = P.integer("q");
  spec.params = PottsParams(P.real("T"), q);
  spec.tau = parse_potts_boundary(*spec.domain, P.str("tau"), q);
  spec.sweeps = P.big("sweeps");
  spec.burn_in = P.big("burn-in");
  spec.seed = ctx.seed;
  std::vector<PottsObservable> obs;
  for (int c = 1; c <= q; ++c) obs.push_back(colour_fraction_observable(c));
  for (int e = 0; e < spec.domain->edge_count(); ++e) obs.push_back(edge_agreement_observable(*spec.domain, e));
  const auto res = run_potts_es_chain(spec, obs);
  Outcome out;
  json est = json::object();
  for (std::size_t i = 0; i < res.names.size(); ++i) est[res.names[i]] = estimate_json(res.estimates[i]);
  out.result["estimates"] = est;
  return out;
}

Outcome sample_spin(Context& ctx) {
  const Params& P = ctx.params;
  SpinChainSpec spec;
  spec.faces = std::make_shared<const FaceDomain>(parse_hex_faces(P.str("faces")));
  spec.tau = SpinExterior::constant(*spec.faces, parse_sign(P.str("tau")));
  spec.n = P.real("n");
  spec.x = P.real("x");
  spec.sweeps = P.big("sweeps");
  spec.burn_in = P.big("burn-in");
  spec.seed = ctx.seed;
  std::vector<SpinObservable> obs = {magnetization_observable(*spec.faces)};
  for (int f = 0; f < spec.faces->inner_count; ++f) obs.push_back(face_minus_observable(f));
  const auto res = run_spin_chain(spec, obs);
  Outcome out;
  json est = json::object();
  for (std::size_t i = 0; i < res.names.size(); ++i) est[res.names[i]] = estimate_json(res.estimates[i]);
  out.result["estimates"] = est;
  out.warnings = res.warnings;
  return out;
}

// ---------------------------------------------------------------- scans

Outcome scan_dichotomy(Context& ctx) {
  Params& P = ctx.params;
  const double q = P.real("q");
  const double p = resolve_p(ctx, q);
  const int n = P.integer("n");
  const long sweeps = P.big("sweeps");
  if (P.is_auto("burn-in")) P.set("burn-in", std::to_string(sweeps / 5));
  if (P.is_auto("central")) P.set("central", std::to_string(std::max(1, n / 4)));
  const auto res = run_dichotomy(FKParams(p, q), n, sweeps, P.big("burn-in"), ctx.seed, P.integer("central"), ctx.workers);
  Outcome out;
  out.result["wired"] = {{"edge_density", estimate_json(res.wired.density)},
                         {"central_density", estimate_json(res.wired.central)}};
  out.result["free"] = {{"edge_density", estimate_json(res.free.density)},
                        {"central_density", estimate_json(res.free.central)}};
  out.result["gap"] = res.gap;
  out.result["gap_se"] = res.gap_se;
  out.result["gap_in_se"] = res.gap_se > 0 ? res.gap / res.gap_se : 0.0;
  out.result["central_gap"] = res.central_gap;
  out.result["central_gap_se"] = res.central_gap_se;
  Table table;
  table.columns = {"bc", "observable", "mean", "se"};
  table.rows.push_back({"wired", "edge_density", res.wired.density.mean, res.wired.density.se});
  table.rows.push_back({"wired", "central_density", res.wired.central.mean, res.wired.central.se});
  table.rows.push_back({"free", "edge_density", res.free.density.mean, res.free.density.se});
  table.rows.push_back({"free", "central_density", res.free.central.mean, res.free.central.se});
  out.table = table;
  return out;
}

Outcome scan_shield(Context& ctx) {
  Params& P = ctx.params;
  const double q = P.real("q");
  ScanSpec spec;
  spec.params = FKParams(resolve_p(ctx, q), q);
  spec.bc = bc_kind_from_string(P.str("bc"));
  spec.bc_prime = bc_kind_from_string(P.str("bc-prime"));
  spec.R = P.integer("R");
  spec.ladder = parse_int_list(P.str("ladder"));
  const auto shift = parse_int_list(P.str("translation"));
  if (shift.size() != 2) throw UsageError("translation expects two integers a,b");
  spec.translation = {shift[0], shift[1]};
  spec.trials = P.integer("trials");
  spec.sweeps = P.big("sweeps");
  spec.seed = ctx.seed;
  spec.case_order = P.str("cases");
  spec.h_offset = P.integer("h-offset");
  spec.m = P.integer("m");
  spec.workers = ctx.workers;
  const ScanReport rep = run_duplication_scan(spec);
  Outcome out;
  json scales = json::array();
  for (const auto& s : rep.scales)
    scales.push_back({{"scale", s.scale}, {"arc_frequency", estimate_json(s.arc_frequency)},
                      {"successes", s.successes}, {"dominated", s.dominated}});
  out.result["scales"] = scales;
  out.result["successes"] = rep.successes;
  out.result["dominated"] = rep.dominated;
  out.result["invariant_failures"] = rep.invariant_failures;
  out.result["promising_upper"] = rep.promising_upper;
  if (!rep.failure_details.empty()) out.result["failure_details"] = rep.failure_details;
  out.warnings = rep.surrogates;
  Table table;
  table.columns = {"trial", "scale", "upper_case", "lower_case", "arc_found", "bc_dominates", "bc_order", "n_arcs",
                   "invariant_failures"};
  for (const auto& r : rep.rows)
    table.rows.push_back({r.trial, r.scale, std::string(1, r.upper_case), std::string(1, r.lower_case), r.arc_found,
                          r.bc_dominates, r.bc_order, r.n_arcs, r.invariant_failures});
  out.table = table;
  return out;
}

OuterRule outer_rule_from_string(const std::string& s) {
  if (s == "upper-frame-wired") return OuterRule::UpperFrameWired;
  if (s == "frame-free") return OuterRule::FrameFree;
  throw UsageError("unknown outer rule '" + s + "' (upper-frame-wired or frame-free)");
}

Outcome scan_goodpoints(Context& ctx) {
  Params& P = ctx.params;
  const double q = P.real("q");
  GoodPointSpec spec;
  spec.params = FKParams(resolve_p(ctx, q), q);
  spec.outer = outer_rule_from_string(P.str("outer"));
  spec.samples = P.big("samples");
  spec.burn_in = P.big("burn-in");
  spec.thin = P.integer("thin");
  spec.seed = ctx.seed;
  const auto slit = std::make_shared<const SlitDomain>(build_slit(P.integer("M"), P.integer("N"), P.integer("R")));
  const auto points = estimate_good_points(slit, spec);
  Outcome out;
  long min_success = -1;
  Table table;
  table.columns = {"x", "successes", "samples", "mean", "se"};
  for (const auto& g : points) {
    table.rows.push_back({g.x, g.successes, g.samples, g.estimate.mean, g.estimate.se});
    if (min_success < 0 || g.successes < min_success) min_success = g.successes;
  }
  out.result["points"] = points.size();
  out.result["min_successes"] = min_success;
  out.table = table;
  return out;
}

Outcome scan_annulus(Context& ctx) {
  Params& P = ctx.params;
  const double q = P.real("q");
  const double p = resolve_p(ctx, q);
  const int n = P.integer("n");
  ChainSpec spec;
  spec.domain = std::make_shared<const Domain>(build_box(2 * n, LatticeKind::SquareL));
  spec.bc = parse_bc(*spec.domain, P.str("bc"));
  spec.params = FKParams(p, q);
  spec.sweeps = P.big("sweeps");
  spec.burn_in = P.big("burn-in");
  spec.seed = ctx.seed;
  spec.init = init_rule_from_string(P.str("init"));
  const auto window = spec.domain;
  const Observable crossing{"annulus_clusters", [window, n](const EdgeConfig& omega) {
                              return static_cast<double>(count_annulus_clusters(*window, omega, n));
                            }};
  const Observable any{"crossed", [window, n](const EdgeConfig& omega) {
                         return count_annulus_clusters(*window, omega, n) > 0 ? 1.0 : 0.0;
                       }};
  const ChainResult res = run_fk_chain(spec, {crossing, any}, true);
  std::map<int, long> histogram;
  for (const auto& row : res.trace) ++histogram[static_cast<int>(row[0])];
  Outcome out;
  out.result["annulus_clusters"] = estimate_json(res.estimates[0]);
  out.result["crossing_probability"] = estimate_json(res.estimates[1]);
  Table table;
  table.columns = {"clusters", "count"};
  for (const auto& [k, c] : histogram) table.rows.push_back({k, c});
  out.table = table;
  return out;
}

// ---------------------------------------------------------------- registry

std::vector<CommandDef> commands() {
  const ParamDef q25{"q", "25", "cluster weight q"};
  const ParamDef p_auto{"p", "auto", "edge parameter p; auto = self-dual point"};
  std::vector<CommandDef> out;
  out.push_back({"", "exact", "exact enumeration of a small model",
                 {{"model", "fk", "fk, potts, es, loop or spin"},
                  {"domain", "edge", "edge, path:K, box:N, block:CxR, triangle, star"},
                  {"bc", "free", "FK boundary: free, wired, blocks:0-1|2"},
                  {"tau", "free", "Potts boundary (free, mono:c) or spin exterior (plus, minus)"},
                  {"faces", "1", "hexagonal domain with 1-3 faces (loop, spin)"},
                  {"p", "0.5", "edge parameter p"},
                  {"q", "2", "cluster weight or number of colours"},
                  {"T", "1", "Potts temperature"},
                  {"n", "1", "loop weight n"},
                  {"x", "0.5", "edge weight x"},
                  {"full", "false", "also write the full distribution"}},
                 cmd_exact});
  out.push_back({"check", "fkg", "positive association over all small domains",
                 {{"edges", "4", "largest domain size"}, {"p", "0.5", "edge parameter"}, {"q", "2", "cluster weight"},
                  {"tol", "1e-12", "float tolerance"}},
                 [](Context& c) { return check_fkg_cbc(c, false); }});
  out.push_back({"check", "cbc", "comparison of boundary conditions over all small domains",
                 {{"edges", "4", "largest domain size"}, {"p", "0.5", "edge parameter"}, {"q", "2", "cluster weight"},
                  {"tol", "1e-12", "float tolerance"}},
                 [](Context& c) { return check_fkg_cbc(c, true); }});
  out.push_back({"check", "duality", "free law pushed to the dual equals the wired dual law",
                 {{"q", "2", "cluster weight"}, {"p", "1/3,1/2,self-dual", "comma-separated p values"},
                  {"tol", "1e-10", "total-variation tolerance"}},
                 check_duality});
  out.push_back({"check", "star-triangle", "triangle and star connectivity laws agree at the critical point",
                 {{"q", "1", "cluster weight"}, {"tol", "1e-10", "float tolerance"}},
                 check_star_triangle});
  out.push_back({"check", "es", "Edwards-Sokal marginals",
                 {{"q", "2", "number of colours"}, {"T", "1", "temperature"}}, check_es});
  out.push_back({"check", "loop-spin", "loop and face-spin weights agree",
                 {{"n", "2", "loop weight"}, {"x", "1/2", "edge weight"}, {"faces", "3", "largest face count"}},
                 check_loop_spin});
  out.push_back({"sample", "fk", "heat-bath chain for FK percolation",
                 {{"domain", "box:4", "domain spec"}, {"bc", "free", "boundary condition"}, p_auto,
                  {"q", "2", "cluster weight"}, {"sweeps", "10000", "number of sweeps"},
                  {"burn-in", "1000", "sweeps discarded"}, {"init", "all-closed", "all-open or all-closed"},
                  {"marginals", "false", "estimate every edge marginal"}, {"trace", "false", "write the trace table"}},
                 sample_fk});
  out.push_back({"sample", "potts", "Edwards-Sokal chain for the Potts model",
                 {{"domain", "box:2", "domain spec"}, {"tau", "free", "free or mono:c"}, {"q", "2", "colours"},
                  {"T", "1", "temperature"}, {"sweeps", "10000", "number of sweeps"},
                  {"burn-in", "1000", "sweeps discarded"}},
                 sample_potts});
  out.push_back({"sample", "spin", "face-spin chain for the loop model",
                 {{"faces", "3", "1-3 faces"}, {"tau", "plus", "exterior sign"}, {"n", "2", "loop weight"},
                  {"x", "0.5", "edge weight"}, {"sweeps", "10000", "number of sweeps"},
                  {"burn-in", "1000", "sweeps discarded"}},
                 sample_spin});
  out.push_back({"scan", "dichotomy", "wired against free edge densities on a box",
                 {q25, p_auto, {"n", "32", "box half-width"}, {"sweeps", "20000", "sweeps per chain"},
                  {"burn-in", "auto", "sweeps discarded; auto = sweeps/5"},
                  {"central", "auto", "radius of the central window; auto = n/4"}},
                 scan_dichotomy});
  out.push_back({"scan", "shield", "duplication scan for shielding arcs",
                 {q25, p_auto, {"R", "48", "window half-width"}, {"ladder", "4,8,16", "scales"},
                  {"trials", "200", "independent trials"}, {"sweeps", "500", "sweeps per sample"},
                  {"translation", "2,0", "shift of the second sample"}, {"cases", "abcd", "arc cases in order"},
                  {"h-offset", "0", "strip height n + h-offset; 0 means the extent"},
                  {"m", "0", "step 1 target abscissa"}, {"bc", "free", "law of the first sample"},
                  {"bc-prime", "wired", "law of the second sample"}},
                 scan_shield});
  out.push_back({"scan", "goodpoints", "connection probabilities of axis points in the slit domain",
                 {q25, p_auto, {"M", "8", "left end of the segment"}, {"N", "8", "right end of the segment"},
                  {"R", "24", "truncation box"}, {"samples", "10000", "recorded samples"},
                  {"burn-in", "1000", "sweeps discarded"}, {"thin", "1", "sweeps between samples"},
                  {"outer", "upper-frame-wired", "upper-frame-wired or frame-free"}},
                 scan_goodpoints});
  out.push_back({"scan", "annulus", "clusters crossing the annulus between two boxes",
                 {q25, p_auto, {"n", "8", "inner box"}, {"bc", "wired", "boundary condition on the outer box"},
                  {"init", "all-open", "initial state"}, {"sweeps", "2000", "number of sweeps"},
                  {"burn-in", "200", "sweeps discarded"}},
                 scan_annulus});
  return out;
}

std::string csv_cell(const json& v) {
  if (v.is_number_float()) return format_double(v.get<double>());
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string quoted = "\"";
    for (char c : s) quoted += c == '"' ? std::string("\"\"") : std::string(1, c);
    return quoted + "\"";
  }
  return v.dump();
}

void write_output(std::ostream& os, const ExperimentSpec& spec, const Outcome& outcome) {
  json header = {{"command", spec.command}, {"version", kVersion}, {"seed", spec.seed}};
  json params = json::object();
  for (const auto& [k, v] : spec.parameters) params[k] = v;
  header["parameters"] = params;
  if (spec.format == "json") {
    json doc = header;
    doc["result"] = outcome.result;
    if (outcome.table) {
      json rows = json::array();
      for (const auto& r : outcome.table->rows) rows.push_back(r);
      doc["table"] = {{"columns", outcome.table->columns}, {"rows", rows}};
    }
    if (!outcome.warnings.empty()) doc["warnings"] = outcome.warnings;
    os << doc.dump(2) << '\n';
    return;
  }
  os << "# " << header.dump() << '\n';
  os << "# result " << outcome.result.dump() << '\n';
  for (const auto& w : outcome.warnings) os << "# warning " << json(w).dump() << '\n';
  if (outcome.table) {
    for (std::size_t i = 0; i < outcome.table->columns.size(); ++i)
      os << (i ? "," : "") << outcome.table->columns[i];
    os << '\n';
    for (const auto& row : outcome.table->rows) {
      for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << csv_cell(row[i]);
      os << '\n';
    }
  } else {
    os << "key,value\n";
    const json flat = outcome.result.flatten();
    for (const auto& [k, v] : flat.items()) os << csv_cell(json(k)) << ',' << csv_cell(v) << '\n';
  }
}

}  // namespace

std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos || eq == 0)
      throw UsageError("config line " + std::to_string(lineno) + " is not key=value");
    out[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
  }
  return out;
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

Domain parse_domain(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (kind == "edge" && arg.empty()) return build_single_edge();
  if (kind == "triangle" && arg.empty()) return build_triangle_star().triangle;
  if (kind == "star" && arg.empty()) return build_triangle_star().star;
  if (kind == "path" && !arg.empty()) {
    const int k = parse_int("domain", arg);
    if (k < 1) throw UsageError("path needs at least one edge");
    return build_path(k);
  }
  if (kind == "box" && !arg.empty()) {
    const int n = parse_int("domain", arg);
    if (n < 1) throw UsageError("box needs n >= 1");
    return build_box(n, LatticeKind::SquareL);
  }
  if (kind == "block" && !arg.empty()) {
    const auto x = arg.find('x');
    if (x == std::string::npos) throw UsageError("block expects CxR");
    const int c = parse_int("domain", arg.substr(0, x)), r = parse_int("domain", arg.substr(x + 1));
    if (c < 1 || r < 1) throw UsageError("block needs positive dimensions");
    return build_face_block(c, r);
  }
  throw UsageError("unknown domain '" + spec + "'");
}

BoundaryCondition parse_bc(const Domain& d, const std::string& spec) {
  if (spec == "free") return BoundaryCondition::free(d);
  if (spec == "wired") return BoundaryCondition::wired(d);
  if (spec.rfind("blocks:", 0) == 0) {
    const auto& boundary = d.boundary();
    std::vector<std::vector<int>> blocks;
    for (const auto& block_text : split(spec.substr(7), '|')) {
      std::vector<int> block;
      for (const auto& item : split(block_text, '-')) {
        const int i = parse_int("bc", item);
        if (i < 0 || i >= static_cast<int>(boundary.size()))
          throw UsageError("boundary index " + item + " out of range");
        block.push_back(boundary[i]);
      }
      blocks.push_back(block);
    }
    try {
      return BoundaryCondition::from_blocks(d, blocks);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  throw UsageError("unknown boundary condition '" + spec + "' (free, wired, blocks:...)");
}

FaceDomain parse_hex_faces(const std::string& spec) {
  static const std::vector<Site> kFaces = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  const int k = parse_int("faces", spec);
  if (k < 1 || k > 3) throw UsageError("faces must lie in 1..3");
  return build_hex_faces({kFaces.begin(), kFaces.begin() + k});
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  for (const auto& item : split(text, ',')) out.push_back(parse_int("list", item));
  if (out.empty()) throw UsageError("empty list");
  return out;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  const auto defs = commands();
  CLI::App app{"Exact enumeration and Monte Carlo experiments for FK percolation and related models", "gibbslab"};
  app.require_subcommand(1);
  std::string seed_text, config_path, out_path, format = "json", workers_text;
  bool rational = false;
  auto* seed_opt = app.add_option("--seed", seed_text, "random seed (default: $GIBBSLAB_SEED or 1)");
  app.add_option("--config", config_path, "key=value file; flags override it");
  auto* out_opt = app.add_option("--out", out_path, "output file (default: standard output)");
  auto* format_opt = app.add_option("--format", format, "json or csv");
  auto* workers_opt = app.add_option("--workers", workers_text, "threads for independent trials");
  auto* rational_opt = app.add_flag("--rational", rational, "exact rational arithmetic");

  std::map<std::string, CLI::App*> groups;
  std::vector<CLI::App*> leaves;
  std::vector<std::map<std::string, std::string>> storage(defs.size());
  std::vector<std::map<std::string, CLI::Option*>> options(defs.size());
  for (const std::string g : {"check", "sample", "scan"}) {
    groups[g] = app.add_subcommand(g, g + " commands");
    groups[g]->require_subcommand(1);
    groups[g]->fallthrough();
  }
  for (std::size_t i = 0; i < defs.size(); ++i) {
    CLI::App* parent = defs[i].group.empty() ? &app : groups[defs[i].group];
    CLI::App* sub = parent->add_subcommand(defs[i].name, defs[i].help);
    sub->fallthrough();
    for (const auto& p : defs[i].params)
      options[i][p.name] = p.value == "false"
                               ? sub->add_flag("--" + p.name + "{true}", storage[i][p.name], p.help)
                               : sub->add_option("--" + p.name, storage[i][p.name], p.help + " [" + p.value + "]");
    leaves.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kOk;
    }
    err << "error: " << e.what() << '\n';
    return kUsage;
  }

  std::size_t which = defs.size();
  for (std::size_t i = 0; i < defs.size(); ++i)
    if (leaves[i]->parsed()) which = i;
  if (which == defs.size()) {
    err << "error: no command given\n";
    return kUsage;
  }
  const CommandDef& def = defs[which];

  ExperimentSpec spec;
  spec.command = def.full_name();
  Context ctx;
  try {
    std::map<std::string, std::string> file;
    if (!config_path.empty()) file = read_config_file(config_path);
    for (const auto& p : def.params) ctx.params.set(p.name, p.value);
    std::string seed_value = std::getenv("GIBBSLAB_SEED") ? std::getenv("GIBBSLAB_SEED") : "1";
    std::string workers_value = "1", format_value = "json", out_value, rational_value = "false";
    for (const auto& [k, v] : file) {
      if (k == "seed") seed_value = v;
      else if (k == "workers") workers_value = v;
      else if (k == "format") format_value = v;
      else if (k == "out") out_value = v;
      else if (k == "rational") rational_value = v;
      else if (ctx.params.values.count(k)) ctx.params.set(k, v);
      else throw UsageError("unknown config key '" + k + "' for " + spec.command);
    }
    for (const auto& p : def.params)
      if (options[which][p.name]->count() > 0) ctx.params.set(p.name, storage[which][p.name]);
    if (seed_opt->count() > 0) seed_value = seed_text;
    if (workers_opt->count() > 0) workers_value = workers_text;
    if (format_opt->count() > 0) format_value = format;
    if (out_opt->count() > 0) out_value = out_path;
    if (rational_opt->count() > 0) rational_value = rational ? "true" : "false";

    try {
      std::size_t used = 0;
      spec.seed = std::stoull(seed_value, &used);
      if (used != seed_value.size()) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw UsageError("seed must be a non-negative integer, got '" + seed_value + "'");
    }
    ctx.seed = spec.seed;
    ctx.workers = parse_int("workers", workers_value);
    if (ctx.workers < 1) throw UsageError("workers must be >= 1");
    if (format_value != "json" && format_value != "csv") throw UsageError("format must be json or csv");
    spec.format = format_value;
    spec.out = out_value;
    ctx.rational = Params{{{"rational", rational_value}}}.flag("rational");
    ctx.params.set("rational", ctx.rational ? "true" : "false");
    ctx.params.set("format", spec.format);

    Outcome outcome = def.run(ctx);
    spec.parameters = ctx.params.values;
    for (const auto& w : outcome.warnings) err << "warning: " << w << '\n';
    if (spec.out.empty()) {
      write_output(out, spec, outcome);
    } else {
      std::ofstream file_out(spec.out, std::ios::binary);
      if (!file_out) throw UsageError("cannot write " + spec.out);
      write_output(file_out, spec, outcome);
    }
    if (outcome.code == kCheckFailed) err << spec.command << ": check failed\n";
    return outcome.code;
  } catch (const StateSpaceTooLarge& e) {
    err << "error: " << e.what() << '\n';
    return kResourceLimit;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kCheckFailed;
  }
}

}  // namespace gibbslab::cli
