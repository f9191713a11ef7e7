#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "evsp/oracle.hpp"
#include "evsp/pricing.hpp"

using namespace evsp;

namespace {

Instance pricing_instance(std::uint64_t seed, int services, int depots = 2) {
  GeneratorConfig cfg;
  cfg.seed = seed;
  cfg.n_services = services;
  cfg.n_depots = depots;
  cfg.n_stations = 2;
  cfg.capacity = 70;
  cfg.energy_per_dist = 45;
  return generate_instance(cfg);
}

double route_reduced_cost(const OracleRoute& r, std::span<const double> duals) {
  double rc = r.cost;
  for (int s : r.services) rc -= duals[s];
  return rc;
}

}  // namespace

TEST_CASE("reduced costs") {
  const Instance inst = pricing_instance(21, 5);
  const DepotGraph g = build_depot_graph(inst, 0);
  std::vector<double> zero(inst.n_services(), 0.0);

  SUBCASE("zero duals leave arc costs, vehicle cost on o-arcs") {
    const auto rc = reduced_costs(inst, g, zero);
    for (std::size_t i = 0; i < g.arcs.size(); ++i) {
      const double expect =
          g.arcs[i].cost + (g.arcs[i].tail_vertex == g.o() ? inst.vehicle.fixed_cost : 0.0);
      CHECK(rc[i] == doctest::Approx(expect));
    }
  }

  SUBCASE("route sums telescope to cost minus covered duals") {
    std::vector<double> duals(inst.n_services());
    Rng rng(5);
    std::uniform_real_distribution<double> U(-500.0, 3000.0);
    for (auto& d : duals) d = U(rng);
    const auto rc = reduced_costs(inst, g, duals);
    for (const auto& r : enumerate_routes(inst, g, 6)) {
      double sum = 0.0;
      for (int a : r.arc_ids) sum += rc[a];
      CHECK(sum == doctest::Approx(route_reduced_cost(r, duals)).epsilon(1e-10));
      if (r.services.size() == 1) {
        // c_veh + c(o->v) + c_v + c(v->d) - lambda_v, station detours aside.
        const int v = r.services[0];
        if (!g.arcs[r.arc_ids[0]].charging() && !g.arcs[r.arc_ids[1]].charging()) {
          const double expect = inst.vehicle.fixed_cost +
                                inst.travel_cost(inst.depot_loc(0), v) + inst.services[v].cost +
                                inst.travel_cost(v, inst.depot_loc(0)) - duals[v];
          CHECK(sum == doctest::Approx(expect));
        }
      }
    }
  }

  SUBCASE("branching duals land on the priced arcs") {
    std::vector<BranchConstraint> cons(2);
    cons[0] = {BranchConstraint::Kind::DepotCount, 0, -1, -1, true, 3};
    cons[1] = {BranchConstraint::Kind::Traversal, -1, 0, 1, false, 1};
    const std::vector<double> mus = {7.0, 11.0};
    const auto base = reduced_costs(inst, g, zero);
    const auto rc = reduced_costs(inst, g, zero, cons, mus);
    for (std::size_t i = 0; i < g.arcs.size(); ++i) {
      double expect = base[i];
      if (g.arcs[i].tail_vertex == g.o()) expect -= 7.0;
      if (g.arcs[i].tail_vertex == 0 && g.arcs[i].head_vertex == 1) expect -= 11.0;
      CHECK(rc[i] == doctest::Approx(expect));
    }
  }
}

TEST_CASE("backward bounds") {
  const Instance inst = pricing_instance(33, 6);
  const DepotGraph g = build_depot_graph(inst, 0);
  std::vector<double> duals(inst.n_services(), 1000.0);
  const auto rc = reduced_costs(inst, g, duals);
  const auto bounds = compute_bounds(inst, g, rc);

  CHECK_FALSE(bounds[g.d()].infeasible);
  CHECK(bounds[g.d()].rcost == 0.0);
  CHECK(bounds[g.d()].min_level == 0.0);

  SUBCASE("single v-d arc matches the one-term meet") {
    for (int v = 0; v < g.n_services; ++v) {
      std::vector<int> to_d;
      for (int a : g.out[v]) {
        if (g.arcs[a].head_vertex == g.d()) to_d.push_back(a);
      }
      if (g.out[v].size() == 1 && to_d.size() == 1) {
        const int a = to_d[0];
        CHECK(bounds[v].rcost == doctest::Approx(rc[a]));
        CHECK(bounds[v].min_level ==
              doctest::Approx(min_entry_for(inst, g.arcs[a], 0.0)));
      }
    }
  }

  SUBCASE("componentwise below every enumerated suffix") {
    // DFS all v-d paths, chaining entry requirements backwards.
    for (int v = 0; v < g.n_vertices(); ++v) {
      if (v == g.d()) continue;
      std::vector<std::pair<double, double>> suffixes;  // (rcost, min entry level)
      // Forward DFS storing the arc list, then fold bc from the back.
      std::vector<int> stack;
      const auto walk = [&](auto&& self, int vertex) -> void {
        if (vertex == g.d()) {
          double rcost = 0.0, need = 0.0;
          for (auto it = stack.rbegin(); it != stack.rend(); ++it) {
            need = min_entry_for(inst, g.arcs[*it], need);
            if (!std::isfinite(need)) return;
            rcost += rc[*it];
          }
          suffixes.emplace_back(rcost, need);
          return;
        }
        for (int a : g.out[vertex]) {
          stack.push_back(a);
          self(self, g.arcs[a].head_vertex);
          stack.pop_back();
        }
      };
      walk(walk, v);
      if (suffixes.empty()) {
        CHECK(bounds[v].infeasible);
        continue;
      }
      REQUIRE_FALSE(bounds[v].infeasible);
      double min_rc = kInf, min_need = kInf;
      for (const auto& [r, n] : suffixes) {
        min_rc = std::min(min_rc, r);
        min_need = std::min(min_need, n);
      }
      // The recursion mixes resources across suffixes, so it lower-bounds the
      // componentwise minimum but need not attain it.
      CHECK(bounds[v].rcost <= min_rc + 1e-9);
      CHECK(bounds[v].min_level <= min_need + 1e-9);
    }
  }
}

TEST_CASE("fbc combinator") {
  BackwardBound bot;  // infeasible
  CHECK(fbc(1.0, 50.0, bot) == kInf);
  BackwardBound b{3.0, 20.0, false};
  CHECK(fbc(-kInf, -kInf, b) == kInf);
  CHECK(fbc(2.0, 19.0, b) == kInf);          // level below the suffix need
  CHECK(fbc(2.0, 21.0, b) == doctest::Approx(5.0));
  BackwardBound at_d{0.0, 0.0, false};
  CHECK(fbc(7.0, 0.0, at_d) == doctest::Approx(7.0));
}

TEST_CASE("forward/backward split equivalence") {
  Rng rng(71);
  for (int it = 0; it < 25; ++it) {
    const Instance inst = pricing_instance(100 + it, 7, 1);
    const DepotGraph g = build_depot_graph(inst, 0);
    // Random walks, feasible or not.
    std::uniform_int_distribution<int> pick(0, 1 << 30);
    for (int walk = 0; walk < 60; ++walk) {
      std::vector<int> arcs;
      int v = g.o();
      while (v != g.d()) {
        if (g.out[v].empty()) break;
        const int a = g.out[v][pick(rng) % g.out[v].size()];
        arcs.push_back(a);
        v = g.arcs[a].head_vertex;
      }
      if (v != g.d() || arcs.empty()) continue;
      const int m = static_cast<int>(arcs.size());
      std::vector<double> fwd(m + 1), bwd(m + 1);
      fwd[0] = inst.capacity();
      for (int i = 0; i < m; ++i) fwd[i + 1] = exit_level(inst, g.arcs[arcs[i]], fwd[i]);
      bwd[m] = 0.0;
      for (int i = m - 1; i >= 0; --i) {
        bwd[i] = min_entry_for(inst, g.arcs[arcs[i]], bwd[i + 1]);
      }
      const bool feasible = fwd[m] >= -1e-9;
      for (int i = 0; i <= m; ++i) {
        const bool split_ok = fwd[i] != -kInf && std::isfinite(bwd[i]) &&
                              fwd[i] >= bwd[i] - 1e-9;
        CHECK(split_ok == feasible);
      }
    }
  }
}

TEST_CASE("price: trivial shapes") {
  const Instance inst = pricing_instance(55, 4, 1);
  const DepotGraph g = build_depot_graph(inst, 0);

  SUBCASE("no negative route -> empty") {
    std::vector<double> duals(inst.n_services(), 0.0);  // everything costs c_veh+
    const auto rc = reduced_costs(inst, g, duals);
    CHECK(price(inst, g, rc).empty());
  }
  SUBCASE("single clearly-negative route is found") {
    std::vector<double> duals(inst.n_services(), 0.0);
    duals[0] = 1e6;  // only service 0 is worth anything
    const auto rc = reduced_costs(inst, g, duals);
    const auto routes = price(inst, g, rc, {}, {.max_columns = 1, .threshold = -kFeasEps});
    REQUIRE_FALSE(routes.empty());
    CHECK(routes[0].reduced_cost < 0);
    CHECK(std::find(routes[0].services.begin(), routes[0].services.end(), 0) !=
          routes[0].services.end());
  }
}

TEST_CASE("price exactness against brute force") {
  Rng rng(808);
  std::uniform_real_distribution<double> lam(0.0, 16000.0);
  for (int it = 0; it < 20; ++it) {
    const Instance inst = pricing_instance(900 + it, 3 + it % 8, 2);
    const auto graphs = build_all_depot_graphs(inst);
    std::vector<std::vector<OracleRoute>> all_routes;
    for (const auto& g : graphs) all_routes.push_back(enumerate_routes(inst, g, 12));

    for (int trial = 0; trial < 10; ++trial) {
      std::vector<double> duals(inst.n_services());
      for (auto& d : duals) d = lam(rng);
      for (std::size_t gi = 0; gi < graphs.size(); ++gi) {
        const DepotGraph& g = graphs[gi];
        const auto rc = reduced_costs(inst, g, duals);
        const auto best =
            price(inst, g, rc, {}, {.max_columns = 1, .threshold = kInf});
        double brute = kInf;
        for (const auto& r : all_routes[gi]) {
          brute = std::min(brute, route_reduced_cost(r, duals));
        }
        if (all_routes[gi].empty()) {
          CHECK(best.empty());
          continue;
        }
        REQUIRE_FALSE(best.empty());
        CHECK(best[0].reduced_cost == doctest::Approx(brute).epsilon(1e-9));

        // Bound validity along the winning route's prefixes.
        const auto bounds = compute_bounds(inst, g, rc);
        double pref_rc = 0.0, level = inst.capacity();
        CHECK(fbc(pref_rc, level, bounds[g.o()]) <= best[0].reduced_cost + 1e-9);
        for (int a : best[0].arc_ids) {
          pref_rc += rc[a];
          level = exit_level(inst, g.arcs[a], level);
          CHECK(fbc(pref_rc, level, bounds[g.arcs[a].head_vertex]) <=
                best[0].reduced_cost + 1e-9);
        }

        // Multi-column harvest: distinct, sorted, all below the threshold.
        const auto many = price(inst, g, rc, {}, {.max_columns = 5, .threshold = kInf});
        for (std::size_t i = 1; i < many.size(); ++i) {
          CHECK(many[i - 1].reduced_cost <= many[i].reduced_cost + 1e-12);
          CHECK(many[i - 1].arc_ids != many[i].arc_ids);
        }
        if (!many.empty()) {
          CHECK(many[0].reduced_cost == doctest::Approx(brute).epsilon(1e-9));
        }
      }
    }
  }
}
