#include "evsp/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace evsp {

namespace {

double pos_or_dead(double level) { return level >= -1e-9 ? std::max(level, 0.0) : -kInf; }

}  // namespace

SimTrace simulate_schedule(const Instance& inst, const StationSequence& seq,
                           std::span<const double> dwells, double level_in) {
  const int k = static_cast<int>(seq.stations.size());
  if (static_cast<int>(dwells.size()) != k) {
    throw std::invalid_argument("one dwell duration per station expected");
  }
  SimTrace trace;
  const ChargeModel& model = inst.charge_model();

  double t = inst.t_end_of(seq.tail_loc);
  double level = level_in;
  int prev = seq.tail_loc;
  bool times_ok = true;
  for (int i = 0; i < k; ++i) {
    const int s = seq.stations[i];
    t += inst.travel_time(prev, s);
    if (level != -kInf) level = pos_or_dead(level - inst.travel_energy(prev, s));
    StationVisit v;
    v.station_loc = s;
    v.arrival = t;
    v.level_arrival = level;
    if (dwells[i] < 0.0) times_ok = false;
    const double dwell = std::max(dwells[i], 0.0);
    if (level != -kInf) level = model.level_after(level, dwell);
    t += dwell;
    v.departure = t;
    v.level_departure = level;
    trace.visits.push_back(v);
    prev = s;
  }
  t += inst.travel_time(prev, seq.head_loc);
  if (t > inst.t_begin_of(seq.head_loc) + kFeasEps) times_ok = false;
  trace.time_feasible = times_ok;
  if (!times_ok) {
    trace.exit_level = -kInf;
    return trace;
  }
  if (level != -kInf) {
    level = pos_or_dead(level - inst.travel_energy(prev, seq.head_loc));
  }
  if (level != -kInf) {
    level = pos_or_dead(level - inst.energy_of(seq.head_loc));
  }
  trace.exit_level = level;
  return trace;
}

double oracle_exit_level(const Instance& inst, const StationSequence& seq, double level_in) {
  if (level_in == -kInf) return -kInf;
  const ChargeModel& model = inst.charge_model();
  const int k = static_cast<int>(seq.stations.size());
  std::vector<double> dwells(k, 0.0);

  // Reference dwell rule: top up to the next leg's need, full slack at the end.
  double t = inst.t_end_of(seq.tail_loc);
  double level = level_in;
  int prev = seq.tail_loc;
  for (int i = 0; i < k; ++i) {
    const int s = seq.stations[i];
    t += inst.travel_time(prev, s);
    level = pos_or_dead(level - inst.travel_energy(prev, s));
    if (level == -kInf) return -kInf;
    if (i + 1 < k) {
      const double need = inst.travel_energy(s, seq.stations[i + 1]);
      if (level < need) {
        const double dwell =
            model.charge_time(level, std::min(need, inst.capacity()));
        if (!std::isfinite(dwell)) return -kInf;
        dwells[i] = dwell;
        level = need;
        t += dwell;
      }
    } else {
      const double depart =
          inst.t_begin_of(seq.head_loc) - inst.travel_time(s, seq.head_loc);
      if (t > depart + kFeasEps) return -kInf;
      dwells[i] = std::max(0.0, depart - t);
      t = std::max(t, depart);
    }
    prev = s;
  }
  return simulate_schedule(inst, seq, dwells, level_in).exit_level;
}

double oracle_min_entry(const Instance& inst, const StationSequence& seq, double level_out) {
  const double cap = inst.capacity();
  level_out = std::clamp(level_out, 0.0, cap);
  const auto reaches = [&](double entry) {
    return oracle_exit_level(inst, seq, entry) >= level_out - 1e-12;
  };
  if (!reaches(cap)) return kInf;
  if (reaches(0.0)) return 0.0;
  double lo = 0.0, hi = cap;
  for (int it = 0; it < 100 && hi - lo > 1e-12; ++it) {
    const double mid = 0.5 * (lo + hi);
    (reaches(mid) ? hi : lo) = mid;
  }
  return hi;
}

std::vector<OracleRoute> enumerate_routes(const Instance& inst, const DepotGraph& graph,
                                          int max_services) {
  if (inst.n_services() > max_services) {
    throw std::invalid_argument("instance too large for exhaustive route enumeration");
  }
  std::vector<OracleRoute> routes;
  std::vector<int> arc_stack;
  std::vector<int> svc_stack;

  const auto dfs = [&](auto&& self, int vertex, double level) -> void {
    for (int a : graph.out[vertex]) {
      const ChargeArc& arc = graph.arcs[a];
      const double out = exit_level(inst, arc, level);
      if (out == -kInf) continue;
      arc_stack.push_back(a);
      if (arc.head_vertex == graph.d()) {
        OracleRoute r;
        r.depot = graph.depot;
        r.arc_ids = arc_stack;
        r.services = svc_stack;
        r.cost = inst.vehicle.fixed_cost;
        for (int id : arc_stack) r.cost += graph.arcs[id].cost;
        routes.push_back(std::move(r));
        if (routes.size() > 2'000'000) {
          throw std::runtime_error("route enumeration blowup");
        }
      } else {
        svc_stack.push_back(arc.head_vertex);
        self(self, arc.head_vertex, out);
        svc_stack.pop_back();
      }
      arc_stack.pop_back();
    }
  };
  dfs(dfs, graph.o(), inst.capacity());
  return routes;
}

ExactCover exact_small_solve(const Instance& inst, const std::vector<DepotGraph>& graphs,
                             int max_services) {
  const int n = inst.n_services();
  if (n > max_services || n > 24) {
    throw std::invalid_argument("instance too large for exact cover search");
  }
  std::vector<OracleRoute> all;
  for (const auto& g : graphs) {
    auto rs = enumerate_routes(inst, g, max_services);
    all.insert(all.end(), rs.begin(), rs.end());
  }
  std::vector<std::uint32_t> masks(all.size());
  for (std::size_t i = 0; i < all.size(); ++i) {
    std::uint32_t m = 0;
    for (int s : all[i].services) m |= 1u << s;
    masks[i] = m;
  }
  // Routes indexed by their lowest covered service.
  std::vector<std::vector<int>> by_lowest(n);
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (masks[i] == 0) continue;
    by_lowest[std::countr_zero(masks[i])].push_back(static_cast<int>(i));
  }
  const std::uint32_t full = n == 32 ? ~0u : (1u << n) - 1;
  std::vector<double> best(full + 1, kInf);
  std::vector<int> choice(full + 1, -1);
  best[0] = 0.0;
  for (std::uint32_t covered = 0; covered <= full; ++covered) {
    if (best[covered] == kInf || covered == full) continue;
    const int next = std::countr_zero(~covered);
    for (int ri : by_lowest[next]) {
      if ((masks[ri] & covered) != 0) continue;
      const std::uint32_t after = covered | masks[ri];
      const double c = best[covered] + all[ri].cost;
      if (c < best[after] - 1e-12) {
        best[after] = c;
        choice[after] = ri;
      }
    }
  }
  ExactCover result;
  if (best[full] == kInf) return result;
  result.feasible = true;
  result.cost = best[full];
  std::uint32_t cur = full;
  while (cur != 0) {
    const int ri = choice[cur];
    result.routes.push_back(all[ri]);
    cur &= ~masks[ri];
  }
  std::reverse(result.routes.begin(), result.routes.end());
  return result;
}

ValidationReport validate_solution(const Instance& inst, const Solution& sol) {
  ValidationReport rep;
  const auto fail = [&](const std::string& what, const std::string& where) {
    rep.feasible = false;
    rep.violation = what;
    rep.violation_where = where;
    return rep;
  };

  std::vector<int> covered(inst.n_services(), 0);
  double total = 0.0;
  for (std::size_t ri = 0; ri < sol.routes.size(); ++ri) {
    const SolutionRoute& route = sol.routes[ri];
    const std::string where = "route " + std::to_string(ri);
    if (route.depot < 0 || route.depot >= inst.n_depots) return fail("bad depot", where);
    if (route.services.empty()) return fail("empty route", where);
    if (route.legs.size() != route.services.size() + 1) {
      return fail("leg count mismatch", where);
    }
    const int depot_loc = inst.depot_loc(route.depot);
    double level = inst.capacity();
    double cost = inst.vehicle.fixed_cost;
    std::vector<double> trace;
    for (std::size_t li = 0; li < route.legs.size(); ++li) {
      const SolutionLeg& leg = route.legs[li];
      const std::string leg_where = where + " leg " + std::to_string(li);
      const int expect_from = li == 0 ? depot_loc : route.services[li - 1];
      const int expect_to = li + 1 == route.legs.size() ? depot_loc : route.services[li];
      if (leg.from_loc != expect_from || leg.to_loc != expect_to) {
        return fail("leg endpoints do not follow the route", leg_where);
      }
      StationSequence seq{leg.from_loc, leg.to_loc, leg.stations};
      if (leg.schedule.size() != leg.stations.size()) {
        return fail("schedule entries do not match stations", leg_where);
      }
      // Times must follow the no-wait convention between consecutive stops.
      double t = inst.t_end_of(leg.from_loc);
      int prev = leg.from_loc;
      std::vector<double> dwells;
      for (std::size_t si = 0; si < leg.stations.size(); ++si) {
        const SolutionVisit& v = leg.schedule[si];
        t += inst.travel_time(prev, leg.stations[si]);
        if (std::fabs(v.arrival - t) > kFeasEps) return fail("arrival time drift", leg_where);
        if (v.departure < v.arrival - kFeasEps) return fail("negative dwell", leg_where);
        dwells.push_back(std::max(0.0, v.departure - v.arrival));
        t = v.departure;
        prev = leg.stations[si];
      }
      const SimTrace sim = simulate_schedule(inst, seq, dwells, level);
      if (!sim.time_feasible) return fail("head window missed", leg_where);
      if (sim.exit_level == -kInf) return fail("battery exhausted", leg_where);
      level = sim.exit_level;
      trace.push_back(level);
      cost += sequence_cost(inst, seq);
    }
    if (std::fabs(cost - route.cost) > kFeasEps) {
      return fail("route cost mismatch", where);
    }
    total += cost;
    for (int s : route.services) {
      if (s < 0 || s >= inst.n_services()) return fail("unknown service", where);
      covered[s]++;
    }
    rep.battery_trace.push_back(std::move(trace));
  }
  for (int s = 0; s < inst.n_services(); ++s) {
    if (covered[s] != 1) {
      return fail(covered[s] == 0 ? "service uncovered" : "service covered twice",
                  "service " + std::to_string(s));
    }
  }
  if (std::fabs(total - sol.total_cost) > 1e-4) {
    return fail("total cost mismatch", "summary");
  }
  rep.feasible = true;
  rep.recomputed_cost = total;
  return rep;
}

namespace {

struct Point {
  double x = 0.0, y = 0.0;
};

double dist(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

bool singleton_feasible(const Instance& inst, int service) {
  EnumerationConfig cfg;
  for (int d = 0; d < inst.n_depots; ++d) {
    const int dl = inst.depot_loc(d);
    const auto to_v = enumerate_nondominated(inst, dl, inst.service_loc(service), cfg);
    const auto to_d = enumerate_nondominated(inst, inst.service_loc(service), dl, cfg);
    for (const auto& a1 : to_v) {
      const double mid = exit_level(inst, a1, inst.capacity());
      if (mid == -kInf) continue;
      for (const auto& a2 : to_d) {
        if (exit_level(inst, a2, mid) >= 0.0) return true;
      }
    }
  }
  return false;
}

}  // namespace

namespace {

Instance generate_attempt(const GeneratorConfig& cfg, std::uint64_t sub_seed) {
  Rng rng(cfg.seed * 0x9e3779b97f4a7c15ull + sub_seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<Point> svc_begin(cfg.n_services), svc_end(cfg.n_services);
  std::vector<double> t_begin(cfg.n_services), t_end(cfg.n_services);
  std::vector<Point> depot_pt(cfg.n_depots), station_pt(cfg.n_stations);

  // Margins keep every service reachable from any depot in time.
  const double margin = cfg.minutes_per_dist * 1.5 + 1.0;
  for (int i = 0; i < cfg.n_services; ++i) {
    svc_begin[i] = {unit(rng), unit(rng)};
    const double angle = 2.0 * M_PI * unit(rng);
    const double len = 0.05 + 0.3 * unit(rng);
    svc_end[i] = {std::clamp(svc_begin[i].x + len * std::cos(angle), 0.0, 1.0),
                  std::clamp(svc_begin[i].y + len * std::sin(angle), 0.0, 1.0)};
    const double duration = std::max(5.0, cfg.minutes_per_dist * dist(svc_begin[i], svc_end[i]));
    const double lo = margin;
    const double hi = std::max(lo + 1.0, cfg.horizon - margin - duration);
    t_begin[i] = lo + unit(rng) * (hi - lo);
    t_end[i] = t_begin[i] + duration;
  }
  for (auto& p : depot_pt) p = {unit(rng), unit(rng)};
  for (auto& p : station_pt) p = {unit(rng), unit(rng)};

  // Order services by start time for a stable topological layout.
  std::vector<int> order(cfg.n_services);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (t_begin[a] != t_begin[b]) return t_begin[a] < t_begin[b];
    return a < b;
  });

  Instance inst;
  inst.name = "gen_s" + std::to_string(cfg.seed) + "_n" + std::to_string(cfg.n_services);
  inst.n_depots = cfg.n_depots;
  inst.n_stations = cfg.n_stations;
  inst.horizon_end = cfg.horizon;
  inst.vehicle = {cfg.capacity, cfg.fixed_cost};
  if (cfg.piecewise_charge) {
    const double fast = 1.3 * cfg.charge_rate, slow = 0.4 * cfg.charge_rate;
    const double t1 = 0.7 * cfg.capacity / fast;
    const double t2 = t1 + 0.3 * cfg.capacity / slow;
    inst.charge = ChargeModel::piecewise({{0, 0}, {t1, 0.7 * cfg.capacity}, {t2, cfg.capacity}},
                                         cfg.capacity);
  } else {
    inst.charge = ChargeModel::linear(cfg.charge_rate, cfg.capacity);
  }

  for (int i = 0; i < cfg.n_services; ++i) {
    const int src = order[i];
    Service s;
    s.id = i;
    s.t_begin = t_begin[src];
    s.t_end = t_end[src];
    s.energy = std::min(cfg.energy_per_dist * dist(svc_begin[src], svc_end[src]),
                        0.75 * cfg.capacity);
    s.cost = cfg.service_cost;
    inst.services.push_back(s);
  }

  const int n = inst.n_locations();
  const auto end_pt = [&](int loc) -> Point {
    if (inst.is_service_loc(loc)) return svc_end[order[loc]];
    if (inst.is_depot_loc(loc)) return depot_pt[loc - cfg.n_services];
    return station_pt[loc - cfg.n_services - cfg.n_depots];
  };
  const auto begin_pt = [&](int loc) -> Point {
    if (inst.is_service_loc(loc)) return svc_begin[order[loc]];
    return end_pt(loc);
  };
  inst.travel_time = Matrix(n);
  inst.travel_cost = Matrix(n);
  inst.travel_energy = Matrix(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const double d = dist(end_pt(i), begin_pt(j));
      inst.travel_time(i, j) = cfg.minutes_per_dist * d;
      inst.travel_cost(i, j) = cfg.cost_per_dist * d;
      inst.travel_energy(i, j) = cfg.energy_per_dist * d;
    }
  }

  // Shrink service energies until each admits a feasible singleton route.
  for (int s = 0; s < inst.n_services(); ++s) {
    for (int attempt = 0; attempt < 8 && !singleton_feasible(inst, s); ++attempt) {
      inst.services[s].energy *= 0.5;
      if (inst.services[s].energy < 1e-6) inst.services[s].energy = 0.0;
    }
    if (!singleton_feasible(inst, s)) {
      throw std::runtime_error("generator could not make service " + std::to_string(s) +
                               " singleton-feasible");
    }
  }
  inst.validate();
  return inst;
}

}  // namespace

Instance generate_instance(const GeneratorConfig& cfg) {
  // A layout can leave some service unreachable (long depot legs, no station
  // in range); redraw deterministically until every singleton is feasible.
  for (std::uint64_t sub = 0; sub < 32; ++sub) {
    try {
      return generate_attempt(cfg, sub);
    } catch (const std::runtime_error&) {
      continue;
    }
  }
  throw std::runtime_error("generator failed for seed " + std::to_string(cfg.seed));
}

}  // namespace evsp
