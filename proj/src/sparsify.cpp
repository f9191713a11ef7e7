#include "evsp/sparsify.hpp"

#include <algorithm>
#include <cmath>

namespace evsp {

double lost_time(const Instance& inst, const ChargeArc& arc) {
  if (!arc.charging()) {
    throw std::invalid_argument("lost_time is defined for charging arcs only");
  }
  const ChargeModel& model = inst.charge_model();
  StationSequence seq{arc.tail_loc, arc.head_loc, arc.stations};
  const double entry =
      std::clamp(inst.travel_energy(arc.tail_loc, arc.stations.front()), 0.0, inst.capacity());
  const Schedule sched = optimal_schedule(inst, seq, entry);
  if (sched.visits.size() < arc.stations.size()) return 0.0;  // died before the last stop
  const StationVisit& last = sched.visits.back();
  const double depart =
      inst.t_begin_of(arc.head_loc) - inst.travel_time(arc.stations.back(), arc.head_loc);
  const double sat = model.saturation_level();
  const double to_full =
      last.level_arrival >= sat ? 0.0 : model.charge_time(last.level_arrival, sat);
  if (!std::isfinite(to_full)) return 0.0;
  return std::max(0.0, depart - (last.arrival + to_full));
}

namespace {

int arc_class(const DepotGraph& g, const ChargeArc& arc) {
  const bool depot_adjacent = arc.tail_vertex == g.o() || arc.head_vertex == g.d();
  if (depot_adjacent) return arc.charging() ? 2 : 1;
  return arc.charging() ? 4 : 3;
}

}  // namespace

DepotGraph sparsify(const Instance& inst, const DepotGraph& graph, const SparsifyConfig& cfg) {
  for (int nu : {cfg.nu1, cfg.nu2, cfg.nu3, cfg.nu4}) {
    if (nu < 1) throw std::invalid_argument("class budgets must be >= 1");
  }
  const int n_arcs = static_cast<int>(graph.arcs.size());
  std::vector<int> cls(n_arcs);
  std::vector<double> goodness(n_arcs);
  std::vector<double> tiebreak(n_arcs);
  Rng rng(cfg.seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int i = 0; i < n_arcs; ++i) {
    const ChargeArc& a = graph.arcs[i];
    cls[i] = arc_class(graph, a);
    double g = a.cost;
    if (cls[i] >= 3) {
      const double slack = cfg.alternate_gamma3 && cls[i] == 3
                               ? inst.t_end_of(a.head_loc) - inst.t_begin_of(a.tail_loc)
                               : inst.t_begin_of(a.head_loc) - inst.t_end_of(a.tail_loc);
      g += cfg.slack_weight * slack;
    }
    if (cls[i] == 4) g += cfg.lost_time_weight * lost_time(inst, a);
    goodness[i] = g;
    tiebreak[i] = U(rng);
  }
  const int budget[5] = {0, cfg.nu1, cfg.nu2, cfg.nu3, cfg.nu4};

  std::vector<char> keep(n_arcs, 0);
  const auto mark_best = [&](const std::vector<int>& arc_ids) {
    // Group by class, then keep the class budget by (goodness, tiebreak, id).
    for (int c = 1; c <= 4; ++c) {
      std::vector<int> ids;
      for (int id : arc_ids) {
        if (cls[id] == c) ids.push_back(id);
      }
      const int nu = budget[c];
      if (static_cast<int>(ids.size()) > nu) {
        std::nth_element(ids.begin(), ids.begin() + nu, ids.end(), [&](int x, int y) {
          if (goodness[x] != goodness[y]) return goodness[x] < goodness[y];
          if (tiebreak[x] != tiebreak[y]) return tiebreak[x] < tiebreak[y];
          return x < y;
        });
        ids.resize(nu);
      }
      for (int id : ids) keep[id] = 1;
    }
  };
  for (int v = 0; v < graph.n_vertices(); ++v) {
    mark_best(graph.out[v]);
    mark_best(graph.in[v]);
  }

  DepotGraph out;
  out.depot = graph.depot;
  out.n_services = graph.n_services;
  out.out.assign(graph.n_vertices(), {});
  out.in.assign(graph.n_vertices(), {});
  for (int i = 0; i < n_arcs; ++i) {
    if (!keep[i]) continue;
    const int id = static_cast<int>(out.arcs.size());
    out.arcs.push_back(graph.arcs[i]);
    out.out[out.arcs[id].tail_vertex].push_back(id);
    out.in[out.arcs[id].head_vertex].push_back(id);
  }
  out.topo = graph.topo;  // vertex set unchanged, arc subset keeps it valid
  return out;
}

}  // namespace evsp
