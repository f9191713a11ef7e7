#include "evsp/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace evsp {

std::vector<double> reduced_costs(const Instance& inst, const DepotGraph& graph,
                                  std::span<const double> service_duals,
                                  std::span<const BranchConstraint> constraints,
                                  std::span<const double> constraint_duals) {
  if (static_cast<int>(service_duals.size()) != inst.n_services()) {
    throw std::invalid_argument("one dual per service expected");
  }
  std::vector<double> rc(graph.arcs.size());
  for (std::size_t i = 0; i < graph.arcs.size(); ++i) {
    const ChargeArc& a = graph.arcs[i];
    double c = a.cost;
    if (a.tail_vertex == graph.o()) c += inst.vehicle.fixed_cost;
    if (a.head_vertex != graph.d()) c -= service_duals[a.head_vertex];
    rc[i] = c;
  }
  for (std::size_t j = 0; j < constraints.size(); ++j) {
    const BranchConstraint& bc = constraints[j];
    const double mu = constraint_duals[j];
    if (mu == 0.0) continue;
    if (bc.kind == BranchConstraint::Kind::DepotCount) {
      if (bc.depot != graph.depot) continue;
      for (int id : graph.out[graph.o()]) rc[id] -= mu;
    } else {
      if (bc.from_service >= graph.n_services || bc.to_service >= graph.n_services) continue;
      for (int id : graph.out[bc.from_service]) {
        if (graph.arcs[id].head_vertex == bc.to_service) rc[id] -= mu;
      }
    }
  }
  return rc;
}

std::vector<BackwardBound> compute_bounds(const Instance& inst, const DepotGraph& graph,
                                          std::span<const double> arc_rcost,
                                          std::span<const char> arc_mask) {
  std::vector<BackwardBound> b(graph.n_vertices());
  b[graph.d()] = {0.0, 0.0, false};
  // graph.topo is a forward topological order; walk it backwards.
  for (auto it = graph.topo.rbegin(); it != graph.topo.rend(); ++it) {
    const int v = *it;
    if (v == graph.d()) continue;
    BackwardBound& bound = b[v];
    for (int id : graph.out[v]) {
      if (!arc_mask.empty() && !arc_mask[id]) continue;
      const ChargeArc& arc = graph.arcs[id];
      const BackwardBound& head = b[arc.head_vertex];
      if (head.infeasible) continue;
      const double need = min_entry_for(inst, arc, head.min_level);
      if (!std::isfinite(need)) continue;
      const double rc = head.rcost + arc_rcost[id];
      if (bound.infeasible) {
        bound = {rc, need, false};
      } else {
        bound.rcost = std::min(bound.rcost, rc);
        bound.min_level = std::min(bound.min_level, need);
      }
    }
  }
  return b;
}

double fbc(double rcost, double level, const BackwardBound& b) {
  if (b.infeasible || level == -kInf) return kInf;
  if (level < b.min_level - 1e-9) return kInf;
  return rcost + b.rcost;
}

namespace {

struct Label {
  double rcost = 0.0;
  double level = 0.0;
  int vertex = -1;
  int parent = -1;
  int arc = -1;
  bool dead = false;
};

struct HeapEntry {
  double key = 0.0;
  std::uint64_t seq = 0;  // FIFO tie-break
  int label = -1;
  bool operator>(const HeapEntry& other) const {
    if (key != other.key) return key > other.key;
    return seq > other.seq;
  }
};

// Mutually non-dominated (rcost, level) pairs per vertex, sorted by rcost.
struct Frontier {
  std::vector<std::tuple<double, double, int>> entries;  // rcost asc, level asc

  bool dominated(double rc, double level) const {
    for (const auto& [r, l, id] : entries) {
      if (r > rc + 1e-12) break;
      if (l >= level - 1e-12) return true;
    }
    return false;
  }

  // Removes entries dominated by the newcomer; reports their label ids.
  void insert(double rc, double level, int label, std::vector<int>& evicted) {
    auto it = entries.begin();
    while (it != entries.end()) {
      const auto& [r, l, id] = *it;
      if (r >= rc - 1e-12 && l <= level + 1e-12) {
        evicted.push_back(id);
        it = entries.erase(it);
      } else {
        ++it;
      }
    }
    entries.insert(std::lower_bound(entries.begin(), entries.end(),
                                    std::make_tuple(rc, level, label)),
                   {rc, level, label});
  }
};

}  // namespace

std::vector<PricedRoute> price(const Instance& inst, const DepotGraph& graph,
                               std::span<const double> arc_rcost,
                               std::span<const char> arc_mask, const PricingOptions& opt) {
  const std::vector<BackwardBound> bounds = compute_bounds(inst, graph, arc_rcost, arc_mask);

  std::vector<Label> labels;
  std::priority_queue<HeapEntry, std::vector<HeapEntry>, std::greater<>> heap;
  std::vector<Frontier> frontier(graph.n_vertices());
  std::uint64_t seq = 0;

  struct Found {
    double rcost;
    std::uint64_t seq;
    int label;
  };
  const auto worse = [](const Found& a, const Found& b) {
    if (a.rcost != b.rcost) return a.rcost < b.rcost;
    return a.seq < b.seq;
  };
  std::priority_queue<Found, std::vector<Found>, decltype(worse)> found(worse);

  const auto prune_at = [&]() {
    double t = opt.threshold;
    if (static_cast<int>(found.size()) >= opt.max_columns) {
      t = std::min(t, found.top().rcost);
    }
    return t;
  };

  labels.push_back({0.0, inst.capacity(), graph.o(), -1, -1, false});
  heap.push({fbc(0.0, inst.capacity(), bounds[graph.o()]), seq++, 0});

  while (!heap.empty()) {
    const HeapEntry top = heap.top();
    heap.pop();
    if (labels[top.label].dead) continue;
    if (top.key >= prune_at()) continue;  // every remaining key is a valid lower bound
    const Label cur = labels[top.label];

    for (int id : graph.out[cur.vertex]) {
      if (!arc_mask.empty() && !arc_mask[id]) continue;
      const ChargeArc& arc = graph.arcs[id];
      const double level = exit_level(inst, arc, cur.level);
      if (level == -kInf) continue;
      const double rc = cur.rcost + arc_rcost[id];
      const int w = arc.head_vertex;
      const double key = fbc(rc, level, bounds[w]);
      if (key >= prune_at()) continue;

      if (w == graph.d()) {
        labels.push_back({rc, level, w, top.label, id, false});
        found.push({rc, seq++, static_cast<int>(labels.size()) - 1});
        while (static_cast<int>(found.size()) > opt.max_columns) found.pop();
        continue;
      }
      if (frontier[w].dominated(rc, level)) continue;
      labels.push_back({rc, level, w, top.label, id, false});
      const int lid = static_cast<int>(labels.size()) - 1;
      std::vector<int> evicted;
      frontier[w].insert(rc, level, lid, evicted);
      for (int dead : evicted) labels[dead].dead = true;
      heap.push({key, seq++, lid});
    }
  }

  std::vector<Found> harvest;
  while (!found.empty()) {
    harvest.push_back(found.top());
    found.pop();
  }
  std::sort(harvest.begin(), harvest.end(), [](const Found& a, const Found& b) {
    if (a.rcost != b.rcost) return a.rcost < b.rcost;
    return a.seq < b.seq;
  });

  std::vector<PricedRoute> routes;
  routes.reserve(harvest.size());
  for (const Found& f : harvest) {
    PricedRoute r;
    r.reduced_cost = f.rcost;
    for (int l = f.label; labels[l].arc >= 0; l = labels[l].parent) {
      r.arc_ids.push_back(labels[l].arc);
    }
    std::reverse(r.arc_ids.begin(), r.arc_ids.end());
    r.cost = inst.vehicle.fixed_cost;
    for (int id : r.arc_ids) {
      r.cost += graph.arcs[id].cost;
      if (graph.arcs[id].head_vertex != graph.d()) {
        r.services.push_back(graph.arcs[id].head_vertex);
      }
    }
    routes.push_back(std::move(r));
  }
  return routes;
}

}  // namespace evsp
