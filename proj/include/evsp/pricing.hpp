#pragma once

#include <span>
#include <vector>

#include "evsp/charge_arcs.hpp"

namespace evsp {

// One branching row of the master problem.
struct BranchConstraint {
  enum class Kind { DepotCount, Traversal };
  Kind kind = Kind::DepotCount;
  int depot = -1;          // DepotCount
  int from_service = -1;   // Traversal
  int to_service = -1;
  bool is_upper = true;    // true: sum <= rhs, false: sum >= rhs
  double rhs = 0.0;
};

// Per-arc reduced costs: the vehicle cost is folded into the arcs leaving o,
// each arc pays the dual of its head service, and branching duals land on the
// arcs whose rows they price (o-arcs for depot counts, the matching
// service-pair arcs for traversals).
std::vector<double> reduced_costs(const Instance& inst, const DepotGraph& graph,
                                  std::span<const double> service_duals,
                                  std::span<const BranchConstraint> constraints = {},
                                  std::span<const double> constraint_duals = {});

// Meet-semilattice bound of one vertex: componentwise minimum of the
// (reduced cost, required entry level) resources over all feasible v-d paths.
struct BackwardBound {
  double rcost = 0.0;
  double min_level = 0.0;
  bool infeasible = true;  // no feasible suffix (the absorbing top element)
};

// Unique solution of the backward generalized DP equation along a reverse
// topological order. Masked arcs (mask 0) are ignored; an empty mask allows all.
std::vector<BackwardBound> compute_bounds(const Instance& inst, const DepotGraph& graph,
                                          std::span<const double> arc_rcost,
                                          std::span<const char> arc_mask = {});

// Lower bound on any feasible completion of a forward state through a vertex
// with bound `b`: +inf when the battery level cannot cover the suffix.
double fbc(double rcost, double level, const BackwardBound& b);

struct PricedRoute {
  std::vector<int> arc_ids;   // indices into the depot graph
  std::vector<int> services;  // service ids in traversal order
  double reduced_cost = 0.0;
  double cost = 0.0;  // true route cost, vehicle cost included
};

struct PricingOptions {
  int max_columns = 200;
  double threshold = -kFeasEps;  // keep routes with reduced cost strictly below
};

// Best-first enumeration with dominance and bound pruning. Returns up to
// max_columns distinct routes with reduced cost below the threshold, sorted by
// reduced cost; the minimum-reduced-cost route is always among them.
std::vector<PricedRoute> price(const Instance& inst, const DepotGraph& graph,
                               std::span<const double> arc_rcost,
                               std::span<const char> arc_mask = {},
                               const PricingOptions& opt = {});

}  // namespace evsp
