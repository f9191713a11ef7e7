#pragma once

#include <span>
#include <string>
#include <vector>

#include "evsp/charge_arcs.hpp"
#include "evsp/model.hpp"
#include "evsp/solution.hpp"

// Brute-force references used by the test suites and the `validate` mode.
// Nothing here is shared with the pricing or master machinery.

namespace evsp {

struct SimTrace {
  bool time_feasible = false;
  double exit_level = -kInf;
  std::vector<StationVisit> visits;
};

// Literal battery recursion for a given vector of dwell durations (one per
// station). The schedule is feasible when every dwell is non-negative and the
// head is reached within its window.
SimTrace simulate_schedule(const Instance& inst, const StationSequence& seq,
                           std::span<const double> dwells, double level_in);

// Exit level under the reference dwell rule: charge just enough at every
// station except the last, spend the whole remaining window at the last.
double oracle_exit_level(const Instance& inst, const StationSequence& seq, double level_in);

// Smallest entry level whose oracle exit level reaches `level_out`, found by
// bisection; +inf when unreachable.
double oracle_min_entry(const Instance& inst, const StationSequence& seq, double level_out);

struct OracleRoute {
  int depot = 0;
  std::vector<int> arc_ids;   // indices into the depot graph
  std::vector<int> services;  // service ids in order
  double cost = 0.0;          // vehicle fixed cost included
};

// Every feasible o-d route of the graph (all arc alternatives expanded),
// checked by chaining exit levels from a full battery. Guarded against blowup.
std::vector<OracleRoute> enumerate_routes(const Instance& inst, const DepotGraph& graph,
                                          int max_services = 12);

struct ExactCover {
  bool feasible = false;
  double cost = 0.0;
  std::vector<OracleRoute> routes;
};

// Minimum-cost exact cover over the enumerated routes of all depots.
ExactCover exact_small_solve(const Instance& inst, const std::vector<DepotGraph>& graphs,
                             int max_services = 12);

struct ValidationReport {
  bool feasible = false;
  double recomputed_cost = 0.0;
  std::string violation;        // empty when feasible
  std::string violation_where;  // route/leg description of the first violation
  std::vector<std::vector<double>> battery_trace;  // per route, level after each leg
};

// Replays the written schedules of a solution against the instance: times per
// the no-wait convention, battery via the literal recursion, coverage and cost.
ValidationReport validate_solution(const Instance& inst, const Solution& sol);

struct GeneratorConfig {
  std::uint64_t seed = 1;
  int n_services = 10;
  int n_depots = 2;
  int n_stations = 3;
  double horizon = 1000.0;
  double minutes_per_dist = 40.0;
  double energy_per_dist = 30.0;
  double cost_per_dist = 100.0;
  double capacity = 100.0;
  double charge_rate = 1.0;
  double fixed_cost = 10000.0;
  double service_cost = 0.0;
  bool piecewise_charge = false;  // concave two-piece curve instead of linear
};

// Seeded Euclidean instance on the unit square. Every service is guaranteed a
// feasible singleton route (energies are shrunk if needed).
Instance generate_instance(const GeneratorConfig& cfg);

}  // namespace evsp
