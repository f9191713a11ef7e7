#pragma once

#include <iosfwd>
#include <vector>

#include "evsp/model.hpp"

namespace evsp {

// Ordered list of charging stations visited between two tasks/depots.
// Endpoint times and energies follow the depot conventions of Instance.
struct StationSequence {
  int tail_loc = -1;
  int head_loc = -1;
  std::vector<int> stations;  // station locations, possibly empty
};

double sequence_cost(const Instance& inst, const StationSequence& seq);

// Time window plus per-leg full-battery feasibility checks.
bool sequence_is_valid(const Instance& inst, const StationSequence& seq);

struct StationVisit {
  int station_loc = -1;
  double arrival = 0.0;
  double departure = 0.0;
  double level_arrival = 0.0;
  double level_departure = 0.0;
};

struct Schedule {
  double exit_level = -kInf;  // -inf when the sequence cannot be operated
  bool time_feasible = false;
  std::vector<StationVisit> visits;  // arrival fields valid even when infeasible
};

// Optimal schedule: minimal dwell at every station but the last, all the
// remaining time at the last one. Throws if the sequence itself is malformed.
Schedule optimal_schedule(const Instance& inst, const StationSequence& seq, double level_in);

// Monotone non-decreasing piecewise-linear level map on [domain_min, capacity];
// evaluates to -inf below domain_min and stays flat beyond the last knot.
class LevelMap {
 public:
  struct Knot {
    double x = 0.0;
    double y = 0.0;
  };

  LevelMap() = default;
  explicit LevelMap(std::vector<Knot> knots) : knots_(std::move(knots)) {}

  bool empty() const { return knots_.empty(); }
  double domain_min() const { return knots_.front().x; }
  double eval(double x) const;
  // Smallest x with eval(x) >= y, +inf if the map never reaches y.
  double inverse_min(double y) const;
  const std::vector<Knot>& knots() const { return knots_; }

 private:
  std::vector<Knot> knots_;
};

// Closed-form triple of a charging arc under linear recharge: the minimum
// feasible entry level, the exit level from a full battery, and the gain when
// entering at the minimum level.
struct LinearArcParams {
  double min_entry = 0.0;
  double max_exit = 0.0;
  double gain = 0.0;
};

// Requires a linear charge model (the station-free case is model independent).
LinearArcParams linear_params(const Instance& inst, const StationSequence& seq);

struct ChargeArc {
  int tail_vertex = -1;  // graph vertex ids, filled by the graph builder
  int head_vertex = -1;
  int tail_loc = -1;
  int head_loc = -1;
  std::vector<int> stations;
  double cost = 0.0;

  bool linear_form = true;     // triple below is exact (linear model or no station)
  double min_entry = 0.0;      // minimum feasible entry level
  double max_exit = 0.0;       // exit level from a full battery
  double gain = 0.0;           // exit minus entry at the minimum entry level
  LevelMap fc;                 // exit-level map for general-model arcs

  bool charging() const { return !stations.empty(); }
};

// Exit level given the entry level (-inf absorbing).
double exit_level(const Instance& inst, const ChargeArc& arc, double level_in);

// Minimum entry level needed to finish the arc with at least `level_out`
// (+inf when unreachable). General-model arcs use the backward station walk.
double min_entry_for(const Instance& inst, const ChargeArc& arc, double level_out);

// True iff a is at most as expensive as b and exits at least as charged for
// every entry level. Both arcs must share endpoints.
bool dominates(const Instance& inst, const ChargeArc& a, const ChargeArc& b);

struct EnumerationConfig {
  int max_stations = 3;
};

// Non-charging arc (when time-compatible and usable) plus a complete set of
// mutually non-dominated charging sequences between the two endpoints.
std::vector<ChargeArc> enumerate_nondominated(const Instance& inst, int tail_loc, int head_loc,
                                              const EnumerationConfig& cfg = {});

// Acyclic multigraph for one depot. Vertices: services 0..n-1, then o, then d.
struct DepotGraph {
  int depot = 0;
  int n_services = 0;
  std::vector<ChargeArc> arcs;
  std::vector<std::vector<int>> out;  // arc indices by tail vertex
  std::vector<std::vector<int>> in;   // arc indices by head vertex
  std::vector<int> topo;              // vertices in topological order

  int o() const { return n_services; }
  int d() const { return n_services + 1; }
  int n_vertices() const { return n_services + 2; }
};

DepotGraph build_depot_graph(const Instance& inst, int depot, const EnumerationConfig& cfg = {});

// Builds every depot graph, enumerating service-to-service arcs only once.
std::vector<DepotGraph> build_all_depot_graphs(const Instance& inst,
                                               const EnumerationConfig& cfg = {});

// Line-oriented debug dump: tail head stations cost min_entry max_exit gain.
void dump_depot_graph(const DepotGraph& g, std::ostream& os);

}  // namespace evsp
