#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "evsp/common.hpp"

namespace evsp {

// A timetabled trip with fixed start/end times, energy consumption and cost.
struct Service {
  int id = 0;
  double t_begin = 0.0;
  double t_end = 0.0;
  double energy = 0.0;
  double cost = 0.0;
};

struct VehicleSpec {
  double capacity = 0.0;    // battery capacity M (after reserve substitution)
  double fixed_cost = 0.0;  // per-vehicle use cost
};

// One breakpoint of the charge-from-empty curve: after `minutes` of charging
// an empty battery, the level is `level`.
struct CurvePoint {
  double minutes = 0.0;
  double level = 0.0;
};

// Battery recharge dynamics. Either linear at a constant rate, or the flow of
// a concave non-decreasing piecewise-linear charge-from-empty curve. Discharge
// is linear and handled outside this class.
class ChargeModel {
 public:
  static ChargeModel linear(double rate, double capacity);
  static ChargeModel piecewise(std::vector<CurvePoint> curve, double capacity);

  bool is_linear() const { return linear_; }
  double rate() const { return rate_; }
  double capacity() const { return capacity_; }

  // Highest level reachable by charging. Equals capacity unless the curve
  // saturates below it.
  double saturation_level() const { return curve_.back().level; }

  // Level after charging for `minutes` starting at `level`.
  // Requires level in [0, capacity] and minutes >= 0.
  double level_after(double level, double minutes) const;

  // Signed charge time between two levels: minimal time to charge from
  // `from_level` to `to_level` when from <= to, the negative of the reverse
  // otherwise. +inf (resp. -inf) when the target is unreachable.
  double charge_time(double from_level, double to_level) const;

  // Smallest entry level x such that level_after(x, minutes) >= target,
  // or +inf if no such level exists in [0, capacity].
  double min_entry_level(double target, double minutes) const;

  // Charge-from-empty curve access. time_from_empty is +inf above saturation.
  double time_from_empty(double level) const;
  double level_from_empty(double minutes) const;
  const std::vector<CurvePoint>& curve() const { return curve_; }

 private:
  ChargeModel() = default;

  bool linear_ = true;
  double rate_ = 1.0;
  double capacity_ = 0.0;
  std::vector<CurvePoint> curve_;  // always populated, also in the linear case
};

// Location index layout: services first, then depots, then stations.
struct Instance {
  std::string name;
  std::vector<Service> services;
  int n_depots = 0;
  int n_stations = 0;
  double horizon_end = 0.0;
  VehicleSpec vehicle;
  std::optional<ChargeModel> charge;
  double reserve_level = 0.0;  // already folded into capacity at load time

  Matrix travel_time;
  Matrix travel_cost;
  Matrix travel_energy;

  int n_services() const { return static_cast<int>(services.size()); }
  int n_locations() const { return n_services() + n_depots + n_stations; }
  int service_loc(int s) const { return s; }
  int depot_loc(int d) const { return n_services() + d; }
  int station_loc(int s) const { return n_services() + n_depots + s; }
  bool is_service_loc(int loc) const { return loc < n_services(); }
  bool is_depot_loc(int loc) const {
    return loc >= n_services() && loc < n_services() + n_depots;
  }
  bool is_station_loc(int loc) const { return loc >= n_services() + n_depots; }

  const ChargeModel& charge_model() const { return *charge; }
  double capacity() const { return vehicle.capacity; }

  // Time conventions: a depot begins at the end of the horizon and ends at 0,
  // so depot-adjacent arcs see the widest possible window.
  double t_begin_of(int loc) const {
    return is_service_loc(loc) ? services[loc].t_begin : horizon_end;
  }
  double t_end_of(int loc) const { return is_service_loc(loc) ? services[loc].t_end : 0.0; }
  double energy_of(int loc) const { return is_service_loc(loc) ? services[loc].energy : 0.0; }
  double cost_of(int loc) const { return is_service_loc(loc) ? services[loc].cost : 0.0; }

  // Throws std::invalid_argument describing the first violated invariant.
  void validate() const;
};

}  // namespace evsp
