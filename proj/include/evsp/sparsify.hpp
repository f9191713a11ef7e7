#pragma once

#include <cstdint>

#include "evsp/charge_arcs.hpp"

namespace evsp {

struct SparsifyConfig {
  // Arcs kept per endpoint, by class: depot-adjacent without / with stations,
  // service-to-service without / with stations.
  int nu1 = 2;
  int nu2 = 2;
  int nu3 = 15;
  int nu4 = 2;
  double slack_weight = 0.1;
  double lost_time_weight = 0.1;
  std::uint64_t seed = 0;  // tie-breaks among equal goodness values
  // Score the service-to-service non-charging class with the head-end minus
  // tail-begin slack instead of the usual head-begin minus tail-end.
  bool alternate_gamma3 = false;
};

// Idle time at the last station once the battery is full, under the optimal
// schedule started at the minimum entry level that reaches the first station.
// Rejects non-charging arcs.
double lost_time(const Instance& inst, const ChargeArc& arc);

// Keeps an arc iff it ranks within the class budget among the outgoing arcs of
// its tail or the incoming arcs of its head, by class goodness.
DepotGraph sparsify(const Instance& inst, const DepotGraph& graph, const SparsifyConfig& cfg);

}  // namespace evsp
