#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace evsp {

struct SolutionVisit {
  int station = -1;  // location index
  double arrival = 0.0;
  double departure = 0.0;
  double level_arrival = 0.0;
  double level_departure = 0.0;
};

struct SolutionLeg {
  int from_loc = -1;
  int to_loc = -1;
  std::vector<int> stations;  // station locations, in visit order
  double cost = 0.0;
  double level_in = 0.0;
  double level_out = 0.0;
  std::vector<SolutionVisit> schedule;
};

struct SolutionRoute {
  int depot = 0;
  std::vector<int> services;  // service ids in traversal order
  std::vector<SolutionLeg> legs;
  double cost = 0.0;  // fixed vehicle cost plus arc costs
};

struct Solution {
  std::string instance_name;
  std::string mode;
  std::uint64_t seed = 0;
  std::vector<SolutionRoute> routes;
  int vehicles = 0;
  double driving_cost = 0.0;
  double total_cost = 0.0;
  double bound = 0.0;
  double gap = 0.0;
  std::string status;  // optimal | feasible | infeasible | limit
};

}  // namespace evsp
