#include "evsp/charge_arcs.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <set>

namespace evsp {

namespace {

constexpr double kTieEps = 1e-9;

double leg_time(const Instance& inst, int a, int b) { return inst.travel_time(a, b); }
double leg_cost(const Instance& inst, int a, int b) { return inst.travel_cost(a, b); }
double leg_energy(const Instance& inst, int a, int b) { return inst.travel_energy(a, b); }

}  // namespace

double sequence_cost(const Instance& inst, const StationSequence& seq) {
  double c = 0.0;
  int prev = seq.tail_loc;
  for (int s : seq.stations) {
    c += leg_cost(inst, prev, s);
    prev = s;
  }
  c += leg_cost(inst, prev, seq.head_loc);
  c += inst.cost_of(seq.head_loc);
  return c;
}

bool sequence_is_valid(const Instance& inst, const StationSequence& seq) {
  const double cap = inst.capacity();
  double total_time = 0.0;
  int prev = seq.tail_loc;
  for (int s : seq.stations) {
    total_time += leg_time(inst, prev, s);
    prev = s;
  }
  total_time += leg_time(inst, prev, seq.head_loc);
  if (inst.t_end_of(seq.tail_loc) + total_time > inst.t_begin_of(seq.head_loc) + kFeasEps) {
    return false;
  }
  if (!seq.stations.empty()) {
    // Each leg must be drivable on a full battery.
    if (inst.energy_of(seq.tail_loc) + leg_energy(inst, seq.tail_loc, seq.stations.front()) >
        cap + kFeasEps) {
      return false;
    }
    for (std::size_t i = 1; i < seq.stations.size(); ++i) {
      if (leg_energy(inst, seq.stations[i - 1], seq.stations[i]) > cap + kFeasEps) return false;
    }
    if (leg_energy(inst, seq.stations.back(), seq.head_loc) + inst.energy_of(seq.head_loc) >
        cap + kFeasEps) {
      return false;
    }
  } else {
    if (leg_energy(inst, seq.tail_loc, seq.head_loc) + inst.energy_of(seq.head_loc) >
        cap + kFeasEps) {
      return false;
    }
  }
  return true;
}

Schedule optimal_schedule(const Instance& inst, const StationSequence& seq, double level_in) {
  if (!sequence_is_valid(inst, seq)) {
    throw std::invalid_argument("station sequence violates its time window");
  }
  Schedule sched;
  if (level_in == -kInf) return sched;
  if (!(level_in >= -kFeasEps && level_in <= inst.capacity() + kFeasEps)) {
    throw std::invalid_argument("entry level outside [0, capacity]");
  }
  level_in = std::clamp(level_in, 0.0, inst.capacity());

  const ChargeModel& model = inst.charge_model();
  const int k = static_cast<int>(seq.stations.size());
  const double head_energy = inst.energy_of(seq.head_loc);

  if (k == 0) {
    const double out = level_in - leg_energy(inst, seq.tail_loc, seq.head_loc) - head_energy;
    sched.time_feasible = true;
    sched.exit_level = out >= -kTieEps ? std::max(out, 0.0) : -kInf;
    return sched;
  }

  double t = inst.t_end_of(seq.tail_loc);
  double level = level_in;
  int prev = seq.tail_loc;
  sched.visits.reserve(k);
  for (int i = 0; i < k; ++i) {
    const int s = seq.stations[i];
    level -= leg_energy(inst, prev, s);
    t += leg_time(inst, prev, s);
    if (level < -kTieEps) return sched;  // ran out of battery on the way
    level = std::max(level, 0.0);

    StationVisit visit;
    visit.station_loc = s;
    visit.arrival = t;
    visit.level_arrival = level;

    if (i + 1 < k) {
      // Charge just enough for the next leg.
      const double need = leg_energy(inst, s, seq.stations[i + 1]);
      if (level < need) {
        const double dwell = model.charge_time(level, std::min(need, inst.capacity()));
        if (!std::isfinite(dwell)) return sched;  // saturates below the next leg's need
        t += dwell;
        level = need;
      }
      visit.departure = t;
      visit.level_departure = level;
      sched.visits.push_back(visit);
      prev = s;
      continue;
    }

    // Last station: stay until the latest departure that still reaches the head.
    const double depart = inst.t_begin_of(seq.head_loc) - leg_time(inst, s, seq.head_loc);
    sched.visits.push_back(visit);
    if (t > depart + kFeasEps) return sched;  // the accumulated dwell broke the window
    level = model.level_after(level, std::max(0.0, depart - t));
    sched.visits.back().departure = std::max(depart, t);
    sched.visits.back().level_departure = level;
    t = std::max(depart, t);
    prev = s;
  }
  sched.time_feasible = true;
  const double out = level - leg_energy(inst, prev, seq.head_loc) - head_energy;
  sched.exit_level = out >= -kTieEps ? std::max(out, 0.0) : -kInf;
  return sched;
}

double LevelMap::eval(double x) const {
  if (knots_.empty()) return -kInf;
  if (x < knots_.front().x - kTieEps) return -kInf;
  if (x <= knots_.front().x) return knots_.front().y;
  if (x >= knots_.back().x) return knots_.back().y;
  auto it = std::upper_bound(knots_.begin(), knots_.end(), x,
                             [](double v, const Knot& k) { return v < k.x; });
  const Knot& hi = *it;
  const Knot& lo = *(it - 1);
  if (hi.x == lo.x) return hi.y;
  const double w = (x - lo.x) / (hi.x - lo.x);
  return lo.y + w * (hi.y - lo.y);
}

double LevelMap::inverse_min(double y) const {
  if (knots_.empty()) return kInf;
  if (y > knots_.back().y + kTieEps) return kInf;
  if (y <= knots_.front().y) return knots_.front().x;
  auto it = std::lower_bound(knots_.begin(), knots_.end(), y,
                             [](const Knot& k, double v) { return k.y < v; });
  const Knot& hi = *it;
  const Knot& lo = *(it - 1);
  if (hi.y == lo.y) return hi.x;
  const double w = (y - lo.y) / (hi.y - lo.y);
  return lo.x + w * (hi.x - lo.x);
}

LinearArcParams linear_params(const Instance& inst, const StationSequence& seq) {
  if (!sequence_is_valid(inst, seq)) {
    throw std::invalid_argument("station sequence violates its time window");
  }
  const double cap = inst.capacity();
  const double head_energy = inst.energy_of(seq.head_loc);
  const int k = static_cast<int>(seq.stations.size());
  if (k == 0) {
    const double e = leg_energy(inst, seq.tail_loc, seq.head_loc) + head_energy;
    return {e, cap - e, -e};
  }
  if (!inst.charge_model().is_linear()) {
    throw std::invalid_argument("linear_params requires a linear charge model");
  }
  const double rate = inst.charge_model().rate();

  double sum_time = 0.0, sum_energy_to_last = 0.0;
  int prev = seq.tail_loc;
  for (int s : seq.stations) {
    sum_time += leg_time(inst, prev, s);
    sum_energy_to_last += leg_energy(inst, prev, s);
    prev = s;
  }
  const double last_leg_energy = leg_energy(inst, prev, seq.head_loc);
  sum_time += leg_time(inst, prev, seq.head_loc);

  const double window =
      inst.t_begin_of(seq.head_loc) - inst.t_end_of(seq.tail_loc) - sum_time;
  const double avail = rate * window;
  const double gain_unclamped = avail - sum_energy_to_last - last_leg_energy - head_energy;

  LinearArcParams p;
  p.min_entry = std::max(leg_energy(inst, seq.tail_loc, seq.stations.front()), -gain_unclamped);
  p.max_exit = std::min(cap, cap + avail - sum_energy_to_last) - last_leg_energy - head_energy;
  p.gain = std::min(gain_unclamped, p.max_exit - p.min_entry);
  return p;
}

double exit_level(const Instance& inst, const ChargeArc& arc, double level_in) {
  if (level_in == -kInf) return -kInf;
  const double cap = inst.capacity();
  level_in = std::clamp(level_in, 0.0, cap);
  if (arc.linear_form) {
    if (level_in < arc.min_entry - kTieEps) return -kInf;
    const double out = std::min(arc.max_exit, level_in + arc.gain);
    return out >= -kTieEps ? std::max(out, 0.0) : -kInf;
  }
  return arc.fc.eval(level_in);
}

namespace {

// Backward reconstruction of the latest feasible schedule: walk stations from
// the last one and detect the first station reached without upstream dwell.
double backward_min_entry(const Instance& inst, const ChargeArc& arc, double level_out) {
  const ChargeModel& model = inst.charge_model();
  const double cap = inst.capacity();
  const int k = static_cast<int>(arc.stations.size());
  const double head_energy = inst.energy_of(arc.head_loc);

  // Earliest possible arrival time at each station.
  std::vector<double> earliest(k);
  {
    double t = inst.t_end_of(arc.tail_loc);
    int prev = arc.tail_loc;
    for (int i = 0; i < k; ++i) {
      t += leg_time(inst, prev, arc.stations[i]);
      earliest[i] = t;
      prev = arc.stations[i];
    }
  }
  // Cumulative energy needed to reach each station from the tail.
  std::vector<double> energy_to(k);
  {
    double e = 0.0;
    int prev = arc.tail_loc;
    for (int i = 0; i < k; ++i) {
      e += leg_energy(inst, prev, arc.stations[i]);
      energy_to[i] = e;
      prev = arc.stations[i];
    }
  }

  if (level_out > cap - leg_energy(inst, arc.stations.back(), arc.head_loc) - head_energy +
                      kTieEps) {
    return kInf;
  }

  double next_begin = inst.t_begin_of(arc.head_loc);
  int next_loc = arc.head_loc;
  for (int i = k - 1; i >= 0; --i) {
    const int s = arc.stations[i];
    const double required =
        (i == k - 1)
            ? level_out + leg_energy(inst, s, arc.head_loc) + head_energy
            : leg_energy(inst, s, next_loc);
    const double depart = next_begin - leg_time(inst, s, next_loc);
    const double from_zero = model.charge_time(0.0, std::min(required, cap));
    const double latest_arrival = std::isfinite(from_zero) ? depart - from_zero : -kInf;
    if (latest_arrival > earliest[i] + kTieEps) {
      // This station charges from empty; keep walking backwards.
      next_begin = latest_arrival;
      next_loc = s;
      continue;
    }
    const double dwell = depart - earliest[i];
    if (dwell < -kFeasEps) return kInf;  // cannot even arrive in time
    const double entry_here = model.min_entry_level(required, std::max(0.0, dwell));
    if (!std::isfinite(entry_here)) return kInf;
    const double entry = entry_here + energy_to[i];
    return entry <= cap + kTieEps ? std::min(entry, cap) : kInf;
  }
  // Every station charges from empty: only the first leg constrains the entry.
  return energy_to[0];
}

}  // namespace

double min_entry_for(const Instance& inst, const ChargeArc& arc, double level_out) {
  if (level_out == kInf) return kInf;
  const double cap = inst.capacity();
  level_out = std::clamp(level_out, 0.0, cap);
  if (arc.linear_form) {
    if (level_out > arc.max_exit + kTieEps) return kInf;
    return std::max(arc.min_entry, level_out - arc.gain);
  }
  return backward_min_entry(inst, arc, level_out);
}

namespace {

LevelMap triple_to_map(const Instance& inst, const LinearArcParams& p) {
  const double cap = inst.capacity();
  if (p.min_entry > cap + kTieEps || p.max_exit < 0.0) return LevelMap{};
  std::vector<LevelMap::Knot> knots;
  const double lo = std::max(p.min_entry, 0.0);
  const double kink = p.max_exit - p.gain;  // entry level where the exit saturates
  knots.push_back({lo, std::min(p.max_exit, lo + p.gain)});
  if (kink > lo + kTieEps && kink < cap - kTieEps) knots.push_back({kink, p.max_exit});
  knots.push_back({cap, std::min(p.max_exit, cap + p.gain)});
  return LevelMap{std::move(knots)};
}

bool map_dominates(const LevelMap& a, const LevelMap& b) {
  if (b.empty()) return true;
  if (a.empty()) return false;
  if (a.domain_min() > b.domain_min() + kTieEps) return false;
  for (const auto& kn : a.knots()) {
    if (kn.x >= b.domain_min() - kTieEps && a.eval(kn.x) < b.eval(kn.x) - kTieEps) return false;
  }
  for (const auto& kn : b.knots()) {
    if (a.eval(kn.x) < kn.y - kTieEps) return false;
  }
  return true;
}

bool triple_dominates(const ChargeArc& a, const ChargeArc& b, double cap) {
  if (a.min_entry > b.min_entry + kTieEps) return false;
  const auto eval = [cap](const ChargeArc& arc, double x) {
    if (x < arc.min_entry - kTieEps) return -kInf;
    return std::min(arc.max_exit, x + arc.gain);
  };
  for (double x : {b.min_entry, a.max_exit - a.gain, b.max_exit - b.gain, cap}) {
    if (x < b.min_entry - kTieEps || x > cap + kTieEps) continue;
    if (eval(a, x) < eval(b, x) - kTieEps) return false;
  }
  return true;
}

}  // namespace

bool dominates(const Instance& inst, const ChargeArc& a, const ChargeArc& b) {
  if (a.tail_loc != b.tail_loc || a.head_loc != b.head_loc) {
    throw std::invalid_argument("dominance requires identical endpoints");
  }
  if (a.cost > b.cost + kTieEps) return false;
  if (a.linear_form && b.linear_form) return triple_dominates(a, b, inst.capacity());
  const LevelMap ma =
      a.linear_form ? triple_to_map(inst, {a.min_entry, a.max_exit, a.gain}) : a.fc;
  const LevelMap mb =
      b.linear_form ? triple_to_map(inst, {b.min_entry, b.max_exit, b.gain}) : b.fc;
  return map_dominates(ma, mb);
}

// ---------------------------------------------------------------------------
// Pareto enumeration of station sequences.
// ---------------------------------------------------------------------------

namespace {

bool lex_less(const std::vector<int>& a, const std::vector<int>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

// --- Linear model: a prefix ending at station s is fully described by its
// cost, its first-leg energy and the detour key sum(e + rate*delta).

struct LinLabel {
  double cost = 0.0;
  double first_leg_energy = 0.0;
  double detour_key = 0.0;
  double sum_time = 0.0;
  double sum_energy = 0.0;
  std::vector<int> stations;
};

bool lin_dominates(const LinLabel& a, const LinLabel& b) {
  if (a.cost > b.cost + kTieEps) return false;
  if (a.first_leg_energy > b.first_leg_energy + kTieEps) return false;
  if (a.detour_key > b.detour_key + kTieEps) return false;
  const bool tie = std::fabs(a.cost - b.cost) <= kTieEps &&
                   std::fabs(a.first_leg_energy - b.first_leg_energy) <= kTieEps &&
                   std::fabs(a.detour_key - b.detour_key) <= kTieEps;
  if (tie) return lex_less(a.stations, b.stations);
  return true;
}

// --- General model: a prefix carries the piecewise-linear entry-level ->
// (arrival level, arrival time) profile of its optimally scheduled start.

struct ProfileKnot {
  double x = 0.0;      // entry level at the end of the tail
  double level = 0.0;  // arrival level at the current station
  double time = 0.0;   // arrival time at the current station
};

struct Profile {
  std::vector<ProfileKnot> knots;  // empty = infeasible for every entry level
  bool empty() const { return knots.empty(); }
  double domain_min() const { return knots.front().x; }
};

ProfileKnot interp(const ProfileKnot& a, const ProfileKnot& b, double x) {
  if (b.x == a.x) return a;
  const double w = (x - a.x) / (b.x - a.x);
  return {x, a.level + w * (b.level - a.level), a.time + w * (b.time - a.time)};
}

// Inserts knots where a monotone per-knot quantity crosses the threshold.
template <class Getter>
void insert_crossings(std::vector<ProfileKnot>& knots, Getter get, double threshold) {
  std::vector<ProfileKnot> out;
  out.reserve(knots.size() + 2);
  for (std::size_t i = 0; i < knots.size(); ++i) {
    if (i > 0) {
      const double va = get(knots[i - 1]);
      const double vb = get(knots[i]);
      if ((va < threshold && vb > threshold) || (va > threshold && vb < threshold)) {
        const double w = (threshold - va) / (vb - va);
        const double x = knots[i - 1].x + w * (knots[i].x - knots[i - 1].x);
        if (x > out.back().x + 1e-12 && x < knots[i].x - 1e-12) {
          out.push_back(interp(knots[i - 1], knots[i], x));
        }
      }
    }
    out.push_back(knots[i]);
  }
  knots = std::move(out);
}

void refine_by_levels(Profile& p, const std::vector<double>& thresholds) {
  for (double th : thresholds) {
    insert_crossings(p.knots, [](const ProfileKnot& k) { return k.level; }, th);
  }
}

std::vector<double> curve_kink_levels(const ChargeModel& m) {
  std::vector<double> out;
  for (const auto& pt : m.curve()) out.push_back(pt.level);
  return out;
}

// Drops the part of the domain where `get` < threshold (get non-decreasing in x).
void cut_below(Profile& p, const std::function<double(const ProfileKnot&)>& get,
               double threshold) {
  insert_crossings(p.knots, get, threshold);
  std::size_t first = 0;
  while (first < p.knots.size() && get(p.knots[first]) < threshold - 1e-12) ++first;
  p.knots.erase(p.knots.begin(), p.knots.begin() + first);
}

Profile initial_profile(const Instance& inst, int tail_loc, int station_loc) {
  Profile p;
  const double cap = inst.capacity();
  const double e = leg_energy(inst, tail_loc, station_loc);
  if (inst.energy_of(tail_loc) + e > cap + kFeasEps) return p;
  const double t = inst.t_end_of(tail_loc) + leg_time(inst, tail_loc, station_loc);
  if (e > cap) return p;
  p.knots.push_back({e, 0.0, t});
  p.knots.push_back({cap, cap - e, t});
  return p;
}

// Extends the profile through the dwell at the current station (charging just
// enough for the next leg) followed by the leg itself.
Profile extend_profile(const Instance& inst, const Profile& in, int from_station,
                       int to_station) {
  const ChargeModel& model = inst.charge_model();
  Profile p = in;
  if (p.empty()) return p;
  const double e = leg_energy(inst, from_station, to_station);
  const double dt = leg_time(inst, from_station, to_station);
  if (e > inst.capacity() + kFeasEps) return Profile{};
  if (e > model.saturation_level() + kTieEps) {
    // Charging cannot bridge this leg: the arrival level itself must cover it.
    cut_below(p, [](const ProfileKnot& k) { return k.level; }, e);
    if (p.empty()) return p;
  }
  refine_by_levels(p, curve_kink_levels(model));
  insert_crossings(p.knots, [](const ProfileKnot& k) { return k.level; }, e);
  for (auto& k : p.knots) {
    if (k.level < e) {
      k.time += model.charge_time(k.level, e);
      k.level = 0.0;
    } else {
      k.level -= e;
    }
    k.time += dt;
  }
  return p;
}

// Closes the profile at the head: full remaining dwell at the last station,
// then the final leg. Returns the exit-level map of the finished arc.
LevelMap close_profile(const Instance& inst, const Profile& in, int last_station,
                       int head_loc) {
  const ChargeModel& model = inst.charge_model();
  if (in.empty()) return LevelMap{};
  const double e = leg_energy(inst, last_station, head_loc);
  const double head_energy = inst.energy_of(head_loc);
  if (e + head_energy > inst.capacity() + kFeasEps) return LevelMap{};
  const double depart = inst.t_begin_of(head_loc) - leg_time(inst, last_station, head_loc);

  Profile p = in;
  // Entry levels whose accumulated dwell already missed the window are out.
  cut_below(p, [depart](const ProfileKnot& k) { return depart - k.time; }, 0.0);
  if (p.empty()) return LevelMap{};
  refine_by_levels(p, curve_kink_levels(model));
  insert_crossings(p.knots, [&](const ProfileKnot& k) { return k.level; },
                   model.saturation_level());

  // Charge clock: position on the charge-from-empty curve after the dwell.
  const auto clock = [&](const ProfileKnot& k) {
    return model.time_from_empty(std::min(k.level, model.saturation_level())) +
           std::max(0.0, depart - k.time);
  };
  for (const auto& pt : model.curve()) {
    insert_crossings(p.knots, clock, pt.minutes);
  }

  std::vector<LevelMap::Knot> out;
  out.reserve(p.knots.size());
  for (const auto& k : p.knots) {
    const double at_station = k.level >= model.saturation_level() - 1e-12
                                  ? k.level
                                  : model.level_from_empty(clock(k));
    const double y = std::max(at_station, k.level) - e - head_energy;
    if (!out.empty() && k.x <= out.back().x + 1e-12) {
      out.back().y = std::max(out.back().y, y);
      continue;
    }
    out.push_back({k.x, y});
  }
  LevelMap m{std::move(out)};
  // Trim the entry levels that still end below empty.
  const double lo = m.inverse_min(0.0);
  if (!std::isfinite(lo)) return LevelMap{};
  std::vector<LevelMap::Knot> trimmed;
  trimmed.push_back({lo, std::max(0.0, m.eval(lo))});
  for (const auto& kn : m.knots()) {
    if (kn.x > lo + 1e-12) trimmed.push_back(kn);
  }
  return LevelMap{std::move(trimmed)};
}

// Pointwise comparison of two profiles under the charge-level preorder.
bool profile_dominates(const Instance& inst, const Profile& a, const Profile& b) {
  if (b.empty()) return true;
  if (a.empty()) return false;
  if (a.domain_min() > b.domain_min() + kTieEps) return false;
  const ChargeModel& model = inst.charge_model();

  Profile ra = a, rb = b;
  const auto kinks = curve_kink_levels(model);
  refine_by_levels(ra, kinks);
  refine_by_levels(rb, kinks);
  std::vector<double> grid;
  for (const auto& k : ra.knots) grid.push_back(k.x);
  for (const auto& k : rb.knots) grid.push_back(k.x);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end(),
                         [](double x, double y) { return std::fabs(x - y) < 1e-12; }),
             grid.end());

  const auto eval = [](const Profile& p, double x) -> ProfileKnot {
    if (x <= p.knots.front().x) return p.knots.front();
    if (x >= p.knots.back().x) return p.knots.back();
    auto it = std::upper_bound(p.knots.begin(), p.knots.end(), x,
                               [](double v, const ProfileKnot& k) { return v < k.x; });
    return interp(*(it - 1), *it, x);
  };

  for (double x : grid) {
    if (x < b.domain_min() - kTieEps) continue;
    const ProfileKnot kb = eval(rb, x);
    if (x < a.domain_min() - kTieEps) return false;
    const ProfileKnot ka = eval(ra, x);
    const double tch = model.charge_time(std::min(kb.level, inst.capacity()),
                                         std::min(ka.level, inst.capacity()));
    if (tch == kInf) continue;  // a's level is beyond reach: a is ahead here
    if (tch == -kInf) return false;
    if (kb.time + tch < ka.time - kTieEps) return false;
  }
  return true;
}

struct GenLabel {
  double cost = 0.0;
  double sum_time = 0.0;
  Profile profile;
  std::vector<int> stations;
};

bool gen_dominates(const Instance& inst, const GenLabel& a, const GenLabel& b) {
  if (a.cost > b.cost + kTieEps) return false;
  if (!profile_dominates(inst, a.profile, b.profile)) return false;
  if (std::fabs(a.cost - b.cost) <= kTieEps && profile_dominates(inst, b.profile, a.profile)) {
    return lex_less(a.stations, b.stations);
  }
  return true;
}

template <class Label, class Dominates>
bool insert_nondominated(std::vector<Label>& pool, Label&& cand, const Dominates& dom) {
  for (const Label& l : pool) {
    if (dom(l, cand)) return false;
  }
  std::erase_if(pool, [&](const Label& l) { return dom(cand, l); });
  pool.push_back(std::move(cand));
  return true;
}

ChargeArc make_noncharging_arc(const Instance& inst, int tail_loc, int head_loc) {
  ChargeArc arc;
  arc.tail_loc = tail_loc;
  arc.head_loc = head_loc;
  arc.cost = leg_cost(inst, tail_loc, head_loc) + inst.cost_of(head_loc);
  const double e = leg_energy(inst, tail_loc, head_loc) + inst.energy_of(head_loc);
  arc.linear_form = true;
  arc.min_entry = e;
  arc.max_exit = inst.capacity() - e;
  arc.gain = -e;
  return arc;
}

}  // namespace

std::vector<ChargeArc> enumerate_nondominated(const Instance& inst, int tail_loc, int head_loc,
                                              const EnumerationConfig& cfg) {
  std::vector<ChargeArc> candidates;
  const double cap = inst.capacity();
  const double window_open = inst.t_end_of(tail_loc);
  const double window_close = inst.t_begin_of(head_loc);

  const bool direct_in_time =
      window_open + leg_time(inst, tail_loc, head_loc) <= window_close + kFeasEps;
  if (!direct_in_time) return candidates;

  bool have_noncharging = false;
  {
    ChargeArc direct = make_noncharging_arc(inst, tail_loc, head_loc);
    if (direct.max_exit >= 0.0) {
      candidates.push_back(std::move(direct));
      have_noncharging = true;
    }
  }

  const int n_st = inst.n_stations;
  if (n_st > 0 && cfg.max_stations > 0) {
    const bool linear = inst.charge_model().is_linear();
    const double rate = linear ? inst.charge_model().rate() : 0.0;
    const double tail_energy = inst.energy_of(tail_loc);
    const double head_energy = inst.energy_of(head_loc);

    const auto close_time_ok = [&](double sum_time, int last_station) {
      return window_open + sum_time + leg_time(inst, last_station, head_loc) <=
             window_close + kFeasEps;
    };

    if (linear) {
      std::vector<std::vector<LinLabel>> nd(n_st);
      std::vector<std::pair<int, LinLabel>> frontier;
      for (int s = 0; s < n_st; ++s) {
        const int sl = inst.station_loc(s);
        const double e = leg_energy(inst, tail_loc, sl);
        if (tail_energy + e > cap + kFeasEps) continue;
        LinLabel lab;
        lab.cost = leg_cost(inst, tail_loc, sl);
        lab.first_leg_energy = e;
        lab.detour_key = e + rate * leg_time(inst, tail_loc, sl);
        lab.sum_time = leg_time(inst, tail_loc, sl);
        lab.sum_energy = e;
        lab.stations = {sl};
        // Prune prefixes that can no longer close within the window.
        if (!close_time_ok(lab.sum_time, sl)) continue;
        if (insert_nondominated(nd[s], std::move(lab),
                                [](const LinLabel& a, const LinLabel& b) {
                                  return lin_dominates(a, b);
                                })) {
          frontier.emplace_back(s, nd[s].back());
        }
      }
      for (int len = 1; len <= cfg.max_stations; ++len) {
        std::vector<std::pair<int, LinLabel>> next;
        for (const auto& [s, lab] : frontier) {
          const int sl = inst.station_loc(s);
          // Close at the head.
          if (close_time_ok(lab.sum_time, sl) &&
              leg_energy(inst, sl, head_loc) + head_energy <= cap + kFeasEps) {
            const double last_e = leg_energy(inst, sl, head_loc);
            const double total_time = lab.sum_time + leg_time(inst, sl, head_loc);
            const double avail = rate * (window_close - window_open - total_time);
            const double gain_unclamped = avail - lab.sum_energy - last_e - head_energy;
            ChargeArc arc;
            arc.tail_loc = tail_loc;
            arc.head_loc = head_loc;
            arc.stations = lab.stations;
            arc.cost = lab.cost + leg_cost(inst, sl, head_loc) + inst.cost_of(head_loc);
            arc.linear_form = true;
            arc.min_entry = std::max(lab.first_leg_energy, -gain_unclamped);
            arc.max_exit =
                std::min(cap, cap + avail - lab.sum_energy) - last_e - head_energy;
            arc.gain = std::min(gain_unclamped, arc.max_exit - arc.min_entry);
            if (arc.max_exit >= 0.0 && arc.min_entry <= cap + kTieEps) {
              candidates.push_back(std::move(arc));
            }
          }
          if (len == cfg.max_stations) continue;
          for (int s2 = 0; s2 < n_st; ++s2) {
            if (s2 == s) continue;
            const int s2l = inst.station_loc(s2);
            const double e = leg_energy(inst, sl, s2l);
            if (e > cap + kFeasEps) continue;
            LinLabel ext = lab;
            ext.cost += leg_cost(inst, sl, s2l);
            ext.detour_key += e + rate * leg_time(inst, sl, s2l);
            ext.sum_time += leg_time(inst, sl, s2l);
            ext.sum_energy += e;
            ext.stations.push_back(s2l);
            if (!close_time_ok(ext.sum_time, s2l)) continue;
            if (insert_nondominated(nd[s2], std::move(ext),
                                    [](const LinLabel& a, const LinLabel& b) {
                                      return lin_dominates(a, b);
                                    })) {
              next.emplace_back(s2, nd[s2].back());
            }
          }
        }
        frontier = std::move(next);
        if (frontier.empty()) break;
      }
    } else {
      std::vector<std::vector<GenLabel>> nd(n_st);
      std::vector<std::pair<int, GenLabel>> frontier;
      const auto dom = [&](const GenLabel& a, const GenLabel& b) {
        return gen_dominates(inst, a, b);
      };
      for (int s = 0; s < n_st; ++s) {
        const int sl = inst.station_loc(s);
        GenLabel lab;
        lab.profile = initial_profile(inst, tail_loc, sl);
        if (lab.profile.empty()) continue;
        lab.cost = leg_cost(inst, tail_loc, sl);
        lab.sum_time = leg_time(inst, tail_loc, sl);
        lab.stations = {sl};
        if (!close_time_ok(lab.sum_time, sl)) continue;
        if (insert_nondominated(nd[s], std::move(lab), dom)) {
          frontier.emplace_back(s, nd[s].back());
        }
      }
      for (int len = 1; len <= cfg.max_stations; ++len) {
        std::vector<std::pair<int, GenLabel>> next;
        for (const auto& [s, lab] : frontier) {
          const int sl = inst.station_loc(s);
          if (close_time_ok(lab.sum_time, sl) &&
              leg_energy(inst, sl, head_loc) + head_energy <= cap + kFeasEps) {
            LevelMap fc = close_profile(inst, lab.profile, sl, head_loc);
            if (!fc.empty()) {
              ChargeArc arc;
              arc.tail_loc = tail_loc;
              arc.head_loc = head_loc;
              arc.stations = lab.stations;
              arc.cost = lab.cost + leg_cost(inst, sl, head_loc) + inst.cost_of(head_loc);
              arc.linear_form = false;
              arc.fc = std::move(fc);
              arc.min_entry = arc.fc.domain_min();
              arc.max_exit = arc.fc.eval(cap);
              arc.gain = arc.fc.eval(arc.min_entry) - arc.min_entry;
              candidates.push_back(std::move(arc));
            }
          }
          if (len == cfg.max_stations) continue;
          for (int s2 = 0; s2 < n_st; ++s2) {
            if (s2 == s) continue;
            const int s2l = inst.station_loc(s2);
            GenLabel ext;
            ext.profile = extend_profile(inst, lab.profile, sl, s2l);
            if (ext.profile.empty()) continue;
            ext.cost = lab.cost + leg_cost(inst, sl, s2l);
            ext.sum_time = lab.sum_time + leg_time(inst, sl, s2l);
            ext.stations = lab.stations;
            ext.stations.push_back(s2l);
            if (!close_time_ok(ext.sum_time, s2l)) continue;
            if (insert_nondominated(nd[s2], std::move(ext), dom)) {
              next.emplace_back(s2, nd[s2].back());
            }
          }
        }
        frontier = std::move(next);
        if (frontier.empty()) break;
      }
    }
  }

  // Final filter: keep the non-charging arc; keep mutually non-dominated
  // charging arcs, breaking full ties towards the smallest station list.
  std::sort(candidates.begin() + (have_noncharging ? 1 : 0), candidates.end(),
            [](const ChargeArc& a, const ChargeArc& b) {
              if (a.cost != b.cost) return a.cost < b.cost;
              return lex_less(a.stations, b.stations);
            });
  std::vector<ChargeArc> out;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const ChargeArc& c = candidates[i];
    if (!c.charging()) {
      out.push_back(c);
      continue;
    }
    bool dropped = false;
    for (std::size_t j = 0; j < candidates.size() && !dropped; ++j) {
      if (j == i) continue;
      const ChargeArc& other = candidates[j];
      if (!dominates(inst, other, c)) continue;
      if (dominates(inst, c, other) && other.charging()) {
        // Mutual (tie) dominance: keep the lexicographically smallest list.
        dropped = lex_less(other.stations, c.stations);
      } else {
        dropped = true;
      }
    }
    if (!dropped) out.push_back(c);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Depot graphs.
// ---------------------------------------------------------------------------

namespace {

void add_arc(DepotGraph& g, ChargeArc arc, int tail_vertex, int head_vertex) {
  arc.tail_vertex = tail_vertex;
  arc.head_vertex = head_vertex;
  const int id = static_cast<int>(g.arcs.size());
  g.out[tail_vertex].push_back(id);
  g.in[head_vertex].push_back(id);
  g.arcs.push_back(std::move(arc));
}

void finalize_topo(DepotGraph& g) {
  const int n = g.n_vertices();
  std::vector<int> indeg(n, 0);
  for (const auto& arc : g.arcs) indeg[arc.head_vertex]++;
  std::vector<int> stack;
  for (int v = n - 1; v >= 0; --v) {
    if (indeg[v] == 0) stack.push_back(v);
  }
  g.topo.clear();
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    g.topo.push_back(v);
    for (int a : g.out[v]) {
      if (--indeg[g.arcs[a].head_vertex] == 0) stack.push_back(g.arcs[a].head_vertex);
    }
  }
  if (static_cast<int>(g.topo.size()) != n) {
    throw std::invalid_argument("depot graph has a time cycle");
  }
}

DepotGraph build_graph_with(const Instance& inst, int depot, const EnumerationConfig& cfg,
                            const std::vector<std::vector<ChargeArc>>* shared_svc_arcs) {
  DepotGraph g;
  g.depot = depot;
  g.n_services = inst.n_services();
  g.out.assign(g.n_vertices(), {});
  g.in.assign(g.n_vertices(), {});
  const int depot_loc = inst.depot_loc(depot);
  const int nT = inst.n_services();

  for (int v = 0; v < nT; ++v) {
    for (ChargeArc& arc : enumerate_nondominated(inst, depot_loc, inst.service_loc(v), cfg)) {
      add_arc(g, std::move(arc), g.o(), v);
    }
  }
  for (int u = 0; u < nT; ++u) {
    for (int v = 0; v < nT; ++v) {
      if (u == v) continue;
      if (shared_svc_arcs != nullptr) {
        for (const ChargeArc& arc : (*shared_svc_arcs)[u * nT + v]) {
          add_arc(g, arc, u, v);
        }
      } else {
        for (ChargeArc& arc :
             enumerate_nondominated(inst, inst.service_loc(u), inst.service_loc(v), cfg)) {
          add_arc(g, std::move(arc), u, v);
        }
      }
    }
  }
  for (int u = 0; u < nT; ++u) {
    for (ChargeArc& arc : enumerate_nondominated(inst, inst.service_loc(u), depot_loc, cfg)) {
      add_arc(g, std::move(arc), u, g.d());
    }
  }
  finalize_topo(g);
  return g;
}

}  // namespace

DepotGraph build_depot_graph(const Instance& inst, int depot, const EnumerationConfig& cfg) {
  return build_graph_with(inst, depot, cfg, nullptr);
}

std::vector<DepotGraph> build_all_depot_graphs(const Instance& inst,
                                               const EnumerationConfig& cfg) {
  const int nT = inst.n_services();
  std::vector<std::vector<ChargeArc>> svc_arcs(static_cast<std::size_t>(nT) * nT);
  for (int u = 0; u < nT; ++u) {
    for (int v = 0; v < nT; ++v) {
      if (u == v) continue;
      svc_arcs[u * nT + v] =
          enumerate_nondominated(inst, inst.service_loc(u), inst.service_loc(v), cfg);
    }
  }
  std::vector<DepotGraph> graphs;
  graphs.reserve(inst.n_depots);
  for (int d = 0; d < inst.n_depots; ++d) {
    graphs.push_back(build_graph_with(inst, d, cfg, &svc_arcs));
  }
  return graphs;
}

void dump_depot_graph(const DepotGraph& g, std::ostream& os) {
  for (const auto& arc : g.arcs) {
    os << arc.tail_vertex << ' ' << arc.head_vertex << ' ';
    if (arc.stations.empty()) {
      os << '-';
    } else {
      for (std::size_t i = 0; i < arc.stations.size(); ++i) {
        if (i > 0) os << ',';
        os << arc.stations[i];
      }
    }
    os << ' ' << arc.cost << ' ' << arc.min_entry << ' ' << arc.max_exit << ' ' << arc.gain
       << '\n';
  }
}

}  // namespace evsp
