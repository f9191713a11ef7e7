#include "evsp/model.hpp"

#include <algorithm>
#include <cmath>

namespace evsp {

namespace {

void check_level_domain(double level, double capacity) {
  if (!(level >= -kFeasEps && level <= capacity + kFeasEps)) {
    throw std::invalid_argument("battery level outside [0, capacity]");
  }
}

}  // namespace

ChargeModel ChargeModel::linear(double rate, double capacity) {
  if (!(rate > 0.0)) throw std::invalid_argument("charge rate must be positive");
  if (!(capacity > 0.0)) throw std::invalid_argument("capacity must be positive");
  ChargeModel m;
  m.linear_ = true;
  m.rate_ = rate;
  m.capacity_ = capacity;
  m.curve_ = {{0.0, 0.0}, {capacity / rate, capacity}};
  return m;
}

ChargeModel ChargeModel::piecewise(std::vector<CurvePoint> curve, double capacity) {
  if (!(capacity > 0.0)) throw std::invalid_argument("capacity must be positive");
  if (curve.size() < 2) throw std::invalid_argument("charge curve needs >= 2 points");
  if (std::fabs(curve.front().minutes) > 0 || std::fabs(curve.front().level) > 0) {
    throw std::invalid_argument("charge curve must start at (0, 0)");
  }
  double prev_slope = kInf;
  for (std::size_t i = 1; i < curve.size(); ++i) {
    const double dt = curve[i].minutes - curve[i - 1].minutes;
    const double dl = curve[i].level - curve[i - 1].level;
    if (!(dt > 0.0)) throw std::invalid_argument("charge curve times must increase");
    if (dl < 0.0) throw std::invalid_argument("charge curve levels must be non-decreasing");
    const double slope = dl / dt;
    if (slope > prev_slope + 1e-12) {
      throw std::invalid_argument("charge curve must be concave");
    }
    prev_slope = slope;
  }
  if (curve.back().level > capacity + kFeasEps) {
    throw std::invalid_argument("charge curve exceeds capacity");
  }
  ChargeModel m;
  m.linear_ = false;
  m.capacity_ = capacity;
  m.curve_ = std::move(curve);
  m.curve_.back().level = std::min(m.curve_.back().level, capacity);
  return m;
}

double ChargeModel::level_from_empty(double minutes) const {
  if (minutes <= 0.0) return 0.0;
  if (linear_) return std::min(capacity_, rate_ * minutes);
  if (minutes >= curve_.back().minutes) return curve_.back().level;
  auto it = std::upper_bound(curve_.begin(), curve_.end(), minutes,
                             [](double t, const CurvePoint& p) { return t < p.minutes; });
  const CurvePoint& hi = *it;
  const CurvePoint& lo = *(it - 1);
  const double w = (minutes - lo.minutes) / (hi.minutes - lo.minutes);
  return lo.level + w * (hi.level - lo.level);
}

double ChargeModel::time_from_empty(double level) const {
  if (level <= 0.0) return 0.0;
  if (linear_) return level <= capacity_ ? level / rate_ : kInf;
  if (level > saturation_level() + 1e-12) return kInf;
  // First point reaching `level`; flat segments map to their left endpoint.
  auto it = std::lower_bound(curve_.begin(), curve_.end(), level,
                             [](const CurvePoint& p, double l) { return p.level < l; });
  if (it == curve_.end()) return curve_.back().minutes;
  if (it == curve_.begin()) return 0.0;
  const CurvePoint& hi = *it;
  const CurvePoint& lo = *(it - 1);
  if (hi.level == lo.level) return lo.minutes;
  const double w = (level - lo.level) / (hi.level - lo.level);
  return lo.minutes + w * (hi.minutes - lo.minutes);
}

double ChargeModel::level_after(double level, double minutes) const {
  if (minutes < 0.0) throw std::invalid_argument("charging duration must be >= 0");
  check_level_domain(level, capacity_);
  level = std::clamp(level, 0.0, capacity_);
  if (minutes == 0.0) return level;
  if (linear_) return std::min(capacity_, level + rate_ * minutes);
  if (level >= saturation_level()) return level;  // no charging above saturation
  const double t0 = time_from_empty(level);
  return std::max(level, level_from_empty(t0 + minutes));
}

double ChargeModel::charge_time(double from_level, double to_level) const {
  check_level_domain(from_level, capacity_);
  check_level_domain(to_level, capacity_);
  from_level = std::clamp(from_level, 0.0, capacity_);
  to_level = std::clamp(to_level, 0.0, capacity_);
  if (from_level > to_level) return -charge_time(to_level, from_level);
  if (from_level == to_level) return 0.0;
  if (linear_) return (to_level - from_level) / rate_;
  if (to_level > saturation_level() + 1e-12) return kInf;
  return time_from_empty(to_level) - time_from_empty(from_level);
}

double ChargeModel::min_entry_level(double target, double minutes) const {
  if (minutes < 0.0) throw std::invalid_argument("charging duration must be >= 0");
  if (target <= 0.0) return 0.0;
  if (target > capacity_ + kFeasEps) return kInf;
  target = std::min(target, capacity_);
  if (level_after(0.0, minutes) >= target) return 0.0;
  if (target <= saturation_level() + 1e-12) {
    const double t = time_from_empty(std::min(target, saturation_level())) - minutes;
    return std::max(0.0, level_from_empty(t));
  }
  // Above saturation the battery cannot gain charge, so the entry level must
  // already meet the target.
  return target;
}

void Instance::validate() const {
  if (!charge.has_value()) throw std::invalid_argument("missing charge model");
  if (!(vehicle.capacity > 0.0)) throw std::invalid_argument("vehicle capacity must be > 0");
  if (vehicle.fixed_cost < 0.0) throw std::invalid_argument("vehicle fixed cost must be >= 0");
  if (n_depots < 1) throw std::invalid_argument("instance needs at least one depot");
  if (!(horizon_end > 0.0)) throw std::invalid_argument("horizon end must be > 0");
  if (std::fabs(charge->capacity() - vehicle.capacity) > kFeasEps) {
    throw std::invalid_argument("charge model capacity differs from vehicle capacity");
  }
  const std::size_t n = static_cast<std::size_t>(n_locations());
  for (const Matrix* m : {&travel_time, &travel_cost, &travel_energy}) {
    if (m->size() != n) throw std::invalid_argument("matrix dimension mismatch");
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const double v = (*m)(i, j);
        if (!std::isfinite(v) || v < 0.0) {
          throw std::invalid_argument("matrix entries must be finite and >= 0");
        }
      }
      if ((*m)(i, i) != 0.0) throw std::invalid_argument("matrix diagonal must be 0");
    }
  }
  for (int i = 0; i < n_services(); ++i) {
    const Service& s = services[i];
    if (s.id != i) throw std::invalid_argument("service ids must be 0..n-1 in order");
    if (!(0.0 <= s.t_begin && s.t_begin <= s.t_end && s.t_end <= horizon_end)) {
      throw std::invalid_argument("service window outside [0, horizon_end]");
    }
    if (s.energy < 0.0 || s.energy > vehicle.capacity + kFeasEps) {
      throw std::invalid_argument("service energy outside [0, capacity]");
    }
    if (s.cost < 0.0) throw std::invalid_argument("service cost must be >= 0");
  }
}

}  // namespace evsp
