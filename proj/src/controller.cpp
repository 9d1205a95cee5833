#include "qosctl/controller.hpp"

#include "qosctl/compensated_sum.hpp"
#include "qosctl/error.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace qosctl::control {
namespace {

bool finite_nonneg(double v) { return std::isfinite(v) && v >= 0.0; }

}  // namespace

void validate_specs(const std::vector<TrafficClassSpec>& specs) {
  if (specs.empty()) throw InputError("at least one traffic class is required");
  std::set<ClassId> ids;
  std::set<int> priorities;
  for (const auto& s : specs) {
    if (s.id.empty()) throw InputError("traffic class id must not be empty");
    if (!ids.insert(s.id).second) throw InputError("duplicate traffic class '" + s.id + "'");
    if (s.priority < 1) throw InputError("class '" + s.id + "': priority must be a positive integer");
    if (!priorities.insert(s.priority).second) {
      throw InputError("class '" + s.id + "': priority " + std::to_string(s.priority) +
                       " is already taken");
    }
    if (!finite_nonneg(s.critical_min_width)) {
      throw InputError("class '" + s.id + "': critical_min must be finite and non-negative");
    }
    if (!finite_nonneg(s.initial_width)) {
      throw InputError("class '" + s.id + "': initial_width must be finite and non-negative");
    }
    if (s.initial_width < s.critical_min_width) {
      throw InputError("class '" + s.id + "': initial_width is below critical_min");
    }
  }
}

std::vector<const TrafficClassSpec*> seniority_order(const std::vector<TrafficClassSpec>& specs) {
  std::vector<const TrafficClassSpec*> order;
  order.reserve(specs.size());
  for (const auto& s : specs) order.push_back(&s);
  std::sort(order.begin(), order.end(), [](const auto* a, const auto* b) {
    if (a->priority != b->priority) return a->priority < b->priority;
    return a->id < b->id;
  });
  return order;
}

double AllocationState::total_width() const {
  double sum = 0.0;
  for (const auto& [id, w] : widths) sum += w;
  return sum;
}

void AllocationState::validate(const std::vector<TrafficClassSpec>& specs) const {
  if (!std::isfinite(capacity) || capacity <= 0.0) throw InputError("capacity must be positive and finite");
  if (widths.size() != specs.size()) throw InputError("allocation and class specs cover different classes");
  for (const auto& s : specs) {
    const auto it = widths.find(s.id);
    if (it == widths.end()) throw InputError("allocation has no width for class '" + s.id + "'");
    if (!finite_nonneg(it->second)) throw InputError("width of class '" + s.id + "' must be finite and non-negative");
    if (it->second < s.critical_min_width) {
      throw InputError("width of class '" + s.id + "' is below its critical minimum");
    }
  }
  if (total_width() > capacity) throw InputError("class widths exceed the channel capacity");
}

void ControllerConfig::validate() const {
  if (!(threshold > 0.0 && threshold < 1.0)) throw InputError("controller threshold must lie in (0, 1)");
  if (!(std::isfinite(beta) && beta > 0.0)) throw InputError("controller beta must be positive");
  if (cooldown < 1) throw InputError("controller cooldown must be at least 1");
  forecast.validate();
}

std::vector<forecast::Candidate> default_bank() {
  return {forecast::SlidingTrend{}, forecast::FirstOrder{1.0, 0.0}};
}

const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::Released: return "released";
    case EventKind::Grew: return "grew";
    case EventKind::Donated: return "donated";
    case EventKind::HitMinimum: return "hit-minimum";
    case EventKind::InsufficientCapacity: return "insufficient-capacity";
  }
  return "?";
}

double ControlDecision::total(EventKind kind) const {
  CompensatedSum sum;
  for (const auto& e : events) {
    if (e.kind == kind) sum.add(e.amount);
  }
  return sum.value();
}

bool needs_control(const LoadMap& loads, const AllocationState& alloc, double threshold) {
  bool triggered = false;
  for (const auto& [id, load] : loads) {
    const auto it = alloc.widths.find(id);
    if (it == alloc.widths.end()) throw InputError("load reported for unknown class '" + id + "'");
    const double width = it->second;
    if (width > 0.0 ? load >= threshold * width : load > 0.0) triggered = true;
  }
  return triggered;
}

ControlDecision reallocate(const AllocationState& alloc,
                           const std::map<ClassId, forecast::Forecast>& forecasts,
                           const std::vector<TrafficClassSpec>& specs, double beta) {
  if (!(std::isfinite(beta) && beta > 0.0)) throw InputError("beta must be positive");
  validate_specs(specs);
  alloc.validate(specs);
  for (const auto& s : specs) {
    if (!forecasts.contains(s.id)) throw InputError("no forecast for class '" + s.id + "'");
  }

  const auto order = seniority_order(specs);
  ControlDecision d;
  d.activated = true;
  d.new_widths = alloc.widths;
  d.prior_slack = alloc.capacity - alloc.total_width();
  auto& w = d.new_widths;

  std::map<ClassId, double> target;
  for (const auto* s : order) {
    const double predicted = forecasts.at(s->id).predicted_load;
    target[s->id] = std::max(s->critical_min_width, beta * predicted);
  }

  // Shrinking classes hand back width down to their target.
  CompensatedSum pool;
  pool.add(d.prior_slack);
  for (const auto* s : order) {
    if (forecasts.at(s->id).trend != forecast::Trend::Decrease) continue;
    const double goal = target[s->id];
    if (w[s->id] > goal) {
      const double released = w[s->id] - goal;
      w[s->id] = goal;
      pool.add(released);
      d.events.push_back({s->id, EventKind::Released, released});
    }
  }

  // Rounding residue below this is not a real shortfall.
  const double residue = 1e-12 * alloc.capacity;

  // Growing classes, most senior first. Free width first, then donors
  // strictly junior to the grower, most junior first, down to their floor.
  std::vector<ClassId> grown;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto* s = order[i];
    if (forecasts.at(s->id).trend != forecast::Trend::Increase) continue;
    const double goal = target[s->id];
    if (w[s->id] >= goal - residue) continue;

    double need = goal - w[s->id];
    double granted = 0.0;

    const double free = pool.value() > residue ? pool.value() : 0.0;
    const double from_pool = std::min(need, free);
    if (from_pool > 0.0) {
      pool.add(-from_pool);
      granted += from_pool;
      need -= from_pool;
    }

    for (std::size_t j = order.size(); need > residue && j-- > i + 1;) {
      const auto* donor = order[j];
      const double spare = w[donor->id] - donor->critical_min_width;
      if (spare <= 0.0) continue;
      if (need >= spare) {
        w[donor->id] = donor->critical_min_width;
        d.events.push_back({donor->id, EventKind::Donated, spare});
        d.events.push_back({donor->id, EventKind::HitMinimum, 0.0});
        granted += spare;
        need -= spare;
      } else {
        w[donor->id] -= need;
        d.events.push_back({donor->id, EventKind::Donated, need});
        granted += need;
        need = 0.0;
      }
    }

    if (need <= residue) need = 0.0;
    if (granted > 0.0) {
      w[s->id] = need > 0.0 ? w[s->id] + granted : goal;
      d.events.push_back({s->id, EventKind::Grew, granted});
      grown.push_back(s->id);
    }
    if (need > 0.0) d.events.push_back({s->id, EventKind::InsufficientCapacity, need});
  }

  // Rounding in the pool can leave the plain sum a few ulps above capacity;
  // trim the latest grants back inside.
  for (auto it = grown.rbegin(); it != grown.rend(); ++it) {
    const double floor = std::find_if(specs.begin(), specs.end(), [&](const auto& s) {
                           return s.id == *it;
                         })->critical_min_width;
    AllocationState probe{alloc.capacity, w};
    while (probe.total_width() > alloc.capacity && w[*it] > floor) {
      const double excess = probe.total_width() - alloc.capacity;
      const double before = w[*it];
      w[*it] = std::max(floor, std::nextafter(before - excess, 0.0));
      for (auto& e : d.events) {
        if (e.class_id == *it && e.kind == EventKind::Grew) e.amount -= before - w[*it];
      }
      probe.widths = w;
    }
    if (probe.total_width() <= alloc.capacity) break;
  }
  return d;
}

Controller::Controller(std::vector<TrafficClassSpec> specs, ControllerConfig cfg)
    : specs_(std::move(specs)), cfg_(std::move(cfg)) {
  validate_specs(specs_);
  cfg_.validate();
  if (cfg_.forecast.method == forecast::Method::ModelBank) {
    const auto candidates = cfg_.bank.empty() ? default_bank() : cfg_.bank;
    for (const auto& s : specs_) banks_.emplace(s.id, forecast::ModelBank(candidates));
  }
}

std::map<ClassId, forecast::Forecast> Controller::forecasts(const HistoryMap& histories) {
  std::map<ClassId, forecast::Forecast> out;
  for (const auto& s : specs_) {
    const auto it = histories.find(s.id);
    if (it == histories.end()) throw InputError("no load history for class '" + s.id + "'");
    const auto& history = it->second;
    forecast::Forecast f;
    if (history.size() < 2) {
      // Not enough data for any predictor: hold the last observation.
      f.class_id = s.id;
      f.predicted_load = history.empty() ? 0.0 : history.back().load;
      f.target_tick = (history.empty() ? 0 : history.back().tick) + cfg_.forecast.horizon;
      f.trend = forecast::Trend::Flat;
    } else if (cfg_.forecast.method == forecast::Method::ModelBank) {
      auto& bank = banks_.at(s.id);
      bank.select(history, cfg_.forecast.window);
      f = bank.predict(history, cfg_.forecast);
    } else {
      f = forecast::predict(history, cfg_.forecast);
    }
    out.emplace(s.id, std::move(f));
  }
  return out;
}

ControlDecision Controller::control_tick(Tick t, const LoadMap& loads, const AllocationState& alloc,
                                         const HistoryMap& histories) {
  const bool cooling = last_activation_ && t - *last_activation_ < cfg_.cooldown;
  if (!needs_control(loads, alloc, cfg_.threshold) || cooling) {
    ControlDecision idle;
    idle.tick = t;
    idle.new_widths = alloc.widths;
    idle.prior_slack = alloc.capacity - alloc.total_width();
    return idle;
  }
  auto decision = reallocate(alloc, forecasts(histories), specs_, cfg_.beta);
  decision.tick = t;
  last_activation_ = t;
  return decision;
}

}  // namespace qosctl::control
