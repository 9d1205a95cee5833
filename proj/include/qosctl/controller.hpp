#pragma once

// Feedback bandwidth reallocation across prioritized traffic classes.
//
// Every tick the controller compares each class's measured load with its
// channel width. Once any class reaches the activation threshold it
// forecasts every class and moves width: shrinking classes release down to
// their forecast, growing classes are funded from free capacity first and
// then by draining more junior classes (most junior first) down to their
// critical minimum width. Priority 1 is the most senior class.

#include "qosctl/forecast.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace qosctl::control {

using ClassId = std::string;
using Tick = forecast::Tick;
using WidthMap = std::map<ClassId, double>;
using LoadMap = std::map<ClassId, double>;

struct TrafficClassSpec {
  ClassId id;
  int priority = 1;
  double critical_min_width = 0.0;
  double initial_width = 0.0;

  bool operator==(const TrafficClassSpec&) const = default;
};

/// Throws InputError on duplicate ids or priorities, negative or
/// non-finite widths, or initial_width < critical_min_width.
void validate_specs(const std::vector<TrafficClassSpec>& specs);

/// Specs sorted most senior first (priority, then id).
std::vector<const TrafficClassSpec*> seniority_order(const std::vector<TrafficClassSpec>& specs);

struct AllocationState {
  double capacity = 0.0;
  WidthMap widths;

  /// Sum of widths in map order. This is the sum the capacity invariant is
  /// checked against.
  double total_width() const;

  /// Throws InputError if the widths break the capacity or minimum-width
  /// invariants, or if the class set differs from `specs`.
  void validate(const std::vector<TrafficClassSpec>& specs) const;
};

struct ControllerConfig {
  double threshold = 0.7;
  double beta = 1.1;
  int cooldown = 1;
  forecast::ForecastConfig forecast;
  /// Candidates for Method::ModelBank; empty selects the default bank.
  std::vector<forecast::Candidate> bank;

  void validate() const;
  bool operator==(const ControllerConfig&) const = default;
};

/// Trend line refitted each tick plus plain persistence.
std::vector<forecast::Candidate> default_bank();

enum class EventKind { Released, Grew, Donated, HitMinimum, InsufficientCapacity };

const char* to_string(EventKind k);

struct ControlEvent {
  ClassId class_id;
  EventKind kind = EventKind::Released;
  /// Width moved, or the unmet shortfall for InsufficientCapacity.
  double amount = 0.0;

  bool operator==(const ControlEvent&) const = default;
};

struct ControlDecision {
  Tick tick = 0;
  bool activated = false;
  WidthMap new_widths;
  std::vector<ControlEvent> events;
  /// capacity - total_width() before the decision.
  double prior_slack = 0.0;

  double total(EventKind kind) const;
};

/// True iff some class has load >= threshold * width, or positive load on a
/// zero width. Throws InputError for a load whose class has no width.
bool needs_control(const LoadMap& loads, const AllocationState& alloc, double threshold);

/// One reallocation pass. `beta` scales predicted load into a target width.
/// The result always satisfies sum(widths) <= capacity and every width >=
/// its critical minimum.
ControlDecision reallocate(const AllocationState& alloc,
                           const std::map<ClassId, forecast::Forecast>& forecasts,
                           const std::vector<TrafficClassSpec>& specs, double beta);

using HistoryMap = std::map<ClassId, forecast::LoadHistory>;

/// Stateful wrapper that adds activation, cooldown and forecasting around
/// reallocate(). Driven by one simulation loop.
class Controller {
 public:
  Controller(std::vector<TrafficClassSpec> specs, ControllerConfig cfg);

  ControlDecision control_tick(Tick t, const LoadMap& loads, const AllocationState& alloc,
                               const HistoryMap& histories);

  /// Forecasts for every class as the controller would compute them now.
  std::map<ClassId, forecast::Forecast> forecasts(const HistoryMap& histories);

  const ControllerConfig& config() const { return cfg_; }
  const std::vector<TrafficClassSpec>& specs() const { return specs_; }

 private:
  std::vector<TrafficClassSpec> specs_;
  ControllerConfig cfg_;
  std::optional<Tick> last_activation_;
  std::map<ClassId, forecast::ModelBank> banks_;
};

}  // namespace qosctl::control
