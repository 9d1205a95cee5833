#pragma once

// Fluid, discrete-time model of one shared channel. Each traffic class
// offers load every tick, is served up to its channel width, queues the
// rest in a finite buffer, and drops what does not fit. run_scenario()
// closes the loop with the controller: monitor, forecast, reallocate, and
// apply the new widths on the following tick.

#include "qosctl/controller.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <variant>
#include <vector>

namespace qosctl::plant {

using control::ClassId;
using control::Tick;

struct Constant {
  double rate = 0.0;
  bool operator==(const Constant&) const = default;
};

/// Square wave: on_len ticks at on_rate, then off_len ticks at off_rate,
/// starting in the on phase at t = 0.
struct OnOff {
  double on_rate = 0.0;
  double off_rate = 0.0;
  Tick on_len = 1;
  Tick off_len = 1;
  bool operator==(const OnOff&) const = default;
};

/// Independent Poisson-distributed load per tick.
struct Poisson {
  double mean = 0.0;
  bool operator==(const Poisson&) const = default;
};

/// Recorded load, one sample per tick from t = 0.
struct Trace {
  std::vector<double> samples;
  bool loop = false;
  bool operator==(const Trace&) const = default;
};

using SourceParams = std::variant<Constant, OnOff, Poisson, Trace>;

struct TrafficSource {
  SourceParams params;
  /// Explicit seed; when absent the scenario derives one from its master
  /// seed and the class id.
  std::optional<std::uint64_t> seed;

  void validate() const;
  bool operator==(const TrafficSource&) const = default;
};

const char* kind_name(const SourceParams& p);

/// Offered load at tick t. A pure function of (params, seed, t).
/// Throws SimulationError when a non-looping trace is exhausted.
double generate(const TrafficSource& source, std::uint64_t seed, Tick t);

struct ClassQueue {
  double buffer_size = 0.0;
  double backlog = 0.0;
};

struct ClassMeasurement {
  double offered = 0.0;
  double backlog_before = 0.0;
  double carried = 0.0;
  double backlog_after = 0.0;
  double dropped = 0.0;
  double width = 0.0;

  /// offered + backlog_before - carried - backlog_after - dropped
  double conservation_residual() const;
  bool operator==(const ClassMeasurement&) const = default;
};

struct Measurement {
  Tick tick = 0;
  std::map<ClassId, ClassMeasurement> classes;
  /// sum(carried) / capacity
  double utilization = 0.0;

  bool operator==(const Measurement&) const = default;
};

/// Serves one tick. Per class: demand = offered + backlog, carried =
/// min(demand, width), the rest is queued up to buffer_size and the excess
/// dropped. Updates `queues` in place.
Measurement channel_tick(const control::LoadMap& offered, const control::WidthMap& widths,
                         std::map<ClassId, ClassQueue>& queues, double capacity);

struct ScenarioClass {
  control::TrafficClassSpec spec;
  double buffer_size = 0.0;
  TrafficSource source;

  bool operator==(const ScenarioClass&) const = default;
};

struct ScenarioSpec {
  double capacity = 0.0;
  Tick ticks = 1;
  std::uint64_t seed = 0;
  std::vector<ScenarioClass> classes;
  control::ControllerConfig controller;
  bool control_enabled = true;

  void validate() const;
  std::vector<control::TrafficClassSpec> class_specs() const;
  /// Seed actually used for class `index`.
  std::uint64_t source_seed(std::size_t index) const;

  bool operator==(const ScenarioSpec&) const = default;
};

struct RunResult {
  std::vector<Measurement> series;
  /// One entry per tick when control is enabled, empty otherwise.
  std::vector<control::ControlDecision> control_log;
};

RunResult run_scenario(const ScenarioSpec& spec);

}  // namespace qosctl::plant
