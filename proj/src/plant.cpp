#include "qosctl/plant.hpp"

#include "qosctl/compensated_sum.hpp"
#include "qosctl/error.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <string>

namespace qosctl::plant {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

bool finite_nonneg(double v) { return std::isfinite(v) && v >= 0.0; }

}  // namespace

const char* kind_name(const SourceParams& p) {
  return std::visit(
      [](const auto& s) -> const char* {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Constant>) return "constant";
        if constexpr (std::is_same_v<T, OnOff>) return "on-off";
        if constexpr (std::is_same_v<T, Poisson>) return "poisson";
        return "trace";
      },
      p);
}

void TrafficSource::validate() const {
  std::visit(
      [](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Constant>) {
          if (!finite_nonneg(s.rate)) throw InputError("constant source rate must be finite and >= 0");
        } else if constexpr (std::is_same_v<T, OnOff>) {
          if (!finite_nonneg(s.on_rate) || !finite_nonneg(s.off_rate)) {
            throw InputError("on-off source rates must be finite and >= 0");
          }
          if (s.on_len < 1 || s.off_len < 0) {
            throw InputError("on-off source needs on_len >= 1 and off_len >= 0");
          }
        } else if constexpr (std::is_same_v<T, Poisson>) {
          if (!finite_nonneg(s.mean)) throw InputError("poisson source mean must be finite and >= 0");
        } else {
          if (s.samples.empty()) throw InputError("trace source has no samples");
          for (double v : s.samples) {
            if (!finite_nonneg(v)) throw InputError("trace samples must be finite and >= 0");
          }
        }
      },
      params);
}

double generate(const TrafficSource& source, std::uint64_t seed, Tick t) {
  if (t < 0) throw InputError("tick must be non-negative");
  return std::visit(
      [&](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Constant>) {
          return s.rate;
        } else if constexpr (std::is_same_v<T, OnOff>) {
          return t % (s.on_len + s.off_len) < s.on_len ? s.on_rate : s.off_rate;
        } else if constexpr (std::is_same_v<T, Poisson>) {
          if (s.mean == 0.0) return 0.0;
          // Fresh engine per tick keeps the value a function of (seed, t).
          std::mt19937_64 rng(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(t))));
          std::poisson_distribution<std::int64_t> dist(s.mean);
          return static_cast<double>(dist(rng));
        } else {
          const auto n = static_cast<Tick>(s.samples.size());
          if (t >= n && !s.loop) {
            throw SimulationError("trace exhausted at tick " + std::to_string(t) + " (length " +
                                  std::to_string(n) + ")");
          }
          return s.samples[static_cast<std::size_t>(t % n)];
        }
      },
      source.params);
}

double ClassMeasurement::conservation_residual() const {
  return exact_sum({offered, backlog_before, -carried, -backlog_after, -dropped});
}

Measurement channel_tick(const control::LoadMap& offered, const control::WidthMap& widths,
                         std::map<ClassId, ClassQueue>& queues, double capacity) {
  if (!(std::isfinite(capacity) && capacity > 0.0)) throw InputError("capacity must be positive");
  Measurement m;
  double carried_total = 0.0;
  for (auto& [id, queue] : queues) {
    const auto o = offered.find(id);
    const auto w = widths.find(id);
    if (o == offered.end() || w == widths.end()) {
      throw InputError("class '" + id + "' is missing an offered load or a width");
    }
    if (!finite_nonneg(o->second)) throw InputError("offered load of class '" + id + "' is negative or not finite");
    if (!finite_nonneg(w->second)) throw InputError("width of class '" + id + "' is negative or not finite");

    ClassMeasurement c;
    c.offered = o->second;
    c.width = w->second;
    c.backlog_before = queue.backlog;
    // Remainders come from correctly rounded sums so rounding does not
    // accumulate in the queue.
    const double demand = c.offered + c.backlog_before;
    c.carried = std::min(demand, c.width);
    const double rest = std::max(0.0, exact_sum({c.offered, c.backlog_before, -c.carried}));
    if (rest <= queue.buffer_size) {
      c.backlog_after = rest;
    } else {
      c.backlog_after = queue.buffer_size;
      c.dropped = exact_sum({c.offered, c.backlog_before, -c.carried, -c.backlog_after});
    }
    queue.backlog = c.backlog_after;
    carried_total += c.carried;
    m.classes.emplace(id, c);
  }
  if (offered.size() != queues.size()) throw InputError("offered loads name classes without a queue");
  m.utilization = carried_total / capacity;
  return m;
}

void ScenarioSpec::validate() const {
  if (!(std::isfinite(capacity) && capacity > 0.0)) throw InputError("capacity must be positive and finite");
  if (ticks < 1) throw InputError("tick count must be at least 1");
  const auto specs = class_specs();
  control::validate_specs(specs);
  control::AllocationState initial{capacity, {}};
  for (const auto& c : classes) {
    initial.widths[c.spec.id] = c.spec.initial_width;
    if (!finite_nonneg(c.buffer_size)) {
      throw InputError("class '" + c.spec.id + "': buffer must be finite and >= 0");
    }
    c.source.validate();
  }
  initial.validate(specs);
  controller.validate();
}

std::vector<control::TrafficClassSpec> ScenarioSpec::class_specs() const {
  std::vector<control::TrafficClassSpec> out;
  out.reserve(classes.size());
  for (const auto& c : classes) out.push_back(c.spec);
  return out;
}

std::uint64_t ScenarioSpec::source_seed(std::size_t index) const {
  const auto& c = classes.at(index);
  if (c.source.seed) return *c.source.seed;
  return splitmix64(seed ^ fnv1a(c.spec.id));
}

RunResult run_scenario(const ScenarioSpec& spec) {
  spec.validate();

  control::AllocationState alloc{spec.capacity, {}};
  std::map<ClassId, ClassQueue> queues;
  control::HistoryMap histories;
  std::vector<std::uint64_t> seeds;
  for (std::size_t i = 0; i < spec.classes.size(); ++i) {
    const auto& c = spec.classes[i];
    alloc.widths[c.spec.id] = c.spec.initial_width;
    queues[c.spec.id] = ClassQueue{c.buffer_size, 0.0};
    histories.emplace(c.spec.id, forecast::LoadHistory(c.spec.id));
    seeds.push_back(spec.source_seed(i));
  }

  std::optional<control::Controller> controller;
  if (spec.control_enabled) controller.emplace(spec.class_specs(), spec.controller);

  RunResult result;
  result.series.reserve(static_cast<std::size_t>(spec.ticks));
  if (controller) result.control_log.reserve(static_cast<std::size_t>(spec.ticks));

  control::LoadMap offered;
  for (Tick t = 0; t < spec.ticks; ++t) {
    for (std::size_t i = 0; i < spec.classes.size(); ++i) {
      offered[spec.classes[i].spec.id] = generate(spec.classes[i].source, seeds[i], t);
    }
    auto m = channel_tick(offered, alloc.widths, queues, spec.capacity);
    m.tick = t;
    result.series.push_back(std::move(m));

    for (const auto& [id, load] : offered) histories.at(id).append(t, load);

    if (controller) {
      auto decision = controller->control_tick(t, offered, alloc, histories);
      // Takes effect on the next tick.
      if (decision.activated) alloc.widths = decision.new_widths;
      result.control_log.push_back(std::move(decision));
    }
  }
  return result;
}

}  // namespace qosctl::plant
