#include "qosctl/forecast.hpp"

#include "qosctl/compensated_sum.hpp"
#include "qosctl/error.hpp"
#include "qosctl/text_format.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

namespace qosctl::forecast {
namespace {

using Samples = std::span<const LoadSample>;

Samples tail(Samples s, std::size_t window) {
  const auto k = std::min(window, s.size());
  return s.subspan(s.size() - k, k);
}

struct CenteredFit {
  double tick_mean = 0.0;
  double load_mean = 0.0;
  double slope = 0.0;

  double at(Tick t) const { return load_mean + slope * (static_cast<double>(t) - tick_mean); }
};

// Fit around the sample means; evaluating at a tick near the window then
// avoids cancellation between slope * t and the intercept.
CenteredFit fit_centered(Samples s) {
  if (s.size() < 2) throw InputError("trend fit needs at least 2 samples");
  const auto k = static_cast<double>(s.size());

  // Ticks are integers: center on the first one so the sums stay exact.
  const Tick origin = s.front().tick;
  Tick tick_sum = 0;
  CompensatedSum load_sum;
  for (const auto& p : s) {
    tick_sum += p.tick - origin;
    load_sum.add(p.load);
  }
  CenteredFit fit;
  const double rel_mean = static_cast<double>(tick_sum) / k;
  fit.tick_mean = static_cast<double>(origin) + rel_mean;
  fit.load_mean = load_sum.value() / k;

  CompensatedSum sxx;
  CompensatedSum sxy;
  for (const auto& p : s) {
    const double dt = static_cast<double>(p.tick - origin) - rel_mean;
    sxx.add(dt * dt);
    sxy.add(dt * (p.load - fit.load_mean));
  }
  fit.slope = sxy.value() / sxx.value();
  return fit;
}

double iterate_first_order(const FirstOrder& m, double load, Tick steps) {
  for (Tick i = 0; i < steps; ++i) load = m.gain * load + m.offset;
  return load;
}

double value_at(const Candidate& candidate, Samples prefix, Tick target, std::size_t window) {
  return std::visit(
      [&](const auto& c) -> double {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, FixedLine>) {
          return c.slope * static_cast<double>(target) + c.intercept;
        } else if constexpr (std::is_same_v<T, FirstOrder>) {
          return iterate_first_order(c, prefix.back().load, target - prefix.back().tick);
        } else {
          // Persistence until there is enough data for a line.
          if (prefix.size() < 2) return prefix.back().load;
          return fit_centered(tail(prefix, window)).at(target);
        }
      },
      candidate);
}

double clamp_load(double v) { return std::max(0.0, v); }

}  // namespace

LoadHistory::LoadHistory(std::string class_id, std::vector<LoadSample> samples)
    : class_id_(std::move(class_id)) {
  samples_.reserve(samples.size());
  for (const auto& s : samples) append(s.tick, s.load);
}

void LoadHistory::append(Tick tick, double load) {
  if (!std::isfinite(load) || load < 0.0) {
    throw InputError("load for class '" + class_id_ + "' must be finite and non-negative");
  }
  if (!samples_.empty() && tick <= samples_.back().tick) {
    throw InputError("ticks for class '" + class_id_ + "' must strictly increase");
  }
  samples_.push_back({tick, load});
}

const char* to_string(Method m) {
  switch (m) {
    case Method::LinearTrend: return "linear-trend";
    case Method::ModelBank: return "model-bank";
  }
  return "?";
}

const char* to_string(Trend t) {
  switch (t) {
    case Trend::Increase: return "increase";
    case Trend::Decrease: return "decrease";
    case Trend::Flat: return "flat";
  }
  return "?";
}

void ForecastConfig::validate() const {
  if (window < 2) throw InputError("forecast window must be at least 2");
  if (horizon < 1) throw InputError("forecast horizon must be at least 1");
  if (!(dead_band >= 0.0 && dead_band < 1.0)) throw InputError("dead band must lie in [0, 1)");
}

TrendLine fit_trend(const LoadHistory& history, std::size_t window) {
  if (window < 2) throw InputError("trend window must be at least 2");
  const auto fit = fit_centered(tail(history.samples(), window));
  return {fit.slope, fit.load_mean - fit.slope * fit.tick_mean};
}

Trend classify_trend(double predicted, double last_load, double dead_band) {
  if (predicted > last_load * (1.0 + dead_band)) return Trend::Increase;
  if (predicted < last_load * (1.0 - dead_band)) return Trend::Decrease;
  return Trend::Flat;
}

Forecast predict(const LoadHistory& history, const ForecastConfig& cfg) {
  cfg.validate();
  const auto fit = fit_centered(tail(history.samples(), cfg.window));
  const auto& last = history.back();
  Forecast f;
  f.class_id = history.class_id();
  f.target_tick = last.tick + cfg.horizon;
  f.predicted_load = clamp_load(fit.at(f.target_tick));
  f.trend = classify_trend(f.predicted_load, last.load, cfg.dead_band);
  return f;
}

std::string describe(const Candidate& c) {
  return std::visit(
      [](const auto& m) -> std::string {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, FixedLine>) {
          return "line " + text::format_double(m.slope) + ' ' + text::format_double(m.intercept);
        } else if constexpr (std::is_same_v<T, FirstOrder>) {
          return "ar " + text::format_double(m.gain) + ' ' + text::format_double(m.offset);
        } else {
          return "trend";
        }
      },
      c);
}

ModelBank::ModelBank(std::vector<Candidate> candidates) : candidates_(std::move(candidates)) {
  if (candidates_.empty()) throw InputError("model bank must hold at least one candidate");
}

std::size_t ModelBank::select(const LoadHistory& history, std::size_t window) {
  active_ = bank_select(candidates_, history, window);
  return active_;
}

Forecast ModelBank::predict(const LoadHistory& history, const ForecastConfig& cfg) const {
  cfg.validate();
  if (history.empty()) throw InputError("cannot forecast from an empty history");
  const auto& last = history.back();
  Forecast f;
  f.class_id = history.class_id();
  f.target_tick = last.tick + cfg.horizon;
  f.predicted_load = clamp_load(value_at(active(), history.samples(), f.target_tick, cfg.window));
  f.trend = classify_trend(f.predicted_load, last.load, cfg.dead_band);
  return f;
}

double candidate_value(const Candidate& candidate, const LoadHistory& history, Tick target,
                       std::size_t window) {
  if (history.empty()) throw InputError("cannot evaluate a candidate on an empty history");
  return value_at(candidate, history.samples(), target, window);
}

double one_step_error(const Candidate& candidate, const LoadHistory& history, std::size_t window) {
  if (history.size() < 2) throw InputError("one-step error needs at least 2 samples");
  if (window < 2) throw InputError("selection window must be at least 2");
  const Samples all = history.samples();
  const std::size_t first = all.size() - std::min(window, all.size());
  CompensatedSum total;
  std::size_t count = 0;
  for (std::size_t i = first + 1; i < all.size(); ++i) {
    const Samples prefix = all.first(i);
    const double predicted = clamp_load(value_at(candidate, prefix, all[i].tick, window));
    total.add(std::abs(predicted - all[i].load));
    ++count;
  }
  return total.value() / static_cast<double>(count);
}

std::size_t bank_select(const std::vector<Candidate>& bank, const LoadHistory& history,
                        std::size_t window) {
  if (bank.empty()) throw InputError("model bank is empty");
  if (history.size() < 2) throw InputError("model selection needs at least 2 samples");
  if (bank.size() == 1) return 0;
  std::size_t best = 0;
  double best_err = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < bank.size(); ++i) {
    const double err = one_step_error(bank[i], history, window);
    if (err < best_err) {
      best_err = err;
      best = i;
    }
  }
  return best;
}

}  // namespace qosctl::forecast
