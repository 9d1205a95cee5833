#pragma once

// Per-class load forecasting over a sliding window: an ordinary
// least-squares trend line, and a bank of prefitted predictors switched by
// recent one-step-ahead error.

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace qosctl::forecast {

using Tick = std::int64_t;

struct LoadSample {
  Tick tick = 0;
  double load = 0.0;

  bool operator==(const LoadSample&) const = default;
};

/// Monitored load of one traffic class. Ticks strictly increase and loads
/// are finite and non-negative; append() enforces both.
class LoadHistory {
 public:
  explicit LoadHistory(std::string class_id) : class_id_(std::move(class_id)) {}
  LoadHistory(std::string class_id, std::vector<LoadSample> samples);

  void append(Tick tick, double load);

  const std::string& class_id() const { return class_id_; }
  const std::vector<LoadSample>& samples() const { return samples_; }
  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  const LoadSample& back() const { return samples_.back(); }

 private:
  std::string class_id_;
  std::vector<LoadSample> samples_;
};

enum class Method { LinearTrend, ModelBank };
enum class Trend { Increase, Decrease, Flat };

const char* to_string(Method m);
const char* to_string(Trend t);

struct ForecastConfig {
  std::size_t window = 20;
  Tick horizon = 5;
  Method method = Method::LinearTrend;
  double dead_band = 0.02;

  /// Throws InputError unless window >= 2, horizon >= 1, 0 <= dead_band < 1.
  void validate() const;
  bool operator==(const ForecastConfig&) const = default;
};

struct Forecast {
  std::string class_id;
  Tick target_tick = 0;
  double predicted_load = 0.0;
  Trend trend = Trend::Flat;
};

struct TrendLine {
  double slope = 0.0;
  double intercept = 0.0;
};

/// OLS line through the last min(window, size) samples. Needs >= 2 samples.
TrendLine fit_trend(const LoadHistory& history, std::size_t window);

/// Classifies a prediction against the last observed load with a
/// multiplicative dead band.
Trend classify_trend(double predicted, double last_load, double dead_band);

/// Trend-line forecast at tick t_last + horizon, clamped at zero.
Forecast predict(const LoadHistory& history, const ForecastConfig& cfg);

// ---------------------------------------------------------------------------
// Reference-model bank

/// Fixed line load(t) = slope * t + intercept, fitted offline.
struct FixedLine {
  double slope = 0.0;
  double intercept = 0.0;
  bool operator==(const FixedLine&) const = default;
};

/// First-order model load(t+1) = gain * load(t) + offset, i.e. a scalar
/// x(t+1) = a x(t) + b u(t) driven by a unit input.
struct FirstOrder {
  double gain = 1.0;
  double offset = 0.0;
  bool operator==(const FirstOrder&) const = default;
};

/// The sliding-window trend line refitted on every call.
struct SlidingTrend {
  bool operator==(const SlidingTrend&) const = default;
};

using Candidate = std::variant<FixedLine, FirstOrder, SlidingTrend>;

std::string describe(const Candidate& c);

class ModelBank {
 public:
  /// Throws InputError on an empty candidate list.
  explicit ModelBank(std::vector<Candidate> candidates);

  const std::vector<Candidate>& candidates() const { return candidates_; }
  std::size_t active_index() const { return active_; }
  const Candidate& active() const { return candidates_[active_]; }

  /// Re-selects the active model from the history (see bank_select).
  std::size_t select(const LoadHistory& history, std::size_t window);

  /// Forecast from the active candidate.
  Forecast predict(const LoadHistory& history, const ForecastConfig& cfg) const;

  bool operator==(const ModelBank& other) const { return candidates_ == other.candidates_; }

 private:
  std::vector<Candidate> candidates_;
  std::size_t active_ = 0;
};

/// Mean absolute one-step-ahead error of one candidate over the last
/// `window` samples. Needs >= 2 samples.
double one_step_error(const Candidate& candidate, const LoadHistory& history, std::size_t window);

/// Index of the candidate with the smallest one_step_error; ties go to the
/// lowest index.
std::size_t bank_select(const std::vector<Candidate>& bank, const LoadHistory& history,
                        std::size_t window);

/// Raw (unclamped) prediction of one candidate at `target` given history.
double candidate_value(const Candidate& candidate, const LoadHistory& history, Tick target,
                       std::size_t window);

}  // namespace qosctl::forecast
