#include "qosctl/scenario_file.hpp"

#include "qosctl/error.hpp"
#include "qosctl/text_format.hpp"
#include "qosctl/trace_file.hpp"

#include <cmath>
#include <filesystem>
#include <functional>
#include <set>
#include <sstream>

namespace qosctl::io {
namespace {

using text::Entry;
using text::Section;

const std::set<std::string> kChannelKeys = {"capacity", "ticks", "seed"};
const std::set<std::string> kControllerKeys = {"enabled", "threshold", "beta",   "cooldown", "window",
                                               "horizon", "method",    "dead_band", "bank"};
const std::set<std::string> kClassKeys = {"priority", "initial_width", "critical_min", "buffer", "source", "seed"};
const std::map<std::string, std::set<std::string>> kSourceKeys = {
    {"constant", {"rate"}},
    {"on-off", {"on_rate", "off_rate", "on_len", "off_len"}},
    {"poisson", {"mean"}},
    {"trace", {"samples", "trace_file", "loop"}},
};

// Typed access to one section; every failure points at the entry's line.
class Reader {
 public:
  Reader(const Section& s, const std::string& source) : s_(s), source_(source) {}

  [[noreturn]] void fail(const Entry& e, const std::string& what) const {
    if (e.line > 0) throw ParseError(source_, e.line, "'" + e.key + "': " + what);
    throw ParseError(source_, 0, "override '" + e.key + "': " + what);
  }

  [[noreturn]] void missing(const std::string& key) const {
    throw ParseError(source_, s_.line, "section [" + title() + "] is missing required key '" + key + "'");
  }

  std::string title() const { return s_.label.empty() ? s_.name : s_.name + " " + s_.label; }

  const Entry* find(const std::string& key) const { return s_.find(key); }
  const Entry& require(const std::string& key) const {
    const auto* e = s_.find(key);
    if (e == nullptr) missing(key);
    return *e;
  }

  void only(const std::set<std::string>& allowed) const {
    for (const auto& e : s_.entries) {
      if (!allowed.contains(e.key)) fail(e, "unknown key in [" + title() + "]");
    }
  }

  double real(const Entry& e, const std::function<bool(double)>& ok, const char* rule) const {
    const auto v = text::parse_double(e.value);
    if (!v || !std::isfinite(*v)) fail(e, "expected a finite number, got '" + e.value + "'");
    if (!ok(*v)) fail(e, rule);
    return *v;
  }

  double real_or(const std::string& key, double fallback, const std::function<bool(double)>& ok,
                 const char* rule) const {
    const auto* e = find(key);
    return e ? real(*e, ok, rule) : fallback;
  }

  std::int64_t integer(const Entry& e, std::int64_t min) const {
    const auto v = text::parse_int(e.value);
    if (!v) fail(e, "expected an integer, got '" + e.value + "'");
    if (*v < min) fail(e, "must be >= " + std::to_string(min));
    return *v;
  }

  std::int64_t integer_or(const std::string& key, std::int64_t fallback, std::int64_t min) const {
    const auto* e = find(key);
    return e ? integer(*e, min) : fallback;
  }

  std::uint64_t seed(const Entry& e) const {
    const auto v = text::parse_uint(e.value);
    if (!v) fail(e, "expected a non-negative integer seed, got '" + e.value + "'");
    return *v;
  }

  bool boolean_or(const std::string& key, bool fallback) const {
    const auto* e = find(key);
    if (e == nullptr) return fallback;
    const auto v = text::parse_bool(e->value);
    if (!v) fail(*e, "expected true or false, got '" + e->value + "'");
    return *v;
  }

 private:
  const Section& s_;
  const std::string& source_;
};

bool positive(double v) { return v > 0.0; }
bool non_negative(double v) { return v >= 0.0; }

void apply_override(text::Document& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ParseError("--set", 0, "expected KEY=VALUE, got '" + assignment + "'");
  const std::string path(text::trim(std::string_view(assignment).substr(0, eq)));
  const std::string value(text::trim(std::string_view(assignment).substr(eq + 1)));
  const auto parts = text::split(path, ".");

  std::string name, label, key;
  if (parts.size() == 2) {
    name = parts[0];
    key = parts[1];
  } else if (parts.size() == 3) {
    name = parts[0];
    label = parts[1];
    key = parts[2];
  } else {
    throw ParseError("--set", 0, "key must be section.key or class.<id>.key, got '" + path + "'");
  }
  if (name == "class" && label.empty()) throw ParseError("--set", 0, "class overrides need class.<id>.key");

  auto* section = doc.find(name, label);
  if (section == nullptr) {
    if (name == "class") throw ParseError("--set", 0, "no class '" + label + "' in the scenario");
    doc.sections.push_back(Section{name, label, 0, {}});
    section = &doc.sections.back();
  }
  for (auto& e : section->entries) {
    if (e.key == key) {
      e.value = value;
      e.line = 0;
      return;
    }
  }
  section->entries.push_back({key, value, 0});
}

plant::TrafficSource read_source(const Reader& r, const std::string& base_dir, const std::string& class_id) {
  const auto& kind_entry = r.require("source");
  const auto kind = kind_entry.value;
  const auto it = kSourceKeys.find(kind);
  if (it == kSourceKeys.end()) r.fail(kind_entry, "unknown source kind '" + kind + "'");

  auto allowed = kClassKeys;
  allowed.insert(it->second.begin(), it->second.end());
  r.only(allowed);

  plant::TrafficSource src;
  if (const auto* e = r.find("seed")) src.seed = r.seed(*e);

  if (kind == "constant") {
    src.params = plant::Constant{r.real(r.require("rate"), non_negative, "must be >= 0")};
  } else if (kind == "on-off") {
    plant::OnOff p;
    p.on_rate = r.real(r.require("on_rate"), non_negative, "must be >= 0");
    p.off_rate = r.real_or("off_rate", 0.0, non_negative, "must be >= 0");
    p.on_len = r.integer(r.require("on_len"), 1);
    p.off_len = r.integer(r.require("off_len"), 0);
    src.params = p;
  } else if (kind == "poisson") {
    src.params = plant::Poisson{r.real(r.require("mean"), non_negative, "must be >= 0")};
  } else {
    plant::Trace p;
    p.loop = r.boolean_or("loop", false);
    const auto* inline_samples = r.find("samples");
    const auto* file = r.find("trace_file");
    if ((inline_samples == nullptr) == (file == nullptr)) {
      r.fail(inline_samples ? *inline_samples : kind_entry, "trace sources need exactly one of 'samples' or 'trace_file'");
    }
    if (inline_samples != nullptr) {
      for (auto piece : text::split(inline_samples->value, " \t,")) {
        const auto v = text::parse_double(piece);
        if (!v || !std::isfinite(*v) || *v < 0.0) r.fail(*inline_samples, "samples must be finite numbers >= 0");
        p.samples.push_back(*v);
      }
      if (p.samples.empty()) r.fail(*inline_samples, "no samples given");
    } else {
      std::filesystem::path path(file->value);
      if (path.is_relative()) path = std::filesystem::path(base_dir) / path;
      TraceSet traces;
      try {
        traces = load_trace(path.string());
      } catch (const ParseError& e) {
        r.fail(*file, e.what());
      }
      const auto found = traces.find(class_id);
      if (found == traces.end()) r.fail(*file, "trace has no rows for class '" + class_id + "'");
      p.samples = found->second;
    }
    src.params = std::move(p);
  }
  return src;
}

}  // namespace

forecast::Candidate parse_candidate(std::string_view text_in) {
  const auto words = text::split(text_in, " \t");
  auto num = [&](std::size_t i) {
    const auto v = text::parse_double(words[i]);
    if (!v || !std::isfinite(*v)) throw InputError("bad number '" + std::string(words[i]) + "' in model '" + std::string(text_in) + "'");
    return *v;
  };
  if (words.size() == 1 && words[0] == "trend") return forecast::SlidingTrend{};
  if (words.size() == 3 && words[0] == "ar") return forecast::FirstOrder{num(1), num(2)};
  if (words.size() == 3 && words[0] == "line") return forecast::FixedLine{num(1), num(2)};
  throw InputError("unknown bank model '" + std::string(text_in) + "'; expected 'trend', 'ar G O' or 'line S I'");
}

plant::ScenarioSpec parse_scenario(std::string_view text_in, const std::string& source,
                                   std::span<const std::string> overrides, const std::string& base_dir) {
  auto doc = text::Document::parse(text_in, source);
  for (const auto& o : overrides) apply_override(doc, o);

  plant::ScenarioSpec spec;
  const Section* channel = nullptr;
  const Section* controller = nullptr;
  std::vector<const Section*> classes;
  for (const auto& s : doc.sections) {
    if (s.name.empty()) {
      if (!s.entries.empty()) throw ParseError(source, s.entries.front().line, "key outside of any [section]");
    } else if (s.name == "channel" && s.label.empty()) {
      channel = &s;
    } else if (s.name == "controller" && s.label.empty()) {
      controller = &s;
    } else if (s.name == "class" && !s.label.empty()) {
      classes.push_back(&s);
    } else {
      throw ParseError(source, s.line, "unknown section [" + (s.label.empty() ? s.name : s.name + " " + s.label) + "]");
    }
  }
  if (channel == nullptr) throw ParseError(source, 0, "missing [channel] section");
  if (classes.empty()) throw ParseError(source, 0, "no [class <id>] sections");

  {
    Reader r(*channel, source);
    r.only(kChannelKeys);
    spec.capacity = r.real(r.require("capacity"), positive, "capacity must be > 0");
    spec.ticks = r.integer(r.require("ticks"), 1);
    if (const auto* e = r.find("seed")) spec.seed = r.seed(*e);
  }

  std::set<std::int64_t> priorities;
  double width_sum = 0.0;
  for (const auto* s : classes) {
    Reader r(*s, source);
    plant::ScenarioClass c;
    c.spec.id = s->label;
    const auto& prio = r.require("priority");
    c.spec.priority = static_cast<int>(r.integer(prio, 1));
    if (!priorities.insert(c.spec.priority).second) r.fail(prio, "priority is already used by another class");
    const auto& init = r.require("initial_width");
    c.spec.initial_width = r.real(init, non_negative, "must be >= 0");
    c.spec.critical_min_width = r.real_or("critical_min", 0.0, non_negative, "must be >= 0");
    if (c.spec.initial_width < c.spec.critical_min_width) r.fail(init, "initial_width is below critical_min");
    c.buffer_size = r.real_or("buffer", 2.0 * c.spec.initial_width, non_negative, "must be >= 0");
    c.source = read_source(r, base_dir, c.spec.id);
    width_sum += c.spec.initial_width;
    if (width_sum > spec.capacity) r.fail(init, "initial widths exceed the channel capacity");
    spec.classes.push_back(std::move(c));
  }

  if (controller != nullptr) {
    Reader r(*controller, source);
    r.only(kControllerKeys);
    auto& cfg = spec.controller;
    spec.control_enabled = r.boolean_or("enabled", true);
    cfg.threshold = r.real_or("threshold", cfg.threshold, [](double v) { return v > 0.0 && v < 1.0; },
                              "must lie strictly between 0 and 1");
    cfg.beta = r.real_or("beta", cfg.beta, positive, "must be > 0");
    cfg.cooldown = static_cast<int>(r.integer_or("cooldown", cfg.cooldown, 1));
    cfg.forecast.window = static_cast<std::size_t>(r.integer_or("window", static_cast<std::int64_t>(cfg.forecast.window), 2));
    cfg.forecast.horizon = r.integer_or("horizon", cfg.forecast.horizon, 1);
    cfg.forecast.dead_band = r.real_or("dead_band", cfg.forecast.dead_band,
                                       [](double v) { return v >= 0.0 && v < 1.0; }, "must lie in [0, 1)");
    if (const auto* e = r.find("method")) {
      if (e->value == "linear-trend") {
        cfg.forecast.method = forecast::Method::LinearTrend;
      } else if (e->value == "model-bank") {
        cfg.forecast.method = forecast::Method::ModelBank;
      } else {
        r.fail(*e, "expected linear-trend or model-bank");
      }
    }
    if (const auto* e = r.find("bank")) {
      for (auto piece : text::split(e->value, ";")) {
        try {
          cfg.bank.push_back(parse_candidate(piece));
        } catch (const InputError& err) {
          r.fail(*e, err.what());
        }
      }
    }
  }

  try {
    spec.validate();
  } catch (const ParseError&) {
    throw;
  } catch (const InputError& e) {
    throw ParseError(source, 0, e.what());
  }
  return spec;
}

plant::ScenarioSpec load_scenario(const std::string& path, std::span<const std::string> overrides) {
  const auto dir = std::filesystem::path(path).parent_path();
  return parse_scenario(text::read_file(path), path, overrides, dir.empty() ? "." : dir.string());
}

std::string emit_scenario(const plant::ScenarioSpec& spec) {
  using text::format_double;
  std::ostringstream os;
  os << "[channel]\n";
  os << "capacity = " << format_double(spec.capacity) << '\n';
  os << "ticks = " << spec.ticks << '\n';
  os << "seed = " << spec.seed << '\n';

  for (const auto& c : spec.classes) {
    os << "\n[class " << c.spec.id << "]\n";
    os << "priority = " << c.spec.priority << '\n';
    os << "initial_width = " << format_double(c.spec.initial_width) << '\n';
    os << "critical_min = " << format_double(c.spec.critical_min_width) << '\n';
    os << "buffer = " << format_double(c.buffer_size) << '\n';
    os << "source = " << plant::kind_name(c.source.params) << '\n';
    std::visit(
        [&](const auto& s) {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, plant::Constant>) {
            os << "rate = " << format_double(s.rate) << '\n';
          } else if constexpr (std::is_same_v<T, plant::OnOff>) {
            os << "on_rate = " << format_double(s.on_rate) << '\n';
            os << "off_rate = " << format_double(s.off_rate) << '\n';
            os << "on_len = " << s.on_len << '\n';
            os << "off_len = " << s.off_len << '\n';
          } else if constexpr (std::is_same_v<T, plant::Poisson>) {
            os << "mean = " << format_double(s.mean) << '\n';
          } else {
            os << "loop = " << (s.loop ? "true" : "false") << '\n';
            os << "samples =";
            for (double v : s.samples) os << ' ' << format_double(v);
            os << '\n';
          }
        },
        c.source.params);
    if (c.source.seed) os << "seed = " << *c.source.seed << '\n';
  }

  const auto& cfg = spec.controller;
  os << "\n[controller]\n";
  os << "enabled = " << (spec.control_enabled ? "true" : "false") << '\n';
  os << "threshold = " << format_double(cfg.threshold) << '\n';
  os << "beta = " << format_double(cfg.beta) << '\n';
  os << "cooldown = " << cfg.cooldown << '\n';
  os << "window = " << cfg.forecast.window << '\n';
  os << "horizon = " << cfg.forecast.horizon << '\n';
  os << "method = " << forecast::to_string(cfg.forecast.method) << '\n';
  os << "dead_band = " << format_double(cfg.forecast.dead_band) << '\n';
  if (!cfg.bank.empty()) {
    os << "bank =";
    for (std::size_t i = 0; i < cfg.bank.size(); ++i) os << (i == 0 ? " " : "; ") << forecast::describe(cfg.bank[i]);
    os << '\n';
  }
  return os.str();
}

}  // namespace qosctl::io
