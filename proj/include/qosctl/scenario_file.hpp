#pragma once

// Scenario files describe one channel experiment. Sections:
//
//   [channel]            capacity, ticks, seed
//   [class <id>]         priority, initial_width, critical_min, buffer,
//                        source = constant | on-off | poisson | trace,
//                        plus the source's own keys (see docs/formats.md)
//   [controller]         enabled, threshold, beta, cooldown, window,
//                        horizon, method, dead_band, bank
//
// Unknown sections or keys are rejected. Every error names the file line.
// Overrides use dotted keys, e.g. "controller.enabled=false" or
// "class.voice.priority=2", and are applied before validation.

#include "qosctl/forecast.hpp"
#include "qosctl/plant.hpp"

#include <span>
#include <string>
#include <string_view>

namespace qosctl::io {

/// `base_dir` resolves relative trace_file paths.
plant::ScenarioSpec parse_scenario(std::string_view text, const std::string& source,
                                   std::span<const std::string> overrides = {},
                                   const std::string& base_dir = ".");
plant::ScenarioSpec load_scenario(const std::string& path, std::span<const std::string> overrides = {});

/// Canonical text form; trace sources are written inline as `samples`.
std::string emit_scenario(const plant::ScenarioSpec& spec);

/// "trend", "ar <gain> <offset>" or "line <slope> <intercept>".
forecast::Candidate parse_candidate(std::string_view text);

}  // namespace qosctl::io
