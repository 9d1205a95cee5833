#pragma once

// Recorded per-class load traces: comma-separated `tick,class_id,offered_load`
// rows, an optional header line with exactly those names, and `#` comments.
// Ticks must run 0, 1, 2, ... without gaps for every class; rows of
// different classes may interleave.

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace qosctl::io {

using TraceSet = std::map<std::string, std::vector<double>>;

/// Throws ParseError naming the offending line.
TraceSet parse_trace(std::string_view text, const std::string& source);
TraceSet load_trace(const std::string& path);
std::string emit_trace(const TraceSet& traces);

}  // namespace qosctl::io
