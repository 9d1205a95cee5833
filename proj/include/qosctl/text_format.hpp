#pragma once

// Small text helpers shared by the file formats: shortest round-trip
// number formatting, strict number parsing, and a line-tracking reader for
// the sectioned `key = value` documents used by scenario and model files.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace qosctl::text {

/// Shortest decimal string that parses back to the same double.
std::string format_double(double v);

std::string_view trim(std::string_view s);

/// Splits on any of `delims`, dropping empty pieces.
std::vector<std::string_view> split(std::string_view s, std::string_view delims);

/// Whole-string parses; nullopt on trailing junk or overflow. Doubles
/// accept "inf", "-inf" but never NaN.
std::optional<double> parse_double(std::string_view s);
std::optional<std::int64_t> parse_int(std::string_view s);
std::optional<std::uint64_t> parse_uint(std::string_view s);
std::optional<bool> parse_bool(std::string_view s);

struct Entry {
  std::string key;
  std::string value;
  int line = 0;  // 0 for values injected by overrides
};

struct Section {
  std::string name;   // "" for the implicit top-level section
  std::string label;  // text after the name, e.g. "voice" in [class voice]
  int line = 0;
  std::vector<Entry> entries;

  const Entry* find(std::string_view key) const;
};

/// Parsed `[name label]` / `key = value` document. `#` starts a comment.
struct Document {
  std::string source;
  std::vector<Section> sections;

  static Document parse(std::string_view text, std::string source);
  static Document load(const std::string& path);

  Section* find(std::string_view name, std::string_view label = {});
};

std::string read_file(const std::string& path);

}  // namespace qosctl::text
