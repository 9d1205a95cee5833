#include "qosctl/trace_file.hpp"

#include "qosctl/error.hpp"
#include "qosctl/text_format.hpp"

#include <cmath>
#include <sstream>

namespace qosctl::io {

TraceSet parse_trace(std::string_view text_in, const std::string& source) {
  TraceSet traces;
  int line_no = 0;
  bool first_content = true;
  std::size_t pos = 0;
  while (pos < text_in.size()) {
    const auto eol = text_in.find('\n', pos);
    auto line = text_in.substr(pos, eol == std::string_view::npos ? text_in.npos : eol - pos);
    pos = eol == std::string_view::npos ? text_in.size() : eol + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = text::trim(line);
    if (line.empty()) continue;

    const auto fields = text::split(line, ",");
    if (first_content) {
      first_content = false;
      if (fields.size() == 3 && fields[0] == "tick" && fields[1] == "class_id" && fields[2] == "offered_load") {
        continue;
      }
    }
    if (fields.size() != 3) {
      throw ParseError(source, line_no, "expected 'tick,class_id,offered_load'");
    }
    const auto tick = text::parse_int(fields[0]);
    if (!tick || *tick < 0) throw ParseError(source, line_no, "tick must be a non-negative integer");
    const auto load = text::parse_double(fields[2]);
    if (!load || !std::isfinite(*load) || *load < 0.0) {
      throw ParseError(source, line_no, "offered_load must be a finite number >= 0");
    }
    auto& samples = traces[std::string(fields[1])];
    if (static_cast<std::size_t>(*tick) != samples.size()) {
      throw ParseError(source, line_no,
                       "class '" + std::string(fields[1]) + "': expected tick " +
                           std::to_string(samples.size()) + ", got " + std::to_string(*tick));
    }
    samples.push_back(*load);
  }
  if (traces.empty()) throw ParseError(source, 0, "trace file has no samples");
  return traces;
}

TraceSet load_trace(const std::string& path) { return parse_trace(text::read_file(path), path); }

std::string emit_trace(const TraceSet& traces) {
  std::ostringstream os;
  os << "tick,class_id,offered_load\n";
  for (const auto& [id, samples] : traces) {
    for (std::size_t t = 0; t < samples.size(); ++t) {
      os << t << ',' << id << ',' << text::format_double(samples[t]) << '\n';
    }
  }
  return os.str();
}

}  // namespace qosctl::io
