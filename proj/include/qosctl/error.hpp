#pragma once

#include <stdexcept>
#include <string>

namespace qosctl {

/// Bad caller input: wrong dimensions, out-of-domain values, unknown ids.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A text file failed to parse or validate. Carries the 1-based line number
/// of the offending line (0 when the problem is not tied to one line).
class ParseError : public InputError {
 public:
  ParseError(std::string source, int line, const std::string& what)
      : InputError(format(source, line, what)), source_(std::move(source)), line_(line) {}

  const std::string& source() const noexcept { return source_; }
  int line() const noexcept { return line_; }

 private:
  static std::string format(const std::string& source, int line, const std::string& what) {
    if (line > 0) return source + ":" + std::to_string(line) + ": " + what;
    return source + ": " + what;
  }

  std::string source_;
  int line_;
};

/// Failure while a simulation is running (e.g. a trace ran out).
class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Least-squares identification could not produce a model.
class IdentificationError : public std::runtime_error {
 public:
  enum class Kind { InsufficientSamples, Unidentifiable };

  IdentificationError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

}  // namespace qosctl
