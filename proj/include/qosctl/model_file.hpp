#pragma once

// Text formats for state-space models and recorded trajectories.
//
// Model file (`key = value`, `#` comments, numbers separated by spaces or
// commas, matrices row-major):
//
//   n = 2
//   m = 1
//   p = 2              # optional, defaults to n
//   A = 0.5 0.1  0 0.8
//   B = 1 0
//   C = 1 0  0 1       # optional, defaults to the n x n identity
//   state_lo = -inf -inf   # optional bounds; each pair is all-or-nothing
//   state_hi = inf inf
//   input_lo = -1
//   input_hi = 1
//
// Trajectory file (comma-separated, header required):
//
//   tick,x1,x2,u1
//   0,1,1,0.3
//   1,0.83,0.8,-0.2
//   2,0.295,0.64,        # the last row's inputs may be left empty

#include "qosctl/statespace.hpp"

#include <string>
#include <string_view>

namespace qosctl::io {

statespace::StateSpaceModel parse_model(std::string_view text, const std::string& source);
statespace::StateSpaceModel load_model(const std::string& path);
std::string emit_model(const statespace::StateSpaceModel& model);

statespace::Trajectory parse_trajectory(std::string_view text, const std::string& source);
statespace::Trajectory load_trajectory(const std::string& path);
std::string emit_trajectory(const statespace::Trajectory& trajectory);

}  // namespace qosctl::io
