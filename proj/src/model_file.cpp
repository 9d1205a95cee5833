#include "qosctl/model_file.hpp"

#include "qosctl/error.hpp"
#include "qosctl/text_format.hpp"

#include <cmath>
#include <set>
#include <sstream>

namespace qosctl::io {
namespace {

using statespace::Matrix;
using statespace::Vector;

const std::set<std::string> kModelKeys = {"n", "m", "p", "A", "B", "C", "state_lo",
                                          "state_hi", "input_lo", "input_hi"};

std::vector<double> parse_numbers(const text::Entry& e, const std::string& source) {
  std::vector<double> out;
  for (auto piece : text::split(e.value, " \t,")) {
    const auto v = text::parse_double(piece);
    if (!v) throw ParseError(source, e.line, "'" + e.key + "': not a number: '" + std::string(piece) + "'");
    out.push_back(*v);
  }
  return out;
}

Eigen::Index parse_dim(const text::Section& s, const char* key, const std::string& source,
                       std::optional<Eigen::Index> fallback, Eigen::Index min) {
  const auto* e = s.find(key);
  if (e == nullptr) {
    if (fallback) return *fallback;
    throw ParseError(source, 0, std::string("missing required key '") + key + "'");
  }
  const auto v = text::parse_int(e->value);
  if (!v || *v < min) {
    throw ParseError(source, e->line, std::string("'") + key + "' must be an integer >= " + std::to_string(min));
  }
  return static_cast<Eigen::Index>(*v);
}

Matrix parse_matrix(const text::Entry& e, Eigen::Index rows, Eigen::Index cols, const std::string& source) {
  const auto values = parse_numbers(e, source);
  if (static_cast<Eigen::Index>(values.size()) != rows * cols) {
    throw ParseError(source, e.line,
                     "'" + e.key + "' needs " + std::to_string(rows * cols) + " entries (" +
                         std::to_string(rows) + "x" + std::to_string(cols) + "), got " +
                         std::to_string(values.size()));
  }
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = values[static_cast<std::size_t>(i * cols + j)];
  }
  return m;
}

statespace::Box parse_box(const text::Section& s, const char* lo_key, const char* hi_key,
                          Eigen::Index dim, const std::string& source) {
  const auto* lo = s.find(lo_key);
  const auto* hi = s.find(hi_key);
  if (lo == nullptr && hi == nullptr) return {};
  if (lo == nullptr || hi == nullptr) {
    const auto* present = lo != nullptr ? lo : hi;
    throw ParseError(source, present->line,
                     std::string("'") + lo_key + "' and '" + hi_key + "' must be given together");
  }
  const auto lows = parse_numbers(*lo, source);
  const auto highs = parse_numbers(*hi, source);
  for (const auto* e : {lo, hi}) {
    const auto count = (e == lo ? lows : highs).size();
    if (static_cast<Eigen::Index>(count) != dim) {
      throw ParseError(source, e->line,
                       "'" + e->key + "' needs " + std::to_string(dim) + " entries, got " + std::to_string(count));
    }
  }
  statespace::Box box;
  for (Eigen::Index i = 0; i < dim; ++i) {
    const statespace::Interval iv{lows[static_cast<std::size_t>(i)], highs[static_cast<std::size_t>(i)]};
    if (iv.lo > iv.hi) {
      throw ParseError(source, lo->line, "bound " + std::to_string(i) + " has lo > hi");
    }
    box.push_back(iv);
  }
  return box;
}

void emit_row_major(std::ostringstream& os, const char* key, const Matrix& m) {
  os << key << " =";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) os << ' ' << text::format_double(m(i, j));
  }
  os << '\n';
}

bool unbounded(const statespace::Box& box) {
  for (const auto& iv : box) {
    if (iv != statespace::Interval{}) return false;
  }
  return true;
}

void emit_box(std::ostringstream& os, const char* lo_key, const char* hi_key, const statespace::Box& box) {
  if (unbounded(box)) return;
  os << lo_key << " =";
  for (const auto& iv : box) os << ' ' << text::format_double(iv.lo);
  os << '\n' << hi_key << " =";
  for (const auto& iv : box) os << ' ' << text::format_double(iv.hi);
  os << '\n';
}

}  // namespace

statespace::StateSpaceModel parse_model(std::string_view text_in, const std::string& source) {
  const auto doc = text::Document::parse(text_in, source);
  if (doc.sections.size() > 1) {
    throw ParseError(source, doc.sections[1].line, "model files do not use [sections]");
  }
  const auto& s = doc.sections.front();
  for (const auto& e : s.entries) {
    if (!kModelKeys.contains(e.key)) throw ParseError(source, e.line, "unknown key '" + e.key + "'");
  }

  const auto n = parse_dim(s, "n", source, std::nullopt, 1);
  const auto m = parse_dim(s, "m", source, std::nullopt, 0);
  const auto p = parse_dim(s, "p", source, n, 1);

  const auto* a = s.find("A");
  const auto* b = s.find("B");
  if (a == nullptr) throw ParseError(source, 0, "missing required key 'A'");
  if (b == nullptr && m > 0) throw ParseError(source, 0, "missing required key 'B'");

  Matrix am = parse_matrix(*a, n, n, source);
  Matrix bm = b != nullptr ? parse_matrix(*b, n, m, source) : Matrix(n, 0);
  std::optional<Matrix> cm;
  if (const auto* c = s.find("C")) {
    cm = parse_matrix(*c, p, n, source);
  } else if (p != n) {
    throw ParseError(source, s.find("p")->line, "'C' is required when p differs from n");
  }
  auto xs = parse_box(s, "state_lo", "state_hi", n, source);
  auto us = parse_box(s, "input_lo", "input_hi", m, source);

  try {
    return statespace::StateSpaceModel(std::move(am), std::move(bm), std::move(cm), std::move(xs), std::move(us));
  } catch (const ParseError&) {
    throw;
  } catch (const InputError& e) {
    throw ParseError(source, 0, e.what());
  }
}

statespace::StateSpaceModel load_model(const std::string& path) {
  return parse_model(text::read_file(path), path);
}

std::string emit_model(const statespace::StateSpaceModel& model) {
  std::ostringstream os;
  os << "n = " << model.states() << '\n';
  os << "m = " << model.inputs() << '\n';
  os << "p = " << model.outputs() << '\n';
  emit_row_major(os, "A", model.a());
  if (model.inputs() > 0) emit_row_major(os, "B", model.b());
  emit_row_major(os, "C", model.c());
  emit_box(os, "state_lo", "state_hi", model.state_bounds());
  emit_box(os, "input_lo", "input_hi", model.input_bounds());
  return os.str();
}

statespace::Trajectory parse_trajectory(std::string_view text_in, const std::string& source) {
  statespace::Trajectory traj;
  int line_no = 0;
  std::size_t pos = 0;
  bool have_header = false;
  bool has_tick = false;
  Eigen::Index n = 0;
  Eigen::Index m = 0;
  bool inputs_closed = false;  // a row without inputs must be the last one

  while (pos < text_in.size()) {
    const auto eol = text_in.find('\n', pos);
    auto line = text_in.substr(pos, eol == std::string_view::npos ? text_in.npos : eol - pos);
    pos = eol == std::string_view::npos ? text_in.size() : eol + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = text::trim(line);
    if (line.empty()) continue;

    // Keep empty fields: split by hand.
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      fields.push_back(text::trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }

    if (!have_header) {
      std::size_t i = 0;
      if (!fields.empty() && fields[0] == "tick") {
        has_tick = true;
        i = 1;
      }
      for (; i < fields.size(); ++i) {
        const auto& f = fields[i];
        const auto expected_x = "x" + std::to_string(n + 1);
        const auto expected_u = "u" + std::to_string(m + 1);
        if (m == 0 && f == expected_x) {
          ++n;
        } else if (n > 0 && f == expected_u) {
          ++m;
        } else {
          throw ParseError(source, line_no,
                           "header must be [tick,]x1..xn,u1..um; unexpected column '" + std::string(f) + "'");
        }
      }
      if (n == 0) throw ParseError(source, line_no, "header names no state columns");
      have_header = true;
      continue;
    }

    if (inputs_closed) throw ParseError(source, line_no, "only the last row may omit its inputs");
    const std::size_t offset = has_tick ? 1 : 0;
    const std::size_t width = offset + static_cast<std::size_t>(n + m);
    if (fields.size() != width) {
      throw ParseError(source, line_no, "expected " + std::to_string(width) + " fields, got " + std::to_string(fields.size()));
    }
    if (has_tick && !text::parse_int(fields[0])) throw ParseError(source, line_no, "tick is not an integer");

    Vector x(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto v = text::parse_double(fields[offset + static_cast<std::size_t>(i)]);
      if (!v || !std::isfinite(*v)) throw ParseError(source, line_no, "state value " + std::to_string(i + 1) + " is not a finite number");
      x[i] = *v;
    }
    bool all_empty = true;
    for (Eigen::Index j = 0; j < m; ++j) all_empty = all_empty && fields[offset + static_cast<std::size_t>(n + j)].empty();
    Vector u(m);
    if (m > 0 && all_empty) {
      inputs_closed = true;
    } else {
      for (Eigen::Index j = 0; j < m; ++j) {
        const auto v = text::parse_double(fields[offset + static_cast<std::size_t>(n + j)]);
        if (!v || !std::isfinite(*v)) throw ParseError(source, line_no, "input value " + std::to_string(j + 1) + " is not a finite number");
        u[j] = *v;
      }
    }
    traj.states.push_back(std::move(x));
    if (!inputs_closed) traj.inputs.push_back(std::move(u));
  }
  if (!have_header) throw ParseError(source, 0, "trajectory file is empty");
  if (traj.states.empty()) throw ParseError(source, 0, "trajectory has no rows");
  // Inputs on the final row are not part of any transition.
  if (traj.inputs.size() == traj.states.size()) traj.inputs.pop_back();
  return traj;
}

statespace::Trajectory load_trajectory(const std::string& path) {
  return parse_trajectory(text::read_file(path), path);
}

std::string emit_trajectory(const statespace::Trajectory& trajectory) {
  trajectory.validate();
  const auto n = trajectory.states.front().size();
  const auto m = trajectory.inputs.empty() ? Eigen::Index{0} : trajectory.inputs.front().size();
  std::ostringstream os;
  os << "tick";
  for (Eigen::Index i = 0; i < n; ++i) os << ",x" << i + 1;
  for (Eigen::Index j = 0; j < m; ++j) os << ",u" << j + 1;
  os << '\n';
  for (std::size_t t = 0; t < trajectory.states.size(); ++t) {
    os << t;
    for (Eigen::Index i = 0; i < n; ++i) os << ',' << text::format_double(trajectory.states[t][i]);
    for (Eigen::Index j = 0; j < m; ++j) {
      os << ',';
      if (t < trajectory.inputs.size()) os << text::format_double(trajectory.inputs[t][j]);
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace qosctl::io
