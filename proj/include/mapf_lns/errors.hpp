#pragma once

#include <stdexcept>
#include <string>

namespace mapf_lns {

// Malformed or inconsistent input text (.map, .scen, CSV, JSON). Carries the
// 1-based line number when one is known.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

// A scenario that parses but cannot form a valid instance (blocked cells,
// unreachable goals, duplicate starts or goals, too few entries).
class LoadError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

class MalformedPath : public std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Path count does not match agent count.
class ShapeError : public std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A planner produced something that violates its own contract.
class InconsistencyError : public std::logic_error {
  using std::logic_error::logic_error;
};

class IoError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace mapf_lns
