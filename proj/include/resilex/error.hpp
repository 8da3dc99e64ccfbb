#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace resilex {

enum class Errc {
  InvalidArgument,
  SchemaError,
  InfeasibleTiming,
  NotHurwitz,
  EpsilonTooSmall,
  UnsupportedPlant,
  DegenerateAngle,
  TooManyControllers,
  DenominatorNonpositive,
  NonFiniteState,
  AllRunsDiverged,
  ScheduleInfeasible,
  Io,
};

std::string_view to_string(Errc code);

/// Exit code contract of the command-line tool: 2 schema, 3 timing, 4 numeric.
int exit_code(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace resilex
