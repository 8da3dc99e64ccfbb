#include "resilex/error.hpp"

namespace resilex {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::SchemaError: return "SchemaError";
    case Errc::InfeasibleTiming: return "InfeasibleTiming";
    case Errc::NotHurwitz: return "NotHurwitz";
    case Errc::EpsilonTooSmall: return "EpsilonTooSmall";
    case Errc::UnsupportedPlant: return "UnsupportedPlant";
    case Errc::DegenerateAngle: return "DegenerateAngle";
    case Errc::TooManyControllers: return "TooManyControllers";
    case Errc::DenominatorNonpositive: return "DenominatorNonpositive";
    case Errc::NonFiniteState: return "NonFiniteState";
    case Errc::AllRunsDiverged: return "AllRunsDiverged";
    case Errc::ScheduleInfeasible: return "ScheduleInfeasible";
    case Errc::Io: return "Io";
  }
  return "Unknown";
}

int exit_code(Errc code) {
  switch (code) {
    case Errc::SchemaError:
    case Errc::InvalidArgument:
      return 2;
    case Errc::InfeasibleTiming:
    case Errc::TooManyControllers:
    case Errc::ScheduleInfeasible:
      return 3;
    case Errc::NotHurwitz:
    case Errc::EpsilonTooSmall:
    case Errc::UnsupportedPlant:
    case Errc::DegenerateAngle:
    case Errc::DenominatorNonpositive:
    case Errc::NonFiniteState:
    case Errc::AllRunsDiverged:
      return 4;
    case Errc::Io:
      return 1;
  }
  return 1;
}

}  // namespace resilex
