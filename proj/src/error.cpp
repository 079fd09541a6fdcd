#include "arena/error.hpp"

namespace arena {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::NonDivisible: return "NonDivisible";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::ParseError: return "ParseError";
    case Errc::ClockRegression: return "ClockRegression";
    case Errc::UnknownSeries: return "UnknownSeries";
    case Errc::ProviderUnavailable: return "ProviderUnavailable";
    case Errc::MalformedRecord: return "MalformedRecord";
    case Errc::RateLimited: return "RateLimited";
    case Errc::NoEligibleSeries: return "NoEligibleSeries";
    case Errc::InsufficientEligible: return "InsufficientEligible";
    case Errc::StillInRegistration: return "StillInRegistration";
    case Errc::UnknownChallenge: return "UnknownChallenge";
    case Errc::MissingDisclosure: return "MissingDisclosure";
    case Errc::NotInRegistration: return "NotInRegistration";
    case Errc::UnknownAlias: return "UnknownAlias";
    case Errc::UnknownModel: return "UnknownModel";
    case Errc::Unauthorized: return "Unauthorized";
    case Errc::DeadlinePassed: return "DeadlinePassed";
    case Errc::WrongLength: return "WrongLength";
    case Errc::NonFiniteValue: return "NonFiniteValue";
    case Errc::InsufficientContext: return "InsufficientContext";
    case Errc::NoActuals: return "NoActuals";
    case Errc::NotClosed: return "NotClosed";
    case Errc::EmptyContext: return "EmptyContext";
    case Errc::InsufficientSeasonalHistory: return "InsufficientSeasonalHistory";
    case Errc::OffGrid: return "OffGrid";
    case Errc::ScenarioInvalid: return "ScenarioInvalid";
    case Errc::AssertionFailed: return "AssertionFailed";
  }
  return "Unknown";
}

}  // namespace arena
