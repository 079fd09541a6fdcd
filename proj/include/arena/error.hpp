#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace arena {

enum class Errc {
  NonDivisible,
  InvalidArgument,
  ParseError,
  ClockRegression,
  UnknownSeries,
  ProviderUnavailable,
  MalformedRecord,
  RateLimited,
  NoEligibleSeries,
  InsufficientEligible,
  StillInRegistration,
  UnknownChallenge,
  MissingDisclosure,
  NotInRegistration,
  UnknownAlias,
  UnknownModel,
  Unauthorized,
  DeadlinePassed,
  WrongLength,
  NonFiniteValue,
  InsufficientContext,
  NoActuals,
  NotClosed,
  EmptyContext,
  InsufficientSeasonalHistory,
  OffGrid,
  ScenarioInvalid,
  AssertionFailed,
};

std::string_view to_string(Errc code);

/// Every failure surfaced by the platform carries one of the Errc codes so
/// that the HTTP layer and the CLI can map it without string matching.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code), detail_(detail) {}

  Errc code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  Errc code_;
  std::string detail_;
};

}  // namespace arena
