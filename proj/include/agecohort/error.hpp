#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace agecohort {

enum class ErrorCode {
  MalformedGridId,
  NonAlignedCorner,
  OutOfDomain,
  LatitudeOutOfMercatorRange,
  InvalidArgument,
  ImplausibleYear,
  NetworkError,
  RateLimited,
  MalformedResponse,
  SelectorMiss,
  AnnotatorUnavailable,
  ContractViolation,
  DegeneratePolygon,
  UnparseableAddress,
  AllAgentsFailed,
  DegenerateSpread,
  TooFewDistinctPoints,
  BackendUnavailable,
  InvalidProbabilityVector,
  GeocodeMiss,
  AmbiguousOutsideCity,
  EmptyInput,
  InvalidCounts,
  ProtocolError,
  IoError,
  ParseError,
};

std::string_view to_string(ErrorCode code);

// Single exception type for the library; callers switch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Carries the server-provided back-off hint.
class RateLimitedError : public Error {
 public:
  RateLimitedError(const std::string& message, int retry_after_secs)
      : Error(ErrorCode::RateLimited, message), retry_after_secs_(retry_after_secs) {}

  int retry_after_secs() const noexcept { return retry_after_secs_; }

 private:
  int retry_after_secs_;
};

}  // namespace agecohort
