#include "agecohort/error.hpp"

namespace agecohort {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedGridId: return "MalformedGridId";
    case ErrorCode::NonAlignedCorner: return "NonAlignedCorner";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::LatitudeOutOfMercatorRange: return "LatitudeOutOfMercatorRange";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ImplausibleYear: return "ImplausibleYear";
    case ErrorCode::NetworkError: return "NetworkError";
    case ErrorCode::RateLimited: return "RateLimited";
    case ErrorCode::MalformedResponse: return "MalformedResponse";
    case ErrorCode::SelectorMiss: return "SelectorMiss";
    case ErrorCode::AnnotatorUnavailable: return "AnnotatorUnavailable";
    case ErrorCode::ContractViolation: return "ContractViolation";
    case ErrorCode::DegeneratePolygon: return "DegeneratePolygon";
    case ErrorCode::UnparseableAddress: return "UnparseableAddress";
    case ErrorCode::AllAgentsFailed: return "AllAgentsFailed";
    case ErrorCode::DegenerateSpread: return "DegenerateSpread";
    case ErrorCode::TooFewDistinctPoints: return "TooFewDistinctPoints";
    case ErrorCode::BackendUnavailable: return "BackendUnavailable";
    case ErrorCode::InvalidProbabilityVector: return "InvalidProbabilityVector";
    case ErrorCode::GeocodeMiss: return "GeocodeMiss";
    case ErrorCode::AmbiguousOutsideCity: return "AmbiguousOutsideCity";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::InvalidCounts: return "InvalidCounts";
    case ErrorCode::ProtocolError: return "ProtocolError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

}  // namespace agecohort
