#include "ranklq/error.hpp"

namespace ranklq {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::TiesPresent: return "TiesPresent";
    case ErrorCode::UnsupportedKind: return "UnsupportedKind";
    case ErrorCode::TooLargeForReference: return "TooLargeForReference";
    case ErrorCode::BadPermutation: return "BadPermutation";
    case ErrorCode::DegenerateColumn: return "DegenerateColumn";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::MissingOmega: return "MissingOmega";
    case ErrorCode::CalibrationUnavailable: return "CalibrationUnavailable";
    case ErrorCode::CalibrationMismatch: return "CalibrationMismatch";
    case ErrorCode::InfeasibleB: return "InfeasibleB";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::CorruptFile: return "CorruptFile";
    case ErrorCode::DimensionTooSmall: return "DimensionTooSmall";
    case ErrorCode::MissingSpectral: return "MissingSpectral";
    case ErrorCode::BadWeights: return "BadWeights";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::RaggedRows: return "RaggedRows";
    case ErrorCode::NonNumericCell: return "NonNumericCell";
    case ErrorCode::EmptyFile: return "EmptyFile";
    case ErrorCode::Internal: return "Internal";
  }
  return "Unknown";
}

}  // namespace ranklq
