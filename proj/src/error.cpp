#include "lrp/error.hpp"

namespace lrp {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ZeroDisplacement: return "ZeroDisplacement";
    case ErrorCode::OverlappingSets: return "OverlappingSets";
    case ErrorCode::DivergentTail: return "DivergentTail";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::SelfLoop: return "SelfLoop";
    case ErrorCode::SameStream: return "SameStream";
    case ErrorCode::BudgetInfeasible: return "BudgetInfeasible";
    case ErrorCode::SourceOutsideSet: return "SourceOutsideSet";
    case ErrorCode::EmptySet: return "EmptySet";
    case ErrorCode::EmptySources: return "EmptySources";
    case ErrorCode::EmptyProxy: return "EmptyProxy";
    case ErrorCode::SubcriticalRegime: return "SubcriticalRegime";
    case ErrorCode::DegenerateNorm: return "DegenerateNorm";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::OriginMissing: return "OriginMissing";
    case ErrorCode::NoCrossing: return "NoCrossing";
    case ErrorCode::GeometryInfeasible: return "GeometryInfeasible";
    case ErrorCode::SplitInvalid: return "SplitInvalid";
    case ErrorCode::IsolatedStart: return "IsolatedStart";
    case ErrorCode::Disconnected: return "Disconnected";
    case ErrorCode::ConfigParse: return "ConfigParse";
    case ErrorCode::UnknownExperiment: return "UnknownExperiment";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace lrp
