#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lrp {

enum class ErrorCode {
  ZeroDisplacement,
  OverlappingSets,
  DivergentTail,
  DimensionMismatch,
  InvalidArgument,
  SelfLoop,
  SameStream,
  BudgetInfeasible,
  SourceOutsideSet,
  EmptySet,
  EmptySources,
  EmptyProxy,
  SubcriticalRegime,
  DegenerateNorm,
  TooLarge,
  OriginMissing,
  NoCrossing,
  GeometryInfeasible,
  SplitInvalid,
  IsolatedStart,
  Disconnected,
  ConfigParse,
  UnknownExperiment,
};

std::string_view to_string(ErrorCode code);

/// Single exception type for the library; the code identifies the failure.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what);

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) fail(code, what);
}

}  // namespace lrp
