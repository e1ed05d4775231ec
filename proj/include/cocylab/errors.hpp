#pragma once

#include <stdexcept>
#include <string>

namespace cocylab {

// Every failure mode the library reports deliberately. Anything else
// escaping as a plain std::exception is a bug.
enum class Errc {
  NotMixing,
  BracketUndefined,
  NoFixedPoint,
  WindowTooSmall,
  NotPeriodic,
  Singular,
  RankAmbiguous,
  RankMismatch,
  BadContext,
  CombinatorialBlowup,
  NotStableRelated,
  NotUnstableRelated,
  DimensionMismatch,
  ConditionAFailed,
  ConditionBFailed,
  UnbunchedInput,
  MissingOrbitData,
  NotCoprime,
  ResidualFail,
  CacheMismatch,
  NoGap,
  NotConverged,
  BlockMissing,
  BadWeights,
  ConfigInvalid,
  ExperimentFailed,
  UnknownTemplate,
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what),
        code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace cocylab
