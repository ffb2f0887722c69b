#pragma once

#include <stdexcept>
#include <string>

namespace cplab {

enum class Errc {
  DimensionMismatch,
  SingularMatrix,
  RankDeficient,
  IllConditioned,
  ExhaustedRetries,
  CapExceeded,
  NotConverged,
  StepUnderflow,
  LeftPositiveOrthant,
  ZeroVelocityBlock,
  BoxTooSmall,
  LpCycleGuard,
  Overflow,
  NonSquare,
  BadDims,
  InvalidArgument,
  Io,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::SingularMatrix: return "SingularMatrix";
    case Errc::RankDeficient: return "RankDeficient";
    case Errc::IllConditioned: return "IllConditioned";
    case Errc::ExhaustedRetries: return "ExhaustedRetries";
    case Errc::CapExceeded: return "CapExceeded";
    case Errc::NotConverged: return "NotConverged";
    case Errc::StepUnderflow: return "StepUnderflow";
    case Errc::LeftPositiveOrthant: return "LeftPositiveOrthant";
    case Errc::ZeroVelocityBlock: return "ZeroVelocityBlock";
    case Errc::BoxTooSmall: return "BoxTooSmall";
    case Errc::LpCycleGuard: return "LpCycleGuard";
    case Errc::Overflow: return "Overflow";
    case Errc::NonSquare: return "NonSquare";
    case Errc::BadDims: return "BadDims";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::Io: return "Io";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

inline void require(bool ok, Errc code, const std::string& what) {
  if (!ok) fail(code, what);
}

}  // namespace cplab
