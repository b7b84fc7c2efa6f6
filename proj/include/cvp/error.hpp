#pragma once

#include <stdexcept>
#include <string>

namespace cvp {

enum class Errc {
  NotHermitian,
  DimMismatch,
  NoConvergence,
  RankTooHigh,
  InvalidPoint,
  InvalidArgument,
  NoNegativeFound,
  NonConvergence,
  Infeasible,
  IllPosed,
  NotPositive,
  NotSupported,
  UnknownExample,
  Validation,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::NotHermitian: return "NotHermitian";
    case Errc::DimMismatch: return "DimMismatch";
    case Errc::NoConvergence: return "NoConvergence";
    case Errc::RankTooHigh: return "RankTooHigh";
    case Errc::InvalidPoint: return "InvalidPoint";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::NoNegativeFound: return "NoNegativeFound";
    case Errc::NonConvergence: return "NonConvergence";
    case Errc::Infeasible: return "Infeasible";
    case Errc::IllPosed: return "IllPosed";
    case Errc::NotPositive: return "NotPositive";
    case Errc::NotSupported: return "NotSupported";
    case Errc::UnknownExample: return "UnknownExample";
    case Errc::Validation: return "Validation";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace cvp
