#pragma once

#include <stdexcept>
#include <string>

namespace pwb {

// Failure taxonomy shared by all modules. Each code names one contract
// violation; the message carries the concrete witness (index, location,
// offending value).
enum class Errc {
  InvalidDimension,
  NonElliptic,
  AlphaZero,
  X0OutOfRange,
  InsufficientPrecision,
  DegenerateExponents,
  IllConditioned,
  NonControllableMode,
  VanishingSine,
  VanishingVB,
  IndexMismatch,
  UnresolvedControl,
  QuadratureFailure,
  EpsilonTooLarge,
  SignViolation,
  ExtraZero,
  ResidualTooLarge,
  DimensionMismatch,
  BadInput,
  IoError,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::InvalidDimension: return "InvalidDimension";
    case Errc::NonElliptic: return "NonElliptic";
    case Errc::AlphaZero: return "AlphaZero";
    case Errc::X0OutOfRange: return "X0OutOfRange";
    case Errc::InsufficientPrecision: return "InsufficientPrecision";
    case Errc::DegenerateExponents: return "DegenerateExponents";
    case Errc::IllConditioned: return "IllConditioned";
    case Errc::NonControllableMode: return "NonControllableMode";
    case Errc::VanishingSine: return "VanishingSine";
    case Errc::VanishingVB: return "VanishingVB";
    case Errc::IndexMismatch: return "IndexMismatch";
    case Errc::UnresolvedControl: return "UnresolvedControl";
    case Errc::QuadratureFailure: return "QuadratureFailure";
    case Errc::EpsilonTooLarge: return "EpsilonTooLarge";
    case Errc::SignViolation: return "SignViolation";
    case Errc::ExtraZero: return "ExtraZero";
    case Errc::ResidualTooLarge: return "ResidualTooLarge";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::BadInput: return "BadInput";
    case Errc::IoError: return "IoError";
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

}  // namespace pwb
