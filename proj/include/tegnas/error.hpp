#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace tegnas {

enum class Errc {
  NonSquare,
  NotSymmetric,
  NoConvergence,
  SingularSystem,
  TooFewPoints,
  ZeroFanIn,
  InvalidArch,
  UnknownOp,
  ShapeMismatch,
  SamplingExhausted,
  ParseError,
  DegenerateKernel,
  NonFiniteGradient,
  NoCheckpoint,
  LengthMismatch,
  AllTied,
  TooFewArchs,
  EmptySubset,
  UnknownArch,
  ConfigError,
  IoError,
};

inline std::string_view errc_name(Errc c) {
  switch (c) {
    case Errc::NonSquare: return "NonSquare";
    case Errc::NotSymmetric: return "NotSymmetric";
    case Errc::NoConvergence: return "NoConvergence";
    case Errc::SingularSystem: return "SingularSystem";
    case Errc::TooFewPoints: return "TooFewPoints";
    case Errc::ZeroFanIn: return "ZeroFanIn";
    case Errc::InvalidArch: return "InvalidArch";
    case Errc::UnknownOp: return "UnknownOp";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::SamplingExhausted: return "SamplingExhausted";
    case Errc::ParseError: return "ParseError";
    case Errc::DegenerateKernel: return "DegenerateKernel";
    case Errc::NonFiniteGradient: return "NonFiniteGradient";
    case Errc::NoCheckpoint: return "NoCheckpoint";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::AllTied: return "AllTied";
    case Errc::TooFewArchs: return "TooFewArchs";
    case Errc::EmptySubset: return "EmptySubset";
    case Errc::UnknownArch: return "UnknownArch";
    case Errc::ConfigError: return "ConfigError";
    case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

/// Every failure in the library is reported through this type. `position`
/// carries a byte offset (parsers) or a row number (CSV loaders) when known.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what, std::optional<std::size_t> position = std::nullopt)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what),
        code_(code),
        position_(position) {}

  Errc code() const noexcept { return code_; }
  std::optional<std::size_t> position() const noexcept { return position_; }

 private:
  Errc code_;
  std::optional<std::size_t> position_;
};

}  // namespace tegnas
