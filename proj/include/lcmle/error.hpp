#pragma once

#include <stdexcept>
#include <string>

namespace lcmle {

enum class ErrorKind {
  DimensionMismatch,
  InvalidArgument,
  NumericalFailure,
  OutsideHull,
  DegenerateChord,
  StuckChain,
  RankDeficient,
  VanishingLevelSet,
  UnsupportedDimension,
  DegenerateGeometry,
  ParseError,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace lcmle
