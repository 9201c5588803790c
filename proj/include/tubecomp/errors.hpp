#pragma once

#include <stdexcept>
#include <string>

namespace tubecomp {

// Base of every error raised by the library. The CLI maps any Error to exit code 2.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
  virtual const char* kind() const noexcept { return "Error"; }
};

#define TUBECOMP_DECLARE_ERROR(Name)                                   \
  class Name : public Error {                                          \
   public:                                                             \
    explicit Name(const std::string& what) : Error(what) {}            \
    const char* kind() const noexcept override { return #Name; }       \
  };

TUBECOMP_DECLARE_ERROR(DomainError)
TUBECOMP_DECLARE_ERROR(ApexError)
TUBECOMP_DECLARE_ERROR(StepError)
TUBECOMP_DECLARE_ERROR(ConjugateError)
TUBECOMP_DECLARE_ERROR(CutLocusError)
TUBECOMP_DECLARE_ERROR(NotApplicableError)
TUBECOMP_DECLARE_ERROR(FrameError)
TUBECOMP_DECLARE_ERROR(DegenerateError)
TUBECOMP_DECLARE_ERROR(ArityError)
TUBECOMP_DECLARE_ERROR(AmbiguousOrientation)
TUBECOMP_DECLARE_ERROR(StencilError)
TUBECOMP_DECLARE_ERROR(RankError)
TUBECOMP_DECLARE_ERROR(MinimalError)
TUBECOMP_DECLARE_ERROR(HypothesisError)
TUBECOMP_DECLARE_ERROR(DimensionError)
TUBECOMP_DECLARE_ERROR(BoundingError)
TUBECOMP_DECLARE_ERROR(ConfigError)

#undef TUBECOMP_DECLARE_ERROR

// Raised by the immersion expression parser. `column` is 1-based.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, int column)
      : Error("parse error at column " + std::to_string(column) + ": " + message),
        column_(column) {}
  const char* kind() const noexcept override { return "ParseError"; }
  int column() const noexcept { return column_; }

 private:
  int column_;
};

}  // namespace tubecomp
