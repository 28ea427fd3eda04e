#pragma once

#include <stdexcept>
#include <string>

namespace bsf {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define BSF_DECLARE_ERROR(Name)            \
  class Name : public Error {              \
   public:                                 \
    using Error::Error;                    \
  };

BSF_DECLARE_ERROR(DisconnectedGraph)
BSF_DECLARE_ERROR(NotATree)
BSF_DECLARE_ERROR(InvalidGraph)
BSF_DECLARE_ERROR(InvalidArgument)
BSF_DECLARE_ERROR(TooLarge)
BSF_DECLARE_ERROR(InfeasibleDensity)
BSF_DECLARE_ERROR(GenerationTimeout)
BSF_DECLARE_ERROR(BadBound)
BSF_DECLARE_ERROR(InconsistentSolution)
BSF_DECLARE_ERROR(GuardViolated)
BSF_DECLARE_ERROR(NumericalFailure)
BSF_DECLARE_ERROR(MissingCell)
BSF_DECLARE_ERROR(IoError)

#undef BSF_DECLARE_ERROR

/// Malformed instance, solution, CSV or MPS text. Carries the 1-based line.
class ParseError : public Error {
 public:
  ParseError(int line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

}  // namespace bsf
