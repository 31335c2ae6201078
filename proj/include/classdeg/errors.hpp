#pragma once

#include <stdexcept>
#include <string>

namespace classdeg {

/// Families of failures, mapped to CLI exit codes.
enum class ErrorKind : int {
  validation = 2,  // bad inputs, broken preconditions, malformed files
  not_found = 3,   // bounded searches that came up empty
  resource = 4,    // configured limits exceeded
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string name, const std::string& detail)
      : std::runtime_error(name + ": " + detail),
        kind_(kind),
        name_(std::move(name)) {}

  ErrorKind kind() const { return kind_; }
  const std::string& name() const { return name_; }

 private:
  ErrorKind kind_;
  std::string name_;
};

#define CLASSDEG_DEFINE_ERROR(Name, Kind)                     \
  class Name : public Error {                                 \
   public:                                                    \
    explicit Name(const std::string& detail)                  \
        : Error(ErrorKind::Kind, #Name, detail) {}            \
  };

CLASSDEG_DEFINE_ERROR(EmptyShift, validation)
CLASSDEG_DEFINE_ERROR(UnknownSymbol, validation)
CLASSDEG_DEFINE_ERROR(IllegalWord, validation)
CLASSDEG_DEFINE_ERROR(IndexOutOfRange, validation)
CLASSDEG_DEFINE_ERROR(SymbolMismatch, validation)
CLASSDEG_DEFINE_ERROR(DomainError, validation)
CLASSDEG_DEFINE_ERROR(NotIrreducible, validation)
CLASSDEG_DEFINE_ERROR(IllegalMeasure, validation)
CLASSDEG_DEFINE_ERROR(ZeroMassWord, validation)
CLASSDEG_DEFINE_ERROR(InsufficientData, validation)
CLASSDEG_DEFINE_ERROR(NotRoutable, validation)
CLASSDEG_DEFINE_ERROR(NotUnique, validation)
CLASSDEG_DEFINE_ERROR(TooFewMarks, validation)
CLASSDEG_DEFINE_ERROR(NoCommonSymbol, validation)
CLASSDEG_DEFINE_ERROR(RoutingGap, validation)
CLASSDEG_DEFINE_ERROR(DegenerateSeparator, validation)
CLASSDEG_DEFINE_ERROR(NoOccurrences, validation)
CLASSDEG_DEFINE_ERROR(BadInstanceFile, validation)
CLASSDEG_DEFINE_ERROR(NotFoundWithinBound, not_found)
CLASSDEG_DEFINE_ERROR(NoFeasibleCell, not_found)
CLASSDEG_DEFINE_ERROR(ResourceLimit, resource)
CLASSDEG_DEFINE_ERROR(PeriodTooLarge, resource)

#undef CLASSDEG_DEFINE_ERROR

}  // namespace classdeg
