#pragma once

#include <stdexcept>
#include <string>

namespace rfm {

/// Base for every error the library raises.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Errors caused by numerics rather than by bad input (CLI exit code 3).
class NumericalError : public Error {
 public:
  using Error::Error;
};

#define RFM_DEFINE_ERROR(Name, Base)            \
  class Name : public Base {                    \
   public:                                      \
    explicit Name(const std::string& what)      \
        : Base(std::string(#Name ": ") + what) {} \
  };

RFM_DEFINE_ERROR(DomainViolation, NumericalError)
RFM_DEFINE_ERROR(NonFinite, NumericalError)
RFM_DEFINE_ERROR(ConvergenceFailure, NumericalError)
RFM_DEFINE_ERROR(DegenerateRadius, NumericalError)

RFM_DEFINE_ERROR(BaseMismatch, Error)
RFM_DEFINE_ERROR(InvalidCurvature, Error)
RFM_DEFINE_ERROR(ShapeMismatch, Error)
RFM_DEFINE_ERROR(NonScalarLoss, Error)
RFM_DEFINE_ERROR(EmptyGraph, Error)
RFM_DEFINE_ERROR(LabelOutOfRange, Error)
RFM_DEFINE_ERROR(BatchSizeMismatch, Error)
RFM_DEFINE_ERROR(EmptyBatch, Error)
RFM_DEFINE_ERROR(EmptyLog, Error)
RFM_DEFINE_ERROR(InvalidSpec, Error)
RFM_DEFINE_ERROR(IndexOutOfRange, Error)
RFM_DEFINE_ERROR(DimensionMismatch, Error)
RFM_DEFINE_ERROR(ConfigError, Error)

#undef RFM_DEFINE_ERROR

/// Parse failure that carries the offending line number.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error("ParseError: line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace rfm
