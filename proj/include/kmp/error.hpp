#pragma once

#include <stdexcept>
#include <string>

namespace kmp {

// Base class for every failure raised by the library. Each subclass names one
// failure category so callers (and the CLI) can react to it specifically.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define KMP_DEFINE_ERROR(Name)            \
  class Name : public Error {             \
   public:                                \
    using Error::Error;                   \
  }

KMP_DEFINE_ERROR(ArgumentError);
KMP_DEFINE_ERROR(DimensionError);
KMP_DEFINE_ERROR(ParseError);
KMP_DEFINE_ERROR(ValidationError);
KMP_DEFINE_ERROR(IoError);
KMP_DEFINE_ERROR(DegenerateDataError);
KMP_DEFINE_ERROR(NumericError);
KMP_DEFINE_ERROR(UnsupportedError);
KMP_DEFINE_ERROR(DegenerateObjectiveError);
KMP_DEFINE_ERROR(DegenerateTraceError);
KMP_DEFINE_ERROR(StratificationError);

// Model file failures.
KMP_DEFINE_ERROR(VersionError);
KMP_DEFINE_ERROR(CorruptionError);
KMP_DEFINE_ERROR(ChecksumError);

#undef KMP_DEFINE_ERROR

}  // namespace kmp
