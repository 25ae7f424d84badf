#pragma once

#include <stdexcept>
#include <string>

namespace csekit {

/// Base class for every error raised by the library. `kind()` is a stable
/// lowercase token used by the CLI's machine-parseable error line.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "error"; }
};

#define CSEKIT_DEFINE_ERROR(Name, token)                              \
  class Name : public Error {                                         \
   public:                                                            \
    using Error::Error;                                               \
    const char* kind() const noexcept override { return token; }      \
  };

CSEKIT_DEFINE_ERROR(ArgumentError, "argument")
CSEKIT_DEFINE_ERROR(ConfigError, "config")
CSEKIT_DEFINE_ERROR(DataError, "data")
CSEKIT_DEFINE_ERROR(EnvironmentError, "environment")
CSEKIT_DEFINE_ERROR(GenerationError, "generation")
CSEKIT_DEFINE_ERROR(ParseError, "parse")
CSEKIT_DEFINE_ERROR(UsageError, "usage")
CSEKIT_DEFINE_ERROR(NumericError, "numeric")
CSEKIT_DEFINE_ERROR(ConsistencyError, "consistency")
CSEKIT_DEFINE_ERROR(UnsupportedCombinationError, "unsupported_combination")
CSEKIT_DEFINE_ERROR(UndefinedCorrelationError, "undefined_correlation")

#undef CSEKIT_DEFINE_ERROR

}  // namespace csekit
