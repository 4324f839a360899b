#pragma once

#include <stdexcept>
#include <string>

namespace leanrl {

// Base of every domain error raised by the library. The CLI maps these to
// exit code 1; anything else escaping is a bug.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define LEANRL_DEFINE_ERROR(Name)             \
  class Name : public ::leanrl::Error {       \
   public:                                    \
    using ::leanrl::Error::Error;             \
  }

LEANRL_DEFINE_ERROR(IoFailure);
LEANRL_DEFINE_ERROR(ParseError);
LEANRL_DEFINE_ERROR(InvalidArgument);

}  // namespace leanrl
