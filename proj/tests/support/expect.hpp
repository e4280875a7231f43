#pragma once

#include "doctest.h"

#include "drillscope/error.hpp"

namespace drillscope::testing {

// Error code thrown by fn; fails the test if nothing is thrown.
template <typename Fn>
ErrorCode code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidConfig;
}

}  // namespace drillscope::testing
