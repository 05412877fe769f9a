#pragma once

#include <doctest.h>

#include <functional>

#include "tempcast/error.hpp"

// Runs f and returns the code of the tempcast::Error it throws.
inline tempcast::ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const tempcast::Error& e) {
    return e.code();
  }
  FAIL("expected tempcast::Error");
  return tempcast::ErrorCode::io_error;
}
