#pragma once

#include <doctest.h>

#include <filesystem>
#include <functional>
#include <string>

#include <unistd.h>

#include "bcitk/error.hpp"
#include "support.hpp"

namespace bcitk::testing {

/// Code of the bcitk::Error thrown by f; fails the test when nothing is thrown.
inline Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no bcitk::Error thrown");
  return Errc::InvalidArgument;
}

/// Fresh directory under the system temp dir, removed on destruction.
struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag)
      : path(std::filesystem::temp_directory_path() / ("bcitk_" + tag + "_" + std::to_string(::getpid()))) {
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::filesystem::path operator/(const std::string& name) const { return path / name; }
};

}  // namespace bcitk::testing
