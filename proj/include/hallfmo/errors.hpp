#pragma once

#include <stdexcept>
#include <string>

namespace hallfmo {

/// Invalid or inconsistent problem setup (bad mesh spec, missing region,
/// ill-posed boundary conditions, malformed config file).
struct config_error : std::runtime_error {
  explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

/// Failure of a numerical procedure (singular matrix, residual above
/// tolerance, inadmissible tensor during assembly).
struct numerical_error : std::runtime_error {
  explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

/// Failure to read or write an artifact on disk.
struct io_error : std::runtime_error {
  explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace hallfmo
