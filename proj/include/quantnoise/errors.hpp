#pragma once

#include <stdexcept>

namespace quantnoise {

// The library reports failures through these types only; the CLI maps them
// onto process exit codes.
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct partition_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct estimation_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct fit_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct calibration_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Unexpected failure inside a pipeline stage.
struct pipeline_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace quantnoise
