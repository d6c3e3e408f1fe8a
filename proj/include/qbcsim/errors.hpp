#pragma once

#include <stdexcept>
#include <string>

namespace qbc {

// Shared error taxonomy. The CLI maps these onto its exit-code contract:
// config problems -> 2, missing calibration -> 3, broken invariants -> 4.

struct InvalidParams : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Config-level guard violations (e.g. the t1 << tau requirement).
struct ConfigGuard : InvalidParams {
  using InvalidParams::InvalidParams;
};

// Packet support reaches the grid boundary above the 1e-12 guard.
struct GridTooNarrow : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A pattern with zero total weight (or an empty window) cannot be sampled.
struct DegeneratePattern : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Alice's private state lacks a datum the unveil stage needs.
struct StateMismatch : std::logic_error {
  using std::logic_error::logic_error;
};

// Transcript and unveil message refer to different sessions.
struct SessionMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The honest-quantile cache is missing for this config.
struct UncalibratedQuantiles : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace qbc
