#pragma once

#include <stdexcept>
#include <string>

namespace fgcn {

// Base class for everything thrown by this library.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad dimensions fed to a numeric kernel.
struct shape_error : error {
    using error::error;
};

// Malformed text input (SMILES, CSV, config).
struct parse_error : error {
    using error::error;
};

// Operation invoked in the wrong object state (backward before forward,
// encoding with an unfrozen model, ...).
struct state_error : error {
    using error::error;
};

// Invalid configuration or invalid caller-supplied data.
struct config_error : error {
    using error::error;
};

// File access problems.
struct io_error : error {
    using error::error;
};

// Non-finite values where finite ones are required; maps to exit code 3.
struct numeric_error : error {
    using error::error;
};

// Descriptor/model convention mismatch between artifacts.
struct convention_error : error {
    using error::error;
};

// Models compared under incompatible protocols (different train splits).
struct protocol_error : error {
    using error::error;
};

}  // namespace fgcn
