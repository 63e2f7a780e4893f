#pragma once

#include <stdexcept>
#include <string>

namespace ntree {

// Thrown for out-of-range maze parameters (N < 2, M < 1, bad f_leaf).
struct InvalidParameters : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Thrown when an edge argument is frozen or not part of the live graph.
struct InvalidEdge : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Thrown for maze moves the protocol forbids (freezing a final-node edge).
struct InvalidMove : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Thrown when a walk state does not match the maze or is unnormalized.
struct InvalidState : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Thrown when no peak exists within the scanned window.
struct NoPeakFound : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown on eigensolver breakdown or other numeric failure.
struct NumericalFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown for analytics inputs that violate preconditions.
struct InvalidSequence : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Thrown when a regression grid cannot support the two-stage fit.
struct InsufficientData : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Thrown for unusable run configurations (unknown command, bad ranges).
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Thrown when an output path cannot be written.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace ntree
