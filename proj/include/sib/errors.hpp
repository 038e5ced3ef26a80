#pragma once

#include <stdexcept>
#include <string>

namespace sib {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Incompatible matrix/tensor shapes. Message names both shapes.
struct ShapeError : Error {
    using Error::Error;
};

// Value outside the operation's domain (bad label index, edgeless graph, ...).
struct DomainError : Error {
    using Error::Error;
};

// Malformed input file. Message carries file name and line number.
struct FormatError : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

// Invalid configuration (bad fractions, empty split, unknown key, ...).
struct ConfigError : Error {
    using Error::Error;
};

// Non-finite loss during training. Names the outer step and loss component.
struct DivergenceError : Error {
    DivergenceError(int step, const std::string& component)
        : Error("training diverged at outer step " + std::to_string(step) +
                ": non-finite " + component),
          step(step),
          component(component) {}
    int step;
    std::string component;
};

inline std::string shape_str(int rows, int cols) {
    return std::to_string(rows) + "x" + std::to_string(cols);
}

}  // namespace sib
