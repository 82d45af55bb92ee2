#pragma once

#include <stdexcept>
#include <string>

namespace malign {

/// Invalid user-supplied configuration: bad files, parameters out of range,
/// geometry that violates the floor-plan invariants.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Inputs that are individually valid but structurally incompatible
/// (dimension mismatches, too few eligible neighbors, off-grid positions).
class StructuralError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Singular systems and degenerate spectra.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace malign
