#pragma once

#include <stdexcept>
#include <string>

namespace dragsim {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PlacementFailed : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionMismatch : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct StaleCache : std::logic_error {
    using std::logic_error::logic_error;
};

struct ShapeMismatch : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct InsufficientSamples : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TooLarge : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

}  // namespace dragsim
