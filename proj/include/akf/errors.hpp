#pragma once

#include <stdexcept>
#include <string>

namespace akf {

/// A mixture whose total mass is non-positive where positive mass is required.
class DegenerateMixtureError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// sample() was invoked on a mixture carrying negative weights.
class SignedSamplingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// normalize() cannot rescale a mixture with total mass <= 0.
class NonNormalizableError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The linear transport map is too ill-conditioned to invert.
class TransportError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Non-finite state or non-recoverable filter breakdown, tagged with the step it occurred at.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(const std::string& what, int step)
        : std::runtime_error(what + " (step " + std::to_string(step) + ")"), step_(step) {}
    int step() const noexcept { return step_; }

private:
    int step_;
};

} // namespace akf
