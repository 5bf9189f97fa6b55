#ifndef TORUSFLOW_ERRORS_HPP
#define TORUSFLOW_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace torusflow {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidGrid : Error {
    using Error::Error;
};

struct NonPositiveDensity : Error {
    using Error::Error;
};

struct NotZeroMean : Error {
    using Error::Error;
};

struct StepRejected : Error {
    using Error::Error;
};

struct PositivityLost : Error {
    using Error::Error;
};

struct NonFiniteState : Error {
    using Error::Error;
};

struct NewtonDiverged : Error {
    using Error::Error;
};

struct SingularJacobian : Error {
    using Error::Error;
};

struct EigsNotConverged : Error {
    using Error::Error;
};

struct DegenerateState : Error {
    using Error::Error;
};

struct ChartExceeded : Error {
    using Error::Error;
};

struct InsufficientData : Error {
    using Error::Error;
};

struct NonMonotoneEnergy : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

}  // namespace torusflow

#endif
