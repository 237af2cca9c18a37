#pragma once

#include <stdexcept>
#include <string>

namespace normnet {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionError : Error {
    using Error::Error;
};

struct PreconditionError : Error {
    using Error::Error;
};

struct AssumptionViolated : Error {
    using Error::Error;
};

struct UnsupportedNormalization : Error {
    using Error::Error;
};

struct NonFiniteError : Error {
    NonFiniteError(const std::string& what, std::size_t layer) : Error(what), layer(layer) {}
    std::size_t layer;
};

struct ParseError : Error {
    using Error::Error;
};

struct RegistryError : Error {
    using Error::Error;
};

struct InfeasibleError : Error {
    InfeasibleError(const std::string& what, double c1, double c2) : Error(what), c1(c1), c2(c2) {}
    double c1;
    double c2;
};

}  // namespace normnet
