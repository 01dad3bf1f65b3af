#pragma once

#include <stdexcept>
#include <string>

namespace wedgefall {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidMass : public Error {
public:
    using Error::Error;
};

class FlightOverrun : public Error {
public:
    using Error::Error;
};

class SectionMismatch : public Error {
public:
    using Error::Error;
};

// Raised where a unique continuation is required but the next event is singular.
class SingularEvent : public Error {
public:
    using Error::Error;
};

class RejectionBudget : public Error {
public:
    using Error::Error;
};

class DegenerateGeometry : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

// Numerical budget (horizon, sample count, orbit supply) ran out.
class BudgetExhausted : public Error {
public:
    using Error::Error;
};

} // namespace wedgefall
