#pragma once

#include <stdexcept>
#include <string>

namespace duio {

// Root of every error raised by the library. The CLI maps subclasses onto
// fixed exit codes, so new kinds should derive from the closest existing one.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

class IndexError : public Error {
public:
    using Error::Error;
};

class DivergenceError : public Error {
public:
    DivergenceError(const std::string& what, double time) : Error(what), time_(time) {}
    double time() const noexcept { return time_; }

private:
    double time_;
};

class GraphError : public Error {
public:
    using Error::Error;
};

class ConnectivityError : public GraphError {
public:
    using GraphError::GraphError;
};

class ExcitationError : public Error {
public:
    using Error::Error;
};

class OracleUnavailableError : public Error {
public:
    using Error::Error;
};

class RankError : public Error {
public:
    using Error::Error;
};

class ConsistencyError : public Error {
public:
    using Error::Error;
};

class DesignError : public Error {
public:
    using Error::Error;
};

class SolvabilityError : public DesignError {
public:
    using DesignError::DesignError;
};

class PreconditionError : public DesignError {
public:
    using DesignError::DesignError;
};

class NumericsError : public Error {
public:
    using Error::Error;
};

class EmptyRunError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace duio
