#pragma once

#include <stdexcept>
#include <string>

namespace synapse {

/// Base class for every failure the pipeline can raise.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid run configuration (flags, inconsistent settings). CLI exit code 1.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Malformed or inconsistent input data (parse failures, schema violations,
/// alignment mismatches). CLI exit code 2.
class DataError : public Error {
public:
    using Error::Error;
};

/// Violated operation precondition (zero vector, unknown vertex, missing
/// template). CLI exit code 2.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Backend transport failure after exhausting retries. Carries the last HTTP
/// status observed (0 when the failure never reached the endpoint). Exit 3.
class TransportError : public Error {
public:
    TransportError(const std::string& what, int last_status = 0)
        : Error(what), last_status(last_status) {}

    int last_status;
};

} // namespace synapse
