#pragma once

#include <stdexcept>
#include <string>

namespace torsionlab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidParameter : public Error {
public:
    using Error::Error;
};

class MeshingFailure : public Error {
public:
    using Error::Error;
};

/// An iterative method ran out of iterations or could not bracket a root.
class NoConvergence : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    ConfigError(std::string field, const std::string& reason)
        : Error(field + ": " + reason), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

}  // namespace torsionlab
