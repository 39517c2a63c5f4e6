#pragma once

#include <stdexcept>
#include <string>

namespace lotaru {

/// Base for every error raised by the library. `module()` names the
/// subsystem that failed so the CLI can report "<module>: <cause>".
class Error : public std::runtime_error {
public:
    Error(std::string module, const std::string& what)
        : std::runtime_error(what), module_(std::move(module)) {}

    const std::string& module() const noexcept { return module_; }

private:
    std::string module_;
};

/// Bad user input (schema, flags, missing entities). The CLI maps these to
/// exit code 2.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// The regression design matrix is singular; callers fall back to the median.
class SingularDesignError : public Error {
public:
    explicit SingularDesignError(const std::string& what) : Error("estimator", what) {}
};

}  // namespace lotaru
