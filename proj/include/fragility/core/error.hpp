#pragma once

#include <stdexcept>
#include <string>

namespace fragility {

/// Broad failure categories. The CLI maps each category to an exit code.
enum class ErrorKind {
    Config = 1,     ///< invalid configuration or infeasible model setup
    Data = 2,       ///< malformed or insufficient input data
    Numerical = 3,  ///< solver, optimizer or integrator failure
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& what) : Error(ErrorKind::Config, what) {}
};

struct DataError : Error {
    explicit DataError(const std::string& what) : Error(ErrorKind::Data, what) {}
};

struct NumericalError : Error {
    explicit NumericalError(const std::string& what) : Error(ErrorKind::Numerical, what) {}
};

}  // namespace fragility
