#pragma once

#include <stdexcept>
#include <string>

namespace laakso {

/// Process exit codes shared by the CLI and the error hierarchy below.
enum class ExitCode : int {
    kOk = 0,
    kPrecondition = 2,
    kViolation = 3,
    kSchema = 4,
};

class Error : public std::runtime_error {
public:
    Error(ExitCode code, const std::string& kind, const std::string& what)
        : std::runtime_error(what), code_(code), kind_(kind) {}

    ExitCode code() const noexcept { return code_; }
    const std::string& kind() const noexcept { return kind_; }

private:
    ExitCode code_;
    std::string kind_;
};

/// Invalid parameters or unmet operation preconditions.
class PreconditionError : public Error {
public:
    explicit PreconditionError(const std::string& what)
        : Error(ExitCode::kPrecondition, "precondition", what) {}
};

/// The requested instance would exceed the configured size budget.
class CapacityError : public Error {
public:
    explicit CapacityError(const std::string& what)
        : Error(ExitCode::kPrecondition, "capacity", what) {}
};

/// Malformed or inconsistent input documents.
class SchemaError : public Error {
public:
    explicit SchemaError(const std::string& what)
        : Error(ExitCode::kSchema, "schema", what) {}
};

/// A numerical routine produced a non-finite value.
class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& what)
        : Error(ExitCode::kViolation, "numerical", what) {}
};

}  // namespace laakso
