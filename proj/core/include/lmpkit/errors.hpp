#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lmpkit {

/// Base class for every error raised by the library. `kind()` is a stable
/// machine-readable name used by the CLI's JSON error objects.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual const char* kind() const noexcept { return "Error"; }
};

#define LMPKIT_DEFINE_ERROR(Name)                                   \
    class Name : public Error {                                     \
    public:                                                         \
        using Error::Error;                                         \
        const char* kind() const noexcept override { return #Name; } \
    }

LMPKIT_DEFINE_ERROR(SizeError);
LMPKIT_DEFINE_ERROR(LabelError);
LMPKIT_DEFINE_ERROR(ContextError);
LMPKIT_DEFINE_ERROR(ValueError);
LMPKIT_DEFINE_ERROR(PlacementError);
LMPKIT_DEFINE_ERROR(IoError);
LMPKIT_DEFINE_ERROR(EmptyActivation);
LMPKIT_DEFINE_ERROR(ExcludedChannel);
LMPKIT_DEFINE_ERROR(NonFiniteError);

#undef LMPKIT_DEFINE_ERROR

class TrainingDiverged : public Error {
public:
    TrainingDiverged(std::size_t step, const std::string& what)
        : Error(what), step_(step) {}
    const char* kind() const noexcept override { return "TrainingDiverged"; }
    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

/// Malformed experiment configuration. `pointer()` is an RFC 6901 JSON
/// pointer to the offending key.
class ConfigError : public Error {
public:
    ConfigError(std::string pointer, const std::string& what)
        : Error(what), pointer_(std::move(pointer)) {}
    const char* kind() const noexcept override { return "ConfigError"; }
    const std::string& pointer() const noexcept { return pointer_; }

private:
    std::string pointer_;
};

}  // namespace lmpkit
