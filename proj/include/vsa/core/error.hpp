#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vsa {

enum class ErrorKind {
    not_found,
    parse,
    invalid_argument,
    duplicate,
    out_of_range,
    shape_mismatch,
    corrupt,
    version_mismatch,
    task_mismatch,
    missing_weights,
    unknown_architecture,
    unsupported,
    growth_cap_exceeded,
    non_finite,
    unauthorized,
    conflict,
};

std::string_view to_string(ErrorKind kind);

/// Library-wide exception. The kind lets callers (the CLI, the HTTP layer)
/// map failures to exit codes or status codes without parsing messages.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace vsa
