#pragma once

#include <stdexcept>
#include <string>

namespace etup {

// Error categories; they map 1:1 onto the C API status codes and from
// there onto CLI exit codes.
enum class ErrorCode {
    invalid_input = 1,
    config = 2,
    io = 3,
    empty_data = 4,
    invalid_k = 5,
    schema_mismatch = 6,
    bad_format = 7,
    internal = 8,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void throw_invalid(const std::string& what) {
    throw Error(ErrorCode::invalid_input, what);
}
[[noreturn]] inline void throw_config(const std::string& what) {
    throw Error(ErrorCode::config, what);
}
[[noreturn]] inline void throw_io(const std::string& what) {
    throw Error(ErrorCode::io, what);
}

}  // namespace etup
