#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace shapval {

// Error category; the numeric value doubles as the CLI process exit code.
enum class ErrorKind : int {
    Config = 2,
    Data = 3,
    Runtime = 4,
};

// All recoverable failures carry a short machine-parseable code ("invalid-band",
// "parse", ...) next to the human-readable message.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string code, const std::string& message)
        : std::runtime_error(message), kind_(kind), code_(std::move(code)) {}

    ErrorKind kind() const noexcept { return kind_; }
    const std::string& code() const noexcept { return code_; }
    int exit_code() const noexcept { return static_cast<int>(kind_); }

private:
    ErrorKind kind_;
    std::string code_;
};

[[noreturn]] inline void throw_config(const std::string& code, const std::string& message) {
    throw Error(ErrorKind::Config, code, message);
}

[[noreturn]] inline void throw_data(const std::string& code, const std::string& message) {
    throw Error(ErrorKind::Data, code, message);
}

[[noreturn]] inline void throw_runtime(const std::string& code, const std::string& message) {
    throw Error(ErrorKind::Runtime, code, message);
}

}  // namespace shapval
