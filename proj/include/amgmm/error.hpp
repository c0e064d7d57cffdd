#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace amgmm {

// Domain error carrying a stable machine-readable code. The CLI prints
// "error[<code>]: <message>" on stderr and exits nonzero; the code set is
// part of the tool contract (see README).
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

[[noreturn]] inline void fail(std::string code, const std::string& message) {
    throw Error(std::move(code), message);
}

inline void require(bool condition, const char* code, const std::string& message) {
    if (!condition) throw Error(code, message);
}

} // namespace amgmm
