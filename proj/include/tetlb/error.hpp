#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tetlb {

enum class errc {
    invalid_argument,
    not_found,
    precondition,
    degenerate_input,
    parse,
    consistency,
    unsupported,
    scenario,
};

inline const char* to_string(errc code) noexcept {
    switch (code) {
    case errc::invalid_argument: return "invalid argument";
    case errc::not_found: return "not found";
    case errc::precondition: return "precondition violated";
    case errc::degenerate_input: return "degenerate input";
    case errc::parse: return "parse error";
    case errc::consistency: return "consistency error";
    case errc::unsupported: return "unsupported";
    case errc::scenario: return "scenario error";
    }
    return "unknown";
}

/// Every failure raised by the library carries one of the codes above.
class error : public std::runtime_error {
public:
    error(errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
    errc code() const noexcept { return code_; }

private:
    errc code_;
};

class parse_error : public error {
public:
    parse_error(std::size_t line, const std::string& what)
        : error(errc::parse, "line " + std::to_string(line) + ": " + what), line_(line) {}
    /// 1-based; 0 when the problem is not tied to a line (e.g. an empty file).
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

namespace detail {

[[noreturn]] inline void fail(errc code, const std::string& what) { throw error(code, what); }

inline void require(bool condition, errc code, const char* what) {
    if (!condition) throw error(code, what);
}

} // namespace detail
} // namespace tetlb
