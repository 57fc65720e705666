#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace snb {

/// Which part of the toolkit raised an error. The CLI reports this verbatim
/// and maps `config` and `cli` to exit status 2, everything else to 3.
enum class ErrorCategory {
    config,
    tf_core,
    harmonic_balance,
    critical,
    switching_sim,
    cli,
};

[[nodiscard]] inline const char* to_string(ErrorCategory c) {
    switch (c) {
    case ErrorCategory::config: return "config";
    case ErrorCategory::tf_core: return "tf_core";
    case ErrorCategory::harmonic_balance: return "harmonic_balance";
    case ErrorCategory::critical: return "critical";
    case ErrorCategory::switching_sim: return "switching_sim";
    case ErrorCategory::cli: return "cli";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, std::string kind, const std::string& message)
        : std::runtime_error(message), category_(category), kind_(std::move(kind)) {}

    [[nodiscard]] ErrorCategory category() const noexcept { return category_; }
    /// Short machine-readable name, e.g. "RepeatedPoleError".
    [[nodiscard]] const std::string& kind() const noexcept { return kind_; }

private:
    ErrorCategory category_;
    std::string kind_;
};

namespace detail {
[[noreturn]] inline void fail(ErrorCategory c, const char* kind, const std::string& msg) {
    throw Error(c, kind, msg);
}
} // namespace detail

} // namespace snb
