#pragma once

#include <stdexcept>
#include <string>

namespace telegraph {

/// Bad parameters or malformed input. The CLI maps this to exit code 2.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Why a series cannot be analyzed.
enum class UnanalyzableReason {
    DegeneratePath,   // every increment is zero, velocity cannot be estimated
    NoSwitches,       // S_n = 0, D_k undefined
    RateSaturated,    // gamma * delta = 1, every interval holds a switch
    NoRateChange,     // gamma1 == gamma2, no interval for the change point
    TooShort,         // trimmed index range is empty
};

inline const char* to_string(UnanalyzableReason reason) {
    switch (reason) {
    case UnanalyzableReason::DegeneratePath:
        return "degenerate_path";
    case UnanalyzableReason::NoSwitches:
        return "no_switches";
    case UnanalyzableReason::RateSaturated:
        return "rate_saturated";
    case UnanalyzableReason::NoRateChange:
        return "no_rate_change";
    case UnanalyzableReason::TooShort:
        return "too_short";
    }
    return "unknown";
}

/// Well-formed data on which a statistic is undefined. Exit code 3 in the CLI.
class Unanalyzable : public std::runtime_error {
public:
    Unanalyzable(UnanalyzableReason reason, const std::string& what)
        : std::runtime_error(what), reason_(reason) {}

    UnanalyzableReason reason() const noexcept { return reason_; }

private:
    UnanalyzableReason reason_;
};

} // namespace telegraph
