#pragma once

#include "telegraph_cpd/random.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace telegraph {

/// Piecewise-constant switching rate. rates[j] applies on
/// [breakpoints[j-1], breakpoints[j]) with an implicit 0 before the first
/// breakpoint and +infinity after the last, so rates.size() is
/// breakpoints.size() + 1.
struct RateProfile {
    std::vector<double> breakpoints;
    std::vector<double> rates;

    static RateProfile constant(double rate);
    /// Rate `before` up to time `at`, then `after`.
    static RateProfile single_switch(double before, double after, double at);

    /// Throws InputError unless rates are positive and finite and breakpoints
    /// strictly increasing and positive.
    void validate() const;

    double rate_at(double t) const;
    /// Integral of the rate over [0, t].
    double cumulative(double t) const;
};

struct EventPath {
    double horizon = 0.0;
    std::vector<double> event_times; // sorted, in (0, horizon]
    int initial_sign = 1;

    /// Velocity sign at time t: initial sign flipped once per event in (0, t).
    int sign_at(double t) const;
};

enum class InitialSign { Positive, Negative, Random };

/// Positions X_0 = 0, X_1, ..., X_n on the grid t_i = i * delta.
struct GridSample {
    double delta = 0.0;
    std::vector<double> values;
    std::optional<double> velocity; // absent for real data

    std::size_t size() const { return values.empty() ? 0 : values.size() - 1; }
    double horizon() const { return static_cast<double>(size()) * delta; }
    /// eta_i = X_i - X_{i-1}, i = 1..n (stored at index i - 1).
    std::vector<double> increments() const;
    void validate() const;
};

/// Event times of the direction-switching Poisson process on (0, horizon].
/// Segments of the profile are simulated with independent exponential clocks
/// restarted at each breakpoint. Rates below 1e-12 produce no events.
EventPath simulate_events(const RateProfile& profile, double horizon, InitialSign sign0,
                          RandomStream& rng);

/// Exact position of the particle at t_i = i * delta, i = 0..floor(horizon/delta).
/// An event falling exactly on t_i belongs to (t_{i-1}, t_i].
GridSample integrate_to_grid(const EventPath& events, double velocity, double delta);

/// simulate_events followed by integrate_to_grid with horizon n * delta.
GridSample simulate_grid(const RateProfile& profile, double velocity, double delta, std::size_t n,
                         InitialSign sign0, RandomStream& rng);

} // namespace telegraph
