#include "telegraph_cpd/telegraph.hpp"

#include "telegraph_cpd/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace telegraph {

namespace {

constexpr double kNegligibleRate = 1e-12;

std::size_t grid_count(double horizon, double delta) {
    // horizon is usually n * delta computed in floating point; absorb the
    // rounding so that it maps back to n rather than n - 1.
    return static_cast<std::size_t>(std::floor(horizon / delta * (1.0 + 1e-12)));
}

} // namespace

RateProfile RateProfile::constant(double rate) {
    return RateProfile{{}, {rate}};
}

RateProfile RateProfile::single_switch(double before, double after, double at) {
    return RateProfile{{at}, {before, after}};
}

void RateProfile::validate() const {
    if (rates.size() != breakpoints.size() + 1) {
        throw InputError("rate profile needs exactly one more rate than breakpoints");
    }
    for (double r : rates) {
        if (!(r > 0.0) || !std::isfinite(r)) {
            throw InputError("switching rates must be positive and finite, got " +
                             std::to_string(r));
        }
    }
    double previous = 0.0;
    for (double b : breakpoints) {
        if (!(b > previous) || !std::isfinite(b)) {
            throw InputError("breakpoints must be positive and strictly increasing");
        }
        previous = b;
    }
}

double RateProfile::rate_at(double t) const {
    const auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), t);
    return rates[static_cast<std::size_t>(it - breakpoints.begin())];
}

double RateProfile::cumulative(double t) const {
    double total = 0.0;
    double start = 0.0;
    for (std::size_t j = 0; j < rates.size(); ++j) {
        const double end = j < breakpoints.size() ? breakpoints[j]
                                                  : std::numeric_limits<double>::infinity();
        if (t <= start) {
            break;
        }
        total += rates[j] * (std::min(t, end) - start);
        start = end;
    }
    return total;
}

int EventPath::sign_at(double t) const {
    const auto before = std::lower_bound(event_times.begin(), event_times.end(), t);
    const auto flips = before - event_times.begin();
    return flips % 2 == 0 ? initial_sign : -initial_sign;
}

std::vector<double> GridSample::increments() const {
    std::vector<double> eta;
    eta.reserve(size());
    for (std::size_t i = 1; i < values.size(); ++i) {
        eta.push_back(values[i] - values[i - 1]);
    }
    return eta;
}

void GridSample::validate() const {
    if (!(delta > 0.0) || !std::isfinite(delta)) {
        throw InputError("grid mesh must be positive and finite");
    }
    if (size() < 2) {
        throw InputError("a grid sample needs at least 2 increments");
    }
    if (velocity && !(*velocity > 0.0)) {
        throw InputError("velocity must be positive");
    }
    for (double x : values) {
        if (!std::isfinite(x)) {
            throw InputError("grid sample contains a non-finite value");
        }
    }
}

EventPath simulate_events(const RateProfile& profile, double horizon, InitialSign sign0,
                          RandomStream& rng) {
    // Validation is skipped for rates below the negligible threshold so that
    // tests can request an (almost) event-free path.
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
        throw InputError("simulation horizon must be positive and finite");
    }
    bool tiny = false;
    for (double r : profile.rates) {
        tiny = tiny || (r >= 0.0 && r < kNegligibleRate);
    }
    if (!tiny) {
        profile.validate();
    } else if (profile.rates.size() != profile.breakpoints.size() + 1) {
        throw InputError("rate profile needs exactly one more rate than breakpoints");
    }

    EventPath path;
    path.horizon = horizon;
    switch (sign0) {
    case InitialSign::Positive:
        path.initial_sign = 1;
        break;
    case InitialSign::Negative:
        path.initial_sign = -1;
        break;
    case InitialSign::Random:
        path.initial_sign = rng.sign();
        break;
    }

    double start = 0.0;
    for (std::size_t j = 0; j < profile.rates.size() && start < horizon; ++j) {
        const double end = j < profile.breakpoints.size()
                               ? std::min(profile.breakpoints[j], horizon)
                               : horizon;
        const double rate = profile.rates[j];
        if (rate >= kNegligibleRate) {
            double t = start + rng.exponential(rate);
            while (t < end || (end == horizon && t == horizon)) {
                path.event_times.push_back(t);
                t += rng.exponential(rate);
            }
        }
        start = end;
    }
    return path;
}

GridSample integrate_to_grid(const EventPath& events, double velocity, double delta) {
    if (!(velocity > 0.0) || !std::isfinite(velocity)) {
        throw InputError("velocity must be positive and finite");
    }
    if (!(delta > 0.0) || delta >= events.horizon) {
        throw InputError("grid mesh must be positive and smaller than the horizon");
    }
    const std::size_t n = grid_count(events.horizon, delta);
    if (n < 2) {
        throw InputError("horizon / delta must allow at least 2 grid intervals");
    }

    GridSample sample;
    sample.delta = delta;
    sample.velocity = velocity;
    sample.values.resize(n + 1);
    sample.values[0] = 0.0;

    double position = 0.0;
    double clock = 0.0;
    double sign = events.initial_sign >= 0 ? 1.0 : -1.0;
    std::size_t next_event = 0;
    const auto& times = events.event_times;

    for (std::size_t i = 1; i <= n; ++i) {
        const double t = static_cast<double>(i) * delta;
        while (next_event < times.size() && times[next_event] <= t) {
            position += sign * velocity * (times[next_event] - clock);
            clock = times[next_event];
            sign = -sign;
            ++next_event;
        }
        position += sign * velocity * (t - clock);
        clock = t;
        sample.values[i] = position;
    }
    return sample;
}

GridSample simulate_grid(const RateProfile& profile, double velocity, double delta, std::size_t n,
                         InitialSign sign0, RandomStream& rng) {
    if (n < 2) {
        throw InputError("need at least 2 grid intervals");
    }
    const double horizon = static_cast<double>(n) * delta;
    const EventPath events = simulate_events(profile, horizon, sign0, rng);
    return integrate_to_grid(events, velocity, delta);
}

} // namespace telegraph
