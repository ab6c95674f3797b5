#include "telegraph_cpd/error.hpp"
#include "telegraph_cpd/telegraph.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

using namespace telegraph;

TEST(RateProfile, ValidatesRatesAndBreakpoints) {
    EXPECT_NO_THROW(RateProfile::constant(1.0).validate());
    EXPECT_NO_THROW(RateProfile::single_switch(1.0, 3.0, 5.0).validate());
    EXPECT_THROW(RateProfile::constant(0.0).validate(), InputError);
    EXPECT_THROW(RateProfile::constant(-1.0).validate(), InputError);
    EXPECT_THROW(RateProfile::constant(INFINITY).validate(), InputError);
    EXPECT_THROW((RateProfile{{2.0, 1.0}, {1.0, 2.0, 3.0}}).validate(), InputError);
    EXPECT_THROW((RateProfile{{1.0}, {1.0}}).validate(), InputError);
}

TEST(RateProfile, RateAndCumulative) {
    const auto p = RateProfile::single_switch(1.0, 3.0, 5.0);
    EXPECT_DOUBLE_EQ(p.rate_at(0.0), 1.0);
    EXPECT_DOUBLE_EQ(p.rate_at(4.999), 1.0);
    EXPECT_DOUBLE_EQ(p.rate_at(5.0), 3.0);
    EXPECT_DOUBLE_EQ(p.cumulative(10.0), 20.0);
    EXPECT_DOUBLE_EQ(p.cumulative(2.0), 2.0);
}

TEST(SimulateEvents, NegligibleRateGivesNoEvents) {
    RandomStream rng(3);
    const EventPath path =
        simulate_events(RateProfile::constant(1e-15), 1.0, InitialSign::Positive, rng);
    EXPECT_TRUE(path.event_times.empty());
    EXPECT_EQ(path.initial_sign, 1);
}

TEST(SimulateEvents, RejectsBadHorizon) {
    RandomStream rng(1);
    EXPECT_THROW(simulate_events(RateProfile::constant(1.0), 0.0, InitialSign::Random, rng),
                 InputError);
    EXPECT_THROW(simulate_events(RateProfile::constant(-2.0), 1.0, InitialSign::Random, rng),
                 InputError);
}

TEST(SimulateEvents, ProbabilityOfNoEventsMatchesPoisson) {
    const std::size_t reps = 100000;
    const auto profile = RateProfile::constant(2.0);
    std::size_t empty = 0;
    RandomStream rng(11);
    for (std::size_t r = 0; r < reps; ++r) {
        empty += simulate_events(profile, 1.0, InitialSign::Random, rng).event_times.empty();
    }
    const double p = std::exp(-2.0);
    const double sd = std::sqrt(p * (1.0 - p) / static_cast<double>(reps));
    EXPECT_NEAR(static_cast<double>(empty) / static_cast<double>(reps), p, 3.0 * sd);
}

TEST(SimulateEvents, PiecewiseMeanCount) {
    const std::size_t reps = 10000;
    const auto profile = RateProfile::single_switch(1.0, 3.0, 5.0);
    double total = 0.0;
    RandomStream rng(12);
    for (std::size_t r = 0; r < reps; ++r) {
        const auto path = simulate_events(profile, 10.0, InitialSign::Random, rng);
        total += static_cast<double>(path.event_times.size());
        ASSERT_TRUE(std::is_sorted(path.event_times.begin(), path.event_times.end()));
        for (double t : path.event_times) {
            ASSERT_GT(t, 0.0);
            ASSERT_LE(t, 10.0);
        }
    }
    // Poisson: variance equals the mean, 20.
    const double sd = std::sqrt(20.0 / static_cast<double>(reps));
    EXPECT_NEAR(total / static_cast<double>(reps), 20.0, 3.0 * sd);
}

TEST(SimulateEvents, RandomInitialSignIsBalanced) {
    RandomStream rng(5);
    int positive = 0;
    const int reps = 20000;
    for (int r = 0; r < reps; ++r) {
        positive += simulate_events(RateProfile::constant(1.0), 1.0, InitialSign::Random, rng)
                        .initial_sign > 0;
    }
    EXPECT_NEAR(positive / static_cast<double>(reps), 0.5, 3.0 * std::sqrt(0.25 / reps));
}

TEST(IntegrateToGrid, BallisticWithoutEvents) {
    EventPath path;
    path.horizon = 2.0;
    path.initial_sign = 1;
    const GridSample s = integrate_to_grid(path, 1.0, 0.5);
    ASSERT_EQ(s.size(), 4u);
    const std::vector<double> expected = {0.0, 0.5, 1.0, 1.5, 2.0};
    for (std::size_t i = 0; i < expected.size(); ++i) {
        EXPECT_DOUBLE_EQ(s.values[i], expected[i]);
    }
    EXPECT_DOUBLE_EQ(*s.velocity, 1.0);
}

TEST(IntegrateToGrid, OneFlipByHand) {
    EventPath path;
    path.horizon = 2.0;
    path.initial_sign = 1;
    path.event_times = {0.6};
    const GridSample s = integrate_to_grid(path, 1.0, 1.0);
    EXPECT_NEAR(s.values[1], 0.2, 1e-15);
    EXPECT_NEAR(s.values[2], -0.8, 1e-15);
}

TEST(IntegrateToGrid, EventOnGridPointBelongsToEarlierInterval) {
    EventPath path;
    path.horizon = 3.0;
    path.initial_sign = -1;
    path.event_times = {1.0};
    const GridSample s = integrate_to_grid(path, 2.0, 1.0);
    EXPECT_DOUBLE_EQ(s.values[1], -2.0);
    EXPECT_DOUBLE_EQ(s.values[2], 0.0);
    EXPECT_DOUBLE_EQ(s.values[3], 2.0);
}

TEST(IntegrateToGrid, RejectsCoarseMesh) {
    EventPath path;
    path.horizon = 1.0;
    EXPECT_THROW(integrate_to_grid(path, 1.0, 1.0), InputError);
    EXPECT_THROW(integrate_to_grid(path, 1.0, 0.6), InputError);
    EXPECT_THROW(integrate_to_grid(path, 0.0, 0.1), InputError);
}

TEST(SimulateGrid, LipschitzBoundWithEqualityOnlyWithoutEvents) {
    RandomStream rng(21);
    const double v = 1.5;
    const double delta = 0.01;
    const auto profile = RateProfile::single_switch(5.0, 20.0, 10.0);
    const EventPath events = simulate_events(profile, 2000 * delta, InitialSign::Random, rng);
    const GridSample s = integrate_to_grid(events, v, delta);
    ASSERT_EQ(s.size(), 2000u);
    std::size_t e = 0;
    for (std::size_t i = 1; i <= s.size(); ++i) {
        const double t = static_cast<double>(i) * delta;
        bool any = false;
        while (e < events.event_times.size() && events.event_times[e] <= t) {
            any = true;
            ++e;
        }
        const double eta = std::abs(s.values[i] - s.values[i - 1]);
        // Rounding of position differences grows with |X|.
        const double slack = 1e-12 * (1.0 + std::abs(s.values[i]));
        ASSERT_LE(eta, v * delta + slack) << "interval " << i;
        if (any) {
            ASSERT_LT(eta, v * delta - slack) << "interval " << i;
        } else {
            ASSERT_NEAR(eta, v * delta, slack) << "interval " << i;
        }
    }
}

TEST(SimulateGrid, SlopeFollowsSignParity) {
    RandomStream rng(8);
    const double delta = 0.05;
    const EventPath events =
        simulate_events(RateProfile::constant(2.0), 400 * delta, InitialSign::Random, rng);
    const GridSample s = integrate_to_grid(events, 1.0, delta);
    std::size_t e = 0;
    std::size_t checked = 0;
    for (std::size_t i = 1; i <= s.size(); ++i) {
        const double lo = static_cast<double>(i - 1) * delta;
        const double hi = static_cast<double>(i) * delta;
        bool any = false;
        while (e < events.event_times.size() && events.event_times[e] <= hi) {
            any = any || events.event_times[e] > lo;
            ++e;
        }
        if (!any) {
            const double slope = (s.values[i] - s.values[i - 1]) / delta;
            EXPECT_NEAR(slope, events.sign_at(0.5 * (lo + hi)), 1e-9);
            ++checked;
        }
    }
    EXPECT_GT(checked, 100u);
}

TEST(SimulateGrid, DeterministicForSeed) {
    const auto profile = RateProfile::single_switch(1.0, 3.0, 50.0);
    RandomStream a(99);
    RandomStream b(99);
    const GridSample x = simulate_grid(profile, 1.0, 0.01, 10000, InitialSign::Random, a);
    const GridSample y = simulate_grid(profile, 1.0, 0.01, 10000, InitialSign::Random, b);
    EXPECT_EQ(x.values, y.values);
    RandomStream c(100);
    const GridSample z = simulate_grid(profile, 1.0, 0.01, 10000, InitialSign::Random, c);
    EXPECT_NE(x.values, z.values);
}

TEST(SimulateGrid, SwitchFractionMatchesLaw) {
    const double lambda = 2.0;
    const double delta = 0.01;
    const std::size_t n = 100000;
    RandomStream rng(4);
    const GridSample s =
        simulate_grid(RateProfile::constant(lambda), 1.0, delta, n, InitialSign::Random, rng);
    std::size_t shortened = 0;
    for (std::size_t i = 1; i <= n; ++i) {
        shortened += std::abs(s.values[i] - s.values[i - 1]) < delta * (1.0 - 1e-9);
    }
    const double p = 1.0 - std::exp(-lambda * delta);
    const double sd = std::sqrt(p * (1.0 - p) / static_cast<double>(n));
    EXPECT_NEAR(static_cast<double>(shortened) / static_cast<double>(n), p, 3.0 * sd);
}

TEST(RandomStream, DerivedStreamsDifferAndRepeat) {
    EXPECT_EQ(derive_seed(1, 0), derive_seed(1, 0));
    EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
    EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
    RandomStream a = RandomStream::derived(7, 3);
    RandomStream b = RandomStream::derived(7, 3);
    for (int i = 0; i < 10; ++i) {
        EXPECT_EQ(a.next_u64(), b.next_u64());
    }
}

TEST(RandomStream, UniformIsOpenInterval) {
    RandomStream rng(0);
    double lo = 1.0;
    double hi = 0.0;
    double sum = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const double u = rng.uniform();
        lo = std::min(lo, u);
        hi = std::max(hi, u);
        sum += u;
    }
    EXPECT_GT(lo, 0.0);
    EXPECT_LT(hi, 1.0);
    EXPECT_NEAR(sum / 100000.0, 0.5, 0.005);
}

TEST(RandomStream, NormalMoments) {
    RandomStream rng(17);
    const int reps = 200000;
    double s1 = 0.0;
    double s2 = 0.0;
    for (int i = 0; i < reps; ++i) {
        const double z = rng.normal();
        s1 += z;
        s2 += z * z;
    }
    EXPECT_NEAR(s1 / reps, 0.0, 0.01);
    EXPECT_NEAR(s2 / reps, 1.0, 0.015);
}
