#include "telegraph_cpd/estimators.hpp"

#include "telegraph_cpd/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace telegraph {

namespace {

constexpr double kSaturationSlack = 1e-12;

void require_mesh(double delta) {
    if (!(delta > 0.0) || !std::isfinite(delta)) {
        throw InputError("mesh delta must be positive and finite");
    }
}

// lambda for a segment with `hits` switching intervals out of `length`.
double lambda_from_counts(std::int64_t hits, std::int64_t length, double delta) {
    if (hits == length) {
        throw Unanalyzable(UnanalyzableReason::RateSaturated,
                           "rate saturated: every interval contains a switch");
    }
    const double fraction = static_cast<double>(hits) / static_cast<double>(length);
    return -std::log1p(-fraction) / delta;
}

} // namespace

std::size_t IndicatorSeries::count() const {
    return static_cast<std::size_t>(std::count_if(hits.begin(), hits.end(),
                                                   [](std::uint8_t h) { return h != 0; }));
}

double IndicatorSeries::mean() const {
    return static_cast<double>(count()) / (static_cast<double>(size()) * delta);
}

void IndicatorSeries::validate() const {
    require_mesh(delta);
    if (hits.size() < 2) {
        throw InputError("indicator series needs at least 2 entries");
    }
}

IndicatorSeries indicator_series(const GridSample& sample, double velocity) {
    sample.validate();
    const auto eta = sample.increments();
    return indicator_series(eta, sample.delta, velocity);
}

IndicatorSeries indicator_series(std::span<const double> increments, double delta,
                                 double velocity) {
    require_mesh(delta);
    if (!(velocity > 0.0) || !std::isfinite(velocity)) {
        throw InputError("velocity must be positive and finite");
    }
    if (increments.size() < 2) {
        throw InputError("indicator series needs at least 2 increments");
    }
    const double threshold = velocity * delta * (1.0 - kBallisticTolerance);
    IndicatorSeries series;
    series.delta = delta;
    series.hits.reserve(increments.size());
    for (double eta : increments) {
        series.hits.push_back(std::abs(eta) < threshold ? 1 : 0);
    }
    return series;
}

double estimate_velocity(const GridSample& sample, VelocityEstimator kind) {
    sample.validate();
    const auto eta = sample.increments();
    return estimate_velocity(eta, sample.delta, kind);
}

double estimate_velocity(std::span<const double> increments, double delta,
                         VelocityEstimator kind) {
    require_mesh(delta);
    if (increments.size() < 2) {
        throw InputError("velocity estimation needs at least 2 increments");
    }
    double absolute = 0.0;
    double signed_sum = 0.0;
    for (double eta : increments) {
        absolute += std::abs(eta);
        signed_sum += eta;
    }
    if (absolute == 0.0) {
        throw Unanalyzable(UnanalyzableReason::DegeneratePath,
                           "degenerate path: all increments are zero");
    }
    const double scale = static_cast<double>(increments.size()) * delta;
    return (kind == VelocityEstimator::AbsoluteIncrements ? absolute : signed_sum) / scale;
}

StatProfile stat_profile(const IndicatorSeries& y) {
    y.validate();
    const auto n = static_cast<std::int64_t>(y.size());

    std::vector<std::int64_t> prefix(y.size() + 1, 0);
    for (std::size_t i = 0; i < y.size(); ++i) {
        prefix[i + 1] = prefix[i] + (y.hits[i] != 0 ? 1 : 0);
    }
    const std::int64_t total = prefix.back();
    if (total == 0) {
        throw Unanalyzable(UnanalyzableReason::NoSwitches, "no switching events observed");
    }

    const double delta = y.delta;
    const double inv_delta_sq = 1.0 / (delta * delta);
    const double nd = static_cast<double>(n);

    StatProfile out;
    out.n = y.size();
    out.total_ss = static_cast<double>(total) * static_cast<double>(n - total) / nd * inv_delta_sq;
    out.d.reserve(y.size() - 1);
    out.vstat.reserve(y.size() - 1);
    out.usq.reserve(y.size() - 1);
    out.d_numerator.reserve(y.size() - 1);

    const double d_denominator = nd * static_cast<double>(total);
    for (std::int64_t k = 1; k < n; ++k) {
        const std::int64_t left = prefix[static_cast<std::size_t>(k)];
        const std::int64_t right = total - left;
        const std::int64_t m = n - k;
        const std::int64_t numerator = k * total - left * n;
        const double kd = static_cast<double>(k);
        const double md = static_cast<double>(m);

        out.d_numerator.push_back(numerator < 0 ? -numerator : numerator);
        out.d.push_back(static_cast<double>(numerator) / d_denominator);
        out.vstat.push_back(static_cast<double>(numerator) / (nd * delta * std::sqrt(kd * md)));
        const double rss_left = static_cast<double>(left) * static_cast<double>(k - left) / kd;
        const double rss_right = static_cast<double>(right) * static_cast<double>(m - right) / md;
        out.usq.push_back((rss_left + rss_right) * inv_delta_sq);
    }

    const double tolerance = 1e-9 * out.total_ss + 1e-300;
    for (std::size_t k = 0; k < out.usq.size(); ++k) {
        const double rebuilt = out.usq[k] + nd * out.vstat[k] * out.vstat[k];
        if (std::abs(rebuilt - out.total_ss) > tolerance) {
            throw std::logic_error("sum of squares decomposition violated at k = " +
                                   std::to_string(k + 1));
        }
    }
    return out;
}

SplitRange trimmed_range(std::size_t n, double trim) {
    if (!(trim >= 0.0) || !(trim < 0.5)) {
        throw InputError("trim must lie in [0, 1/2)");
    }
    const double nd = static_cast<double>(n);
    // Nudge against rounding so that e.g. 0.1 * 100 counts as 10.
    const auto first = static_cast<std::size_t>(std::ceil(trim * nd - 1e-9));
    const auto last = static_cast<std::size_t>(std::floor((1.0 - trim) * nd + 1e-9));
    SplitRange range{std::max<std::size_t>(first, 1), std::min(last, n == 0 ? 0 : n - 1)};
    if (n < 2 || range.first > range.last) {
        throw Unanalyzable(UnanalyzableReason::TooShort,
                           "trimmed index range is empty for n = " + std::to_string(n));
    }
    return range;
}

double ChangePointFit::gamma_pooled() const {
    const double kd = static_cast<double>(k_hat);
    const double nd = static_cast<double>(n);
    return (kd * gamma1 + (nd - kd) * gamma2) / nd;
}

std::size_t argmax_abs_d(const StatProfile& profile, SplitRange range) {
    if (range.first < 1 || range.last >= profile.n || range.first > range.last) {
        throw InputError("split range must be a nonempty subrange of [1, n-1]");
    }
    std::size_t best = range.first;
    for (std::size_t k = range.first + 1; k <= range.last; ++k) {
        if (profile.d_numerator[k - 1] > profile.d_numerator[best - 1]) {
            best = k;
        }
    }
    return best;
}

ChangePointFit change_point(const IndicatorSeries& y, std::optional<SplitRange> range) {
    ChangePointFit fit;
    fit.profile = stat_profile(y);
    fit.n = y.size();
    fit.delta = y.delta;

    const SplitRange r = range.value_or(SplitRange{1, fit.n - 1});

    const std::size_t best = argmax_abs_d(fit.profile, r);

    const auto n = static_cast<std::int64_t>(fit.n);
    const auto k = static_cast<std::int64_t>(best);
    const auto left_hits = static_cast<std::int64_t>(
        std::count_if(y.hits.begin(), y.hits.begin() + k, [](std::uint8_t h) { return h != 0; }));
    const auto right_hits = static_cast<std::int64_t>(y.count()) - left_hits;

    fit.k_hat = best;
    fit.tau_hat = static_cast<double>(best) / static_cast<double>(fit.n);
    fit.theta_hat = static_cast<double>(best) * y.delta;
    fit.gamma1 = static_cast<double>(left_hits) / (static_cast<double>(k) * y.delta);
    fit.gamma2 = static_cast<double>(right_hits) / (static_cast<double>(n - k) * y.delta);
    fit.lambda1 = lambda_from_counts(left_hits, k, y.delta);
    fit.lambda2 = lambda_from_counts(right_hits, n - k, y.delta);
    return fit;
}

double lambda_from_gamma(double gamma, double delta) {
    require_mesh(delta);
    const double x = gamma * delta;
    if (!(x >= 0.0) || x > 1.0 + kSaturationSlack) {
        throw InputError("gamma * delta must lie in [0, 1]");
    }
    if (x >= 1.0 - kSaturationSlack) {
        throw Unanalyzable(UnanalyzableReason::RateSaturated,
                           "rate saturated: every interval contains a switch");
    }
    return -std::log1p(-x) / delta;
}

} // namespace telegraph
