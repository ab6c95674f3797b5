#include "telegraph_cpd/inference.hpp"

#include "telegraph_cpd/error.hpp"
#include "telegraph_cpd/replication.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace telegraph {

namespace {

constexpr double kTrimMatch = 1e-12;

void require_alpha(double alpha, bool allow_one = false) {
    const bool ok = alpha > 0.0 && (allow_one ? alpha <= 1.0 : alpha < 1.0);
    if (!ok) {
        throw InputError("alpha must lie in (0, 1)");
    }
}

// Type-7 empirical quantile of sorted data.
double sorted_quantile(const std::vector<double>& sorted, double p) {
    const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= sorted.size()) {
        return sorted.back();
    }
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

Interval clipped(double lower, double upper, double floor_value, double ceiling_value) {
    Interval out;
    out.raw_lower = lower;
    out.raw_upper = upper;
    out.lower = std::clamp(lower, floor_value, ceiling_value);
    out.upper = std::clamp(upper, floor_value, ceiling_value);
    return out;
}

} // namespace

std::string to_string(TestVariant variant) {
    return variant == TestVariant::UnweightedSupD ? "unweighted-sup-D" : "weighted-sup-V";
}

std::string to_string(LimitLaw law) {
    switch (law) {
    case LimitLaw::BridgeSup:
        return "bridge-sup";
    case LimitLaw::WeightedBridgeSup:
        return "weighted-bridge-sup";
    case LimitLaw::ArgmaxTwoSidedBM:
        return "argmax-two-sided-bm";
    }
    return "unknown";
}

TestVariant parse_variant(const std::string& text) {
    if (text == "unweighted-sup-D" || text == "unweighted") {
        return TestVariant::UnweightedSupD;
    }
    if (text == "weighted-sup-V" || text == "weighted") {
        return TestVariant::WeightedSupV;
    }
    throw InputError("unknown test variant '" + text + "'");
}

LimitLaw parse_law(const std::string& text) {
    for (LimitLaw law : {LimitLaw::BridgeSup, LimitLaw::WeightedBridgeSup,
                         LimitLaw::ArgmaxTwoSidedBM}) {
        if (text == to_string(law)) {
            return law;
        }
    }
    throw InputError("unknown limit law '" + text + "'");
}

LimitLaw law_for(TestVariant variant) {
    return variant == TestVariant::UnweightedSupD ? LimitLaw::BridgeSup
                                                  : LimitLaw::WeightedBridgeSup;
}

std::string to_string(TauPlugin plugin) {
    switch (plugin) {
    case TauPlugin::Pooled:
        return "pooled";
    case TauPlugin::Left:
        return "left";
    case TauPlugin::Right:
        return "right";
    }
    return "unknown";
}

TauPlugin parse_tau_plugin(const std::string& text) {
    for (TauPlugin p : {TauPlugin::Pooled, TauPlugin::Left, TauPlugin::Right}) {
        if (text == to_string(p)) {
            return p;
        }
    }
    throw InputError("unknown tau plug-in '" + text + "'");
}

std::vector<double> default_probabilities() {
    return {0.90, 0.95, 0.99};
}

double LimitQuantiles::quantile(double p) const {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw InputError("quantile probability must lie in [0, 1]");
    }
    if (const auto it = quantiles.find(p); it != quantiles.end()) {
        return it->second;
    }
    if (table.size() < 2) {
        throw InputError("quantile table is empty");
    }
    const double points = static_cast<double>(table.size() - 1);
    const double h = p * points;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= table.size()) {
        return table.back();
    }
    return table[lo] + (h - static_cast<double>(lo)) * (table[lo + 1] - table[lo]);
}

double LimitQuantiles::cdf(double x) const {
    if (table.size() < 2) {
        throw InputError("quantile table is empty");
    }
    if (x < table.front()) {
        return 0.0;
    }
    if (x >= table.back()) {
        return 1.0;
    }
    const auto upper = std::upper_bound(table.begin(), table.end(), x);
    const auto j = static_cast<std::size_t>(upper - table.begin());
    const std::size_t i = j - 1;
    const double frac = (x - table[i]) / (table[j] - table[i]);
    return (static_cast<double>(i) + frac) / static_cast<double>(table.size() - 1);
}

PValue p_value(const LimitQuantiles& law, double statistic) {
    // Resolution of the simulated law is 1/replications.
    const double floor = 1.0 / static_cast<double>(std::max<std::size_t>(law.replications, 1));
    const double tail = 1.0 - law.cdf(statistic);
    if (statistic >= law.table.back() || tail <= floor) {
        return {floor, true};
    }
    return {tail, false};
}

LimitQuantiles tabulate(std::vector<double> draws, std::span<const double> probabilities,
                        std::size_t table_points) {
    if (draws.empty() || table_points < 1) {
        throw InputError("cannot tabulate an empty sample");
    }
    std::sort(draws.begin(), draws.end());
    LimitQuantiles out;
    out.replications = draws.size();
    out.table.resize(table_points + 1);
    for (std::size_t i = 0; i <= table_points; ++i) {
        out.table[i] = sorted_quantile(draws, static_cast<double>(i) /
                                                  static_cast<double>(table_points));
    }
    for (double p : probabilities) {
        if (!(p > 0.0 && p < 1.0)) {
            throw InputError("requested probability levels must lie in (0, 1)");
        }
        out.quantiles[p] = sorted_quantile(draws, p);
    }
    return out;
}

double bridge_sup_draw(double trim, TestVariant variant, std::size_t grid_size,
                       RandomStream& rng, std::vector<double>& scratch) {
    const std::size_t m = grid_size;
    const double h = 1.0 / static_cast<double>(m);
    const double step_sd = std::sqrt(h);
    scratch.resize(m + 1);

    scratch[0] = 0.0;
    for (std::size_t j = 1; j <= m; ++j) {
        scratch[j] = scratch[j - 1] + step_sd * rng.normal();
    }
    const double endpoint = scratch[m];
    for (std::size_t j = 1; j < m; ++j) {
        scratch[j] -= static_cast<double>(j) * h * endpoint;
    }
    scratch[m] = 0.0;

    const double lo = trim - 1e-12;
    const double hi = 1.0 - trim + 1e-12;
    double best = 0.0;
    for (std::size_t j = 1; j <= m; ++j) {
        // Both uniforms are drawn for every cell so that the path and its
        // cell extremes do not depend on the trim.
        const double u_max = rng.uniform();
        const double u_min = rng.uniform();
        const double t0 = static_cast<double>(j - 1) * h;
        const double t1 = static_cast<double>(j) * h;
        if (t0 < lo || t1 > hi) {
            continue;
        }
        const double x = scratch[j - 1];
        const double y = scratch[j];
        const double gap = (y - x) * (y - x);
        const double top = 0.5 * (x + y + std::sqrt(gap - 2.0 * h * std::log(u_max)));
        const double bottom = 0.5 * (x + y - std::sqrt(gap - 2.0 * h * std::log(u_min)));
        double extreme = std::max(top, -bottom);
        if (variant == TestVariant::WeightedSupV) {
            const double mid = 0.5 * (t0 + t1);
            extreme /= std::sqrt(mid * (1.0 - mid));
        }
        best = std::max(best, extreme);
    }
    return best;
}

LimitQuantiles simulate_bridge_sup(const BridgeOptions& options) {
    if (!(options.trim >= 0.0 && options.trim < 0.5)) {
        throw InputError("trim must lie in [0, 1/2)");
    }
    if (options.variant == TestVariant::WeightedSupV && !(options.trim > 0.0)) {
        throw InputError("the weighted bridge supremum needs a positive trim");
    }
    if (options.grid_size < 1000) {
        throw InputError("bridge grid size must be at least 1000");
    }
    if (options.replications < 10000) {
        throw InputError("bridge calibration needs at least 10000 replications");
    }

    auto draws = run_replications(
        options.replications, options.seed, options.workers,
        [&](std::size_t, RandomStream& rng) {
            thread_local std::vector<double> scratch;
            return bridge_sup_draw(options.trim, options.variant, options.grid_size, rng,
                                   scratch);
        });

    LimitQuantiles out = tabulate(std::move(draws), options.probabilities);
    out.law = law_for(options.variant);
    out.trim = options.trim;
    out.grid_size = options.grid_size;
    out.seed = options.seed;
    return out;
}

double argmax_draw(double span, std::size_t grid_size, RandomStream& rng) {
    const double h = span / static_cast<double>(grid_size);
    const double step_sd = std::sqrt(h);
    const double drift = 0.5 * h;

    double best[2] = {0.0, 0.0};
    std::size_t where[2] = {0, 0};
    for (int side = 0; side < 2; ++side) {
        double walk = 0.0;
        for (std::size_t j = 1; j <= grid_size; ++j) {
            walk += step_sd * rng.normal() - drift;
            if (walk > best[side]) {
                best[side] = walk;
                where[side] = j;
            }
        }
    }
    if (best[0] > best[1]) {
        return -static_cast<double>(where[0]) * h;
    }
    return static_cast<double>(where[1]) * h;
}

LimitQuantiles simulate_argmax_law(const ArgmaxOptions& options) {
    if (!(options.span > 0.0) || !std::isfinite(options.span)) {
        throw InputError("argmax span must be positive");
    }
    if (options.grid_size < 1000) {
        throw InputError("argmax grid must have at least 1000 steps per side");
    }
    if (options.replications < 10000) {
        throw InputError("argmax calibration needs at least 10000 replications");
    }
    auto draws = run_replications(options.replications, options.seed, options.workers,
                                  [&](std::size_t, RandomStream& rng) {
                                      return argmax_draw(options.span, options.grid_size, rng);
                                  });
    LimitQuantiles out = tabulate(std::move(draws), options.probabilities);
    out.law = LimitLaw::ArgmaxTwoSidedBM;
    out.span = options.span;
    out.grid_size = options.grid_size;
    out.seed = options.seed;
    return out;
}

double h0_statistic(const StatProfile& profile, double delta, double lambda0, double trim,
                    TestVariant variant) {
    if (!(lambda0 > 0.0) || !std::isfinite(lambda0)) {
        throw InputError("lambda0 must be positive and finite");
    }
    if (!(trim > 0.0 && trim < 0.5)) {
        throw InputError("trim must lie in (0, 1/2)");
    }
    const SplitRange range = trimmed_range(profile.n, trim);
    const double nd = static_cast<double>(profile.n);
    double best = 0.0;
    for (std::size_t k = range.first; k <= range.last; ++k) {
        double value = std::abs(profile.d[k - 1]);
        if (variant == TestVariant::WeightedSupV) {
            const double t = static_cast<double>(k) / nd;
            value /= std::sqrt(t * (1.0 - t));
        }
        best = std::max(best, value);
    }
    return std::sqrt(nd * delta * lambda0) * best;
}

double h0_statistic(const IndicatorSeries& y, double lambda0, double trim, TestVariant variant) {
    return h0_statistic(stat_profile(y), y.delta, lambda0, trim, variant);
}

double lambda0_plugin(const IndicatorSeries& y) {
    y.validate();
    return lambda_from_gamma(y.mean(), y.delta);
}

TestResult h0_test(const IndicatorSeries& y, const TestOptions& options,
                   const LimitQuantiles& calibration) {
    require_alpha(options.alpha);
    if (calibration.law != law_for(options.variant)) {
        throw InputError("calibration law " + to_string(calibration.law) +
                         " does not match test variant " + to_string(options.variant));
    }
    if (std::abs(calibration.trim - options.trim) > kTrimMatch) {
        throw InputError("calibration trim does not match the test trim");
    }

    TestResult result;
    result.variant = options.variant;
    result.trim = options.trim;
    result.alpha = options.alpha;
    result.lambda0_is_plugin = !options.lambda0.has_value();
    result.lambda0 = options.lambda0 ? *options.lambda0 : lambda0_plugin(y);
    result.statistic = h0_statistic(y, result.lambda0, options.trim, options.variant);
    result.critical_value = calibration.quantile(1.0 - options.alpha);
    result.p_value = p_value(calibration, result.statistic);
    result.reject = result.statistic > result.critical_value;
    return result;
}

TauInterval tau_confidence_interval(const ChangePointFit& fit, const LimitQuantiles& argmax_law,
                                    double alpha, TauPlugin plugin,
                                    std::optional<double> plugin_override) {
    require_alpha(alpha, true);
    if (argmax_law.law != LimitLaw::ArgmaxTwoSidedBM) {
        throw InputError("tau interval needs the argmax two-sided Brownian motion law");
    }
    const double jump = fit.gamma_jump();
    if (jump == 0.0) {
        throw Unanalyzable(UnanalyzableReason::NoRateChange,
                           "no estimated rate change; interval undefined");
    }

    double lambda = 0.0;
    if (plugin_override) {
        lambda = *plugin_override;
    } else {
        switch (plugin) {
        case TauPlugin::Pooled:
            lambda = lambda_from_gamma(fit.gamma_pooled(), fit.delta);
            break;
        case TauPlugin::Left:
            lambda = fit.lambda1;
            break;
        case TauPlugin::Right:
            lambda = fit.lambda2;
            break;
        }
    }

    const double scale =
        lambda / (static_cast<double>(fit.n) * fit.delta * jump * jump);
    const double q_upper = argmax_law.quantile(1.0 - alpha / 2.0);
    const double q_lower = argmax_law.quantile(alpha / 2.0);

    TauInterval out;
    out.alpha = alpha;
    out.plugin_lambda = lambda;
    out.interval = clipped(fit.tau_hat - scale * q_upper, fit.tau_hat - scale * q_lower, 0.0, 1.0);
    return out;
}

LambdaIntervals lambda_confidence(const ChangePointFit& fit, double alpha) {
    require_alpha(alpha);
    if (!(fit.tau_hat > 0.0 && fit.tau_hat < 1.0)) {
        throw InputError("tau_hat must lie strictly inside (0, 1)");
    }
    const boost::math::normal_distribution<double> standard;
    const double z = boost::math::quantile(standard, 1.0 - alpha / 2.0);
    const double horizon = static_cast<double>(fit.n) * fit.delta;

    auto interval = [&](double lambda, double fraction) {
        const double half = z * std::sqrt(lambda / (fraction * horizon));
        return clipped(lambda - half, lambda + half, 0.0, std::numeric_limits<double>::infinity());
    };

    LambdaIntervals out;
    out.alpha = alpha;
    out.left = interval(fit.lambda1, fit.tau_hat);
    out.right = interval(fit.lambda2, 1.0 - fit.tau_hat);
    return out;
}

} // namespace telegraph
