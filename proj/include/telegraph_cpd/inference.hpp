#pragma once

#include "telegraph_cpd/estimators.hpp"

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace telegraph {

enum class TestVariant {
    UnweightedSupD, // sqrt(n delta lambda0) max |D_k|
    WeightedSupV,   // same with weight (t(1-t))^{-1/2}, t = k/n
};

enum class LimitLaw {
    BridgeSup,         // sup over [trim, 1-trim] of |B0(t)|
    WeightedBridgeSup, // sup over [trim, 1-trim] of (t(1-t))^{-1/2} |B0(t)|
    ArgmaxTwoSidedBM,  // argmax_v { W(v) - |v|/2 }
};

std::string to_string(TestVariant variant);
std::string to_string(LimitLaw law);
TestVariant parse_variant(const std::string& text);
LimitLaw parse_law(const std::string& text);
LimitLaw law_for(TestVariant variant);

/// Probability levels tabulated by default: 0.90, 0.95, 0.99.
std::vector<double> default_probabilities();

/// Empirical distribution of a simulated limit law. `table` holds the
/// quantiles at probabilities i / (table.size() - 1); `quantiles` holds the
/// explicitly requested levels.
struct LimitQuantiles {
    LimitLaw law = LimitLaw::BridgeSup;
    double trim = 0.0;      // bridge laws only
    double span = 0.0;      // argmax law only
    std::size_t grid_size = 0;
    std::size_t replications = 0;
    std::uint64_t seed = 0;
    std::map<double, double> quantiles;
    std::vector<double> table;

    /// Quantile at probability p, exact for requested levels, otherwise
    /// linearly interpolated in `table`.
    double quantile(double p) const;
    /// Interpolated empirical CDF.
    double cdf(double x) const;
};

struct PValue {
    double value = 1.0;
    bool upper_bound = false; // value is the 1 / replications floor
};

/// 1 - cdf(statistic), floored at 1 / replications. At the floor the value
/// is only an upper bound.
PValue p_value(const LimitQuantiles& law, double statistic);

/// Builds a LimitQuantiles from raw simulated values (sorted internally).
LimitQuantiles tabulate(std::vector<double> draws, std::span<const double> probabilities,
                        std::size_t table_points = 1000);

struct BridgeOptions {
    double trim = 0.0;
    TestVariant variant = TestVariant::UnweightedSupD;
    std::size_t grid_size = 1000;
    std::size_t replications = 100000;
    std::uint64_t seed = 1;
    unsigned workers = 0;
    std::vector<double> probabilities = default_probabilities();
};

/// Simulates the trimmed (weighted) supremum of a Brownian bridge. The bridge
/// is sampled on a uniform grid; within each grid cell the maximum and minimum
/// are drawn exactly from the conditional bridge-extreme law, so the result
/// has no discrete-monitoring bias for the unweighted law.
LimitQuantiles simulate_bridge_sup(const BridgeOptions& options);

/// One draw of the bridge supremum; exposed for the calibration tests.
double bridge_sup_draw(double trim, TestVariant variant, std::size_t grid_size,
                       RandomStream& rng, std::vector<double>& scratch);

struct ArgmaxOptions {
    double span = 50.0;
    std::size_t grid_size = 5000; // steps per side
    std::size_t replications = 20000;
    std::uint64_t seed = 1;
    unsigned workers = 0;
    std::vector<double> probabilities = {0.025, 0.05, 0.5, 0.95, 0.975};
};

/// Simulates argmax_v { W(v) - |v|/2 } on [-span, span] with two independent
/// Brownian motions.
LimitQuantiles simulate_argmax_law(const ArgmaxOptions& options);

double argmax_draw(double span, std::size_t grid_size, RandomStream& rng);

/// sqrt(n delta lambda0) max over the trimmed range of |D_k|, or of
/// (t(1-t))^{-1/2} |D_k| = |V_k| / Ybar_n for the weighted variant.
double h0_statistic(const IndicatorSeries& y, double lambda0, double trim, TestVariant variant);
double h0_statistic(const StatProfile& profile, double delta, double lambda0, double trim,
                    TestVariant variant);

/// Plug-in lambda0 from the whole series: lambda_from_gamma(Ybar_n, delta).
double lambda0_plugin(const IndicatorSeries& y);

struct TestResult {
    double statistic = 0.0;
    TestVariant variant = TestVariant::UnweightedSupD;
    double trim = 0.0;
    double lambda0 = 0.0;
    bool lambda0_is_plugin = true;
    double critical_value = 0.0;
    PValue p_value;
    bool reject = false;
    double alpha = 0.05;
};

struct TestOptions {
    double trim = 0.05;
    TestVariant variant = TestVariant::UnweightedSupD;
    double alpha = 0.05;
    std::optional<double> lambda0; // plug-in when absent
};

/// Test of H0: lambda1 = lambda2 against the simulated limit law. The law
/// must match the variant and the trim.
TestResult h0_test(const IndicatorSeries& y, const TestOptions& options,
                   const LimitQuantiles& calibration);

struct Interval {
    double lower = 0.0;
    double upper = 0.0;
    double raw_lower = 0.0; // before clipping
    double raw_upper = 0.0;
};

/// Rate used to scale the change-point interval. Pooled is the whole-series
/// estimate; Left and Right use lambda1 and lambda2.
enum class TauPlugin { Pooled, Left, Right };

std::string to_string(TauPlugin plugin);
TauPlugin parse_tau_plugin(const std::string& text);

struct TauInterval {
    Interval interval;
    double plugin_lambda = 0.0;
    double alpha = 0.0;
};

/// tau in [tau_hat - s q_{1-alpha/2}, tau_hat - s q_{alpha/2}] with
/// s = lambda / (n delta (gamma2 - gamma1)^2), clipped to [0, 1].
TauInterval tau_confidence_interval(const ChangePointFit& fit, const LimitQuantiles& argmax_law,
                                    double alpha, TauPlugin plugin = TauPlugin::Pooled,
                                    std::optional<double> plugin_override = {});

struct LambdaIntervals {
    Interval left;
    Interval right;
    double alpha = 0.0;
};

/// lambda_j +- z_{1-alpha/2} sqrt(lambda_j / (tau_j n delta)), tau_1 = tau_hat,
/// tau_2 = 1 - tau_hat. Lower ends are clipped at zero.
LambdaIntervals lambda_confidence(const ChangePointFit& fit, double alpha);

} // namespace telegraph
