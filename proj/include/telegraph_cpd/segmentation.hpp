#pragma once

#include "telegraph_cpd/error.hpp"
#include "telegraph_cpd/estimators.hpp"
#include "telegraph_cpd/inference.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace telegraph {

/// Observed prices with opaque labels; only the order matters.
struct PriceSeries {
    std::vector<std::string> labels;
    std::vector<double> prices;

    void validate() const;
};

/// Nominal mesh for one observation step, in years.
inline constexpr double kWeeklyDelta = 1.0 / 52.0;
inline constexpr double kDailyDelta = 1.0 / 252.0;

/// X_0 = 0 and X_i = (W_i - W_{i-1}) / W_{i-1}, i = 1..n. The returns are the
/// observed path; velocity is left unset.
GridSample returns_from_prices(const PriceSeries& prices, double delta);

struct SegmentationConfig {
    double alpha = 0.05;
    double trim = 0.05;
    std::size_t min_segment_length = 0; // 0 selects the smallest admissible value
    std::size_t max_depth = 3;
    std::size_t force_depth = 0; // segments at depth <= force_depth split without the test gate
    TestVariant variant = TestVariant::UnweightedSupD;
    TauPlugin tau_plugin = TauPlugin::Pooled;

    /// max(ceil(2 / trim), ceil(2 / (1 - 2 trim))) unless set explicitly.
    std::size_t effective_min_segment() const;
    void validate() const;
};

/// Limit laws a segmentation run needs. `argmax` enables tau intervals.
struct Calibration {
    LimitQuantiles bridge;
    std::optional<LimitQuantiles> argmax;
};

struct SegmentDetection {
    double velocity = 0.0;
    bool velocity_estimated = false;
    ChangePointFit fit; // k_hat restricted to the trimmed range
    TestResult test;
    std::optional<TauInterval> ci_tau;
    std::optional<LambdaIntervals> ci_lambda;
};

/// Estimates v if the sample has none, builds the indicator series, fits the
/// change point on the trimmed range and runs the H0 test with the whole
/// segment plug-in. Throws Unanalyzable when the segment cannot be analyzed.
SegmentDetection detect_segment(const GridSample& sample, const SegmentationConfig& config,
                                const Calibration& calibration);

/// The H0 test alone on a run of increments (velocity estimated when absent).
TestResult test_increments(std::span<const double> increments, double delta,
                           std::optional<double> velocity, const SegmentationConfig& config,
                           const Calibration& calibration);

/// Same on a run of increments.
SegmentDetection detect_increments(std::span<const double> increments, double delta,
                                   std::optional<double> velocity,
                                   const SegmentationConfig& config,
                                   const Calibration& calibration);

enum class SegmentStatus {
    Split,          // change accepted, children follow
    NotSignificant, // test did not reject
    ChildTooShort,  // a child would fall under the minimum length
    DepthLimit,     // deeper than the depth limit, not analyzed
    TooShort,       // shorter than the minimum length, not analyzed
    Unanalyzable,   // analysis failed, see `reason`
};

std::string to_string(SegmentStatus status);

/// A node of the segmentation tree. Indices are global: the segment holds the
/// increments start+1..end, i.e. the grid points X_start..X_end.
struct SegmentNode {
    std::size_t start = 0;
    std::size_t end = 0;
    std::size_t depth = 1;
    std::optional<std::size_t> parent;
    std::vector<std::size_t> children;
    SegmentStatus status = SegmentStatus::TooShort;
    std::string reason;
    std::optional<SegmentDetection> detection;
    /// Global candidate index: start + k_hat. Set whenever detection succeeded.
    std::optional<std::size_t> candidate_index;
    /// H0 test on the whole segment. Also kept when only the fit failed
    /// (for instance a saturated side), so the segment still reports a p-value.
    std::optional<TestResult> test;

    std::size_t length() const { return end - start; }
    bool split() const { return status == SegmentStatus::Split; }
};

struct SegmentationReport {
    std::size_t n = 0;
    double delta = 0.0;
    std::vector<SegmentNode> segments; // depth-first order, root first

    /// Accepted change indices, ascending.
    std::vector<std::size_t> changes() const;
    /// Accepted change indices in the order they were found (depth-first).
    std::vector<std::size_t> changes_in_discovery_order() const;
};

/// Depth-first binary segmentation. A segment is split at its candidate when
/// the test rejects at alpha (or the depth is within force_depth) and both
/// children have at least the minimum length; velocity is re-estimated in
/// every child unless the sample carries it.
SegmentationReport binary_segment(const GridSample& sample, const SegmentationConfig& config,
                                  const Calibration& calibration);

} // namespace telegraph
