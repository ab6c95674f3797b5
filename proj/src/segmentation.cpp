#include "telegraph_cpd/segmentation.hpp"

#include <algorithm>
#include <cmath>

namespace telegraph {

void PriceSeries::validate() const {
    if (prices.size() < 3) {
        throw InputError("a price series needs at least 3 observations");
    }
    if (!labels.empty() && labels.size() != prices.size()) {
        throw InputError("price labels and values differ in length");
    }
    for (std::size_t i = 0; i < prices.size(); ++i) {
        if (!(prices[i] > 0.0) || !std::isfinite(prices[i])) {
            throw InputError("price " + std::to_string(i + 1) + " is not a positive number");
        }
    }
}

GridSample returns_from_prices(const PriceSeries& prices, double delta) {
    prices.validate();
    if (!(delta > 0.0) || !std::isfinite(delta)) {
        throw InputError("mesh delta must be positive and finite");
    }
    GridSample sample;
    sample.delta = delta;
    sample.values.reserve(prices.prices.size());
    sample.values.push_back(0.0);
    for (std::size_t i = 1; i < prices.prices.size(); ++i) {
        const double previous = prices.prices[i - 1];
        sample.values.push_back((prices.prices[i] - previous) / previous);
    }
    return sample;
}

std::size_t SegmentationConfig::effective_min_segment() const {
    if (min_segment_length != 0) {
        return min_segment_length;
    }
    const auto by_trim = static_cast<std::size_t>(std::ceil(2.0 / trim - 1e-9));
    const auto by_range = static_cast<std::size_t>(std::ceil(2.0 / (1.0 - 2.0 * trim) - 1e-9));
    return std::max({by_trim, by_range, std::size_t{2}});
}

void SegmentationConfig::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw InputError("alpha must lie in (0, 1)");
    }
    if (!(trim > 0.0 && trim < 0.5)) {
        throw InputError("trim must lie in (0, 1/2)");
    }
    if (max_depth < 1) {
        throw InputError("max depth must be at least 1");
    }
    const auto smallest = static_cast<std::size_t>(std::ceil(2.0 / (1.0 - 2.0 * trim) - 1e-9));
    if (min_segment_length != 0 && min_segment_length < std::max<std::size_t>(smallest, 2)) {
        throw InputError("minimum segment length must be at least " +
                         std::to_string(std::max<std::size_t>(smallest, 2)) +
                         " so that the trimmed range is nonempty");
    }
}

namespace {

TestOptions test_options(const SegmentationConfig& config) {
    TestOptions options;
    options.trim = config.trim;
    options.variant = config.variant;
    options.alpha = config.alpha;
    return options;
}

} // namespace

TestResult test_increments(std::span<const double> increments, double delta,
                           std::optional<double> velocity, const SegmentationConfig& config,
                           const Calibration& calibration) {
    const double v = velocity ? *velocity : estimate_velocity(increments, delta);
    return h0_test(indicator_series(increments, delta, v), test_options(config),
                   calibration.bridge);
}

SegmentDetection detect_increments(std::span<const double> increments, double delta,
                                   std::optional<double> velocity,
                                   const SegmentationConfig& config,
                                   const Calibration& calibration) {
    config.validate();
    if (increments.size() < config.effective_min_segment()) {
        throw Unanalyzable(UnanalyzableReason::TooShort,
                           "segment of " + std::to_string(increments.size()) +
                               " increments is shorter than the minimum");
    }

    SegmentDetection out;
    out.velocity_estimated = !velocity.has_value();
    out.velocity = velocity ? *velocity : estimate_velocity(increments, delta);

    const IndicatorSeries y = indicator_series(increments, delta, out.velocity);
    out.fit = change_point(y, trimmed_range(y.size(), config.trim));
    out.fit.v_hat = out.velocity;

    out.test = h0_test(y, test_options(config), calibration.bridge);

    out.ci_lambda = lambda_confidence(out.fit, config.alpha);
    if (calibration.argmax && out.fit.gamma_jump() != 0.0) {
        out.ci_tau = tau_confidence_interval(out.fit, *calibration.argmax, config.alpha,
                                             config.tau_plugin);
    }
    return out;
}

SegmentDetection detect_segment(const GridSample& sample, const SegmentationConfig& config,
                                const Calibration& calibration) {
    sample.validate();
    const auto eta = sample.increments();
    return detect_increments(eta, sample.delta, sample.velocity, config, calibration);
}

std::string to_string(SegmentStatus status) {
    switch (status) {
    case SegmentStatus::Split:
        return "split";
    case SegmentStatus::NotSignificant:
        return "not_significant";
    case SegmentStatus::ChildTooShort:
        return "child_too_short";
    case SegmentStatus::DepthLimit:
        return "depth_limit";
    case SegmentStatus::TooShort:
        return "too_short";
    case SegmentStatus::Unanalyzable:
        return "unanalyzable";
    }
    return "unknown";
}

std::vector<std::size_t> SegmentationReport::changes() const {
    auto out = changes_in_discovery_order();
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::size_t> SegmentationReport::changes_in_discovery_order() const {
    std::vector<std::size_t> out;
    for (const auto& node : segments) {
        if (node.split()) {
            out.push_back(*node.candidate_index);
        }
    }
    return out;
}

namespace {

class Segmenter {
public:
    Segmenter(const GridSample& sample, const SegmentationConfig& config,
              const Calibration& calibration)
        : eta_(sample.increments()), delta_(sample.delta), velocity_(sample.velocity),
          config_(config), calibration_(calibration),
          min_length_(config.effective_min_segment()),
          depth_limit_(std::max(config.max_depth, config.force_depth)) {}

    void run(std::size_t start, std::size_t end, std::size_t depth,
             std::optional<std::size_t> parent) {
        const std::size_t index = report_.segments.size();
        report_.segments.push_back({});
        {
            SegmentNode& node = report_.segments[index];
            node.start = start;
            node.end = end;
            node.depth = depth;
            node.parent = parent;
        }
        if (parent) {
            report_.segments[*parent].children.push_back(index);
        }

        SegmentNode& node = report_.segments[index];
        if (depth > depth_limit_) {
            node.status = SegmentStatus::DepthLimit;
            return;
        }
        if (end - start < min_length_) {
            node.status = SegmentStatus::TooShort;
            return;
        }
        const std::span<const double> window(eta_.data() + start, end - start);
        try {
            node.detection = detect_increments(window, delta_, velocity_, config_, calibration_);
            node.test = node.detection->test;
        } catch (const Unanalyzable& e) {
            node.status = SegmentStatus::Unanalyzable;
            node.reason = std::string(to_string(e.reason())) + ": " + e.what();
            try {
                node.test = test_increments(window, delta_, velocity_, config_, calibration_);
            } catch (const Unanalyzable&) {
                // No test either; the reason above stands.
            }
            return;
        }

        const std::size_t k = node.detection->fit.k_hat;
        const std::size_t change = start + k;
        node.candidate_index = change;
        const bool gate = node.detection->test.reject || depth <= config_.force_depth;
        if (!gate) {
            node.status = SegmentStatus::NotSignificant;
            return;
        }
        if (k < min_length_ || end - change < min_length_) {
            node.status = SegmentStatus::ChildTooShort;
            return;
        }
        node.status = SegmentStatus::Split;
        // `node` may dangle once children are appended.
        run(start, change, depth + 1, index);
        run(change, end, depth + 1, index);
    }

    SegmentationReport take() { return std::move(report_); }

private:
    std::vector<double> eta_;
    double delta_;
    std::optional<double> velocity_;
    const SegmentationConfig& config_;
    const Calibration& calibration_;
    std::size_t min_length_;
    std::size_t depth_limit_;
    SegmentationReport report_;
};

} // namespace

SegmentationReport binary_segment(const GridSample& sample, const SegmentationConfig& config,
                                  const Calibration& calibration) {
    sample.validate();
    config.validate();
    Segmenter segmenter(sample, config, calibration);
    segmenter.run(0, sample.size(), 1, std::nullopt);
    SegmentationReport report = segmenter.take();
    report.n = sample.size();
    report.delta = sample.delta;
    return report;
}

} // namespace telegraph
