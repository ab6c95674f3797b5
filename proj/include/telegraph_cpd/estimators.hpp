#pragma once

#include "telegraph_cpd/telegraph.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace telegraph {

/// Y_i = 1{|eta_i| < v * delta} / delta. Only the indicator bits are stored;
/// every Y_i is exactly 0 or exactly 1 / delta.
struct IndicatorSeries {
    double delta = 0.0;
    std::vector<std::uint8_t> hits;

    std::size_t size() const { return hits.size(); }
    /// Y_{i+1} (zero-based index i).
    double y(std::size_t i) const { return hits[i] != 0 ? 1.0 / delta : 0.0; }
    std::size_t count() const;
    /// Mean of Y over the whole series.
    double mean() const;
    void validate() const;
};

/// Relative slack on the |eta| < v * delta comparison. An increment of an
/// event-free interval equals v * delta up to the rounding of a difference of
/// positions, which is proportional to |X|, not to v * delta.
inline constexpr double kBallisticTolerance = 1e-9;

IndicatorSeries indicator_series(const GridSample& sample, double velocity);
IndicatorSeries indicator_series(std::span<const double> increments, double delta,
                                 double velocity);

enum class VelocityEstimator {
    AbsoluteIncrements, // (1/n) sum |eta_i| / delta
    SignedIncrements,   // (1/n) sum eta_i / delta, kept for comparison only
};

/// Throws Unanalyzable(DegeneratePath) when all increments vanish.
double estimate_velocity(const GridSample& sample,
                         VelocityEstimator kind = VelocityEstimator::AbsoluteIncrements);
double estimate_velocity(std::span<const double> increments, double delta,
                         VelocityEstimator kind = VelocityEstimator::AbsoluteIncrements);

/// Least-squares contrast profiles for k = 1..n-1, stored at index k - 1.
struct StatProfile {
    std::size_t n = 0;
    std::vector<double> d;     // D_k = k/n - S_k/S_n
    std::vector<double> vstat; // V_k = sqrt(k(n-k)/n^2) (mean right - mean left)
    std::vector<double> usq;   // U_k^2, residual sum of squares of the two-mean fit
    double total_ss = 0.0;     // sum (Y_i - mean)^2

    /// |k c_n - c_k n|, the exact numerator of |D_k| in hit counts.
    std::vector<std::int64_t> d_numerator;
};

/// Throws Unanalyzable(NoSwitches) when S_n = 0. All profiles are O(n).
StatProfile stat_profile(const IndicatorSeries& y);

/// Inclusive range of candidate split indices k.
struct SplitRange {
    std::size_t first = 1;
    std::size_t last = 1;
};

/// Indices k in [ceil(trim n), floor((1 - trim) n)] intersected with [1, n-1].
/// Throws Unanalyzable(TooShort) when empty.
SplitRange trimmed_range(std::size_t n, double trim);

/// Smallest k in `range` maximizing |D_k|, compared on exact integer numerators.
std::size_t argmax_abs_d(const StatProfile& profile, SplitRange range);

struct ChangePointFit {
    std::size_t n = 0;
    double delta = 0.0;
    std::size_t k_hat = 0;
    double tau_hat = 0.0;   // k_hat / n
    double theta_hat = 0.0; // k_hat * delta
    double gamma1 = 0.0;
    double gamma2 = 0.0;
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    std::optional<double> v_hat;
    StatProfile profile;

    double gamma_jump() const { return gamma2 - gamma1; }
    /// Mean of Y over all n observations.
    double gamma_pooled() const;
};

/// k_hat = argmax |D_k| over `range` (default 1..n-1), smallest k on ties.
/// The maximization is carried out on exact integer numerators.
/// Throws Unanalyzable(RateSaturated) when either segment is saturated.
ChangePointFit change_point(const IndicatorSeries& y, std::optional<SplitRange> range = {});

/// -log(1 - gamma * delta) / delta. Throws Unanalyzable(RateSaturated) when
/// gamma * delta = 1 and InputError outside [0, 1].
double lambda_from_gamma(double gamma, double delta);

} // namespace telegraph
