#pragma once

// Reference computations used by the tests. None of these call into the
// library; they are written directly from the closed forms.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

namespace oracle {

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// P(sup |B0| <= x) = 1 - 2 sum_{k>=1} (-1)^{k+1} exp(-2 k^2 x^2).
inline double kolmogorov_cdf(double x) {
    if (x <= 0.0) {
        return 0.0;
    }
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * x * x);
        sum += (k % 2 == 1 ? term : -term);
        if (term < 1e-17) {
            break;
        }
    }
    return 1.0 - 2.0 * sum;
}

/// Bisection inverse of an increasing CDF on [lo, hi].
inline double invert(const std::function<double(double)>& cdf, double p, double lo, double hi) {
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (cdf(mid) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

inline double kolmogorov_quantile(double p) { return invert(kolmogorov_cdf, p, 0.2, 4.0); }

/// CDF of argmax_v { W(v) - |v|/2 } with W two-sided standard Brownian motion.
inline double argmax_cdf(double x) {
    if (x < 0.0) {
        return 1.0 - argmax_cdf(-x);
    }
    const double pi = std::acos(-1.0);
    const double r = std::sqrt(x);
    return 1.0 + std::sqrt(x / (2.0 * pi)) * std::exp(-x / 8.0) -
           0.5 * (x + 5.0) * normal_cdf(-r / 2.0) + 1.5 * std::exp(x) * normal_cdf(-1.5 * r);
}

inline double argmax_quantile(double p) { return invert(argmax_cdf, p, -200.0, 200.0); }

/// Exact fraction num / den with den > 0.
struct Fraction {
    std::int64_t num = 0;
    std::int64_t den = 1;
};

inline bool less(const Fraction& a, const Fraction& b) { return a.num * b.den < b.num * a.den; }
inline bool equal(const Fraction& a, const Fraction& b) { return a.num * b.den == b.num * a.den; }

/// Profiles of a 0/1 sequence (Y_i = bits_i / delta with the 1/delta factor
/// dropped), computed by direct summation over each split.
struct BruteForce {
    std::vector<Fraction> abs_d;   // |D_k|, k = 1..n-1
    std::vector<Fraction> usq;     // U_k^2 in units of 1/delta^2
    std::vector<Fraction> kvsq;    // k (n-k) V_k^2 in units of 1/delta^2
    std::vector<Fraction> vsq;     // V_k^2 up to the common factor 1/(n delta)^2
    std::vector<double> usq_real;  // U_k^2 with the 1/delta^2 factor
    std::vector<double> vsq_real;  // n V_k^2 with the 1/delta^2 factor
    double total_ss = 0.0;
};

inline BruteForce brute_force(const std::vector<int>& bits, double delta) {
    const auto n = static_cast<std::int64_t>(bits.size());
    BruteForce out;
    std::int64_t total = 0;
    for (int b : bits) {
        total += b;
    }
    const double mean = static_cast<double>(total) / static_cast<double>(n) / delta;
    for (int b : bits) {
        const double y = b / delta;
        out.total_ss += (y - mean) * (y - mean);
    }
    for (std::int64_t k = 1; k < n; ++k) {
        std::int64_t left = 0;
        for (std::int64_t i = 0; i < k; ++i) {
            left += bits[static_cast<std::size_t>(i)];
        }
        const std::int64_t right = total - left;
        const std::int64_t m = n - k;

        // |k/n - left/total|
        std::int64_t dnum = k * total - left * n;
        out.abs_d.push_back({dnum < 0 ? -dnum : dnum, n * total});

        // sum over each side of (b - mean)^2 = c - c^2 / size
        out.usq.push_back({(left * k - left * left) * m + (right * m - right * right) * k, k * m});

        // k(n-k) * k(n-k)/n^2 * (right/m - left/k)^2
        const std::int64_t diff = right * k - left * m;
        out.kvsq.push_back({k * m * k * m * diff * diff, n * n * k * k * m * m});
        out.vsq.push_back({diff * diff, k * m});

        double ss = 0.0;
        const double ml = static_cast<double>(left) / static_cast<double>(k) / delta;
        const double mr = static_cast<double>(right) / static_cast<double>(m) / delta;
        for (std::int64_t i = 0; i < n; ++i) {
            const double y = bits[static_cast<std::size_t>(i)] / delta;
            const double c = i < k ? ml : mr;
            ss += (y - c) * (y - c);
        }
        out.usq_real.push_back(ss);
        const double kk = static_cast<double>(k);
        const double mm = static_cast<double>(m);
        const double nn = static_cast<double>(n);
        const double v = std::sqrt(kk * mm / (nn * nn)) * (mr - ml);
        out.vsq_real.push_back(nn * v * v);
    }
    return out;
}

/// Smallest k (1-based) at the extremum of `values` under `better`.
template <class T, class Better>
std::size_t first_best(const std::vector<T>& values, Better better) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (better(values[i], values[best])) {
            best = i;
        }
    }
    return best + 1;
}

/// Two-sample Kolmogorov-Smirnov distance.
inline double ks_distance(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t i = 0;
    std::size_t j = 0;
    double worst = 0.0;
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) {
            ++i;
        }
        while (j < b.size() && b[j] <= x) {
            ++j;
        }
        worst = std::max(worst, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return worst;
}

/// Empirical CDF of a sorted sample at x.
inline double ecdf(const std::vector<double>& sorted, double x) {
    const auto it = std::upper_bound(sorted.begin(), sorted.end(), x);
    return static_cast<double>(it - sorted.begin()) / static_cast<double>(sorted.size());
}

} // namespace oracle
