#include "telegraph_cpd/experiments.hpp"

#include "telegraph_cpd/error.hpp"
#include "telegraph_cpd/replication.hpp"
#include "telegraph_cpd/telegraph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace telegraph {

namespace {

ChangePointFit simulate_fit(const ExperimentConfig& config, std::size_t n, RandomStream& rng) {
    const double horizon = static_cast<double>(n) * config.delta;
    const auto profile =
        RateProfile::single_switch(config.lambda1, config.lambda2, config.tau * horizon);
    const GridSample path =
        simulate_grid(profile, config.velocity, config.delta, n, InitialSign::Random, rng);
    return change_point(indicator_series(path, config.velocity));
}

ExperimentResult consistency(const ExperimentConfig& config) {
    ExperimentResult out;
    out.replications.columns = {"horizon", "replication", "k_hat", "tau_hat", "abs_error",
                                "scaled_error"};
    out.summary.columns = {"horizon", "n", "median_abs_error", "mean_abs_error",
                           "median_scaled_error"};
    for (std::size_t h = 0; h < config.horizons.size(); ++h) {
        const double horizon = config.horizons[h];
        const auto n = static_cast<std::size_t>(std::llround(horizon / config.delta));
        const auto rows = run_replications(
            config.replications, derive_seed(config.seed, h), config.workers,
            [&](std::size_t r, RandomStream& rng) {
                const ChangePointFit fit = simulate_fit(config, n, rng);
                const double error = std::abs(fit.tau_hat - config.tau);
                const double jump = fit.gamma_jump();
                return std::vector<double>{horizon,
                                           static_cast<double>(r),
                                           static_cast<double>(fit.k_hat),
                                           fit.tau_hat,
                                           error,
                                           static_cast<double>(n) * config.delta * jump * jump *
                                               error};
            });
        std::vector<double> errors;
        std::vector<double> scaled;
        for (const auto& row : rows) {
            errors.push_back(row[4]);
            scaled.push_back(row[5]);
            out.replications.rows.push_back(row);
        }
        const double mean_error =
            std::accumulate(errors.begin(), errors.end(), 0.0) / static_cast<double>(errors.size());
        out.summary.rows.push_back({horizon, static_cast<double>(n), median(errors), mean_error,
                                    median(scaled)});
    }
    return out;
}

ExperimentResult tau_law(const ExperimentConfig& config, const LimitQuantiles& argmax_law) {
    ExperimentResult out;
    out.replications.columns = {"replication", "k_hat", "tau_hat", "scaled_error", "lower",
                                "upper", "covered"};
    const auto rows = run_replications(
        config.replications, config.seed, config.workers,
        [&](std::size_t r, RandomStream& rng) {
            const ChangePointFit fit = simulate_fit(config, config.n, rng);
            const TauInterval ci =
                tau_confidence_interval(fit, argmax_law, config.alpha, config.tau_plugin);
            const double jump = fit.gamma_jump();
            const double scaled = static_cast<double>(config.n) * config.delta * jump * jump *
                                  (fit.tau_hat - config.tau) / ci.plugin_lambda;
            const bool covered =
                ci.interval.lower <= config.tau && config.tau <= ci.interval.upper;
            return std::vector<double>{static_cast<double>(r),
                                       static_cast<double>(fit.k_hat),
                                       fit.tau_hat,
                                       scaled,
                                       ci.interval.lower,
                                       ci.interval.upper,
                                       covered ? 1.0 : 0.0};
        });
    std::vector<double> scaled;
    double covered = 0.0;
    for (const auto& row : rows) {
        scaled.push_back(row[3]);
        covered += row[6];
        out.replications.rows.push_back(row);
    }
    std::sort(scaled.begin(), scaled.end());
    out.summary.columns = {"coverage", "nominal", "scaled_q05", "law_q05", "scaled_q50",
                           "law_q50", "scaled_q95", "law_q95"};
    auto q = [&](double p) {
        const auto idx = static_cast<std::size_t>(p * static_cast<double>(scaled.size() - 1));
        return scaled[idx];
    };
    out.summary.rows.push_back({covered / static_cast<double>(rows.size()), 1.0 - config.alpha,
                                q(0.05), argmax_law.quantile(0.05), q(0.5),
                                argmax_law.quantile(0.5), q(0.95), argmax_law.quantile(0.95)});
    return out;
}

ExperimentResult lambda_normality(const ExperimentConfig& config) {
    ExperimentResult out;
    out.replications.columns = {"replication", "lambda1_hat", "lambda2_hat", "z1", "z2"};
    const double root = std::sqrt(static_cast<double>(config.n) * config.delta);
    const auto rows = run_replications(
        config.replications, config.seed, config.workers,
        [&](std::size_t r, RandomStream& rng) {
            const ChangePointFit fit = simulate_fit(config, config.n, rng);
            return std::vector<double>{static_cast<double>(r), fit.lambda1, fit.lambda2,
                                       root * (fit.lambda1 - config.lambda1),
                                       root * (fit.lambda2 - config.lambda2)};
        });
    std::vector<double> z1;
    std::vector<double> z2;
    for (const auto& row : rows) {
        z1.push_back(row[3]);
        z2.push_back(row[4]);
        out.replications.rows.push_back(row);
    }
    const double target1 = config.lambda1 / config.tau;
    const double target2 = config.lambda2 / (1.0 - config.tau);
    out.summary.columns = {"var_z1", "target1", "ratio1", "var_z2", "target2", "ratio2",
                           "correlation"};
    const double v1 = sample_variance(z1);
    const double v2 = sample_variance(z2);
    out.summary.rows.push_back(
        {v1, target1, v1 / target1, v2, target2, v2 / target2, correlation(z1, z2)});
    return out;
}

ExperimentResult test_size(const ExperimentConfig& config, const LimitQuantiles& bridge) {
    ExperimentResult out;
    out.replications.columns = {"replication", "statistic", "p_value", "reject"};
    TestOptions options;
    options.trim = config.trim;
    options.alpha = config.alpha;
    options.variant = bridge.law == LimitLaw::WeightedBridgeSup ? TestVariant::WeightedSupV
                                                                : TestVariant::UnweightedSupD;
    const auto profile = RateProfile::constant(config.lambda1);
    const auto rows = run_replications(
        config.replications, config.seed, config.workers,
        [&](std::size_t r, RandomStream& rng) {
            const GridSample path = simulate_grid(profile, config.velocity, config.delta,
                                                  config.n, InitialSign::Random, rng);
            const TestResult result =
                h0_test(indicator_series(path, config.velocity), options, bridge);
            return std::vector<double>{static_cast<double>(r), result.statistic,
                                       result.p_value.value, result.reject ? 1.0 : 0.0};
        });
    double rejected = 0.0;
    for (const auto& row : rows) {
        rejected += row[3];
        out.replications.rows.push_back(row);
    }
    out.summary.columns = {"rejection_rate", "alpha", "critical_value"};
    out.summary.rows.push_back({rejected / static_cast<double>(rows.size()), config.alpha,
                                bridge.quantile(1.0 - config.alpha)});
    return out;
}

} // namespace

std::string to_string(Experiment experiment) {
    switch (experiment) {
    case Experiment::Consistency:
        return "consistency";
    case Experiment::TauLaw:
        return "tau-law";
    case Experiment::LambdaNormality:
        return "lambda-normality";
    case Experiment::TestSize:
        return "test-size";
    }
    return "unknown";
}

Experiment parse_experiment(const std::string& text) {
    for (Experiment e : {Experiment::Consistency, Experiment::TauLaw,
                         Experiment::LambdaNormality, Experiment::TestSize}) {
        if (text == to_string(e)) {
            return e;
        }
    }
    throw InputError("unknown experiment '" + text + "'");
}

void ExperimentConfig::validate() const {
    if (!(lambda1 > 0.0) || !(lambda2 > 0.0) || !(velocity > 0.0) || !(delta > 0.0)) {
        throw InputError("rates, velocity and delta must be positive");
    }
    if (!(tau > 0.0 && tau < 1.0)) {
        throw InputError("tau must lie in (0, 1)");
    }
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw InputError("alpha must lie in (0, 1)");
    }
    if (!(trim > 0.0 && trim < 0.5)) {
        throw InputError("trim must lie in (0, 1/2)");
    }
    if (replications < 2) {
        throw InputError("need at least 2 replications");
    }
    if (n < 2) {
        throw InputError("need at least 2 grid intervals");
    }
    for (double h : horizons) {
        if (!(h / delta >= 2.0)) {
            throw InputError("every horizon must span at least 2 grid intervals");
        }
    }
}

ExperimentResult run_experiment(const ExperimentConfig& config,
                                const std::optional<LimitQuantiles>& calibration) {
    config.validate();
    switch (config.experiment) {
    case Experiment::Consistency:
        return consistency(config);
    case Experiment::LambdaNormality:
        return lambda_normality(config);
    case Experiment::TauLaw:
        if (!calibration || calibration->law != LimitLaw::ArgmaxTwoSidedBM) {
            throw InputError("the tau-law study needs the argmax law calibration");
        }
        return tau_law(config, *calibration);
    case Experiment::TestSize:
        if (!calibration || calibration->law == LimitLaw::ArgmaxTwoSidedBM) {
            throw InputError("the test-size study needs a bridge law calibration");
        }
        return test_size(config, *calibration);
    }
    throw InputError("unknown experiment");
}

double median(std::vector<double> values) {
    if (values.empty()) {
        throw InputError("median of an empty sample");
    }
    const std::size_t mid = values.size() / 2;
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid),
                     values.end());
    const double upper = values[mid];
    if (values.size() % 2 == 1) {
        return upper;
    }
    const double lower = *std::max_element(values.begin(),
                                           values.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

double sample_variance(const std::vector<double>& values) {
    if (values.size() < 2) {
        throw InputError("variance needs at least 2 values");
    }
    const double mean =
        std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) {
        ss += (v - mean) * (v - mean);
    }
    return ss / static_cast<double>(values.size() - 1);
}

double correlation(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.size() < 2) {
        throw InputError("correlation needs two samples of equal length >= 2");
    }
    const double n = static_cast<double>(a.size());
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double sab = 0.0;
    double saa = 0.0;
    double sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

} // namespace telegraph
