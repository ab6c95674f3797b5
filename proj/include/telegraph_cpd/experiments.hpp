#pragma once

#include "telegraph_cpd/inference.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace telegraph {

enum class Experiment { Consistency, TauLaw, LambdaNormality, TestSize };

std::string to_string(Experiment experiment);
Experiment parse_experiment(const std::string& text);

/// Monte Carlo study parameters. Paths are simulated from the telegraph
/// process with a single rate switch at tau (or a constant rate lambda1 for
/// the test-size study).
struct ExperimentConfig {
    Experiment experiment = Experiment::Consistency;
    double lambda1 = 1.0;
    double lambda2 = 3.0;
    double tau = 0.5;
    double velocity = 1.0;
    double delta = 0.01;
    std::size_t n = 20000;
    std::vector<double> horizons = {50.0, 100.0, 200.0}; // consistency study only
    std::size_t replications = 1000;
    std::uint64_t seed = 1;
    unsigned workers = 0;
    double alpha = 0.05;
    double trim = 0.05;
    TauPlugin tau_plugin = TauPlugin::Pooled;

    void validate() const;
};

/// Rectangular numeric table with named columns.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

struct ExperimentResult {
    Table replications;
    Table summary; // columns: metric-specific, one row per setting
};

/// Runs the study. `calibration` must hold the bridge law (test-size) or the
/// argmax law (tau-law); the other studies ignore it.
ExperimentResult run_experiment(const ExperimentConfig& config,
                                const std::optional<LimitQuantiles>& calibration = {});

double median(std::vector<double> values);
double sample_variance(const std::vector<double>& values);
double correlation(const std::vector<double>& a, const std::vector<double>& b);

} // namespace telegraph
