// Command-line front end: simulate, detect, test, calibrate, mc.
//
// Exit codes: 0 success, 2 input error, 3 unanalyzable data.

#include "telegraph_cpd/error.hpp"
#include "telegraph_cpd/estimators.hpp"
#include "telegraph_cpd/experiments.hpp"
#include "telegraph_cpd/inference.hpp"
#include "telegraph_cpd/io.hpp"
#include "telegraph_cpd/segmentation.hpp"
#include "telegraph_cpd/telegraph.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#ifndef TELEGRAPH_CPD_VERSION
#define TELEGRAPH_CPD_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using namespace telegraph;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitUnanalyzable = 3;

// ---------------------------------------------------------------------------
// Manifest

struct Manifest {
    std::string command;
    Json parameters = Json::object();
    std::uint64_t seed = 0;
    Json inputs = Json::array();

    void add_input(const std::string& path) {
        inputs.push_back({{"path", path}, {"fnv1a64", fnv1a64_hex(read_file(path))}});
    }

    /// Deterministic part, embedded in outputs.
    Json json() const {
        return Json{{"command", command},
                    {"version", TELEGRAPH_CPD_VERSION},
                    {"seed", seed},
                    {"parameters", parameters},
                    {"inputs", inputs}};
    }
};

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buffer[32];
    std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buffer;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw InputError("cannot write '" + path + "'");
    }
    out << text;
}

/// Sidecar manifest next to an output file; the only place holding a clock time.
void write_manifest_sidecar(const std::string& output, const Manifest& manifest) {
    Json json = manifest.json();
    json["created_at"] = utc_timestamp();
    write_text(output + ".manifest.json", json.dump(2) + "\n");
}

void emit_json(const std::string& path, const Json& json) {
    const std::string text = json.dump(2) + "\n";
    if (path.empty() || path == "-") {
        std::cout << text;
    } else {
        write_text(path, text);
    }
}

std::string table_csv(const Table& table) {
    std::ostringstream out;
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        out << (c ? "," : "") << table.columns[c];
    }
    out << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            out << (c ? "," : "") << format_double(row[c]);
        }
        out << '\n';
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Calibration lookup and cache

struct CalibrationRequest {
    LimitLaw law = LimitLaw::BridgeSup;
    double trim = 0.05;
    double span = 50.0;
    std::size_t grid = 1000;
    std::size_t reps = 100000;
    std::uint64_t seed = 1;
    unsigned workers = 0;
    std::vector<double> probabilities = default_probabilities();
};

std::string cache_key(const CalibrationRequest& r) {
    std::ostringstream key;
    key << to_string(r.law) << '|' << format_double(r.law == LimitLaw::ArgmaxTwoSidedBM ? 0.0 : r.trim)
        << '|' << format_double(r.law == LimitLaw::ArgmaxTwoSidedBM ? r.span : 0.0) << '|'
        << r.grid << '|' << r.reps << '|' << r.seed;
    return to_string(r.law) + "-" + fnv1a64_hex(key.str());
}

LimitQuantiles simulate_calibration(const CalibrationRequest& r) {
    if (r.law == LimitLaw::ArgmaxTwoSidedBM) {
        ArgmaxOptions options;
        options.span = r.span;
        options.grid_size = r.grid;
        options.replications = r.reps;
        options.seed = r.seed;
        options.workers = r.workers;
        options.probabilities = r.probabilities;
        return simulate_argmax_law(options);
    }
    BridgeOptions options;
    options.trim = r.trim;
    options.variant = r.law == LimitLaw::BridgeSup ? TestVariant::UnweightedSupD
                                                   : TestVariant::WeightedSupV;
    options.grid_size = r.grid;
    options.replications = r.reps;
    options.seed = r.seed;
    options.workers = r.workers;
    options.probabilities = r.probabilities;
    return simulate_bridge_sup(options);
}

LimitQuantiles load_calibration(const std::string& path) {
    Json json;
    try {
        json = Json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw InputError("'" + path + "' is not valid JSON: " + e.what());
    }
    return limit_quantiles_from_json(json.contains("calibration") ? json["calibration"] : json);
}

/// Explicit file first, then the cache directory, then a fresh simulation
/// (stored in the cache when one is configured).
LimitQuantiles obtain_calibration(const CalibrationRequest& request, const std::string& path,
                                  Manifest& manifest) {
    if (!path.empty()) {
        manifest.add_input(path);
        LimitQuantiles law = load_calibration(path);
        if (law.law != request.law) {
            throw InputError("calibration '" + path + "' holds law " + to_string(law.law) +
                             ", expected " + to_string(request.law));
        }
        if (law.law != LimitLaw::ArgmaxTwoSidedBM && std::abs(law.trim - request.trim) > 1e-12) {
            throw InputError("calibration '" + path + "' was built for trim " +
                             format_double(law.trim));
        }
        return law;
    }
    const char* cache = std::getenv("TELEGRAPH_CPD_CACHE");
    fs::path cached;
    if (cache != nullptr && *cache != '\0') {
        cached = fs::path(cache) / (cache_key(request) + ".json");
        if (fs::exists(cached)) {
            return load_calibration(cached.string());
        }
    }
    std::cerr << "calibrating " << to_string(request.law) << " (" << request.reps
              << " replications)\n";
    LimitQuantiles law = simulate_calibration(request);
    if (!cached.empty()) {
        fs::create_directories(cached.parent_path());
        write_text(cached.string(), to_json(law).dump(2) + "\n");
    }
    return law;
}

// ---------------------------------------------------------------------------
// Input loading

GridSample load_sample(const std::string& path, const std::string& kind, double delta,
                       std::optional<double> velocity) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open '" + path + "'");
    }
    GridSample sample;
    if (kind == "prices") {
        sample = returns_from_prices(read_price_csv(in, path), delta);
    } else {
        const TimeValueSeries series = read_time_value_csv(in, path);
        sample.delta = delta;
        if (kind == "returns") {
            // Rows are the returns X_1..X_n; the path starts at X_0 = 0.
            sample.values.push_back(0.0);
        }
        sample.values.insert(sample.values.end(), series.values.begin(), series.values.end());
    }
    sample.velocity = velocity;
    sample.validate();
    return sample;
}

// ---------------------------------------------------------------------------
// Commands

struct SimulateArgs {
    double lambda1 = 0.0;
    std::optional<double> lambda2;
    std::optional<double> tau;
    double velocity = 1.0;
    double delta = 0.0;
    std::size_t n = 0;
    std::uint64_t seed = 1;
    std::string out;
    std::string events_out;
};

int cmd_simulate(const SimulateArgs& a) {
    if (a.lambda2.has_value() != a.tau.has_value()) {
        throw InputError("--lambda2 and --tau must be given together");
    }
    if (a.tau && !(*a.tau > 0.0 && *a.tau < 1.0)) {
        throw InputError("--tau must lie in (0, 1)");
    }
    if (!(a.delta > 0.0)) {
        throw InputError("--delta must be positive");
    }
    if (a.n < 2) {
        throw InputError("--n must be at least 2");
    }
    const double horizon = static_cast<double>(a.n) * a.delta;
    const RateProfile profile = a.lambda2
                                    ? RateProfile::single_switch(a.lambda1, *a.lambda2,
                                                                 *a.tau * horizon)
                                    : RateProfile::constant(a.lambda1);
    profile.validate();

    RandomStream rng(a.seed);
    const EventPath events = simulate_events(profile, horizon, InitialSign::Random, rng);
    const GridSample sample = integrate_to_grid(events, a.velocity, a.delta);

    Manifest manifest;
    manifest.command = "simulate";
    manifest.seed = a.seed;
    manifest.parameters = Json{{"lambda1", a.lambda1},
                               {"lambda2", a.lambda2 ? Json(*a.lambda2) : Json(nullptr)},
                               {"tau", a.tau ? Json(*a.tau) : Json(nullptr)},
                               {"v", a.velocity},
                               {"delta", a.delta},
                               {"n", a.n}};

    std::ostringstream csv;
    write_grid_csv(csv, sample);
    write_text(a.out, csv.str());
    write_manifest_sidecar(a.out, manifest);
    if (!a.events_out.empty()) {
        std::ostringstream ev;
        write_events_csv(ev, events);
        write_text(a.events_out, ev.str());
        Json sidecar = events_sidecar(events, profile);
        sidecar["manifest"] = manifest.json();
        write_text(a.events_out + ".json", sidecar.dump(2) + "\n");
    }
    return kExitOk;
}

struct DetectArgs {
    std::string input;
    std::string kind = "prices";
    double delta = kWeeklyDelta;
    std::optional<double> velocity;
    double alpha = 0.05;
    double trim = 0.05;
    std::size_t min_segment = 0;
    std::size_t max_depth = 3;
    std::size_t force_depth = 0;
    std::string variant = "unweighted-sup-D";
    std::string tau_plugin = "pooled";
    std::string calibration;
    std::string argmax_calibration;
    bool no_tau_interval = false;
    std::size_t calib_reps = 100000;
    std::size_t calib_grid = 1000;
    std::size_t argmax_reps = 20000;
    std::size_t argmax_grid = 5000;
    std::uint64_t seed = 1;
    unsigned workers = 0;
    std::string out;
    bool profiles = true;
};

int cmd_detect(const DetectArgs& a) {
    SegmentationConfig config;
    config.alpha = a.alpha;
    config.trim = a.trim;
    config.min_segment_length = a.min_segment;
    config.max_depth = a.max_depth;
    config.force_depth = a.force_depth;
    config.variant = parse_variant(a.variant);
    config.tau_plugin = parse_tau_plugin(a.tau_plugin);
    config.validate();

    Manifest manifest;
    manifest.command = "detect";
    manifest.seed = a.seed;
    manifest.add_input(a.input);
    manifest.parameters = Json{{"input", a.input},
                               {"input_kind", a.kind},
                               {"delta", a.delta},
                               {"v", a.velocity ? Json(*a.velocity) : Json(nullptr)},
                               {"alpha", a.alpha},
                               {"trim", a.trim},
                               {"min_segment", config.effective_min_segment()},
                               {"max_depth", a.max_depth},
                               {"force_depth", a.force_depth},
                               {"variant", to_string(config.variant)},
                               {"tau_plugin", to_string(config.tau_plugin)},
                               {"calib_reps", a.calib_reps},
                               {"calib_grid", a.calib_grid},
                               {"argmax_reps", a.argmax_reps},
                               {"argmax_grid", a.argmax_grid}};

    const GridSample sample = load_sample(a.input, a.kind, a.delta, a.velocity);

    CalibrationRequest bridge_request;
    bridge_request.law = law_for(config.variant);
    bridge_request.trim = a.trim;
    bridge_request.grid = a.calib_grid;
    bridge_request.reps = a.calib_reps;
    bridge_request.seed = a.seed;
    bridge_request.workers = a.workers;

    Calibration calibration;
    calibration.bridge = obtain_calibration(bridge_request, a.calibration, manifest);
    if (!a.no_tau_interval) {
        CalibrationRequest argmax_request;
        argmax_request.law = LimitLaw::ArgmaxTwoSidedBM;
        argmax_request.grid = a.argmax_grid;
        argmax_request.reps = a.argmax_reps;
        argmax_request.seed = a.seed;
        argmax_request.workers = a.workers;
        argmax_request.probabilities = ArgmaxOptions{}.probabilities;
        calibration.argmax = obtain_calibration(argmax_request, a.argmax_calibration, manifest);
    }

    const SegmentationReport report = binary_segment(sample, config, calibration);

    Json json = to_json(report);
    json["manifest"] = manifest.json();
    emit_json(a.out, json);

    if (!a.out.empty() && a.out != "-" && a.profiles) {
        for (std::size_t i = 0; i < report.segments.size(); ++i) {
            const auto& node = report.segments[i];
            if (node.detection) {
                std::ostringstream csv;
                write_profile_csv(csv, node.detection->fit.profile, node.start);
                write_text(a.out + ".segment-" + std::to_string(i) + ".csv", csv.str());
            }
        }
    }
    // Unanalyzable only when not even the root test could be computed.
    const SegmentNode& root = report.segments.front();
    return root.status == SegmentStatus::Unanalyzable && !root.test ? kExitUnanalyzable : kExitOk;
}

struct TestArgs {
    std::string input;
    std::string kind = "positions";
    double delta = 0.0;
    std::optional<double> velocity;
    bool estimate_v = false;
    std::optional<double> lambda0;
    double trim = 0.05;
    std::string variant = "unweighted-sup-D";
    double alpha = 0.05;
    std::string calibration;
    std::size_t calib_reps = 100000;
    std::size_t calib_grid = 1000;
    std::uint64_t seed = 1;
    unsigned workers = 0;
    std::string out;
};

int cmd_test(const TestArgs& a) {
    if (a.velocity && a.estimate_v) {
        throw InputError("--v and --estimate-v are mutually exclusive");
    }
    TestOptions options;
    options.trim = a.trim;
    options.variant = parse_variant(a.variant);
    options.alpha = a.alpha;
    options.lambda0 = a.lambda0;

    Manifest manifest;
    manifest.command = "test";
    manifest.seed = a.seed;
    manifest.add_input(a.input);
    manifest.parameters = Json{{"input", a.input},
                               {"input_kind", a.kind},
                               {"delta", a.delta},
                               {"v", a.velocity ? Json(*a.velocity) : Json(nullptr)},
                               {"estimate_v", a.estimate_v},
                               {"lambda0", a.lambda0 ? Json(*a.lambda0) : Json(nullptr)},
                               {"trim", a.trim},
                               {"variant", to_string(options.variant)},
                               {"alpha", a.alpha},
                               {"calib_reps", a.calib_reps},
                               {"calib_grid", a.calib_grid}};

    const GridSample sample = load_sample(a.input, a.kind, a.delta, a.velocity);
    if (!sample.velocity && !a.estimate_v) {
        throw InputError("give the velocity with --v or pass --estimate-v");
    }

    CalibrationRequest request;
    request.law = law_for(options.variant);
    request.trim = a.trim;
    request.grid = a.calib_grid;
    request.reps = a.calib_reps;
    request.seed = a.seed;
    request.workers = a.workers;
    const LimitQuantiles law = obtain_calibration(request, a.calibration, manifest);

    Json json;
    try {
        const double v = sample.velocity ? *sample.velocity : estimate_velocity(sample);
        const TestResult result = h0_test(indicator_series(sample, v), options, law);
        json = to_json(result);
        json["n"] = sample.size();
        json["v"] = v;
        json["velocity_estimated"] = !sample.velocity.has_value();
    } catch (const Unanalyzable& e) {
        json = Json{{"error", to_string(e.reason())}, {"message", e.what()}};
        json["manifest"] = manifest.json();
        emit_json(a.out, json);
        return kExitUnanalyzable;
    }
    json["manifest"] = manifest.json();
    emit_json(a.out, json);
    return kExitOk;
}

struct CalibrateArgs {
    std::string law = "bridge-sup";
    double trim = 0.05;
    double span = 50.0;
    std::size_t grid = 1000;
    std::size_t reps = 100000;
    std::uint64_t seed = 1;
    std::vector<double> alphas = default_probabilities();
    unsigned workers = 0;
    std::string out;
};

int cmd_calibrate(const CalibrateArgs& a) {
    CalibrationRequest request;
    request.law = parse_law(a.law);
    request.trim = a.trim;
    request.span = a.span;
    request.grid = a.grid;
    request.reps = a.reps;
    request.seed = a.seed;
    request.workers = a.workers;
    request.probabilities = a.alphas;

    Manifest manifest;
    manifest.command = "calibrate";
    manifest.seed = a.seed;
    manifest.parameters = Json{{"law", to_string(request.law)},
                               {"trim", a.trim},
                               {"span", a.span},
                               {"grid", a.grid},
                               {"reps", a.reps},
                               {"alphas", a.alphas}};

    const LimitQuantiles law = simulate_calibration(request);
    Json json = to_json(law);
    json["manifest"] = manifest.json();
    emit_json(a.out, json);
    return kExitOk;
}

struct McArgs {
    ExperimentConfig config;
    std::string experiment = "consistency";
    std::string tau_plugin = "pooled";
    std::string calibration;
    std::size_t calib_reps = 100000;
    std::size_t calib_grid = 1000;
    std::size_t argmax_reps = 20000;
    std::size_t argmax_grid = 5000;
    std::string out;
};

int cmd_mc(McArgs a) {
    a.config.experiment = parse_experiment(a.experiment);
    a.config.tau_plugin = parse_tau_plugin(a.tau_plugin);
    a.config.validate();
    const ExperimentConfig& c = a.config;

    Manifest manifest;
    manifest.command = "mc";
    manifest.seed = c.seed;
    manifest.parameters = Json{{"experiment", to_string(c.experiment)},
                               {"lambda1", c.lambda1},
                               {"lambda2", c.lambda2},
                               {"tau", c.tau},
                               {"v", c.velocity},
                               {"delta", c.delta},
                               {"n", c.n},
                               {"horizons", c.horizons},
                               {"reps", c.replications},
                               {"alpha", c.alpha},
                               {"trim", c.trim},
                               {"tau_plugin", to_string(c.tau_plugin)}};

    std::optional<LimitQuantiles> calibration;
    if (c.experiment == Experiment::TestSize || c.experiment == Experiment::TauLaw) {
        CalibrationRequest request;
        request.seed = c.seed;
        request.workers = c.workers;
        if (c.experiment == Experiment::TestSize) {
            request.law = LimitLaw::BridgeSup;
            request.trim = c.trim;
            request.grid = a.calib_grid;
            request.reps = a.calib_reps;
        } else {
            request.law = LimitLaw::ArgmaxTwoSidedBM;
            request.grid = a.argmax_grid;
            request.reps = a.argmax_reps;
            request.probabilities = ArgmaxOptions{}.probabilities;
        }
        manifest.parameters["calib_reps"] = request.reps;
        manifest.parameters["calib_grid"] = request.grid;
        calibration = obtain_calibration(request, a.calibration, manifest);
    }

    const ExperimentResult result = run_experiment(c, calibration);
    write_text(a.out + ".replications.csv", table_csv(result.replications));
    write_text(a.out + ".summary.csv", table_csv(result.summary));
    write_manifest_sidecar(a.out, manifest);
    std::cout << table_csv(result.summary);
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Change-point inference for the telegraph process"};
    app.require_subcommand(1);
    app.set_version_flag("--version", TELEGRAPH_CPD_VERSION);

    auto positive = CLI::PositiveNumber;

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Simulate a discretely observed path");
    simulate->add_option("--lambda1", sim.lambda1, "Switching rate (before the change)")
        ->required()
        ->check(positive);
    simulate->add_option("--lambda2", sim.lambda2, "Switching rate after the change")
        ->check(positive);
    simulate->add_option("--tau", sim.tau, "Change point as a fraction of the horizon");
    simulate->add_option("--v", sim.velocity, "Velocity")->check(positive);
    simulate->add_option("--delta", sim.delta, "Grid mesh")->required()->check(positive);
    simulate->add_option("--n", sim.n, "Number of grid intervals")->required();
    simulate->add_option("--seed", sim.seed, "Random seed");
    simulate->add_option("--out", sim.out, "Output CSV (t,x)")->required();
    simulate->add_option("--events", sim.events_out, "Also write event times CSV");

    DetectArgs det;
    auto* detect = app.add_subcommand("detect", "Binary segmentation of a series");
    detect->add_option("--input", det.input, "Input CSV")->required();
    detect->add_option("--input-kind", det.kind, "prices (date,price), returns or positions (t,x)")
        ->check(CLI::IsMember({"prices", "returns", "positions"}));
    detect->add_option("--delta", det.delta, "Mesh of one observation step")->check(positive);
    detect->add_option("--v", det.velocity, "Known velocity (estimated per segment otherwise)")
        ->check(positive);
    detect->add_option("--alpha", det.alpha, "Significance level");
    detect->add_option("--trim", det.trim, "Trimming fraction");
    detect->add_option("--min-segment", det.min_segment, "Minimum segment length (0 = auto)");
    detect->add_option("--max-depth", det.max_depth, "Maximum recursion depth");
    detect->add_option("--force-depth", det.force_depth,
                       "Split segments up to this depth without the significance gate");
    detect->add_option("--variant", det.variant, "unweighted-sup-D or weighted-sup-V");
    detect->add_option("--tau-plugin", det.tau_plugin, "pooled, left or right");
    detect->add_option("--calibration", det.calibration, "Cached bridge-law table (JSON)");
    detect->add_option("--argmax-calibration", det.argmax_calibration,
                       "Cached argmax-law table (JSON)");
    detect->add_flag("--no-tau-interval", det.no_tau_interval, "Skip change-point intervals");
    detect->add_option("--calib-reps", det.calib_reps, "Bridge calibration replications");
    detect->add_option("--calib-grid", det.calib_grid, "Bridge calibration grid size");
    detect->add_option("--argmax-reps", det.argmax_reps, "Argmax calibration replications");
    detect->add_option("--argmax-grid", det.argmax_grid, "Argmax calibration steps per side");
    detect->add_option("--seed", det.seed, "Calibration seed");
    detect->add_option("--workers", det.workers, "Worker threads (0 = all cores)");
    detect->add_option("--out", det.out, "Output JSON report (stdout when absent)");

    TestArgs tst;
    auto* test = app.add_subcommand("test", "Test for a change in the switching rate");
    test->add_option("--input", tst.input, "Input CSV")->required();
    test->add_option("--input-kind", tst.kind, "prices, returns or positions")
        ->check(CLI::IsMember({"prices", "returns", "positions"}));
    test->add_option("--delta", tst.delta, "Grid mesh")->required()->check(positive);
    test->add_option("--v", tst.velocity, "Known velocity")->check(positive);
    test->add_flag("--estimate-v", tst.estimate_v, "Estimate the velocity from the data");
    test->add_option("--lambda0", tst.lambda0, "Rate under H0 (plug-in when absent)")
        ->check(positive);
    test->add_option("--trim", tst.trim, "Trimming fraction");
    test->add_option("--variant", tst.variant, "unweighted-sup-D or weighted-sup-V");
    test->add_option("--alpha", tst.alpha, "Significance level");
    test->add_option("--calibration", tst.calibration, "Cached calibration table (JSON)");
    test->add_option("--calib-reps", tst.calib_reps, "Calibration replications");
    test->add_option("--calib-grid", tst.calib_grid, "Calibration grid size");
    test->add_option("--seed", tst.seed, "Calibration seed");
    test->add_option("--workers", tst.workers, "Worker threads (0 = all cores)");
    test->add_option("--out", tst.out, "Output JSON (stdout when absent)");

    CalibrateArgs cal;
    auto* calibrate = app.add_subcommand("calibrate", "Simulate limit-law quantiles");
    calibrate->add_option("--law", cal.law, "bridge-sup, weighted-bridge-sup or argmax-two-sided-bm")
        ->check(CLI::IsMember({"bridge-sup", "weighted-bridge-sup", "argmax-two-sided-bm"}));
    calibrate->add_option("--trim", cal.trim, "Trimming fraction (bridge laws)");
    calibrate->add_option("--span", cal.span, "Half-width of the argmax window")->check(positive);
    calibrate->add_option("--grid", cal.grid, "Grid size (steps per side for argmax)");
    calibrate->add_option("--reps", cal.reps, "Replications");
    calibrate->add_option("--seed", cal.seed, "Random seed");
    calibrate->add_option("--alphas", cal.alphas, "Probability levels to tabulate")
        ->delimiter(',');
    calibrate->add_option("--workers", cal.workers, "Worker threads (0 = all cores)");
    calibrate->add_option("--out", cal.out, "Output JSON (stdout when absent)");

    McArgs mc;
    auto* mcc = app.add_subcommand("mc", "Monte Carlo validation experiments");
    mcc->add_option("--experiment", mc.experiment,
                    "consistency, tau-law, lambda-normality or test-size")
        ->required()
        ->check(CLI::IsMember({"consistency", "tau-law", "lambda-normality", "test-size"}));
    mcc->add_option("--lambda1", mc.config.lambda1, "Rate before the change (H0 rate for test-size)");
    mcc->add_option("--lambda2", mc.config.lambda2, "Rate after the change");
    mcc->add_option("--tau", mc.config.tau, "Change fraction");
    mcc->add_option("--v", mc.config.velocity, "Velocity");
    mcc->add_option("--delta", mc.config.delta, "Grid mesh");
    mcc->add_option("--n", mc.config.n, "Grid intervals per path");
    mcc->add_option("--horizons", mc.config.horizons, "Horizons T for the consistency study")
        ->delimiter(',');
    mcc->add_option("--reps", mc.config.replications, "Replications");
    mcc->add_option("--seed", mc.config.seed, "Random seed");
    mcc->add_option("--workers", mc.config.workers, "Worker threads (0 = all cores)");
    mcc->add_option("--alpha", mc.config.alpha, "Significance level / 1 - interval coverage");
    mcc->add_option("--trim", mc.config.trim, "Trimming fraction");
    mcc->add_option("--tau-plugin", mc.tau_plugin, "pooled, left or right");
    mcc->add_option("--calibration", mc.calibration, "Cached calibration table (JSON)");
    mcc->add_option("--calib-reps", mc.calib_reps, "Bridge calibration replications");
    mcc->add_option("--calib-grid", mc.calib_grid, "Bridge calibration grid size");
    mcc->add_option("--argmax-reps", mc.argmax_reps, "Argmax calibration replications");
    mcc->add_option("--argmax-grid", mc.argmax_grid, "Argmax calibration steps per side");
    mcc->add_option("--out", mc.out, "Output prefix")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInput;
    }

    try {
        if (*simulate) {
            return cmd_simulate(sim);
        }
        if (*detect) {
            return cmd_detect(det);
        }
        if (*test) {
            return cmd_test(tst);
        }
        if (*calibrate) {
            return cmd_calibrate(cal);
        }
        if (*mcc) {
            return cmd_mc(mc);
        }
    } catch (const Unanalyzable& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUnanalyzable;
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    }
    return kExitInput;
}
