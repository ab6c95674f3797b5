#include "telegraph_cpd/io.hpp"

#include "telegraph_cpd/error.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace telegraph {

namespace {

std::string trim_copy(std::string_view text) {
    std::size_t b = 0;
    std::size_t e = text.size();
    while (b < e && std::isspace(static_cast<unsigned char>(text[b])) != 0) {
        ++b;
    }
    while (e > b && std::isspace(static_cast<unsigned char>(text[e - 1])) != 0) {
        --e;
    }
    return std::string(text.substr(b, e - b));
}

std::string lower_copy(std::string text) {
    std::transform(text.begin(), text.end(), text.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return text;
}

[[noreturn]] void fail_at(const std::string& source, std::size_t line, const std::string& what) {
    throw InputError(source + ":" + std::to_string(line) + ": " + what);
}

// Reads the header record and checks it against the expected column names.
void expect_header(std::istream& in, const std::string& source, std::size_t& line_no,
                   const std::array<std::string_view, 2>& columns) {
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        if (!trim_copy(line).empty()) {
            const auto fields = split_csv_record(line);
            if (fields.size() != 2 || lower_copy(trim_copy(fields[0])) != columns[0] ||
                lower_copy(trim_copy(fields[1])) != columns[1]) {
                fail_at(source, line_no,
                        "expected header '" + std::string(columns[0]) + "," +
                            std::string(columns[1]) + "'");
            }
            return;
        }
    }
    fail_at(source, line_no, "file is empty");
}

Json optional_number(const std::optional<double>& value) {
    return value ? Json(*value) : Json(nullptr);
}

} // namespace

std::string format_double(double value) {
    std::array<char, 64> buffer{};
    const auto result = std::to_chars(buffer.data(), buffer.data() + buffer.size(), value);
    return std::string(buffer.data(), result.ptr);
}

std::vector<std::string> split_csv_record(std::string_view line) {
    if (!line.empty() && line.back() == '\r') {
        line.remove_suffix(1);
    }
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    current.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                current.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(current));
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    fields.push_back(std::move(current));
    return fields;
}

bool parse_double(std::string_view text, double& out) {
    const std::string cleaned = trim_copy(text);
    if (cleaned.empty()) {
        return false;
    }
    const char* first = cleaned.data();
    const char* last = cleaned.data() + cleaned.size();
    if (*first == '+') {
        ++first;
    }
    double value = 0.0;
    const auto result = std::from_chars(first, last, value);
    if (result.ec != std::errc() || result.ptr != last || !std::isfinite(value)) {
        return false;
    }
    out = value;
    return true;
}

void write_grid_csv(std::ostream& out, const GridSample& sample) {
    out << "t,x\n";
    for (std::size_t i = 0; i < sample.values.size(); ++i) {
        out << format_double(static_cast<double>(i) * sample.delta) << ','
            << format_double(sample.values[i]) << '\n';
    }
}

TimeValueSeries read_time_value_csv(std::istream& in, const std::string& source) {
    std::size_t line_no = 0;
    expect_header(in, source, line_no, {"t", "x"});
    TimeValueSeries out;
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim_copy(line).empty()) {
            continue;
        }
        const auto fields = split_csv_record(line);
        if (fields.size() != 2) {
            fail_at(source, line_no, "expected 2 fields, found " + std::to_string(fields.size()));
        }
        double t = 0.0;
        double x = 0.0;
        if (!parse_double(fields[0], t)) {
            fail_at(source, line_no, "time '" + fields[0] + "' is not a number");
        }
        if (!parse_double(fields[1], x)) {
            fail_at(source, line_no, "value '" + fields[1] + "' is not a number");
        }
        if (!out.times.empty() && !(t > out.times.back())) {
            fail_at(source, line_no, "times must be strictly increasing");
        }
        out.times.push_back(t);
        out.values.push_back(x);
    }
    return out;
}

PriceSeries read_price_csv(std::istream& in, const std::string& source) {
    std::size_t line_no = 0;
    expect_header(in, source, line_no, {"date", "price"});
    PriceSeries out;
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim_copy(line).empty()) {
            continue;
        }
        const auto fields = split_csv_record(line);
        if (fields.size() != 2) {
            fail_at(source, line_no, "expected 2 fields, found " + std::to_string(fields.size()));
        }
        double price = 0.0;
        if (!parse_double(fields[1], price)) {
            fail_at(source, line_no, "price '" + fields[1] + "' is not a number");
        }
        if (!(price > 0.0)) {
            fail_at(source, line_no, "price must be positive");
        }
        out.labels.push_back(trim_copy(fields[0]));
        out.prices.push_back(price);
    }
    if (out.prices.size() < 3) {
        fail_at(source, line_no, "need at least 3 prices");
    }
    return out;
}

void write_events_csv(std::ostream& out, const EventPath& events) {
    out << "event_time\n";
    for (double t : events.event_times) {
        out << format_double(t) << '\n';
    }
}

Json events_sidecar(const EventPath& events, const RateProfile& profile) {
    Json json;
    json["horizon"] = events.horizon;
    json["initial_sign"] = events.initial_sign;
    json["profile"] = {{"breakpoints", profile.breakpoints}, {"rates", profile.rates}};
    return json;
}

void write_indicator_csv(std::ostream& out, const IndicatorSeries& y) {
    out << "i,y\n";
    for (std::size_t i = 0; i < y.size(); ++i) {
        out << (i + 1) << ',' << format_double(y.y(i)) << '\n';
    }
}

void write_profile_csv(std::ostream& out, const StatProfile& profile, std::size_t offset) {
    out << "k,d,v,usq\n";
    for (std::size_t k = 1; k < profile.n; ++k) {
        out << (offset + k) << ',' << format_double(profile.d[k - 1]) << ','
            << format_double(profile.vstat[k - 1]) << ',' << format_double(profile.usq[k - 1])
            << '\n';
    }
}

Json to_json(const LimitQuantiles& law) {
    Json json;
    json["law"] = to_string(law.law);
    if (law.law == LimitLaw::ArgmaxTwoSidedBM) {
        json["span"] = law.span;
    } else {
        json["trim"] = law.trim;
    }
    json["grid_size"] = law.grid_size;
    json["replications"] = law.replications;
    json["seed"] = law.seed;
    Json quantiles = Json::object();
    for (const auto& [p, q] : law.quantiles) {
        quantiles[format_double(p)] = q;
    }
    json["quantiles"] = std::move(quantiles);
    json["table"] = law.table;
    return json;
}

LimitQuantiles limit_quantiles_from_json(const Json& json) {
    try {
        LimitQuantiles law;
        law.law = parse_law(json.at("law").get<std::string>());
        if (law.law == LimitLaw::ArgmaxTwoSidedBM) {
            law.span = json.at("span").get<double>();
        } else {
            law.trim = json.at("trim").get<double>();
        }
        law.grid_size = json.at("grid_size").get<std::size_t>();
        law.replications = json.at("replications").get<std::size_t>();
        law.seed = json.at("seed").get<std::uint64_t>();
        for (const auto& [key, value] : json.at("quantiles").items()) {
            double p = 0.0;
            if (!parse_double(key, p)) {
                throw InputError("quantile key '" + key + "' is not a probability");
            }
            law.quantiles[p] = value.get<double>();
        }
        law.table = json.at("table").get<std::vector<double>>();
        if (law.table.size() < 2 || !std::is_sorted(law.table.begin(), law.table.end())) {
            throw InputError("quantile table must be nondecreasing with at least 2 entries");
        }
        return law;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("malformed calibration table: ") + e.what());
    }
}

Json to_json(const TestResult& result) {
    Json json;
    json["statistic"] = result.statistic;
    json["variant"] = to_string(result.variant);
    json["trim"] = result.trim;
    json["lambda0"] = result.lambda0;
    json["lambda0_is_plugin"] = result.lambda0_is_plugin;
    json["critical_value"] = result.critical_value;
    json["p_value"] = result.p_value.value;
    json["p_value_is_bound"] = result.p_value.upper_bound;
    json["reject"] = result.reject;
    json["alpha"] = result.alpha;
    return json;
}

Json to_json(const Interval& interval) {
    return Json{{"lower", interval.lower},
                {"upper", interval.upper},
                {"raw_lower", interval.raw_lower},
                {"raw_upper", interval.raw_upper}};
}

Json to_json(const ChangePointFit& fit) {
    Json json;
    json["n"] = fit.n;
    json["delta"] = fit.delta;
    json["k_hat"] = fit.k_hat;
    json["tau_hat"] = fit.tau_hat;
    json["theta_hat"] = fit.theta_hat;
    json["gamma1"] = fit.gamma1;
    json["gamma2"] = fit.gamma2;
    json["lambda1"] = fit.lambda1;
    json["lambda2"] = fit.lambda2;
    json["v_hat"] = optional_number(fit.v_hat);
    return json;
}

Json to_json(const SegmentationReport& report) {
    Json json;
    json["n"] = report.n;
    json["delta"] = report.delta;
    json["changes"] = report.changes();
    json["changes_in_discovery_order"] = report.changes_in_discovery_order();
    Json segments = Json::array();
    for (const auto& node : report.segments) {
        Json s;
        s["start"] = node.start;
        s["end"] = node.end;
        s["depth"] = node.depth;
        s["status"] = to_string(node.status);
        s["reason"] = node.reason.empty() ? Json(nullptr) : Json(node.reason);
        s["change_index"] = node.split() ? Json(*node.candidate_index) : Json(nullptr);
        s["candidate_index"] =
            node.candidate_index ? Json(*node.candidate_index) : Json(nullptr);
        if (node.detection) {
            const auto& d = *node.detection;
            s["theta_hat"] = static_cast<double>(*node.candidate_index) * report.delta;
            s["v_hat"] = d.velocity;
            s["velocity_estimated"] = d.velocity_estimated;
            s["lambda_left"] = d.fit.lambda1;
            s["lambda_right"] = d.fit.lambda2;
            if (d.ci_tau) {
                Json ci = to_json(d.ci_tau->interval);
                ci["plugin_lambda"] = d.ci_tau->plugin_lambda;
                // Bounds above are fractions of the segment; these are series indices.
                const double length = static_cast<double>(node.end - node.start);
                ci["index_lower"] = static_cast<double>(node.start) + d.ci_tau->interval.lower * length;
                ci["index_upper"] = static_cast<double>(node.start) + d.ci_tau->interval.upper * length;
                s["ci_tau"] = std::move(ci);
            } else {
                s["ci_tau"] = nullptr;
            }
            s["ci_lambda"] = d.ci_lambda ? Json{{"left", to_json(d.ci_lambda->left)},
                                                {"right", to_json(d.ci_lambda->right)}}
                                         : Json(nullptr);
        } else {
            for (const char* key : {"theta_hat", "v_hat", "velocity_estimated", "lambda_left",
                                    "lambda_right", "ci_tau", "ci_lambda"}) {
                s[key] = nullptr;
            }
        }
        if (node.test) {
            s["stat"] = node.test->statistic;
            s["critical_value"] = node.test->critical_value;
            s["p_value"] = node.test->p_value.value;
            s["p_value_is_bound"] = node.test->p_value.upper_bound;
            s["reject"] = node.test->reject;
        } else {
            for (const char* key : {"stat", "critical_value", "p_value", "p_value_is_bound",
                                    "reject"}) {
                s[key] = nullptr;
            }
        }
        segments.push_back(std::move(s));
    }
    json["segments"] = std::move(segments);
    return json;
}

std::string fnv1a64_hex(std::string_view bytes) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    std::ostringstream out;
    out << std::hex;
    out.width(16);
    out.fill('0');
    out << hash;
    return out.str();
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError("cannot open '" + path + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

} // namespace telegraph
