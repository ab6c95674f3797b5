#pragma once

#include "telegraph_cpd/estimators.hpp"
#include "telegraph_cpd/inference.hpp"
#include "telegraph_cpd/segmentation.hpp"
#include "telegraph_cpd/telegraph.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace telegraph {

using Json = nlohmann::ordered_json;

/// Shortest decimal text that reads back to the same double.
std::string format_double(double value);

/// Splits one RFC-4180 record. Quoted fields may contain commas and doubled
/// quotes; embedded line breaks are not supported.
std::vector<std::string> split_csv_record(std::string_view line);

/// Parses a finite decimal number; the whole field must be consumed.
bool parse_double(std::string_view text, double& out);

/// `t,x` rows. Positions are written with full precision.
void write_grid_csv(std::ostream& out, const GridSample& sample);

struct TimeValueSeries {
    std::vector<double> times;
    std::vector<double> values;
};

/// Reads a `t,x` file. Errors name the source and the line.
TimeValueSeries read_time_value_csv(std::istream& in, const std::string& source);

/// Reads a `date,price` file; dates are kept as opaque labels.
PriceSeries read_price_csv(std::istream& in, const std::string& source);

void write_events_csv(std::ostream& out, const EventPath& events);
Json events_sidecar(const EventPath& events, const RateProfile& profile);

void write_indicator_csv(std::ostream& out, const IndicatorSeries& y);
/// `k,d,v,usq` rows, k in global coordinates when `offset` is set.
void write_profile_csv(std::ostream& out, const StatProfile& profile, std::size_t offset = 0);

Json to_json(const LimitQuantiles& law);
LimitQuantiles limit_quantiles_from_json(const Json& json);
Json to_json(const TestResult& result);
Json to_json(const Interval& interval);
Json to_json(const ChangePointFit& fit);
Json to_json(const SegmentationReport& report);

/// 64-bit FNV-1a of a byte string, as 16 lowercase hex digits.
std::string fnv1a64_hex(std::string_view bytes);

/// Reads a whole file; throws InputError when it cannot be opened.
std::string read_file(const std::string& path);

} // namespace telegraph
