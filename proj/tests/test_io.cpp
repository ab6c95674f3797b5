#include "telegraph_cpd/error.hpp"
#include "telegraph_cpd/io.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

using namespace telegraph;

TEST(FormatDouble, ShortestRoundTrip) {
    EXPECT_EQ(format_double(0.1), "0.1");
    EXPECT_EQ(format_double(2.0), "2");
    EXPECT_EQ(format_double(-0.25), "-0.25");
    RandomStream rng(1);
    for (int i = 0; i < 1000; ++i) {
        const double x = (rng.uniform() - 0.5) * std::pow(10.0, static_cast<int>(rng.next_u64() % 20) - 10);
        double back = 0.0;
        ASSERT_TRUE(parse_double(format_double(x), back));
        ASSERT_EQ(back, x);
    }
}

TEST(ParseDouble, StrictFields) {
    double x = 0.0;
    EXPECT_TRUE(parse_double(" 1.5 ", x));
    EXPECT_EQ(x, 1.5);
    EXPECT_TRUE(parse_double("+2e-3", x));
    EXPECT_EQ(x, 2e-3);
    EXPECT_FALSE(parse_double("", x));
    EXPECT_FALSE(parse_double("1.5abc", x));
    EXPECT_FALSE(parse_double("1,5", x));
    EXPECT_FALSE(parse_double("nan", x));
    EXPECT_FALSE(parse_double("inf", x));
}

TEST(SplitCsv, QuotedFields) {
    EXPECT_EQ(split_csv_record("a,b"), (std::vector<std::string>{"a", "b"}));
    EXPECT_EQ(split_csv_record("\"Mar 3, 1973\",101.5\r"),
              (std::vector<std::string>{"Mar 3, 1973", "101.5"}));
    EXPECT_EQ(split_csv_record("\"say \"\"hi\"\"\",1"),
              (std::vector<std::string>{"say \"hi\"", "1"}));
    EXPECT_EQ(split_csv_record(",").size(), 2u);
}

TEST(GridCsv, RoundTrip) {
    GridSample s;
    s.delta = 0.01;
    s.values = {0.0, 0.01, 0.0034999999999999996, -1.0 / 3.0};
    std::stringstream buffer;
    write_grid_csv(buffer, s);
    const TimeValueSeries back = read_time_value_csv(buffer, "mem");
    EXPECT_EQ(back.values, s.values);
    ASSERT_EQ(back.times.size(), 4u);
    EXPECT_EQ(back.times[3], 0.03);
}

TEST(GridCsv, ErrorsNameTheLine) {
    std::stringstream bad_header("time,value\n0,0\n");
    EXPECT_THROW(read_time_value_csv(bad_header, "f.csv"), InputError);
    std::stringstream bad_number("t,x\n0,0\n1,abc\n");
    try {
        read_time_value_csv(bad_number, "f.csv");
        FAIL() << "expected InputError";
    } catch (const InputError& e) {
        EXPECT_NE(std::string(e.what()).find("f.csv:3"), std::string::npos) << e.what();
    }
    std::stringstream unordered("t,x\n0,0\n1,1\n1,2\n");
    EXPECT_THROW(read_time_value_csv(unordered, "f.csv"), InputError);
    std::stringstream ragged("t,x\n0,0,0\n");
    EXPECT_THROW(read_time_value_csv(ragged, "f.csv"), InputError);
    std::stringstream empty("");
    EXPECT_THROW(read_time_value_csv(empty, "f.csv"), InputError);
}

TEST(PriceCsv, ReadsLabelsAndPrices) {
    std::stringstream in("Date,Price\n\"Jul 2, 1971\",890.19\n1971-07-09,901.8\n\n1971-07-16,888.51\n");
    const PriceSeries p = read_price_csv(in, "dj.csv");
    EXPECT_EQ(p.labels, (std::vector<std::string>{"Jul 2, 1971", "1971-07-09", "1971-07-16"}));
    EXPECT_EQ(p.prices, (std::vector<double>{890.19, 901.8, 888.51}));
}

TEST(PriceCsv, RejectsBadRows) {
    std::stringstream negative("date,price\na,1\nb,-2\nc,3\n");
    EXPECT_THROW(read_price_csv(negative, "p.csv"), InputError);
    std::stringstream short_file("date,price\na,1\nb,2\n");
    EXPECT_THROW(read_price_csv(short_file, "p.csv"), InputError);
}

TEST(ProfileCsv, GlobalIndices) {
    IndicatorSeries y;
    y.delta = 0.01;
    y.hits = {0, 0, 1, 1};
    std::stringstream out;
    write_profile_csv(out, stat_profile(y), 10);
    std::string header;
    std::string first;
    std::getline(out, header);
    std::getline(out, first);
    EXPECT_EQ(header, "k,d,v,usq");
    EXPECT_EQ(first.substr(0, 8), "11,0.25,");
    std::stringstream ind;
    write_indicator_csv(ind, y);
    EXPECT_EQ(ind.str(), "i,y\n1,0\n2,0\n3,100\n4,100\n");
}

TEST(LimitQuantilesJson, RoundTrip) {
    const std::vector<double> probs = {0.9, 0.95};
    LimitQuantiles law = tabulate({3.0, 1.0, 2.0, 5.0, 4.0}, probs, 4);
    law.law = LimitLaw::WeightedBridgeSup;
    law.trim = 0.1;
    law.grid_size = 1000;
    law.seed = 42;
    const Json json = to_json(law);
    const LimitQuantiles back = limit_quantiles_from_json(Json::parse(json.dump()));
    EXPECT_EQ(back.law, law.law);
    EXPECT_EQ(back.trim, law.trim);
    EXPECT_EQ(back.quantiles, law.quantiles);
    EXPECT_EQ(back.table, law.table);
    EXPECT_EQ(back.replications, 5u);
    EXPECT_EQ(back.seed, 42u);
    EXPECT_THROW(limit_quantiles_from_json(Json::parse("{\"law\":\"bridge-sup\"}")), InputError);
}

TEST(Fnv1a, KnownValues) {
    EXPECT_EQ(fnv1a64_hex(""), "cbf29ce484222325");
    EXPECT_EQ(fnv1a64_hex("a"), "af63dc4c8601ec8c");
    EXPECT_EQ(fnv1a64_hex("foobar"), "85944171f73967e8");
}

TEST(ReadFile, MissingFile) {
    EXPECT_THROW(read_file("/nonexistent/definitely/not/here.csv"), InputError);
}
