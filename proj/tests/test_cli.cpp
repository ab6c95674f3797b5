#include "telegraph_cpd/io.hpp"

#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using telegraph::Json;
using telegraph::read_file;

namespace {

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("telegraph_cli_" + std::to_string(::getpid()) + "_" +
                ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    /// Runs the CLI with `args`; returns its exit code.
    int run(const std::string& args, const std::string& env = "") const {
        const std::string command = env + " " + TELEGRAPH_CPD_CLI + " " + args + " >" +
                                    path("stdout.txt") + " 2>" + path("stderr.txt");
        const int status = std::system(command.c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }

    std::string calibration_file() const {
        const std::string out = path("bridge.json");
        if (!fs::exists(out)) {
            EXPECT_EQ(run("calibrate --law bridge-sup --trim 0.05 --reps 10000 --seed 3 --out " +
                          out),
                      0);
        }
        return out;
    }

    fs::path dir_;
};

} // namespace

TEST_F(CliTest, SimulateWritesLipschitzPath) {
    ASSERT_EQ(run("simulate --lambda1 1 --v 1 --delta 0.01 --n 100 --seed 7 --out " +
                  path("a.csv")),
              0);
    std::ifstream in(path("a.csv"));
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "t,x");
    int rows = 0;
    double previous = 0.0;
    while (std::getline(in, line)) {
        const auto comma = line.find(',');
        const double x = std::stod(line.substr(comma + 1));
        if (rows == 0) {
            EXPECT_EQ(x, 0.0);
        } else {
            EXPECT_LE(std::abs(x - previous), 0.01 + 1e-12);
        }
        previous = x;
        ++rows;
    }
    EXPECT_EQ(rows, 101);
    const Json manifest = Json::parse(read_file(path("a.csv.manifest.json")));
    EXPECT_EQ(manifest["command"], "simulate");
    EXPECT_EQ(manifest["seed"], 7);
}

TEST_F(CliTest, SimulateIsDeterministic) {
    const std::string flags = "simulate --lambda1 1 --lambda2 3 --tau 0.5 --v 1 --delta 0.01 "
                              "--n 2000 --seed 7 ";
    ASSERT_EQ(run(flags + "--out " + path("a.csv") + " --events " + path("ev.csv")), 0);
    ASSERT_EQ(run(flags + "--out " + path("b.csv")), 0);
    EXPECT_EQ(read_file(path("a.csv")), read_file(path("b.csv")));
    EXPECT_TRUE(fs::exists(path("ev.csv")));
    EXPECT_TRUE(fs::exists(path("ev.csv.json")));
}

TEST_F(CliTest, ExitCodes) {
    EXPECT_EQ(run("simulate --lambda1 1 --delta 0.01 --n 100"), 2);
    EXPECT_EQ(run("no-such-command"), 2);
    EXPECT_EQ(run("test --input " + path("missing.csv") + " --delta 0.01 --v 1"), 2);
    EXPECT_EQ(run("simulate --lambda1 1 --lambda2 2 --delta 0.01 --n 100 --out " + path("x.csv")),
              2);

    std::ofstream(path("bad.csv")) << "t,x\n0,0\n1,oops\n";
    EXPECT_EQ(run("test --input " + path("bad.csv") + " --delta 0.01 --v 1 --calibration " +
                  calibration_file()),
              2);
    EXPECT_NE(read_file(path("stderr.txt")).find("bad.csv:3"), std::string::npos);

    std::ofstream flat(path("flat.csv"));
    flat << "t,x\n";
    for (int i = 0; i <= 100; ++i) {
        flat << i * 0.01 << ",0\n";
    }
    flat.close();
    EXPECT_EQ(run("test --input " + path("flat.csv") + " --delta 0.01 --estimate-v --calibration " +
                  calibration_file()),
              3);
}

TEST_F(CliTest, CalibrateIsReproducibleAndMonotone) {
    const std::string flags = "calibrate --law bridge-sup --trim 0.1 --reps 10000 --seed 5 "
                              "--alphas 0.9,0.95,0.99 ";
    ASSERT_EQ(run(flags + "--workers 1 --out " + path("a.json")), 0);
    ASSERT_EQ(run(flags + "--workers 2 --out " + path("b.json")), 0);
    EXPECT_EQ(read_file(path("a.json")), read_file(path("b.json")));
    const Json json = Json::parse(read_file(path("a.json")));
    EXPECT_LT(json["quantiles"]["0.9"].get<double>(), json["quantiles"]["0.95"].get<double>());
    EXPECT_LT(json["quantiles"]["0.95"].get<double>(), json["quantiles"]["0.99"].get<double>());
    EXPECT_EQ(json["replications"], 10000);
    EXPECT_EQ(json["manifest"]["command"], "calibrate");
}

TEST_F(CliTest, TestCommandOnSimulatedPath) {
    ASSERT_EQ(run("simulate --lambda1 1 --lambda2 4 --tau 0.5 --v 1 --delta 0.01 --n 10000 "
                  "--seed 2 --out " + path("alt.csv")),
              0);
    ASSERT_EQ(run("test --input " + path("alt.csv") + " --delta 0.01 --v 1 --calibration " +
                  calibration_file() + " --out " + path("t.json")),
              0);
    const Json json = Json::parse(read_file(path("t.json")));
    EXPECT_TRUE(json["reject"].get<bool>());
    EXPECT_EQ(json["manifest"]["inputs"].size(), 2u);
}

TEST_F(CliTest, DetectReportAndWorkerIndependence) {
    ASSERT_EQ(run("simulate --lambda1 1 --lambda2 4 --tau 0.4 --v 1 --delta 0.01 --n 8000 "
                  "--seed 4 --out " + path("p.csv")),
              0);
    const std::string flags = "detect --input " + path("p.csv") +
                              " --input-kind positions --delta 0.01 --calib-reps 10000 "
                              "--argmax-reps 10000 --argmax-grid 1000 ";
    ASSERT_EQ(run(flags + "--workers 1 --out " + path("r1.json")), 0);
    ASSERT_EQ(run(flags + "--workers 2 --out " + path("r2.json")), 0);
    EXPECT_EQ(read_file(path("r1.json")), read_file(path("r2.json")));
    const Json report = Json::parse(read_file(path("r1.json")));
    ASSERT_FALSE(report["changes"].empty());
    EXPECT_NEAR(report["changes"][0].get<double>() / 8000.0, 0.4, 0.05);
    const Json& root = report["segments"][0];
    for (const char* key : {"start", "end", "change_index", "theta_hat", "v_hat", "lambda_left",
                            "lambda_right", "stat", "p_value", "ci_tau", "ci_lambda"}) {
        EXPECT_TRUE(root.contains(key)) << key;
    }
    EXPECT_TRUE(root["velocity_estimated"].get<bool>());
    EXPECT_TRUE(fs::exists(path("r1.json.segment-0.csv")));
}

TEST_F(CliTest, DetectConstantReturnsReportsNoChange) {
    std::ofstream in(path("r.csv"));
    in << "t,x\n";
    for (int i = 1; i <= 200; ++i) {
        in << i << ",0.01\n";
    }
    in.close();
    ASSERT_EQ(run("detect --input " + path("r.csv") + " --input-kind returns --calibration " +
                  calibration_file() + " --no-tau-interval --out " + path("out.json")),
              0);
    const Json report = Json::parse(read_file(path("out.json")));
    EXPECT_TRUE(report["changes"].empty());
    for (const auto& s : report["segments"]) {
        EXPECT_FALSE(s["p_value"].is_null());
    }
}

TEST_F(CliTest, CalibrationCache) {
    ASSERT_EQ(run("simulate --lambda1 2 --v 1 --delta 0.01 --n 3000 --seed 1 --out " +
                  path("h0.csv")),
              0);
    const std::string env = "TELEGRAPH_CPD_CACHE=" + path("cache");
    const std::string flags = "test --input " + path("h0.csv") +
                              " --delta 0.01 --v 1 --calib-reps 10000 --seed 9 --out ";
    ASSERT_EQ(run(flags + path("a.json"), env), 0);
    EXPECT_NE(read_file(path("stderr.txt")).find("calibrating"), std::string::npos);
    ASSERT_EQ(std::distance(fs::directory_iterator(path("cache")), fs::directory_iterator{}), 1);
    ASSERT_EQ(run(flags + path("b.json"), env), 0);
    EXPECT_EQ(read_file(path("stderr.txt")).find("calibrating"), std::string::npos);
    EXPECT_EQ(read_file(path("a.json")), read_file(path("b.json")));
}

TEST_F(CliTest, MonteCarloIndependentOfWorkers) {
    const std::string flags = "mc --experiment lambda-normality --n 2000 --reps 40 --seed 3 ";
    ASSERT_EQ(run(flags + "--workers 1 --out " + path("a")), 0);
    ASSERT_EQ(run(flags + "--workers 3 --out " + path("b")), 0);
    EXPECT_EQ(read_file(path("a.replications.csv")), read_file(path("b.replications.csv")));
    EXPECT_EQ(read_file(path("a.summary.csv")), read_file(path("b.summary.csv")));
    EXPECT_TRUE(fs::exists(path("a.manifest.json")));
}
