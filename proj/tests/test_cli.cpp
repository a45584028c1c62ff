#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "closeness/cli.hpp"
#include "closeness/io.hpp"

using namespace closeness;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    args.insert(args.begin(), "closeness");
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string tmp(const std::string& name) {
    const std::filesystem::path dir(CLOSENESS_TEST_TMP);
    std::filesystem::create_directories(dir);
    return (dir / name).string();
}

void write_hist(const std::string& path, std::vector<std::uint64_t> counts, std::uint64_t m) {
    write_text_file(path, to_json(CountHistogram(std::move(counts), SamplingMode::Poissonized, m)).dump());
}

}  // namespace

TEST(Cli, UsageErrors) {
    EXPECT_EQ(run({}).code, cli::kExitUsage);
    EXPECT_EQ(run({"frobnicate"}).code, cli::kExitUsage);
    EXPECT_EQ(run({"sample", "--dist", "x.json", "--m", "5"}).code, cli::kExitUsage);  // no --seed
    EXPECT_EQ(run({"gen", "two-bump", "--n", "16", "--eps", "0.5"}).code, cli::kExitUsage);
    EXPECT_EQ(run({"gen", "simplex", "--n", "16"}).code, cli::kExitUsage);
    EXPECT_EQ(run({"sweep", "--n", "1000,2000", "--eps", "0.5,0.6", "--seed", "1"}).code, cli::kExitUsage);
}

TEST(Cli, HelpForEverySubcommand) {
    for (const char* sub : {"gen", "sample", "test-l1", "estimate-l2", "test-l2", "test-l1-filtered",
                            "calibrate", "sweep", "verify-moments"}) {
        const Result r = run({sub, "--help"});
        EXPECT_EQ(r.code, cli::kExitOk) << sub;
        EXPECT_NE(r.out.find("Output"), std::string::npos) << sub;
    }
}

TEST(Cli, TestL1OnZeroStatistic) {
    // Z = 0: X = (1, 0), Y = (0, 1) gives (1-1)/1 per coordinate.
    write_hist(tmp("x.json"), {1, 0}, 2);
    write_hist(tmp("y.json"), {0, 1}, 2);
    const Result r = run({"test-l1", "--x", tmp("x.json"), "--y", tmp("y.json"), "--C", "10.0"});
    ASSERT_EQ(r.code, cli::kExitOk) << r.err;
    const json j = json::parse(r.out);
    EXPECT_EQ(j["decision"], "Equal");
    EXPECT_EQ(j["Z"], 0.0);
}

TEST(Cli, TestL1NeedsAConstant) {
    write_hist(tmp("x.json"), {1, 0}, 2);
    write_hist(tmp("y.json"), {0, 1}, 2);
    EXPECT_EQ(run({"test-l1", "--x", tmp("x.json"), "--y", tmp("y.json")}).code, cli::kExitUsage);
    const std::string calib = tmp("empty_calib.json");
    std::filesystem::remove(calib);
    EXPECT_EQ(run({"test-l1", "--x", tmp("x.json"), "--y", tmp("y.json"), "--calib", calib}).code,
              cli::kExitUsage);
}

TEST(Cli, CalibrateThenTestFromTable) {
    const std::string calib = tmp("calib.json");
    std::filesystem::remove(calib);
    const Result c = run({"calibrate", "l1", "--n", "2", "--m", "2", "--seed", "5", "--calib", calib});
    ASSERT_EQ(c.code, cli::kExitOk) << c.err;
    write_hist(tmp("x.json"), {1, 0}, 2);
    write_hist(tmp("y.json"), {0, 1}, 2);
    const Result r = run({"test-l1", "--x", tmp("x.json"), "--y", tmp("y.json"), "--calib", calib});
    ASSERT_EQ(r.code, cli::kExitOk) << r.err;
    EXPECT_EQ(json::parse(r.out)["threshold"].get<double>(),
              json::parse(c.out)["C"].get<double>() * std::sqrt(2.0));
}

TEST(Cli, MalformedInputReportsPathAndOffset) {
    const std::string bad = tmp("bad.json");
    write_text_file(bad, "{\"n\": 2, \"mode\": \"poi\", ");
    const Result r = run({"estimate-l2", "--x", bad, "--y", bad});
    EXPECT_EQ(r.code, cli::kExitRuntime);
    EXPECT_NE(r.err.find(bad + ": byte"), std::string::npos) << r.err;
    const std::string wrong = tmp("wrong.json");
    write_text_file(wrong, R"({"n": 3, "mode": "poi", "m": 1, "counts": [1]})");
    const Result w = run({"estimate-l2", "--x", wrong, "--y", wrong});
    EXPECT_EQ(w.code, cli::kExitRuntime);
    EXPECT_NE(w.err.find(wrong), std::string::npos);
}

TEST(Cli, GenTwoBumpWritesBothDistributions) {
    const std::string out = tmp("pq.json");
    const Result r = run({"gen", "two-bump", "--n", "4096", "--eps", "0.5", "--out", out});
    ASSERT_EQ(r.code, cli::kExitOk) << r.err;
    const json j = read_json_file(out);
    const auto p = distribution_from_json(j["p"]);
    const auto q = distribution_from_json(j["q"]);
    EXPECT_NEAR(l1_distance(p, q), 1.0, 1e-9);
    EXPECT_EQ(j["schema"], 1);
}

TEST(Cli, SamplingIsDeterministic) {
    const std::string pq = tmp("pq2.json");
    ASSERT_EQ(run({"gen", "perturbed-l2", "--b", "0.01", "--eps", "0.05", "--seed", "3", "--out", pq}).code, 0);
    const auto a = run({"sample", "--dist", pq, "--which", "q", "--m", "500", "--seed", "9"});
    const auto b = run({"sample", "--dist", pq, "--which", "q", "--m", "500", "--seed", "9"});
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(a.out, b.out);
    EXPECT_EQ(histogram_from_json(json::parse(a.out)).size(), 100u);
}

TEST(Cli, EstimateAndRobustTest) {
    write_hist(tmp("x2.json"), {2, 0}, 2);
    write_hist(tmp("y2.json"), {1, 1}, 2);
    const Result e = run({"estimate-l2", "--x", tmp("x2.json"), "--y", tmp("y2.json")});
    ASSERT_EQ(e.code, 0);
    const json j = json::parse(e.out);
    EXPECT_EQ(j["Z"], -2.0);
    EXPECT_EQ(j["estimate"], 0.0);
    EXPECT_EQ(j["clamped"], true);
    const Result t = run({"test-l2", "--x", tmp("x2.json"), "--y", tmp("y2.json"), "--eps", "0.1"});
    EXPECT_EQ(json::parse(t.out)["decision"], "Equal");
}

TEST(Cli, FilteredTestReportsStage) {
    const std::string pq = tmp("pq3.json");
    ASSERT_EQ(run({"gen", "two-bump", "--n", "4096", "--eps", "0.5", "--out", pq}).code, 0);
    const Result r = run({"test-l1-filtered", "--pair", pq, "--eps", "0.5", "--kappa1", "1", "--kappa2",
                          "1", "--seed", "2"});
    ASSERT_EQ(r.code, 0) << r.err;
    const json j = json::parse(r.out);
    EXPECT_EQ(j["decision"], "Different");
    EXPECT_TRUE(j.contains("stage"));
    EXPECT_EQ(run({"test-l1-filtered", "--pair", pq, "--eps", "0.5", "--seed", "2"}).code, cli::kExitUsage);
    EXPECT_EQ(run({"test-l1-filtered", "--pair", pq, "--eps", "0.001", "--kappa1", "1", "--kappa2", "1",
                   "--seed", "2"})
                  .code,
              cli::kExitUsage);
}

TEST(Cli, SweepCsvIsDeterministicAcrossThreads) {
    const std::vector<std::string> args{"sweep", "--n", "256,512,1024", "--eps", "0.9", "--seed", "7", "--trials", "100"};
    const Result a = run(args);
    ASSERT_EQ(a.code, 0) << a.err;
    auto threaded = args;
    threaded.push_back("--threads");
    threaded.push_back("3");
    EXPECT_EQ(a.out, run(threaded).out);
    std::istringstream lines(a.out);
    std::string header;
    std::getline(lines, header);
    EXPECT_EQ(header,
              "instance,tester,n,eps,m,trials,err_null,err_alt,se_null,se_alt,seed,sweep,critical_m,in_regime,"
              "slope,slope_se,schema");
    int rows = 0;
    for (std::string line; std::getline(lines, line);) ++rows;
    EXPECT_EQ(rows, 3);
}

TEST(Cli, VerifyMomentsReport) {
    const std::string pq = tmp("pq4.json");
    ASSERT_EQ(run({"gen", "uniform", "--n", "20", "--out", pq}).code, 0);
    const Result r = run({"verify-moments", "--pair", pq, "--m", "40", "--seed", "1"});
    ASSERT_EQ(r.code, 0) << r.err;
    const json j = json::parse(r.out);
    EXPECT_EQ(j["checks"][0]["name"], "l1_mean");
    EXPECT_EQ(j["checks"][0]["passed"], true);
}
