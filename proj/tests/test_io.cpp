#include <gtest/gtest.h>

#include <filesystem>

#include "closeness/calibration.hpp"
#include "closeness/io.hpp"

using namespace closeness;

namespace {

std::filesystem::path temp_file(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "closeness_io_test";
    std::filesystem::create_directories(dir);
    return dir / name;
}

}  // namespace

TEST(Json, DistributionRoundTripDenseAndSparse) {
    const auto small = gen_random_simplex(20, 1);
    const json js = to_json(small);
    EXPECT_TRUE(js.contains("probs"));
    EXPECT_EQ(distribution_from_json(json::parse(js.dump())), small);

    std::vector<double> v(20000, 0.0);
    v[3] = 0.25;
    v[19999] = 0.75;
    const auto big = DiscreteDistribution::from_probs(v);
    const json jb = to_json(big);
    ASSERT_TRUE(jb.contains("sparse"));
    EXPECT_EQ(jb["sparse"].size(), 2u);
    EXPECT_EQ(distribution_from_json(json::parse(jb.dump())), big);
}

TEST(Json, DistributionRejectsBadShapes) {
    EXPECT_THROW(distribution_from_json(json::parse(R"({"n":3,"probs":[0.5,0.5]})")), std::invalid_argument);
    EXPECT_THROW(distribution_from_json(json::parse(R"({"n":2,"sparse":[[5,1.0]]})")), std::invalid_argument);
    EXPECT_THROW(distribution_from_json(json::parse(R"({"n":2})")), std::invalid_argument);
    EXPECT_THROW(distribution_from_json(json::parse(R"({"n":2,"probs":[0.7,0.7]})")), std::invalid_argument);
}

TEST(Json, HistogramRoundTrip) {
    const CountHistogram h({3, 0, 9}, SamplingMode::Fixed, 12);
    const json j = to_json(h);
    EXPECT_EQ(j["mode"], "fixed");
    EXPECT_EQ(histogram_from_json(json::parse(j.dump())), h);
    EXPECT_THROW(histogram_from_json(json::parse(R"({"n":1,"mode":"x","m":1,"counts":[1]})")),
                 std::invalid_argument);
}

TEST(Json, VerdictFields) {
    TestVerdict v;
    v.decision = Decision::Different;
    v.statistic = 6;
    v.threshold = 2;
    v.m = 4;
    v.stage = "heavy";
    const json j = to_json(v);
    EXPECT_EQ(j["decision"], "Different");
    EXPECT_EQ(j["Z"], 6.0);
    EXPECT_TRUE(j["clamped"].is_null());
    EXPECT_EQ(j["stage"], "heavy");
    EXPECT_FALSE(j.contains("terms"));
}

TEST(Files, MalformedJsonReportsPathAndByte) {
    const auto path = temp_file("bad.json");
    write_text_file(path, "{\"n\": 3, \"probs\": [0.1, }");
    try {
        read_json_file(path);
        FAIL();
    } catch (const InputError& e) {
        EXPECT_EQ(e.path(), path);
        EXPECT_EQ(e.byte(), 25u);
        EXPECT_NE(std::string(e.what()).find(path.string() + ": byte 25"), std::string::npos);
    }
    EXPECT_THROW(read_json_file(temp_file("missing.json")), InputError);
}

TEST(Csv, HeaderAndRows) {
    EXPECT_EQ(csv_header(), "instance,tester,n,eps,m,trials,err_null,err_alt,se_null,se_alt,seed,schema\n");
    ExperimentResult r;
    r.instance = "two-bump";
    r.tester = "l1";
    r.n = 10;
    r.eps = 0.5;
    r.seed = 3;
    ErrorRates rate;
    rate.m = 7;
    rate.trials = 4;
    rate.err_null = 0.25;
    r.rates = {rate};
    EXPECT_EQ(csv_rows(r, {"x"}), "two-bump,l1,10,0.5,7,4,0.25,0.0,0.0,0.0,3,x,1\n");
    EXPECT_EQ(format_number(0.1), "0.1");
}

TEST(CalibrationTable, UpsertLookupAndPersist) {
    CalibrationTable t;
    t.put(CalibrationTable::L1Entry{1000, 5000, 1.5, 5.0 / 6, 1000, 1});
    t.put(CalibrationTable::L1Entry{1000, 5000, 1.7, 5.0 / 6, 1000, 2});
    t.put(CalibrationTable::FilteredEntry{4096, 0.5, 0.6, 0.7, 3});
    t.put(CalibrationTable::L2Entry{0.001, 0.02, 4.2, 4});
    EXPECT_EQ(t.l1.size(), 1u);
    EXPECT_EQ(*t.l1_constant(1000, 5000), 1.7);
    EXPECT_FALSE(t.l1_constant(1000, 5001).has_value());
    EXPECT_EQ(t.filtered_params(4096, 0.5)->kappa2, 0.7);
    EXPECT_EQ(*t.l2_constant(0.001, 0.02), 4.2);

    const auto path = temp_file("calib.json");
    save_calibration(t, path);
    const CalibrationTable back = load_calibration(path);
    EXPECT_EQ(to_json(back).dump(), to_json(t).dump());
    EXPECT_TRUE(load_calibration(temp_file("absent.json")).l1.empty());
    write_text_file(path, R"({"schema":2})");
    EXPECT_THROW(load_calibration(path), InputError);
}
