#include "closeness/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <optional>
#include <sstream>

#include "closeness/calibration.hpp"
#include "closeness/distribution.hpp"
#include "closeness/experiments.hpp"
#include "closeness/filtering.hpp"
#include "closeness/io.hpp"
#include "closeness/sampling.hpp"
#include "closeness/testers.hpp"

namespace closeness::cli {

namespace {

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string dump(const json& j) { return j.dump(); }

/// Wraps semantic failures while decoding a file as InputError.
template <typename F>
auto decode(const std::string& path, F f) {
    try {
        return f();
    } catch (const InputError&) {
        throw;
    } catch (const std::exception& e) {
        throw InputError(path, 0, e.what());
    }
}

/// A plain distribution file, or one side ("p" or "q") of a pair file.
DiscreteDistribution load_distribution(const std::string& path, const std::string& which = "p") {
    const json j = read_json_file(path);
    return decode(path, [&] {
        if (j.contains("p") && j.contains("q")) return distribution_from_json(j.at(which));
        return distribution_from_json(j);
    });
}

CountHistogram load_histogram(const std::string& path) {
    const json j = read_json_file(path);
    return decode(path, [&] { return histogram_from_json(j); });
}

std::pair<DiscreteDistribution, DiscreteDistribution> load_pair(const std::string& pair_path,
                                                                const std::string& p_path,
                                                                const std::string& q_path) {
    if (!pair_path.empty()) {
        if (!p_path.empty() || !q_path.empty()) {
            throw UsageError("--pair cannot be combined with --p/--q");
        }
        return {load_distribution(pair_path, "p"), load_distribution(pair_path, "q")};
    }
    if (p_path.empty() || q_path.empty()) {
        throw UsageError("give either --pair or both --p and --q");
    }
    return {load_distribution(p_path), load_distribution(q_path)};
}

void emit(std::ostream& out, const std::string& path, const json& j) {
    if (path.empty()) {
        out << dump(j) << '\n';
    } else {
        write_text_file(path, j.dump(2) + "\n");
    }
}

// ---------------------------------------------------------------------------

struct GenOptions {
    std::string family;
    std::size_t n = 0;
    double eps = 0;
    double b = 0;
    std::optional<std::uint64_t> seed;
    bool relaxed = false;
    std::string out;
};

int cmd_gen(const GenOptions& o, std::ostream& out) {
    auto need = [&](bool ok, const char* what) {
        if (!ok) throw UsageError("gen " + o.family + " requires " + what);
    };
    json doc;
    doc["schema"] = kSchemaVersion;
    doc["family"] = o.family;
    json params;
    DiscreteDistribution p = DiscreteDistribution::uniform(1);
    DiscreteDistribution q = p;
    if (o.family == "uniform") {
        need(o.n > 0, "--n");
        params["n"] = o.n;
        p = q = DiscreteDistribution::uniform(o.n);
    } else if (o.family == "two-bump") {
        need(o.n > 0 && o.eps > 0, "--n and --eps");
        TwoBumpOptions opts;
        opts.enforce_regime = !o.relaxed;
        TwoBumpPair pair = gen_two_bump_l1(o.n, o.eps, opts);
        params = {{"n", o.n}, {"eps", o.eps}, {"b", pair.layout.b}, {"a", pair.layout.a},
                  {"size_a", pair.layout.size_a}, {"size_b", pair.layout.size_b}};
        p = std::move(pair.p);
        q = std::move(pair.q);
    } else if (o.family == "perturbed-l2") {
        need(o.b > 0 && o.seed.has_value(), "--b, --eps and --seed");
        PerturbedPair pair = gen_perturbed_uniform_l2(o.b, o.eps, *o.seed);
        params = {{"b", o.b}, {"eps", o.eps}, {"seed", *o.seed}};
        p = std::move(pair.p);
        q = std::move(pair.q);
    } else {
        need(o.n > 0 && o.seed.has_value(), "--n and --seed");
        params = {{"n", o.n}, {"seed", *o.seed}};
        p = gen_random_simplex(o.n, *o.seed);
        q = p;
    }
    doc["params"] = std::move(params);
    doc["l1"] = l1_distance(p, q);
    doc["l2"] = l2_distance(p, q);
    doc["p"] = to_json(p);
    doc["q"] = to_json(q);
    if (o.out.empty()) {
        out << dump(doc) << '\n';
    } else {
        write_text_file(o.out, doc.dump() + "\n");
        out << dump({{"out", o.out}, {"family", o.family}, {"n", p.size()}, {"l1", doc["l1"]},
                     {"l2", doc["l2"]}})
            << '\n';
    }
    return kExitOk;
}

struct SampleOptions {
    std::string dist;
    std::string which = "p";
    std::uint64_t m = 0;
    std::string mode = "poi";
    std::uint64_t seed = 0;
    std::string out;
};

int cmd_sample(const SampleOptions& o, std::ostream& out) {
    const DiscreteDistribution p = load_distribution(o.dist, o.which);
    Rng rng(o.seed);
    const CountHistogram h = o.mode == "poi" ? sample_histogram_poissonized(p, o.m, rng)
                                             : sample_histogram_fixed(p, o.m, rng);
    emit(out, o.out, to_json(h));
    return kExitOk;
}

struct PairHistOptions {
    std::string x;
    std::string y;
};

struct TestL1Options : PairHistOptions {
    std::optional<double> C;
    std::string calib;
    bool terms = false;
};

int cmd_test_l1(const TestL1Options& o, std::ostream& out) {
    if (!o.C && o.calib.empty()) {
        throw UsageError("test-l1 needs --C or --calib");
    }
    const CountHistogram x = load_histogram(o.x);
    const CountHistogram y = load_histogram(o.y);
    double C = 0;
    if (o.C) {
        C = *o.C;
    } else {
        const auto found = load_calibration(o.calib).l1_constant(x.size(), x.m());
        if (!found) {
            std::ostringstream msg;
            msg << "calibration table " << o.calib << " has no l1 entry for n = " << x.size()
                << ", m = " << x.m() << "; run `calibrate l1` or pass --C";
            throw UsageError(msg.str());
        }
        C = *found;
    }
    out << dump(to_json(l1_test(x, y, C, o.terms))) << '\n';
    return kExitOk;
}

int cmd_estimate_l2(const PairHistOptions& o, std::ostream& out) {
    out << dump(to_json(l2_estimate(load_histogram(o.x), load_histogram(o.y)))) << '\n';
    return kExitOk;
}

struct TestL2Options : PairHistOptions {
    double eps = 0;
};

int cmd_test_l2(const TestL2Options& o, std::ostream& out) {
    out << dump(to_json(l2_robust_test(load_histogram(o.x), load_histogram(o.y), o.eps))) << '\n';
    return kExitOk;
}

struct PairDistOptions {
    std::string pair;
    std::string p;
    std::string q;
};

struct FilteredOptions : PairDistOptions {
    double eps = 0;
    std::optional<double> kappa1;
    std::optional<double> kappa2;
    std::string calib;
    std::uint64_t seed = 0;
};

int cmd_test_l1_filtered(const FilteredOptions& o, std::ostream& out) {
    if (o.kappa1.has_value() != o.kappa2.has_value()) {
        throw UsageError("--kappa1 and --kappa2 go together");
    }
    if (!o.kappa1 && o.calib.empty()) {
        throw UsageError("test-l1-filtered needs --kappa1/--kappa2 or --calib");
    }
    const auto [p, q] = load_pair(o.pair, o.p, o.q);
    if (p.size() != q.size()) {
        throw UsageError("p and q have different domain sizes");
    }
    FilteredParams params;
    if (o.kappa1) {
        params.kappa1 = *o.kappa1;
        params.kappa2 = *o.kappa2;
    } else {
        const auto found = load_calibration(o.calib).filtered_params(p.size(), o.eps);
        if (!found) {
            std::ostringstream msg;
            msg << "calibration table " << o.calib << " has no l1-filtered entry for n = " << p.size()
                << ", eps = " << format_number(o.eps);
            throw UsageError(msg.str());
        }
        params = *found;
    }
    const AliasSampler sp(p);
    const AliasSampler sq(q);
    out << dump(to_json(l1_filtered_test(sp, sq, o.eps, params, o.seed))) << '\n';
    return kExitOk;
}

struct CalibrateOptions {
    std::string kind;
    std::size_t n = 0;
    std::uint64_t m = 0;
    double eps = 0;
    double b = 0;
    std::uint64_t trials = 0;
    double quantile = kDefaultCalibrationQuantile;
    std::uint64_t seed = 0;
    unsigned threads = 1;
    std::string calib;
};

int cmd_calibrate(const CalibrateOptions& o, std::ostream& out) {
    std::optional<CalibrationTable> table;
    if (!o.calib.empty()) table = load_calibration(o.calib);
    json entry;
    if (o.kind == "l1") {
        if (o.n == 0 || o.m == 0) throw UsageError("calibrate l1 requires --n and --m");
        const std::uint64_t trials = o.trials ? o.trials : kDefaultCalibrationTrials;
        const ThresholdCalibration cal =
            calibrate_threshold(o.n, o.m, trials, o.quantile, o.seed, o.threads);
        entry = {{"kind", "l1"}, {"n", o.n}, {"m", o.m}, {"C", cal.C}, {"quantile", cal.quantile},
                 {"trials", cal.trials}, {"se", cal.se}, {"seed", o.seed}};
        if (table) table->put(CalibrationTable::L1Entry{o.n, o.m, cal.C, cal.quantile, cal.trials, o.seed});
    } else if (o.kind == "l1-filtered") {
        if (o.n == 0 || !(o.eps > 0)) throw UsageError("calibrate l1-filtered requires --n and --eps");
        ExperimentConfig config(InstanceSpec(family::TwoBumpL1{o.n, o.eps, false}));
        config.tester = TesterKind::L1Filtered;
        config.eps = o.eps;
        config.master_seed = o.seed;
        config.threads = o.threads;
        if (o.trials) config.trials = o.trials;
        const FilteredCalibration cal = calibrate_filtered(config);
        entry = {{"kind", "l1-filtered"}, {"n", o.n},          {"eps", o.eps},
                 {"kappa1", cal.kappa1},  {"kappa2", cal.kappa2}, {"m1", cal.m1},
                 {"m2", cal.m2},          {"total", cal.total()}, {"rates", to_json(cal.rates)},
                 {"seed", o.seed}};
        if (table) table->put(CalibrationTable::FilteredEntry{o.n, o.eps, cal.kappa1, cal.kappa2, o.seed});
    } else {
        if (!(o.b > 0) || !(o.eps > 0)) throw UsageError("calibrate l2-robust requires --b and --eps");
        // The tester runs at eps/2 so the instance sits at twice its tolerance.
        ExperimentConfig config(InstanceSpec(family::PerturbedUniformL2{o.b, o.eps, o.seed}));
        config.tester = TesterKind::L2Robust;
        config.eps = o.eps / 2.0;
        config.master_seed = o.seed;
        config.threads = o.threads;
        if (o.trials) config.trials = o.trials;
        const ExperimentResult r = find_critical_m(config);
        const double c = static_cast<double>(*r.critical_m) * o.eps * o.eps / std::sqrt(o.b);
        entry = {{"kind", "l2-robust"}, {"b", o.b}, {"eps", o.eps}, {"c", c},
                 {"critical_m", *r.critical_m}, {"seed", o.seed}};
        if (table) table->put(CalibrationTable::L2Entry{o.b, o.eps, c, o.seed});
    }
    if (table) save_calibration(*table, o.calib);
    out << dump(entry) << '\n';
    return kExitOk;
}

struct SweepOptions {
    std::string family = "two-bump";
    std::string tester = "l1";
    std::vector<std::size_t> n;
    std::vector<double> eps;
    std::uint64_t seed = 0;
    std::uint64_t trials = kDefaultProbeTrials;
    std::string calibration_null = "instance";
    std::uint64_t m_lo = 16;
    std::uint64_t m_hi = std::uint64_t{1} << 24;
    unsigned threads = 1;
    bool json_out = false;
};

int cmd_sweep(const SweepOptions& o, std::ostream& out) {
    if (o.n.size() > 1 && o.eps.size() > 1) {
        throw UsageError("sweep varies either --n or --eps, not both");
    }
    const bool over_n = o.n.size() > 1;
    const TesterKind tester = parse_tester(o.tester);
    if (tester == TesterKind::L2Robust) {
        throw UsageError("sweep supports testers l1, l1-deviation and l1-filtered");
    }
    struct Point {
        ExperimentResult result;
        std::uint64_t critical = 0;
        bool in_regime = false;
    };
    std::vector<Point> points;
    for (std::size_t n : o.n) {
        for (double eps : o.eps) {
            ExperimentConfig config(InstanceSpec(family::TwoBumpL1{n, eps, false}));
            config.tester = tester;
            config.eps = eps;
            config.master_seed = o.seed;
            config.trials = o.trials;
            config.threads = o.threads;
            config.m_lo = o.m_lo;
            config.m_hi = o.m_hi;
            config.calibration_null = o.calibration_null == "uniform" ? CalibrationNull::Uniform
                                                                      : CalibrationNull::Instance;
            Point pt;
            pt.in_regime = eps >= two_bump_min_eps(n);
            if (tester == TesterKind::L1Filtered) {
                const FilteredCalibration cal = calibrate_filtered(config);
                pt.result.instance = config.instance.name();
                pt.result.tester = to_string(tester);
                pt.result.n = n;
                pt.result.eps = eps;
                pt.result.seed = o.seed;
                ErrorRates r = cal.rates;
                r.m = cal.total();
                pt.result.rates = {r};
                pt.result.critical_m = cal.total();
            } else {
                pt.result = find_critical_m(config);
                // Keep only the passing probe at the critical m.
                ErrorRates at;
                for (const auto& r : pt.result.rates) {
                    if (r.m == *pt.result.critical_m) at = r;
                }
                pt.result.rates = {at};
            }
            pt.critical = *pt.result.critical_m;
            points.push_back(std::move(pt));
        }
    }
    std::optional<ScalingFit> fit;
    if (points.size() >= 3) {
        std::vector<std::pair<double, double>> xy;
        for (const auto& pt : points) {
            xy.emplace_back(over_n ? static_cast<double>(pt.result.n) : pt.result.eps,
                            static_cast<double>(pt.critical));
        }
        fit = fit_scaling_exponent(xy);
    }
    const std::string slope = fit ? format_number(fit->slope) : "";
    const std::string slope_se = fit ? format_number(fit->stderr_slope) : "";
    if (o.json_out) {
        for (const auto& pt : points) {
            json j = to_json(pt.result);
            j["in_regime"] = pt.in_regime;
            out << dump(j) << '\n';
        }
        json summary;
        summary["schema"] = kSchemaVersion;
        summary["sweep"] = over_n ? "n" : "eps";
        summary["slope"] = fit ? json(fit->slope) : json(nullptr);
        summary["slope_se"] = fit ? json(fit->stderr_slope) : json(nullptr);
        out << dump(summary) << '\n';
        return kExitOk;
    }
    out << csv_header({"sweep", "critical_m", "in_regime", "slope", "slope_se"});
    for (const auto& pt : points) {
        out << csv_rows(pt.result, {over_n ? "n" : "eps", std::to_string(pt.critical),
                                    pt.in_regime ? "1" : "0", slope, slope_se});
    }
    return kExitOk;
}

struct MomentsOptions : PairDistOptions {
    std::uint64_t m = 0;
    std::uint64_t trials = 10000;
    std::uint64_t seed = 0;
    unsigned threads = 1;
};

int cmd_verify_moments(const MomentsOptions& o, std::ostream& out) {
    const auto [p, q] = load_pair(o.pair, o.p, o.q);
    out << dump(to_json(verify_moments(p, q, o.m, o.trials, o.seed, o.threads))) << '\n';
    return kExitOk;
}

const char* kVerdictSchema =
    "Output: one JSON line {\"decision\":\"Equal\"|\"Different\",\"Z\",\"threshold\",\"m\","
    "\"clamped\"} plus \"stage\" for the filtered tester and \"terms\" when requested.";

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Closeness testing of discrete distributions from samples."};
    app.name(args.empty() ? "closeness" : args.front());
    app.require_subcommand(1);
    app.footer(
        "Exit codes: 0 success, 1 runtime failure or malformed input, 2 usage error.\n"
        "Stochastic subcommands require --seed; output is a pure function of the arguments.");

    GenOptions gen;
    auto* gen_cmd = app.add_subcommand("gen", "Generate a named instance pair (p, q).");
    gen_cmd->add_option("family", gen.family, "uniform | two-bump | perturbed-l2 | simplex")
        ->required()
        ->check(CLI::IsMember({"uniform", "two-bump", "perturbed-l2", "simplex"}));
    gen_cmd->add_option("--n", gen.n, "Domain size (uniform, two-bump, simplex)")->check(CLI::PositiveNumber);
    gen_cmd->add_option("--eps", gen.eps, "Separation (two-bump: l1, perturbed-l2: l2)")
        ->check(CLI::NonNegativeNumber);
    gen_cmd->add_option("--b", gen.b, "Uniform mass 1/n of the perturbed-l2 base")->check(CLI::PositiveNumber);
    gen_cmd->add_option("--seed", gen.seed, "Seed (perturbed-l2, simplex)");
    gen_cmd->add_flag("--relaxed", gen.relaxed, "two-bump: skip the eps >= n^{-1/4} regime check");
    gen_cmd->add_option("--out", gen.out, "Write the pair here instead of stdout");
    gen_cmd->footer(
        "Output: {\"schema\":1,\"family\",\"params\",\"l1\",\"l2\",\"p\",\"q\"} where p and q are "
        "distributions {\"n\",\"probs\"} (or \"sparse\": [[i,p_i],...] for n >= 10000). With --out a "
        "one-line summary goes to stdout.");

    SampleOptions sample;
    auto* sample_cmd = app.add_subcommand("sample", "Draw a count histogram from a distribution.");
    sample_cmd->add_option("--dist", sample.dist, "Distribution or pair file")->required();
    sample_cmd->add_option("--which", sample.which, "Side of a pair file")->check(CLI::IsMember({"p", "q"}))
        ->capture_default_str();
    sample_cmd->add_option("--m", sample.m, "Sample size (mean size when Poissonized)")->required();
    sample_cmd->add_option("--mode", sample.mode, "poi | fixed")->check(CLI::IsMember({"poi", "fixed"}))
        ->capture_default_str();
    sample_cmd->add_option("--seed", sample.seed, "Seed")->required();
    sample_cmd->add_option("--out", sample.out, "Write the histogram here instead of stdout");
    sample_cmd->footer("Output: {\"n\",\"mode\":\"poi\"|\"fixed\",\"m\",\"counts\"}.");

    TestL1Options test_l1;
    auto* test_l1_cmd = app.add_subcommand("test-l1", "l1 closeness test on two histograms.");
    test_l1_cmd->add_option("--x", test_l1.x, "Histogram of p")->required();
    test_l1_cmd->add_option("--y", test_l1.y, "Histogram of q")->required();
    test_l1_cmd->add_option("--C", test_l1.C, "Threshold constant; rejects when Z > C sqrt(m)")
        ->check(CLI::PositiveNumber);
    test_l1_cmd->add_option("--calib", test_l1.calib, "Calibration table to look up C by (n, m)");
    test_l1_cmd->add_flag("--terms", test_l1.terms, "Include per-element terms");
    test_l1_cmd->footer(kVerdictSchema);

    PairHistOptions est_l2;
    auto* est_l2_cmd = app.add_subcommand("estimate-l2", "Estimate ||p - q||_2 from two histograms.");
    est_l2_cmd->add_option("--x", est_l2.x, "Histogram of p")->required();
    est_l2_cmd->add_option("--y", est_l2.y, "Histogram of q")->required();
    est_l2_cmd->footer("Output: {\"estimate\",\"Z\",\"m\",\"clamped\"}; estimate = sqrt(max(Z,0))/m.");

    TestL2Options test_l2;
    auto* test_l2_cmd =
        app.add_subcommand("test-l2", "Robust l2 test: ||p-q||_2 <= eps versus >= 2 eps.");
    test_l2_cmd->add_option("--x", test_l2.x, "Histogram of p")->required();
    test_l2_cmd->add_option("--y", test_l2.y, "Histogram of q")->required();
    test_l2_cmd->add_option("--eps", test_l2.eps, "Tolerance; rejects when the estimate exceeds 1.5 eps")
        ->required()
        ->check(CLI::PositiveNumber);
    test_l2_cmd->footer(kVerdictSchema);

    FilteredOptions filt;
    auto* filt_cmd =
        app.add_subcommand("test-l1-filtered", "Heavy/light l1 tester with sample access to p and q.");
    filt_cmd->add_option("--pair", filt.pair, "Pair file from `gen`");
    filt_cmd->add_option("--p", filt.p, "Distribution file for p");
    filt_cmd->add_option("--q", filt.q, "Distribution file for q");
    filt_cmd->add_option("--eps", filt.eps, "l1 distance parameter, at least 1/sqrt(n)")
        ->required()
        ->check(CLI::PositiveNumber);
    filt_cmd->add_option("--kappa1", filt.kappa1, "Step 1 constant")->check(CLI::PositiveNumber);
    filt_cmd->add_option("--kappa2", filt.kappa2, "Step 2 constant")->check(CLI::PositiveNumber);
    filt_cmd->add_option("--calib", filt.calib, "Calibration table to look up kappas by (n, eps)");
    filt_cmd->add_option("--seed", filt.seed, "Seed")->required();
    filt_cmd->footer(kVerdictSchema);

    CalibrateOptions cal;
    auto* cal_cmd = app.add_subcommand("calibrate", "Calibrate tester constants by simulation.");
    cal_cmd->add_option("kind", cal.kind, "l1 | l1-filtered | l2-robust")
        ->required()
        ->check(CLI::IsMember({"l1", "l1-filtered", "l2-robust"}));
    cal_cmd->add_option("--n", cal.n, "Domain size (l1, l1-filtered)")->check(CLI::PositiveNumber);
    cal_cmd->add_option("--m", cal.m, "Sample size (l1)")->check(CLI::PositiveNumber);
    cal_cmd->add_option("--eps", cal.eps, "Distance (l1-filtered on two-bump, l2-robust on perturbed-l2)")
        ->check(CLI::PositiveNumber);
    cal_cmd->add_option("--b", cal.b, "Base mass of the perturbed-l2 instance (l2-robust)")
        ->check(CLI::PositiveNumber);
    cal_cmd->add_option("--trials", cal.trials,
                        "Trials (l1: default 1000, minimum 1000; searches: per probe, default 400)");
    cal_cmd->add_option("--quantile", cal.quantile, "Null quantile of Z/sqrt(m) (l1)")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    cal_cmd->add_option("--seed", cal.seed, "Seed")->required();
    cal_cmd->add_option("--threads", cal.threads, "Worker threads")->check(CLI::PositiveNumber);
    cal_cmd->add_option("--calib", cal.calib, "Table to update (created if missing)");
    cal_cmd->footer(
        "l1: C is the null quantile of Z/sqrt(m) under p = q = uniform(n).\n"
        "l1-filtered: kappa1 from Step 1 alone at half the error budget, then kappa2 from the whole "
        "test, on two-bump(n, eps).\n"
        "l2-robust: c = m* eps^2 / sqrt(b), with m* the critical sample size of the robust test at "
        "eps/2 on perturbed-l2(b, eps).\n"
        "Output: one JSON line describing the entry.");

    SweepOptions sweep;
    auto* sweep_cmd =
        app.add_subcommand("sweep", "Critical sample sizes over n or eps and their log-log slope.");
    sweep_cmd->add_option("--family", sweep.family, "Instance family")
        ->check(CLI::IsMember({"two-bump"}))
        ->capture_default_str();
    sweep_cmd->add_option("--tester", sweep.tester, "l1 | l1-deviation | l1-filtered")
        ->check(CLI::IsMember({"l1", "l1-deviation", "l1-filtered"}))
        ->capture_default_str();
    sweep_cmd->add_option("--n", sweep.n, "Domain sizes, comma separated")->required()->delimiter(',');
    sweep_cmd->add_option("--eps", sweep.eps, "Distances, comma separated")->required()->delimiter(',');
    sweep_cmd->add_option("--seed", sweep.seed, "Seed")->required();
    sweep_cmd->add_option("--trials", sweep.trials, "Trials per probe and hypothesis")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sweep_cmd->add_option("--calibration-null", sweep.calibration_null,
                          "Null used for l1 thresholds: instance (p = q = instance p) or uniform")
        ->check(CLI::IsMember({"instance", "uniform"}))
        ->capture_default_str();
    sweep_cmd->add_option("--m-lo", sweep.m_lo, "Lower search bound")->check(CLI::PositiveNumber)
        ->capture_default_str();
    sweep_cmd->add_option("--m-hi", sweep.m_hi, "Upper search bound")->check(CLI::PositiveNumber)
        ->capture_default_str();
    sweep_cmd->add_option("--threads", sweep.threads, "Worker threads")->check(CLI::PositiveNumber);
    sweep_cmd->add_flag("--json", sweep.json_out, "JSON lines instead of CSV");
    sweep_cmd->footer(
        "Output (CSV): instance,tester,n,eps,m,trials,err_null,err_alt,se_null,se_alt,seed,sweep,"
        "critical_m,in_regime,slope,slope_se,schema; one row per point at its critical m. slope is "
        "the least-squares slope of log critical_m on log n (or log eps), empty below 3 points. "
        "Two-bump instances outside eps >= n^{-1/4} are used as generated and flagged in_regime=0.");

    MomentsOptions mom;
    auto* mom_cmd = app.add_subcommand("verify-moments",
                                       "Compare Monte Carlo moments of both statistics with closed forms.");
    mom_cmd->add_option("--pair", mom.pair, "Pair file from `gen`");
    mom_cmd->add_option("--p", mom.p, "Distribution file for p");
    mom_cmd->add_option("--q", mom.q, "Distribution file for q");
    mom_cmd->add_option("--m", mom.m, "Poissonized sample size")->required()->check(CLI::PositiveNumber);
    mom_cmd->add_option("--trials", mom.trials, "Trials, at least 10000")->capture_default_str();
    mom_cmd->add_option("--seed", mom.seed, "Seed")->required();
    mom_cmd->add_option("--threads", mom.threads, "Worker threads")->check(CLI::PositiveNumber);
    mom_cmd->footer(
        "Output: {\"schema\":1,\"n\",\"m\",\"trials\",\"checks\":[{\"name\",\"kind\",\"observed\","
        "\"expected\",\"tolerance\",\"passed\"}],\"passed\"}. Failed checks do not change the exit code.");

    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*gen_cmd) return cmd_gen(gen, out);
        if (*sample_cmd) return cmd_sample(sample, out);
        if (*test_l1_cmd) return cmd_test_l1(test_l1, out);
        if (*est_l2_cmd) return cmd_estimate_l2(est_l2, out);
        if (*test_l2_cmd) return cmd_test_l2(test_l2, out);
        if (*filt_cmd) return cmd_test_l1_filtered(filt, out);
        if (*cal_cmd) return cmd_calibrate(cal, out);
        if (*sweep_cmd) return cmd_sweep(sweep, out);
        if (*mom_cmd) return cmd_verify_moments(mom, out);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        // Parameter combinations the library rejects are usage errors.
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitUsage;
}

}  // namespace closeness::cli
