#include "closeness/io.hpp"

#include <fstream>
#include <sstream>

namespace closeness {

namespace {

std::string describe(const std::filesystem::path& path, std::size_t byte, const std::string& detail) {
    std::ostringstream msg;
    msg << path.string() << ": byte " << byte << ": " << detail;
    return msg.str();
}

}  // namespace

InputError::InputError(std::filesystem::path path, std::size_t byte, const std::string& detail)
    : std::runtime_error(describe(path, byte, detail)), path_(std::move(path)), byte_(byte) {}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError(path, 0, "cannot open file");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    try {
        return json::parse(buffer.str());
    } catch (const json::parse_error& e) {
        throw InputError(path, e.byte, e.what());
    }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << text;
    if (!out) {
        throw std::runtime_error("failed writing " + path.string());
    }
}

// ---------------------------------------------------------------------------

json to_json(const DiscreteDistribution& p) {
    json j;
    j["n"] = p.size();
    if (p.size() < kDenseWriteLimit) {
        j["probs"] = std::vector<double>(p.probs().begin(), p.probs().end());
    } else {
        json sparse = json::array();
        for (std::size_t i = 0; i < p.size(); ++i) {
            if (p[i] != 0.0) sparse.push_back(json::array({i, p[i]}));
        }
        j["sparse"] = std::move(sparse);
    }
    return j;
}

DiscreteDistribution distribution_from_json(const json& j) {
    const auto n = j.at("n").get<std::size_t>();
    if (j.contains("probs")) {
        auto probs = j.at("probs").get<std::vector<double>>();
        if (probs.size() != n) {
            throw std::invalid_argument("\"probs\" has " + std::to_string(probs.size()) +
                                        " entries but n = " + std::to_string(n));
        }
        return DiscreteDistribution::from_probs(std::move(probs));
    }
    if (j.contains("sparse")) {
        std::vector<double> probs(n, 0.0);
        for (const auto& entry : j.at("sparse")) {
            const auto i = entry.at(0).get<std::size_t>();
            if (i >= n) {
                throw std::invalid_argument("sparse index " + std::to_string(i) + " outside [0, n)");
            }
            probs[i] = entry.at(1).get<double>();
        }
        return DiscreteDistribution::from_probs(std::move(probs));
    }
    throw std::invalid_argument("distribution needs \"probs\" or \"sparse\"");
}

json to_json(const CountHistogram& h) {
    json j;
    j["n"] = h.size();
    j["mode"] = h.mode() == SamplingMode::Poissonized ? "poi" : "fixed";
    j["m"] = h.m();
    j["counts"] = std::vector<std::uint64_t>(h.counts().begin(), h.counts().end());
    return j;
}

CountHistogram histogram_from_json(const json& j) {
    const auto n = j.at("n").get<std::size_t>();
    const auto mode_name = j.at("mode").get<std::string>();
    SamplingMode mode;
    if (mode_name == "poi") {
        mode = SamplingMode::Poissonized;
    } else if (mode_name == "fixed") {
        mode = SamplingMode::Fixed;
    } else {
        throw std::invalid_argument("histogram mode must be \"poi\" or \"fixed\"");
    }
    const auto m = j.at("m").get<std::uint64_t>();
    auto counts = j.at("counts").get<std::vector<std::uint64_t>>();
    if (counts.size() != n) {
        throw std::invalid_argument("\"counts\" has " + std::to_string(counts.size()) +
                                    " entries but n = " + std::to_string(n));
    }
    return CountHistogram(std::move(counts), mode, m);
}

json to_json(const TestVerdict& v) {
    json j;
    j["decision"] = to_string(v.decision);
    j["Z"] = v.statistic;
    j["threshold"] = v.threshold;
    j["m"] = v.m;
    j["clamped"] = v.clamped ? json(*v.clamped) : json(nullptr);
    if (v.stage) j["stage"] = *v.stage;
    if (!v.terms.empty()) j["terms"] = v.terms;
    return j;
}

json to_json(const EstimateResult& e) {
    json j;
    j["estimate"] = e.estimate;
    j["Z"] = e.raw_statistic;
    j["m"] = e.m;
    j["clamped"] = e.clamped;
    return j;
}

json to_json(const ErrorRates& r) {
    json j;
    j["m"] = r.m;
    j["trials"] = r.trials;
    j["err_null"] = r.err_null;
    j["err_alt"] = r.err_alt;
    j["se_null"] = r.se_null;
    j["se_alt"] = r.se_alt;
    j["constant"] = r.constant;
    if (r.constant2 != 0.0) j["constant2"] = r.constant2;
    return j;
}

json to_json(const ExperimentResult& r, bool include_timing) {
    json j;
    j["schema"] = kSchemaVersion;
    j["instance"] = r.instance;
    j["tester"] = r.tester;
    j["n"] = r.n;
    j["eps"] = r.eps;
    j["seed"] = r.seed;
    json rates = json::array();
    for (const auto& rate : r.rates) rates.push_back(to_json(rate));
    j["rates"] = std::move(rates);
    j["critical_m"] = r.critical_m ? json(*r.critical_m) : json(nullptr);
    if (r.below_critical) j["below_critical"] = to_json(*r.below_critical);
    if (include_timing) j["wall_time_s"] = r.wall_time_s;
    return j;
}

json to_json(const MomentCheck& c) {
    json j;
    j["name"] = c.name;
    j["kind"] = c.kind == CheckKind::TwoSided ? "two-sided"
                : c.kind == CheckKind::AtLeast ? "at-least"
                                                : "at-most";
    j["observed"] = c.observed;
    j["expected"] = c.expected;
    j["tolerance"] = c.tolerance;
    j["passed"] = c.passed;
    return j;
}

json to_json(const MomentReport& r) {
    json j;
    j["schema"] = kSchemaVersion;
    j["n"] = r.n;
    j["m"] = r.m;
    j["trials"] = r.trials;
    json checks = json::array();
    for (const auto& c : r.checks) checks.push_back(to_json(c));
    j["checks"] = std::move(checks);
    j["passed"] = r.all_passed();
    return j;
}

std::string format_number(double v) { return json(v).dump(); }

std::string csv_header(const std::vector<std::string>& extra_columns) {
    std::string header = "instance,tester,n,eps,m,trials,err_null,err_alt,se_null,se_alt,seed";
    for (const auto& c : extra_columns) header += "," + c;
    return header + ",schema\n";
}

std::string csv_rows(const ExperimentResult& r, const std::vector<std::string>& extra_values) {
    std::ostringstream out;
    for (const auto& rate : r.rates) {
        out << r.instance << ',' << r.tester << ',' << r.n << ',' << format_number(r.eps) << ','
            << rate.m << ',' << rate.trials << ',' << format_number(rate.err_null) << ','
            << format_number(rate.err_alt) << ',' << format_number(rate.se_null) << ','
            << format_number(rate.se_alt) << ',' << r.seed;
        for (const auto& v : extra_values) out << ',' << v;
        out << ',' << kSchemaVersion << '\n';
    }
    return out.str();
}

}  // namespace closeness
