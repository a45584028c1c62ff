#include "closeness/calibration.hpp"

#include <algorithm>
#include <cmath>

namespace closeness {

namespace {

bool same(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a)); }

template <typename Entry, typename Key>
void upsert(std::vector<Entry>& entries, const Entry& e, Key same_key) {
    auto it = std::find_if(entries.begin(), entries.end(), [&](const Entry& x) { return same_key(x, e); });
    if (it == entries.end()) {
        entries.push_back(e);
    } else {
        *it = e;
    }
}

}  // namespace

std::optional<double> CalibrationTable::l1_constant(std::size_t n, std::uint64_t m) const {
    for (const auto& e : l1) {
        if (e.n == n && e.m == m) return e.C;
    }
    return std::nullopt;
}

std::optional<FilteredParams> CalibrationTable::filtered_params(std::size_t n, double eps) const {
    for (const auto& e : filtered) {
        if (e.n == n && same(e.eps, eps)) {
            FilteredParams params;
            params.kappa1 = e.kappa1;
            params.kappa2 = e.kappa2;
            return params;
        }
    }
    return std::nullopt;
}

std::optional<double> CalibrationTable::l2_constant(double b, double eps) const {
    for (const auto& e : l2) {
        if (same(e.b, b) && same(e.eps, eps)) return e.c;
    }
    return std::nullopt;
}

void CalibrationTable::put(const L1Entry& e) {
    upsert(l1, e, [](const L1Entry& a, const L1Entry& b) { return a.n == b.n && a.m == b.m; });
}

void CalibrationTable::put(const FilteredEntry& e) {
    upsert(filtered, e, [](const FilteredEntry& a, const FilteredEntry& b) {
        return a.n == b.n && same(a.eps, b.eps);
    });
}

void CalibrationTable::put(const L2Entry& e) {
    upsert(l2, e, [](const L2Entry& a, const L2Entry& b) { return same(a.b, b.b) && same(a.eps, b.eps); });
}

json to_json(const CalibrationTable& t) {
    json j;
    j["schema"] = kSchemaVersion;
    json l1 = json::array();
    for (const auto& e : t.l1) {
        l1.push_back({{"n", e.n}, {"m", e.m}, {"C", e.C}, {"quantile", e.quantile},
                      {"trials", e.trials}, {"seed", e.seed}});
    }
    json filtered = json::array();
    for (const auto& e : t.filtered) {
        filtered.push_back({{"n", e.n}, {"eps", e.eps}, {"kappa1", e.kappa1},
                            {"kappa2", e.kappa2}, {"seed", e.seed}});
    }
    json l2 = json::array();
    for (const auto& e : t.l2) {
        l2.push_back({{"b", e.b}, {"eps", e.eps}, {"c", e.c}, {"seed", e.seed}});
    }
    j["l1"] = std::move(l1);
    j["l1_filtered"] = std::move(filtered);
    j["l2_robust"] = std::move(l2);
    return j;
}

CalibrationTable calibration_from_json(const json& j) {
    if (j.value("schema", 0) != kSchemaVersion) {
        throw std::invalid_argument("unsupported calibration schema");
    }
    CalibrationTable t;
    for (const auto& e : j.value("l1", json::array())) {
        t.l1.push_back({e.at("n").get<std::size_t>(), e.at("m").get<std::uint64_t>(),
                        e.at("C").get<double>(), e.value("quantile", 0.0),
                        e.value("trials", std::uint64_t{0}), e.value("seed", std::uint64_t{0})});
    }
    for (const auto& e : j.value("l1_filtered", json::array())) {
        t.filtered.push_back({e.at("n").get<std::size_t>(), e.at("eps").get<double>(),
                              e.at("kappa1").get<double>(), e.at("kappa2").get<double>(),
                              e.value("seed", std::uint64_t{0})});
    }
    for (const auto& e : j.value("l2_robust", json::array())) {
        t.l2.push_back({e.at("b").get<double>(), e.at("eps").get<double>(), e.at("c").get<double>(),
                        e.value("seed", std::uint64_t{0})});
    }
    return t;
}

CalibrationTable load_calibration(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) return {};
    const json j = read_json_file(path);
    try {
        return calibration_from_json(j);
    } catch (const std::exception& e) {
        throw InputError(path, 0, e.what());
    }
}

void save_calibration(const CalibrationTable& t, const std::filesystem::path& path) {
    write_text_file(path, to_json(t).dump(2) + "\n");
}

}  // namespace closeness
