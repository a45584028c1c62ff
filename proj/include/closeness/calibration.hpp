#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "closeness/filtering.hpp"
#include "closeness/io.hpp"

namespace closeness {

/// Persisted tester constants, keyed by the parameters they were
/// calibrated at.
struct CalibrationTable {
    struct L1Entry {
        std::size_t n = 0;
        std::uint64_t m = 0;
        double C = 0;
        double quantile = 0;
        std::uint64_t trials = 0;
        std::uint64_t seed = 0;
    };
    struct FilteredEntry {
        std::size_t n = 0;
        double eps = 0;
        double kappa1 = 0;
        double kappa2 = 0;
        std::uint64_t seed = 0;
    };
    /// Robust l2 sample-size constant: m = c sqrt(b) / eps^2.
    struct L2Entry {
        double b = 0;
        double eps = 0;
        double c = 0;
        std::uint64_t seed = 0;
    };

    std::vector<L1Entry> l1;
    std::vector<FilteredEntry> filtered;
    std::vector<L2Entry> l2;

    std::optional<double> l1_constant(std::size_t n, std::uint64_t m) const;
    std::optional<FilteredParams> filtered_params(std::size_t n, double eps) const;
    std::optional<double> l2_constant(double b, double eps) const;

    /// Inserts or replaces the entry with the same key.
    void put(const L1Entry& e);
    void put(const FilteredEntry& e);
    void put(const L2Entry& e);
};

json to_json(const CalibrationTable& t);
CalibrationTable calibration_from_json(const json& j);

/// Missing file yields an empty table.
CalibrationTable load_calibration(const std::filesystem::path& path);
void save_calibration(const CalibrationTable& t, const std::filesystem::path& path);

}  // namespace closeness
