#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "closeness/distribution.hpp"
#include "closeness/experiments.hpp"
#include "closeness/sampling.hpp"
#include "closeness/testers.hpp"

namespace closeness {

using json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

/// Distributions with n below this are written densely.
inline constexpr std::size_t kDenseWriteLimit = 10000;

/// A malformed input file: where it is and, for syntax errors, the byte
/// offset of the problem.
class InputError : public std::runtime_error {
public:
    InputError(std::filesystem::path path, std::size_t byte, const std::string& detail);
    const std::filesystem::path& path() const { return path_; }
    std::size_t byte() const { return byte_; }

private:
    std::filesystem::path path_;
    std::size_t byte_;
};

/// Parses a JSON file; syntax errors become InputError with the byte offset.
json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

json to_json(const DiscreteDistribution& p);
/// Accepts the dense ("probs") and sparse ("sparse") layouts.
DiscreteDistribution distribution_from_json(const json& j);

json to_json(const CountHistogram& h);
CountHistogram histogram_from_json(const json& j);

json to_json(const TestVerdict& v);
json to_json(const EstimateResult& e);

json to_json(const ErrorRates& r);
json to_json(const ExperimentResult& r, bool include_timing = false);
json to_json(const MomentReport& r);
json to_json(const MomentCheck& c);

/// Shortest round-trip decimal form of a double.
std::string format_number(double v);

/// Header of the experiment CSV.
std::string csv_header(const std::vector<std::string>& extra_columns = {});

/// One CSV row per error-rate entry of `r`.
std::string csv_rows(const ExperimentResult& r, const std::vector<std::string>& extra_values = {});

}  // namespace closeness
