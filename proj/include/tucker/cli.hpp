#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "tucker/search.hpp"

namespace tucker::cli {

using nlohmann::json;

enum ExitCode : int {
    kOk = 0,
    kFailure = 1,
    kBudget = 2,
    kNoDirection = 3,
    kInputError = 4,
};

// Unset fields take mode-specific defaults in resolve().
struct RunConfig {
    std::optional<std::string> mode;  // practical | theory
    std::optional<std::size_t> r;
    std::optional<std::size_t> d;  // taken from the tensor when absent
    std::optional<double> lambda;
    std::optional<double> epsilon;
    std::optional<std::uint64_t> seed;
    std::optional<long> budget;
    std::optional<int> samples_per_block;
    std::optional<int> delta_points;
    std::optional<double> delta_decades;
    std::optional<std::string> init;  // zero | hosvd | random:<scale>
    std::optional<double> tau1, tau2, min_improvement, sigma;
    std::optional<int> restarts;
    std::optional<std::string> out;  // output directory

    // Fields set in `over` replace ours.
    void overlay(const RunConfig& over);
    // Fills every unset field with its default; throws std::invalid_argument on invalid values.
    RunConfig resolve() const;
    SearchConfig to_search_config() const;  // requires a resolved config

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

json to_json(const RunConfig& c);  // unset fields are omitted
RunConfig run_config_from_json(const json& j);  // rejects unknown keys

struct InitSpec {
    enum class Kind { Zero, Hosvd, Random } kind = Kind::Zero;
    double scale = 0.0;
};
InitSpec parse_init(const std::string& s);
FactorPoint make_initial_point(const InitSpec& init, const Tensor3& t, std::size_t r, std::uint64_t seed);

struct GenerateOptions {
    std::size_t r = 2;
    std::size_t d = 8;
    std::uint64_t seed = 0;
    double noise = 0.0;
    std::filesystem::path out = "tensor.json";
};

int cmd_generate(const GenerateOptions& opts, std::ostream& log);

struct DecomposeOutputs {
    std::filesystem::path factors, trace, summary;
};
DecomposeOutputs output_paths(const std::filesystem::path& dir, int restart, int restarts);

// Writes factors.json, trace.jsonl and summary.json under config.out (suffixed
// _<i> for multiple restarts). Returns the exit code of the best restart.
int cmd_decompose(const std::filesystem::path& tensor_path, const RunConfig& config, std::ostream& log);

struct VerifyOptions {
    std::vector<std::string> suites;  // empty = all
    std::uint64_t seed = 0;
    std::optional<std::filesystem::path> report;  // stdout when absent
    bool corrupt_gradient = false;  // negative control
};

int cmd_verify(const VerifyOptions& opts, std::ostream& out, std::ostream& log);

// Full command line entry point.
int main_entry(int argc, char** argv);

}  // namespace tucker::cli
