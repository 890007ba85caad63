#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lagrange.hpp"

namespace hg::harness {

inline constexpr const char* kEngineVersion = "0.1.0";

struct BuiltinScenario {
    const char* name;
    const char* json;
};
extern const BuiltinScenario kBuiltinScenarios[];
extern const int kBuiltinScenarioCount;

const BuiltinScenario* find_builtin(std::string_view name);

enum class Kind { hessian, lagrange, direct_metric };

struct SampleSpec {
    bool from_box = false;
    std::vector<std::vector<double>> points;  // explicit points
    std::vector<double> lo, hi;
    int count = 0;
    std::uint64_t seed = 0;
};

struct Scenario {
    std::string name;
    Kind kind = Kind::hessian;
    int dim = 0;
    std::string potential;                    // hessian
    std::string lagrangian;                   // lagrange
    std::vector<std::string> metric_components;  // direct-metric, row-major m*m
    SampleSpec samples;
    std::vector<std::string> checks;
    std::map<std::string, double> tolerances;
    bool spray_connection = true;
    std::vector<std::string> t_components;    // explicit nonlinear connection, row-major
    std::vector<std::string> expected_failures;
    nlohmann::json echo;
};

struct Options {
    std::optional<std::uint64_t> seed;
    double tolerance_scale = 1.0;
    bool dump_tensors = false;
};
Options parse_options(const nlohmann::json& j);

Scenario parse_scenario(const nlohmann::json& j);

struct RunResult {
    nlohmann::json report;
    Status status = Status::ok;
};

RunResult run_scenario(const Scenario& sc, const Options& opt);
RunResult inspect_point(const Scenario& sc, std::span<const double> point, const Options& opt);
RunResult run_corpus(const Options& opt);

// Sample points for a scenario (explicit list, or box sampling with the
// SplitMix64 generator; the effective seed is the option override if present).
std::vector<std::vector<double>> sample_points(const Scenario& sc, std::uint64_t seed);
std::uint64_t effective_seed(const Scenario& sc, const Options& opt);

}  // namespace hg::harness
