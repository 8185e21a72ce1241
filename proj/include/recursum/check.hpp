#pragma once

// Backend-vs-interpreter equivalence and oracle comparison, shared by the
// tests, the CLI `validate` command and the acceptance runner.

#include "recursum/codegen/ir.hpp"
#include "recursum/library.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace recursum::check {

constexpr double kBackendTol = 1e-12;
constexpr double kOracleTol = 1e-10;

/// |got - ref| / max(1, |ref|); infinite when either side is not finite.
double rel_err(double got, double ref);

struct BackendResult {
    std::string backend;
    std::string source;  // "compiled" or "ir"
    double max_rel_err = 0.0;
    std::int64_t points = 0;
    int samples = 0;
    std::string error;  // non-empty when the backend could not be run
};

struct OracleResult {
    double max_rel_err = 0.0;
    std::int64_t points = 0;
};

struct Report {
    std::string spec;
    std::vector<BackendResult> backends;
    std::optional<OracleResult> oracle;
    bool pass = false;
};

struct Options {
    std::vector<codegen::Backend> backends;  // empty: every backend the spec supports
    int samples = 100;
    std::uint64_t seed = 7;
    int oracle_samples = 200;
    bool compiled = true;  // use the in-repo kernels when they exist
};

/// Everything needed to validate one spec.
struct Target {
    RecurrenceSpec spec;
    codegen::Bounds bounds;
    std::vector<std::int64_t> runtime_table;
    library::EnvSampler sampler;
    const library::BuiltinEntry* oracle_from = nullptr;  // oracle and its domain
    std::string compiled_name;  // registry name, empty for none
};

Target builtin_target(const library::BuiltinEntry& entry);
/// A loaded spec file. Borrows the library entry's sampler, bounds and oracle
/// when the recurrence name and namespace match a builtin, so a tampered copy
/// of a builtin is caught by its oracle.
Target file_target(const RecurrenceSpec& spec, std::int64_t bound);

Report validate(const Target& target, const Options& opts);

nlohmann::json to_json(const Report& report);

/// Empty when `j` matches the validate report schema, else the first problem.
std::string check_validate_schema(const nlohmann::json& j);
/// Same for a bench report (an array of per-backend records).
std::string check_bench_schema(const nlohmann::json& j);

}  // namespace recursum::check
