#pragma once

// Built-in microbenchmark harness for the compiled builtin kernels:
// monotonic clock, warm-up, median over repetitions.

#include "recursum/codegen/ir.hpp"
#include "recursum/library.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace recursum::bench {

struct BenchRow {
    IndexPoint tuple;  // full point, or the layer tuple for layered specs
    double median_ns = 0.0;
    std::int64_t iterations = 0;  // kernel calls per repetition
    codegen::OpCount ops;
};

struct BenchRecord {
    std::string spec;
    std::string backend;
    std::vector<BenchRow> rows;
};

struct BenchOptions {
    std::optional<std::int64_t> bound;  // default: shell classes (layered) or default bounds
    std::vector<codegen::Backend> backends;  // empty: all supported
    int reps = 5;
    std::uint64_t seed = 7;
    std::int64_t min_calls = 100000;  // a repetition stops at min_calls or min_seconds
    double min_seconds = 0.2;
};

/// Layer tuples of the eight shell classes ss sp pp sd pd dd ff gg.
std::vector<IndexPoint> shell_classes();
std::string shell_class_label(const IndexPoint& layer);

/// Validates each backend first (throws ValidationError on a failure), then
/// times it. Throws UnsupportedConstruct when no compiled kernels exist.
std::vector<BenchRecord> run_bench(const library::BuiltinEntry& entry, const BenchOptions& opts);

std::string host_description();
nlohmann::json to_json(const std::vector<BenchRecord>& records, const std::string& host);
/// Fixed-width table, one line per (tuple, backend).
std::string to_text(const std::vector<BenchRecord>& records);

/// Pins the calling thread to one CPU; false when the platform refuses.
bool pin_to_one_cpu();

}  // namespace recursum::bench
