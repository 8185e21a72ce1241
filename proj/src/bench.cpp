#include "recursum/bench.hpp"

#include "recursum/check.hpp"
#include "recursum/codegen/render.hpp"
#include "recursum/error.hpp"
#include "recursum/kernel_abi.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <thread>

#if defined(__linux__)
#include <sched.h>
#include <sys/utsname.h>
#endif

namespace recursum::bench {

using codegen::Backend;
namespace kernels = recursum::kernels;

std::vector<IndexPoint> shell_classes() {
    return {{0, 0}, {0, 1}, {1, 1}, {0, 2}, {1, 2}, {2, 2}, {3, 3}, {4, 4}};
}

std::string shell_class_label(const IndexPoint& layer) {
    static const char* letters = "spdfghik";
    std::string s;
    for (std::int64_t l : layer) s += (l >= 0 && l < 8) ? letters[l] : '?';
    return s;
}

bool pin_to_one_cpu() {
#if defined(__linux__)
    cpu_set_t cur;
    CPU_ZERO(&cur);
    if (sched_getaffinity(0, sizeof(cur), &cur) != 0) return false;
    for (int c = 0; c < CPU_SETSIZE; ++c) {
        if (!CPU_ISSET(c, &cur)) continue;
        cpu_set_t one;
        CPU_ZERO(&one);
        CPU_SET(c, &one);
        return sched_setaffinity(0, sizeof(one), &one) == 0;
    }
#endif
    return false;
}

std::string host_description() {
    std::ostringstream os;
#if defined(__linux__)
    std::ifstream cpu("/proc/cpuinfo");
    std::string line;
    while (std::getline(cpu, line)) {
        if (line.rfind("model name", 0) == 0) {
            os << line.substr(line.find(':') + 2) << "; ";
            break;
        }
    }
    utsname u{};
    if (uname(&u) == 0) os << u.sysname << " " << u.release << " " << u.machine << "; ";
#endif
    os << std::thread::hardware_concurrency() << " hw threads; ";
#if defined(__clang__)
    os << "clang " << __clang_major__ << "." << __clang_minor__;
#elif defined(__GNUC__)
    os << "gcc " << __GNUC__ << "." << __GNUC_MINOR__;
#else
    os << "unknown compiler";
#endif
    return os.str();
}

namespace {

// One benchmarked unit of work: a list of scalar kernels, a layer kernel, or
// runtime calls at a list of points.
struct Work {
    Backend backend = Backend::Unrolled;
    IndexPoint tuple;
    std::vector<IndexPoint> points;  // outputs, in order
    std::vector<kernels::UnrolledFn> fns;
    const kernels::LayerEntry* layer = nullptr;
    kernels::RuntimeFn runtime = nullptr;
    std::vector<std::vector<int>> idx;
    std::vector<int> bound;

    std::size_t outputs() const { return points.size(); }

    // Writes outputs() values; false when a runtime call reports an error.
    bool run(const kernels::KernelArgs& a, double* out) const {
        switch (backend) {
        case Backend::Unrolled:
            for (std::size_t k = 0; k < fns.size(); ++k) out[k] = fns[k](a);
            return true;
        case Backend::Layered:
            layer->fn(a, out);
            return true;
        case Backend::Runtime:
            for (std::size_t k = 0; k < idx.size(); ++k) {
                if (runtime(a, idx[k].data(), bound.data(), &out[k]) != 0) return false;
            }
            return true;
        }
        return false;
    }
};

struct Args {
    BoundEnv env;
    std::vector<const double*> seqs;
    std::vector<int> lens;
    kernels::KernelArgs a;

    explicit Args(BoundEnv e) : env(std::move(e)) {
        for (const auto& s : env.sequences) {
            seqs.push_back(s.data());
            lens.push_back(static_cast<int>(s.size()));
        }
        a.scalars = env.scalars.data();
        a.seqs = seqs.data();
        a.seq_lens = lens.data();
    }
};

std::vector<int> to_int(const IndexPoint& p) { return {p.begin(), p.end()}; }

std::map<IndexPoint, kernels::UnrolledFn> unrolled_map(const kernels::KernelSet& ks) {
    std::map<IndexPoint, kernels::UnrolledFn> m;
    for (int k = 0; k < ks.n_unrolled; ++k) {
        m[IndexPoint(ks.unrolled[k].tuple, ks.unrolled[k].tuple + ks.arity)] = ks.unrolled[k].fn;
    }
    return m;
}

const kernels::KernelSet& need_set(const std::string& name, Backend b) {
    const kernels::KernelSet* ks = kernels::find_kernel_set(name, codegen::backend_name(b));
    if (!ks) {
        fail(ErrorCode::UnsupportedConstruct,
             name + ": no compiled " + std::string(codegen::backend_name(b)) + " kernels to benchmark");
    }
    return *ks;
}

// Full point of a layer element.
IndexPoint layer_point(const RecurrenceSpec& spec, const IndexPoint& layer, std::int64_t t) {
    IndexPoint p(spec.arity(), 0);
    const auto& la = *spec.layered;
    for (std::size_t k = 0; k < la.descent_indices.size(); ++k) {
        p[static_cast<std::size_t>(spec.index_of(la.descent_indices[k]))] = layer[k];
    }
    p[static_cast<std::size_t>(spec.index_of(la.output_axis))] = t;
    return p;
}

std::vector<int> runtime_bound(const library::BuiltinEntry& e, const IndexPoint& top) {
    if (e.spec.direction == Direction::Downward) return to_int(e.runtime_table);
    return to_int(top);
}

double measure(const Work& w, const kernels::KernelArgs& a, const BenchOptions& opts, std::int64_t& calls_out) {
    using clock = std::chrono::steady_clock;
    std::vector<double> out(std::max<std::size_t>(w.outputs(), 1));
    volatile double sink = 0.0;
    for (int k = 0; k < 100; ++k) {
        w.run(a, out.data());
        sink = sink + out[0];
    }
    std::vector<double> per_call;
    std::int64_t calls = 0;
    for (int r = 0; r < opts.reps; ++r) {
        const auto start = clock::now();
        std::int64_t n = 0;
        double elapsed = 0.0;
        while (n < opts.min_calls && elapsed < opts.min_seconds) {
            for (int k = 0; k < 256; ++k) {
                w.run(a, out.data());
                sink = sink + out[0];
            }
            n += 256;
            elapsed = std::chrono::duration<double>(clock::now() - start).count();
        }
        per_call.push_back(elapsed * 1e9 / static_cast<double>(n));
        calls = std::max(calls, n);
    }
    calls_out = calls;
    std::sort(per_call.begin(), per_call.end());
    const std::size_t m = per_call.size();
    return m % 2 ? per_call[m / 2] : 0.5 * (per_call[m / 2 - 1] + per_call[m / 2]);
}

}  // namespace

std::vector<BenchRecord> run_bench(const library::BuiltinEntry& e, const BenchOptions& opts) {
    if (opts.reps < 1) fail(ErrorCode::DomainError, "reps must be positive");
    const RecurrenceSpec& spec = e.spec;
    std::vector<Backend> backends = opts.backends;
    if (backends.empty()) {
        backends = {Backend::Unrolled};
        if (spec.layered) backends.push_back(Backend::Layered);
        backends.push_back(Backend::Runtime);
    }

    // Row tuples.
    std::vector<IndexPoint> tuples;
    if (spec.layered) {
        if (opts.bound) {
            codegen::Bounds b;
            const auto& la = *spec.layered;
            b.upper.assign(spec.arity(), 2 * *opts.bound);
            codegen::Cap cap;
            for (const auto& d : la.descent_indices) cap.slots.push_back(spec.index_of(d));
            cap.limit = *opts.bound;
            b.caps.push_back(cap);
            tuples = codegen::enumerate_layers(spec, b);
        } else {
            tuples = shell_classes();
        }
    } else {
        const codegen::Bounds b = opts.bound ? codegen::Bounds::box(spec, *opts.bound) : e.default_bounds;
        for (const IndexPoint& p : codegen::enumerate_instances(spec, b)) {
            if (e.kernel_bounds.contains(p)) tuples.push_back(p);
        }
    }

    std::map<Backend, codegen::KernelIR> irs;
    irs.emplace(Backend::Unrolled, codegen::lower_unrolled(spec, e.kernel_bounds));
    if (spec.layered) irs.emplace(Backend::Layered, codegen::lower_layered(spec, e.kernel_bounds));
    irs.emplace(Backend::Runtime, codegen::lower_runtime(spec));

    library::Rng rng(opts.seed);
    std::vector<EvalEnv> envs;
    for (int k = 0; k < 3; ++k) envs.push_back(e.sample_env(rng));
    const BoundEnv bound_env = BoundEnv::bind(spec, envs.front());
    Args args(bound_env);

    std::vector<BenchRecord> out;
    for (Backend b : backends) {
        if (b == Backend::Layered && !spec.layered) {
            fail(ErrorCode::NotLayerDescent, e.name + ": not layer-descent (no layered annotation)");
        }
        const kernels::KernelSet& ks = need_set(e.name, b);
        const auto fmap = unrolled_map(ks);
        std::map<IndexPoint, const kernels::LayerEntry*> lmap;
        for (int k = 0; k < ks.n_layers; ++k) {
            lmap[IndexPoint(ks.layers[k].layer, ks.layers[k].layer + ks.layer_width)] = &ks.layers[k];
        }
        const codegen::KernelIR& ir = irs.at(b);

        BenchRecord rec;
        rec.spec = e.name;
        rec.backend = std::string(codegen::backend_name(b));
        for (const IndexPoint& tup : tuples) {
            Work w;
            w.backend = b;
            w.tuple = tup;
            if (spec.layered) {
                const std::int64_t total = std::accumulate(tup.begin(), tup.end(), std::int64_t{0});
                for (std::int64_t t = 0; t <= total; ++t) w.points.push_back(layer_point(spec, tup, t));
            } else {
                w.points.push_back(tup);
            }
            BenchRow row;
            row.tuple = tup;
            switch (b) {
            case Backend::Unrolled:
                for (const IndexPoint& p : w.points) {
                    auto it = fmap.find(p);
                    if (it == fmap.end()) fail(ErrorCode::BoundsTooLarge, e.name + ": point outside the compiled kernels");
                    w.fns.push_back(it->second);
                    row.ops += codegen::count_ops(ir, ir.find(p));
                }
                break;
            case Backend::Layered: {
                auto it = lmap.find(tup);
                if (it == lmap.end()) fail(ErrorCode::BoundsTooLarge, e.name + ": layer outside the compiled kernels");
                w.layer = it->second;
                row.ops = codegen::count_ops(ir, ir.find(tup));
                break;
            }
            case Backend::Runtime:
                w.runtime = ks.runtime;
                w.bound = runtime_bound(e, w.points.back());
                for (const IndexPoint& p : w.points) {
                    w.idx.push_back(to_int(p));
                    const std::vector<std::int64_t> bnd(w.bound.begin(), w.bound.end());
                    row.ops += codegen::run_runtime(ir, p, bnd, bound_env).ops;
                }
                break;
            }

            // Every benchmarked kernel first passes validation.
            std::vector<double> got(w.outputs());
            for (const EvalEnv& env : envs) {
                Args a(BoundEnv::bind(spec, env));
                Evaluator ev(spec, env);
                if (!w.run(a.a, got.data())) {
                    fail(ErrorCode::ValidationError, e.name + " " + rec.backend + ": runtime kernel reported an error");
                }
                for (std::size_t k = 0; k < w.points.size(); ++k) {
                    if (check::rel_err(got[k], ev.eval(w.points[k])) > check::kBackendTol) {
                        fail(ErrorCode::ValidationError, e.name + " " + rec.backend + ": kernel disagrees with the interpreter");
                    }
                }
            }
            row.median_ns = measure(w, args.a, opts, row.iterations);
            rec.rows.push_back(row);
        }
        out.push_back(std::move(rec));
    }
    return out;
}

nlohmann::json to_json(const std::vector<BenchRecord>& records, const std::string& host) {
    nlohmann::json arr = nlohmann::json::array();
    for (const BenchRecord& r : records) {
        nlohmann::json rows = nlohmann::json::array();
        for (const BenchRow& row : r.rows) {
            nlohmann::json ops = codegen::ops_json(row.ops);
            rows.push_back({{"tuple", row.tuple},
                            {"median_ns", row.median_ns},
                            {"iterations", row.iterations},
                            {"ops", {{"adds", ops["adds"]}, {"muls", ops["muls"]}, {"divs", ops["divs"]}}}});
        }
        arr.push_back({{"spec", r.spec}, {"backend", r.backend}, {"rows", rows}, {"host", {{"description", host}}}});
    }
    return arr;
}

std::string to_text(const std::vector<BenchRecord>& records) {
    std::ostringstream os;
    char line[160];
    std::snprintf(line, sizeof line, "%-14s %-10s %-14s %12s %8s %8s %8s\n", "spec", "backend", "tuple", "median_ns",
                  "adds", "muls", "divs");
    os << line;
    for (const BenchRecord& r : records) {
        for (const BenchRow& row : r.rows) {
            std::string t;
            for (std::size_t k = 0; k < row.tuple.size(); ++k) t += (k ? "," : "") + std::to_string(row.tuple[k]);
            if (r.spec == "hermite_e" && row.tuple.size() == 2) t = shell_class_label(row.tuple) + " (" + t + ")";
            std::snprintf(line, sizeof line, "%-14s %-10s %-14s %12.2f %8lld %8lld %8lld\n", r.spec.c_str(),
                          r.backend.c_str(), t.c_str(), row.median_ns, static_cast<long long>(row.ops.adds),
                          static_cast<long long>(row.ops.muls), static_cast<long long>(row.ops.divs));
            os << line;
        }
    }
    return os.str();
}

}  // namespace recursum::bench
