#include "recursum/check.hpp"

#include "recursum/error.hpp"
#include "recursum/kernel_abi.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <memory>

namespace recursum::check {

using codegen::Backend;
using codegen::KernelIR;
namespace kernels = recursum::kernels;

double rel_err(double got, double ref) {
    if (!std::isfinite(got) || !std::isfinite(ref)) {
        return got == ref ? 0.0 : std::numeric_limits<double>::infinity();
    }
    return std::abs(got - ref) / std::max(1.0, std::abs(ref));
}

namespace {

// Arguments for a compiled kernel, pointing into a BoundEnv.
struct ArgPack {
    std::vector<const double*> seqs;
    std::vector<int> lens;
    kernels::KernelArgs args;

    explicit ArgPack(const BoundEnv& env) {
        for (const auto& s : env.sequences) {
            seqs.push_back(s.data());
            lens.push_back(static_cast<int>(s.size()));
        }
        args.scalars = env.scalars.data();
        args.seqs = seqs.data();
        args.seq_lens = lens.data();
    }
};

std::vector<int> to_int(const IndexPoint& p) { return {p.begin(), p.end()}; }

IndexPoint from_int(const int* v, std::size_t n) { return {v, v + n}; }

// One backend under test; `run` compares it against the interpreter for one
// environment and returns the worst relative error and the point count.
struct Runner {
    BackendResult result;
    std::function<std::pair<double, std::int64_t>(Evaluator&, const BoundEnv&)> run;
};

void note(BackendResult& r, double err, std::int64_t points) {
    r.max_rel_err = std::max(r.max_rel_err, err);
    r.points += points;
}

std::vector<IndexPoint> in_bounds_layers(const RecurrenceSpec& spec, const codegen::Bounds& bounds) {
    return codegen::enumerate_layers(spec, bounds);
}

Runner compiled_unrolled(const Target& t, const kernels::KernelSet& ks, const std::vector<IndexPoint>& points) {
    std::map<IndexPoint, kernels::UnrolledFn> fns;
    for (int k = 0; k < ks.n_unrolled; ++k) {
        fns[from_int(ks.unrolled[k].tuple, static_cast<std::size_t>(ks.arity))] = ks.unrolled[k].fn;
    }
    std::vector<std::pair<IndexPoint, kernels::UnrolledFn>> work;
    for (const IndexPoint& p : points) {
        auto it = fns.find(p);
        if (it == fns.end()) fail(ErrorCode::BoundsTooLarge, t.spec.name + ": no compiled kernel for a point in bounds");
        work.emplace_back(p, it->second);
    }
    Runner r;
    r.run = [work](Evaluator& ev, const BoundEnv& env) {
        ArgPack pack(env);
        double worst = 0.0;
        for (const auto& [p, fn] : work) worst = std::max(worst, rel_err(fn(pack.args), ev.eval(p)));
        return std::make_pair(worst, static_cast<std::int64_t>(work.size()));
    };
    return r;
}

Runner compiled_layered(const Target& t, const kernels::KernelSet& ks) {
    std::map<IndexPoint, const kernels::LayerEntry*> fns;
    for (int k = 0; k < ks.n_layers; ++k) {
        fns[from_int(ks.layers[k].layer, static_cast<std::size_t>(ks.layer_width))] = &ks.layers[k];
    }
    std::vector<std::pair<IndexPoint, const kernels::LayerEntry*>> work;
    for (const IndexPoint& d : in_bounds_layers(t.spec, t.bounds)) {
        auto it = fns.find(d);
        if (it == fns.end()) fail(ErrorCode::BoundsTooLarge, t.spec.name + ": no compiled layer for a tuple in bounds");
        work.emplace_back(d, it->second);
    }
    Runner r;
    r.run = [work](Evaluator& ev, const BoundEnv& env) {
        ArgPack pack(env);
        double worst = 0.0;
        std::int64_t n = 0;
        std::vector<double> out;
        for (const auto& [d, e] : work) {
            out.assign(static_cast<std::size_t>(e->length), 0.0);
            e->fn(pack.args, out.data());
            const std::vector<double> ref = ev.eval_layer(d);
            for (std::size_t k = 0; k < ref.size(); ++k) worst = std::max(worst, rel_err(out[k], ref[k]));
            n += static_cast<std::int64_t>(ref.size());
        }
        return std::make_pair(worst, n);
    };
    return r;
}

Runner compiled_runtime(const Target& t, const kernels::KernelSet& ks, const std::vector<IndexPoint>& points) {
    const std::vector<int> bound = to_int(t.runtime_table);
    const kernels::RuntimeFn fn = ks.runtime;
    Runner r;
    r.run = [points, bound, fn](Evaluator& ev, const BoundEnv& env) {
        ArgPack pack(env);
        double worst = 0.0;
        for (const IndexPoint& p : points) {
            const std::vector<int> idx = to_int(p);
            double v = 0.0;
            const int status = fn(pack.args, idx.data(), bound.data(), &v);
            worst = std::max(worst, status == 0 ? rel_err(v, ev.eval(p)) : std::numeric_limits<double>::infinity());
        }
        return std::make_pair(worst, static_cast<std::int64_t>(points.size()));
    };
    return r;
}

Runner ir_unrolled(const Target& t) {
    auto ir = std::make_shared<KernelIR>(codegen::lower_unrolled(t.spec, t.bounds));
    Runner r;
    r.run = [ir](Evaluator& ev, const BoundEnv& env) {
        double worst = 0.0;
        for (std::size_t k = 0; k < ir->functions.size(); ++k) {
            const double v = codegen::run_scalar(*ir, static_cast<int>(k), env);
            worst = std::max(worst, rel_err(v, ev.eval(ir->functions[k].tuple)));
        }
        return std::make_pair(worst, static_cast<std::int64_t>(ir->functions.size()));
    };
    return r;
}

Runner ir_layered(const Target& t) {
    auto ir = std::make_shared<KernelIR>(codegen::lower_layered(t.spec, t.bounds));
    Runner r;
    r.run = [ir](Evaluator& ev, const BoundEnv& env) {
        double worst = 0.0;
        std::int64_t n = 0;
        std::vector<double> out;
        for (std::size_t k = 0; k < ir->functions.size(); ++k) {
            const auto& f = ir->functions[k];
            out.assign(static_cast<std::size_t>(f.output_length), 0.0);
            codegen::run_layer(*ir, static_cast<int>(k), env, out.data());
            const std::vector<double> ref = ev.eval_layer(f.tuple);
            for (std::size_t i = 0; i < ref.size(); ++i) worst = std::max(worst, rel_err(out[i], ref[i]));
            n += static_cast<std::int64_t>(ref.size());
        }
        return std::make_pair(worst, n);
    };
    return r;
}

Runner ir_runtime(const Target& t, const std::vector<IndexPoint>& points) {
    auto ir = std::make_shared<KernelIR>(codegen::lower_runtime(t.spec));
    const std::vector<std::int64_t> bound = t.runtime_table;
    Runner r;
    r.run = [ir, points, bound](Evaluator& ev, const BoundEnv& env) {
        double worst = 0.0;
        for (const IndexPoint& p : points) {
            const auto res = codegen::run_runtime(*ir, p, bound, env);
            worst = std::max(worst, res.status == codegen::RuntimeStatus::Ok
                                        ? rel_err(res.value, ev.eval(p))
                                        : std::numeric_limits<double>::infinity());
        }
        return std::make_pair(worst, static_cast<std::int64_t>(points.size()));
    };
    return r;
}

Runner make_runner(const Target& t, Backend b, bool compiled, const std::vector<IndexPoint>& points) {
    const kernels::KernelSet* ks = nullptr;
    if (compiled && !t.compiled_name.empty()) {
        ks = kernels::find_kernel_set(t.compiled_name, codegen::backend_name(b));
    }
    Runner r;
    if (ks) {
        switch (b) {
        case Backend::Unrolled: r = compiled_unrolled(t, *ks, points); break;
        case Backend::Layered: r = compiled_layered(t, *ks); break;
        case Backend::Runtime: r = compiled_runtime(t, *ks, points); break;
        }
        r.result.source = "compiled";
    } else {
        switch (b) {
        case Backend::Unrolled: r = ir_unrolled(t); break;
        case Backend::Layered: r = ir_layered(t); break;
        case Backend::Runtime: r = ir_runtime(t, points); break;
        }
        r.result.source = "ir";
    }
    r.result.backend = std::string(codegen::backend_name(b));
    return r;
}

std::vector<std::int64_t> table_for(const RecurrenceSpec& spec, const codegen::Bounds& bounds) {
    std::vector<std::int64_t> table = bounds.upper;
    table.resize(spec.arity(), 0);
    // Descending fills read above the requested point, so leave headroom.
    for (auto& v : table) v += 2;
    return table;
}

}  // namespace

Target builtin_target(const library::BuiltinEntry& entry) {
    Target t;
    t.spec = entry.spec;
    t.bounds = entry.default_bounds;
    t.runtime_table = entry.runtime_table;
    t.sampler = entry.sample_env;
    t.oracle_from = entry.has_oracle() ? &entry : nullptr;
    t.compiled_name = entry.name;
    return t;
}

Target file_target(const RecurrenceSpec& spec, std::int64_t bound) {
    for (const std::string& name : library::list_builtins()) {
        const library::BuiltinEntry& e = library::builtin(name);
        if (e.spec.name == spec.name && e.spec.ns == spec.ns && e.spec.indices == spec.indices &&
            e.spec.scalars == spec.scalars && e.spec.sequences == spec.sequences) {
            Target t = builtin_target(e);
            t.spec = spec;
            t.compiled_name.clear();
            return t;
        }
    }
    Target t;
    t.spec = spec;
    t.bounds = codegen::Bounds::box(spec, bound);
    t.runtime_table = table_for(spec, t.bounds);
    t.sampler = library::generic_sampler(spec, static_cast<std::size_t>(bound) + 8);
    return t;
}

Report validate(const Target& t, const Options& opts) {
    Report rep;
    rep.spec = t.spec.name;
    std::vector<Backend> backends = opts.backends;
    if (backends.empty()) {
        backends = {Backend::Unrolled};
        if (t.spec.layered) backends.push_back(Backend::Layered);
        backends.push_back(Backend::Runtime);
    }
    const std::vector<IndexPoint> points = codegen::enumerate_instances(t.spec, t.bounds);

    std::vector<Runner> runners;
    for (Backend b : backends) {
        try {
            runners.push_back(make_runner(t, b, opts.compiled, points));
        } catch (const Error& e) {
            BackendResult br;
            br.backend = std::string(codegen::backend_name(b));
            br.error = std::string(error_code_name(e.code())) + ": " + e.what();
            br.max_rel_err = std::numeric_limits<double>::infinity();
            rep.backends.push_back(br);
        }
    }

    library::Rng rng(opts.seed);
    for (int s = 0; s < opts.samples; ++s) {
        const EvalEnv env = t.sampler(rng);
        Evaluator ev(t.spec, env);
        for (Runner& r : runners) {
            if (!r.result.error.empty()) continue;
            try {
                const auto [err, n] = r.run(ev, ev.env());
                note(r.result, err, n);
                ++r.result.samples;
            } catch (const Error& e) {
                r.result.error = std::string(error_code_name(e.code())) + ": " + e.what();
                r.result.max_rel_err = std::numeric_limits<double>::infinity();
            }
        }
    }
    for (Runner& r : runners) rep.backends.push_back(std::move(r.result));

    bool ok = true;
    for (const BackendResult& b : rep.backends) ok = ok && b.error.empty() && b.max_rel_err <= kBackendTol;

    if (t.oracle_from) {
        const library::BuiltinEntry& e = *t.oracle_from;
        OracleResult o;
        const std::vector<IndexPoint> opoints = codegen::enumerate_instances(t.spec, e.oracle_bounds);
        library::Rng orng(opts.seed ^ 0x9e3779b97f4a7c15ULL);
        try {
            for (int s = 0; s < opts.oracle_samples; ++s) {
                const EvalEnv env = e.oracle_env(orng);
                Evaluator ev(t.spec, env);
                for (const IndexPoint& p : opoints) {
                    o.max_rel_err = std::max(o.max_rel_err, rel_err(ev.eval(p), e.oracle(p, env)));
                    ++o.points;
                }
            }
        } catch (const Error&) {
            o.max_rel_err = std::numeric_limits<double>::infinity();
        }
        ok = ok && o.max_rel_err <= kOracleTol;
        rep.oracle = o;
    }
    rep.pass = ok;
    return rep;
}

namespace {

// JSON has no infinity; an unbounded error is reported as null.
nlohmann::json err_json(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

}  // namespace

nlohmann::json to_json(const Report& rep) {
    nlohmann::json j;
    j["spec"] = rep.spec;
    j["backends"] = nlohmann::json::array();
    for (const BackendResult& b : rep.backends) {
        nlohmann::json bj = {{"backend", b.backend},
                             {"source", b.source},
                             {"max_rel_err", err_json(b.max_rel_err)},
                             {"points", b.points},
                             {"samples", b.samples}};
        if (!b.error.empty()) bj["error"] = b.error;
        j["backends"].push_back(bj);
    }
    if (rep.oracle) {
        j["oracle"] = {{"max_rel_err", err_json(rep.oracle->max_rel_err)}, {"points", rep.oracle->points}};
    } else {
        j["oracle"] = nullptr;
    }
    j["pass"] = rep.pass;
    return j;
}

namespace {

bool is_err(const nlohmann::json& v) { return v.is_null() || (v.is_number() && v.get<double>() >= 0.0); }

bool is_backend(const nlohmann::json& v) {
    return v.is_string() && (v == "unrolled" || v == "layered" || v == "runtime");
}

}  // namespace

std::string check_validate_schema(const nlohmann::json& j) {
    if (!j.is_object()) return "report is not an object";
    if (!j.contains("spec") || !j["spec"].is_string()) return "spec: string expected";
    if (!j.contains("backends") || !j["backends"].is_array()) return "backends: array expected";
    for (const auto& b : j["backends"]) {
        if (!b.is_object()) return "backends[]: object expected";
        if (!b.contains("backend") || !is_backend(b["backend"])) return "backends[].backend: unknown backend";
        if (!b.contains("max_rel_err") || !is_err(b["max_rel_err"])) return "backends[].max_rel_err: number expected";
        if (!b.contains("points") || !b["points"].is_number_integer()) return "backends[].points: integer expected";
        if (!b.contains("samples") || !b["samples"].is_number_integer()) return "backends[].samples: integer expected";
    }
    if (!j.contains("oracle")) return "oracle: missing";
    if (!j["oracle"].is_null()) {
        const auto& o = j["oracle"];
        if (!o.is_object() || !o.contains("max_rel_err") || !is_err(o["max_rel_err"])) return "oracle.max_rel_err: number expected";
        if (!o.contains("points") || !o["points"].is_number_integer()) return "oracle.points: integer expected";
    }
    if (!j.contains("pass") || !j["pass"].is_boolean()) return "pass: boolean expected";
    return {};
}

std::string check_bench_schema(const nlohmann::json& j) {
    if (!j.is_array()) return "bench report is not an array";
    for (const auto& rec : j) {
        if (!rec.is_object()) return "record: object expected";
        if (!rec.contains("spec") || !rec["spec"].is_string()) return "spec: string expected";
        if (!rec.contains("backend") || !is_backend(rec["backend"])) return "backend: unknown backend";
        if (!rec.contains("rows") || !rec["rows"].is_array()) return "rows: array expected";
        for (const auto& row : rec["rows"]) {
            if (!row.is_object()) return "rows[]: object expected";
            if (!row.contains("tuple") || !row["tuple"].is_array()) return "rows[].tuple: array expected";
            for (const auto& v : row["tuple"]) {
                if (!v.is_number_integer()) return "rows[].tuple: integers expected";
            }
            if (!row.contains("median_ns") || !row["median_ns"].is_number() || row["median_ns"].get<double>() < 0.0) {
                return "rows[].median_ns: non-negative number expected";
            }
            if (!row.contains("ops") || !row["ops"].is_object()) return "rows[].ops: object expected";
            for (const char* k : {"adds", "muls", "divs"}) {
                if (!row["ops"].contains(k) || !row["ops"][k].is_number_integer()) {
                    return std::string("rows[].ops.") + k + ": integer expected";
                }
            }
        }
        if (!rec.contains("host") || !rec["host"].is_object() || !rec["host"].contains("description") ||
            !rec["host"]["description"].is_string()) {
            return "host.description: string expected";
        }
    }
    return {};
}

}  // namespace recursum::check
