// recursum: list, show, generate, validate and benchmark recurrence kernels,
// export quadrature rules and run the J/K demo.

#include "recursum/bench.hpp"
#include "recursum/check.hpp"
#include "recursum/codegen/render.hpp"
#include "recursum/error.hpp"
#include "recursum/integrals.hpp"
#include "recursum/library.hpp"
#include "recursum/parse.hpp"
#include "recursum/quadrature.hpp"

#include "CLI11.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using namespace recursum;
using codegen::Backend;

namespace {

// Exit status for a tolerance violation, distinct from errors (1).
constexpr int kToleranceFailure = 2;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::IoError, "cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
}

// A builtin name, or a path to a spec file.
struct Loaded {
    RecurrenceSpec spec;
    const library::BuiltinEntry* entry = nullptr;
    std::string stem;
};

Loaded load(const std::string& what) {
    Loaded l;
    if (fs::is_regular_file(what)) {
        l.spec = load_spec_file(read_file(what));
        l.stem = codegen::snake_case(l.spec.name);
        return l;
    }
    l.entry = &library::builtin(what);
    l.spec = l.entry->spec;
    l.stem = l.entry->name;
    return l;
}

std::vector<Backend> parse_backends(const std::vector<std::string>& names) {
    std::vector<Backend> out;
    for (const std::string& list : names) {
        std::stringstream ss(list);
        std::string name;
        while (std::getline(ss, name, ',')) {
            if (!name.empty()) out.push_back(codegen::parse_backend(name));
        }
    }
    return out;
}

std::string backend_flags(const RecurrenceSpec& spec) {
    return std::string("unrolled") + (spec.layered ? ",layered" : "") + ",runtime";
}

int cmd_list() {
    std::printf("%-16s %-6s %-26s %-7s\n", "name", "arity", "backends", "oracle");
    for (const std::string& name : library::list_builtins()) {
        const auto& e = library::builtin(name);
        std::printf("%-16s %-6zu %-26s %-7s\n", name.c_str(), e.spec.arity(), backend_flags(e.spec).c_str(),
                    e.has_oracle() ? "yes" : "no");
    }
    return 0;
}

int cmd_show(const std::string& name) {
    std::cout << render_spec(library::builtin(name).spec);
    return 0;
}

struct GenerateArgs {
    std::string spec;
    std::string backend = "unrolled";
    std::optional<std::int64_t> bound;
    std::string out = ".";
    std::string profile;
    std::size_t max_instances = 10000;
};

int cmd_generate(const GenerateArgs& a) {
    const Loaded l = load(a.spec);
    const Backend b = codegen::parse_backend(a.backend);
    const codegen::Profile& prof = a.profile.empty() ? codegen::default_profile() : codegen::profile(a.profile);
    codegen::Bounds bounds;
    if (a.bound) {
        bounds = codegen::Bounds::box(l.spec, *a.bound);
        if (b == Backend::Layered && l.spec.layered) {
            // Layers (i, j, ...) with a descent sum up to the bound.
            codegen::Cap cap;
            for (const auto& d : l.spec.layered->descent_indices) cap.slots.push_back(l.spec.index_of(d));
            cap.limit = *a.bound;
            bounds.caps.push_back(cap);
            for (auto& u : bounds.upper) u = std::max<std::int64_t>(u, *a.bound);
        }
    } else if (l.entry) {
        bounds = l.entry->default_bounds;
    } else {
        bounds = codegen::Bounds::box(l.spec, 4);
    }
    codegen::GenOptions opts;
    opts.max_instances = a.max_instances;
    codegen::KernelIR ir;
    switch (b) {
    case Backend::Unrolled: ir = codegen::lower_unrolled(l.spec, bounds, opts); break;
    case Backend::Layered: ir = codegen::lower_layered(l.spec, bounds, opts); break;
    case Backend::Runtime: ir = codegen::lower_runtime(l.spec); break;
    }
    const codegen::SourceArtifact art = codegen::render(ir, prof, l.stem);
    const fs::path dir(a.out);
    for (const auto& [file, text] : art.files) {
        write_file(dir / file, text);
        std::cout << (dir / file).string() << "\n";
    }
    const fs::path manifest = dir / (l.stem + "_" + a.backend + ".json");
    write_file(manifest, art.manifest.dump(2) + "\n");
    std::cout << manifest.string() << "\n";
    return 0;
}

struct ValidateArgs {
    std::string spec;
    std::vector<std::string> backends;
    int samples = 100;
    std::uint64_t seed = 7;
    std::string json;
    std::int64_t bound = 6;
    bool ir = false;
};

std::string fmt_err(double v) {
    char buf[32];
    if (!std::isfinite(v)) return "inf";
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

int cmd_validate(const ValidateArgs& a) {
    const Loaded l = load(a.spec);
    check::Options opts;
    opts.backends = parse_backends(a.backends);
    opts.samples = a.samples;
    opts.seed = a.seed;
    opts.compiled = !a.ir;
    const check::Target t = l.entry ? check::builtin_target(*l.entry) : check::file_target(l.spec, a.bound);
    const check::Report rep = check::validate(t, opts);

    std::printf("validate %s (seed %llu, %d samples)\n", l.stem.c_str(), static_cast<unsigned long long>(a.seed),
                a.samples);
    std::printf("%-10s %-9s %12s %10s %8s\n", "backend", "source", "max_rel_err", "points", "samples");
    for (const auto& b : rep.backends) {
        std::printf("%-10s %-9s %12s %10lld %8d\n", b.backend.c_str(), b.source.c_str(), fmt_err(b.max_rel_err).c_str(),
                    static_cast<long long>(b.points), b.samples);
        if (!b.error.empty()) std::printf("  error: %s\n", b.error.c_str());
    }
    if (rep.oracle) {
        std::printf("%-10s %-9s %12s %10lld\n", "oracle", "library", fmt_err(rep.oracle->max_rel_err).c_str(),
                    static_cast<long long>(rep.oracle->points));
    }
    std::printf("%s\n", rep.pass ? "PASS" : "FAIL");
    if (!a.json.empty()) write_file(a.json, check::to_json(rep).dump(2) + "\n");
    if (!rep.pass) {
        std::cerr << "ERR:TOLERANCE " << l.stem << " exceeds tolerance\n";
        return kToleranceFailure;
    }
    return 0;
}

struct BenchArgs {
    std::string spec;
    std::optional<std::int64_t> bounds;
    int reps = 5;
    std::vector<std::string> backends;
    std::string json;
};

int cmd_bench(const BenchArgs& a) {
    const library::BuiltinEntry& e = library::builtin(a.spec);
    bench::BenchOptions opts;
    opts.bound = a.bounds;
    opts.reps = a.reps;
    opts.backends = parse_backends(a.backends);
    bench::pin_to_one_cpu();
    std::vector<bench::BenchRecord> recs;
    try {
        recs = bench::run_bench(e, opts);
    } catch (const Error& err) {
        if (err.code() != ErrorCode::ValidationError) throw;
        std::cerr << "ERR:" << error_code_name(err.code()) << " " << err.what() << "\n";
        return kToleranceFailure;
    }
    const std::string host = bench::host_description();
    std::cout << "host: " << host << "\n" << bench::to_text(recs);
    if (!a.json.empty()) write_file(a.json, bench::to_json(recs, host).dump(2) + "\n");
    return 0;
}

struct DemoArgs {
    std::string shells;
    std::uint64_t seed = 1;
    std::size_t n_shells = 4;
    bool json = false;
};

void print_matrix(const char* title, const integrals::SymMatrix& m) {
    std::printf("%s\n", title);
    for (std::size_t i = 0; i < m.n; ++i) {
        for (std::size_t j = 0; j < m.n; ++j) std::printf(" %14.8f", m(i, j));
        std::printf("\n");
    }
}

nlohmann::json matrix_json(const integrals::SymMatrix& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < m.n; ++i) {
        std::vector<double> r(m.a.begin() + static_cast<std::ptrdiff_t>(i * m.n),
                              m.a.begin() + static_cast<std::ptrdiff_t>((i + 1) * m.n));
        rows.push_back(r);
    }
    return rows;
}

double max_abs_diff(const integrals::SymMatrix& x, const integrals::SymMatrix& y) {
    double m = 0.0;
    for (std::size_t k = 0; k < x.a.size(); ++k) m = std::max(m, std::abs(x.a[k] - y.a[k]));
    return m;
}

int cmd_demo(const DemoArgs& a) {
    const integrals::ToySystem sys =
        a.shells.empty() ? integrals::random_system(a.seed, a.n_shells) : integrals::parse_shells(read_file(a.shells));
    const integrals::SymMatrix D = integrals::random_density(a.seed + 1000, sys.n_basis());
    const integrals::SymMatrix J = integrals::build_J(sys, D);
    const integrals::SymMatrix K = integrals::build_K(sys, D);
    const auto [nj, nk] = integrals::naive_JK(sys, D);
    const double dev = std::max(max_abs_diff(J, nj), max_abs_diff(K, nk));
    const double rel = std::max(integrals::rel_frobenius(J, nj), integrals::rel_frobenius(K, nk));
    if (a.json) {
        nlohmann::json shells = nlohmann::json::array();
        for (const auto& s : sys.shells) shells.push_back({{"center", s.center}, {"l", s.l}, {"exponent", s.exponent}});
        const nlohmann::json j = {{"shells", shells},
                                  {"n_basis", sys.n_basis()},
                                  {"density", matrix_json(D)},
                                  {"J", matrix_json(J)},
                                  {"K", matrix_json(K)},
                                  {"naive_J", matrix_json(nj)},
                                  {"naive_K", matrix_json(nk)},
                                  {"max_abs_deviation", dev},
                                  {"max_rel_frobenius", rel}};
        std::cout << j.dump(2) << "\n";
    } else {
        std::printf("%zu shells, %zu basis functions\n", sys.shells.size(), sys.n_basis());
        print_matrix("J", J);
        print_matrix("K", K);
        print_matrix("naive J", nj);
        print_matrix("naive K", nk);
        std::printf("max deviation %.3e (relative Frobenius %.3e)\n", dev, rel);
    }
    if (rel > 1e-10) {
        std::cerr << "ERR:TOLERANCE phased and naive J/K disagree\n";
        return kToleranceFailure;
    }
    return 0;
}

int cmd_quadrature(const std::string& family, int n, const std::string& out) {
    if (family != "legendre") fail(ErrorCode::UnsupportedConstruct, "unknown quadrature family '" + family + "'");
    const std::string csv = quad::to_csv(quad::gauss_legendre(n));
    if (out.empty()) {
        std::cout << csv;
    } else {
        write_file(out, csv);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Recurrence kernel compiler"};
    app.require_subcommand(1);

    app.add_subcommand("list", "List the builtin recurrences");

    std::string show_name;
    auto* show = app.add_subcommand("show", "Print a builtin in spec-file form");
    show->add_option("name", show_name)->required();

    GenerateArgs gen;
    auto* generate = app.add_subcommand("generate", "Generate kernel source and a manifest");
    generate->add_option("spec", gen.spec, "Builtin name or spec file")->required();
    generate->add_option("--backend", gen.backend, "unrolled, layered or runtime");
    generate->add_option("--bound", gen.bound, "Upper limit for every index");
    generate->add_option("-o,--out", gen.out, "Output directory");
    generate->add_option("--profile", gen.profile, "Target profile (cpp20, c99)");
    generate->add_option("--max-instances", gen.max_instances, "Cap on generated functions");

    ValidateArgs val;
    auto* validate = app.add_subcommand("validate", "Check backends against the interpreter and oracle");
    validate->add_option("spec", val.spec, "Builtin name or spec file")->required();
    validate->add_option("--backends", val.backends, "Backends to check (comma separated)");
    validate->add_option("--samples", val.samples, "Random environments");
    validate->add_option("--seed", val.seed, "Random seed");
    validate->add_option("--json", val.json, "Write the JSON report here");
    validate->add_option("--bound", val.bound, "Index limit for spec files without a builtin match");
    validate->add_flag("--ir", val.ir, "Use the IR executors instead of the compiled kernels");

    BenchArgs ben;
    auto* benchc = app.add_subcommand("bench", "Time the compiled kernels of a builtin");
    benchc->add_option("spec", ben.spec, "Builtin name")->required();
    benchc->add_option("--bounds", ben.bounds, "Layers with descent sum <= N, or points with indices <= N");
    benchc->add_option("--reps", ben.reps, "Repetitions per row (median reported)");
    benchc->add_option("--backends", ben.backends, "Backends to time (comma separated)");
    benchc->add_option("--json", ben.json, "Write the JSON report here");

    DemoArgs demo;
    auto* democ = app.add_subcommand("demo-jk", "Build J and K for a toy system and compare with the naive oracle");
    democ->add_option("--shells", demo.shells, "Shell file: x y z l exponent per line");
    democ->add_option("--seed", demo.seed, "Seed for the random geometry and density");
    democ->add_option("--n-shells", demo.n_shells, "Shells in the random system");
    democ->add_flag("--json", demo.json, "Emit JSON");

    std::string qfamily;
    int qn = 0;
    std::string qout;
    auto* quadc = app.add_subcommand("quadrature", "Export a Gauss rule as CSV (node,weight)");
    quadc->add_option("family", qfamily, "legendre")->required();
    quadc->add_option("n", qn, "Number of points")->required();
    quadc->add_option("-o,--out", qout, "Output file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "ERR:USAGE " << e.what() << "\n";
        return 1;
    }

    try {
        if (app.got_subcommand("list")) return cmd_list();
        if (app.got_subcommand("show")) return cmd_show(show_name);
        if (app.got_subcommand("generate")) return cmd_generate(gen);
        if (app.got_subcommand("validate")) return cmd_validate(val);
        if (app.got_subcommand("bench")) return cmd_bench(ben);
        if (app.got_subcommand("demo-jk")) return cmd_demo(demo);
        if (app.got_subcommand("quadrature")) return cmd_quadrature(qfamily, qn, qout);
    } catch (const Error& e) {
        std::cerr << "ERR:" << error_code_name(e.code()) << " " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "ERR:INTERNAL " << e.what() << "\n";
        return 1;
    }
    return 1;
}
