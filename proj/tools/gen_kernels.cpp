// Generates the compiled kernel set for every builtin: unrolled and runtime
// backends for all of them, layered where the spec supports it, plus the
// registry that exposes them by name.

#include "recursum/codegen/render.hpp"
#include "recursum/error.hpp"
#include "recursum/library.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace recursum;

namespace {

// Leaves unchanged files alone so the build does not recompile them.
void write_if_changed(const fs::path& path, const std::string& text) {
    std::ifstream in(path, std::ios::binary);
    if (in) {
        std::stringstream ss;
        ss << in.rdbuf();
        if (ss.str() == text) return;
    }
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Generate compiled kernels for the builtin recurrences"};
    std::string out_dir;
    std::string profile_id = "cpp20";
    int bound = -1;
    app.add_option("out", out_dir, "Output directory")->required();
    app.add_option("--profile", profile_id, "Target profile");
    app.add_option("--bound", bound, "Cap every index at this value instead of the kernel bounds");
    CLI11_PARSE(app, argc, argv);

    try {
        const codegen::Profile& prof = codegen::profile(profile_id);
        fs::create_directories(out_dir);
        std::vector<std::string> sets;
        for (const std::string& name : library::list_builtins()) {
            const library::BuiltinEntry& e = library::builtin(name);
            codegen::Bounds b = e.kernel_bounds;
            if (bound >= 0) {
                for (auto& u : b.upper) u = std::min<std::int64_t>(u, bound);
                for (auto& c : b.caps) c.limit = std::min<std::int64_t>(c.limit, bound);
            }
            std::vector<codegen::KernelIR> irs;
            irs.push_back(codegen::lower_unrolled(e.spec, b));
            if (e.spec.layered) irs.push_back(codegen::lower_layered(e.spec, b));
            irs.push_back(codegen::lower_runtime(e.spec));
            for (const codegen::KernelIR& ir : irs) {
                const codegen::SourceArtifact art = codegen::render(ir, prof, name);
                for (const auto& [file, text] : art.files) write_if_changed(fs::path(out_dir) / file, text);
                write_if_changed(fs::path(out_dir) / (name + "_" + std::string(codegen::backend_name(ir.backend)) +
                                                      ".json"),
                                 art.manifest.dump(2) + "\n");
                sets.push_back("recursum_kernels_" + name + "_" + std::string(codegen::backend_name(ir.backend)));
            }
        }
        if (!prof.abi_adapter) return 0;
        std::ostringstream reg;
        reg << "// Registry of compiled kernel sets. Generated; do not edit.\n"
            << "#include \"recursum/kernel_abi.hpp\"\n\n";
        for (const std::string& s : sets) reg << "extern const recursum::kernels::KernelSet " << s << ";\n";
        reg << "\nnamespace recursum::kernels {\n\n"
            << "std::vector<const KernelSet*> all_kernel_sets() {\n"
            << "    return {\n";
        for (const std::string& s : sets) reg << "        &" << s << ",\n";
        reg << "    };\n}\n\n"
            << "const KernelSet* find_kernel_set(std::string_view name, std::string_view backend) {\n"
            << "    for (const KernelSet* k : all_kernel_sets()) {\n"
            << "        if (name == k->name && backend == k->backend) return k;\n"
            << "    }\n"
            << "    return nullptr;\n"
            << "}\n\n"
            << "}  // namespace recursum::kernels\n";
        write_if_changed(fs::path(out_dir) / "registry.cpp", reg.str());
    } catch (const Error& e) {
        std::cerr << "ERR:" << error_code_name(e.code()) << " " << e.what() << "\n";
        return 1;
    }
    return 0;
}
