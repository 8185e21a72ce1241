#pragma once

#include "recursum/codegen/ir.hpp"

#include "json.hpp"

#include <map>
#include <string>
#include <vector>

namespace recursum::codegen {

/// Target grammar for rendered kernels.
struct Profile {
    std::string id;
    std::string header_ext;
    bool namespaces = true;
    bool abi_adapter = false;  // emit the registry adapter (C++ only)
    std::string function_qualifier;  // before ordinary kernels
    std::string inline_macro;        // definition of RECURSUM_FORCEINLINE
    std::string restrict_kw;
    std::string cast_prefix;  // applied to an int expression to make a double
    std::string malloc_fn, calloc_fn, free_fn;
    std::vector<std::string> includes;
    std::map<std::string, std::string> functions;  // sqrt/exp/erf spellings
};

/// Known profiles: "cpp20" (self-hosting default) and "c99".
const Profile& profile(std::string_view id);
std::vector<std::string> profile_ids();
/// RECURSUM_PROFILE if set, else "cpp20".
const Profile& default_profile();

struct SourceArtifact {
    std::map<std::string, std::string> files;  // relative path -> text
    std::string profile_id;
    nlohmann::json manifest;
};

/// `name` labels the artifact (file stem prefix and registry key); it
/// defaults to the snake-case recurrence name.
SourceArtifact render(const KernelIR& ir, const Profile& prof, std::string name = {});

SourceArtifact emit_unrolled(const RecurrenceSpec& spec, const Bounds& bounds, const Profile& prof,
                             const GenOptions& opts = {});
SourceArtifact emit_layered(const RecurrenceSpec& spec, const Bounds& bounds, const Profile& prof,
                            const GenOptions& opts = {});
SourceArtifact emit_runtime(const RecurrenceSpec& spec, const Profile& prof);

nlohmann::json bounds_json(const RecurrenceSpec& spec, const Bounds& bounds);
nlohmann::json ops_json(const OpCount& ops);

/// %.17g with a guaranteed decimal point; negative values parenthesized.
std::string double_literal(double v);

}  // namespace recursum::codegen
