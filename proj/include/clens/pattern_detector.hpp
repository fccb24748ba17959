#pragma once

#include "clens/code_model.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace clens {

enum class PatternCategory : std::uint8_t {
    Unification,
    RecursiveUnification,
    RecursiveConnection,
    Connection,
};

enum class Multiplicity : std::uint8_t { One, N };

[[nodiscard]] std::string category_name(PatternCategory c);
[[nodiscard]] std::string pattern_short_name(PatternCategory c, Multiplicity m);

/// True for the categories whose template/hook calls form reference chains
/// (11-RUni, 1N-RUni, 11-RCon, 1N-RCon).
[[nodiscard]] bool is_recursive_category(PatternCategory c);

struct PatternType {
    PatternCategory category = PatternCategory::Connection;
    Multiplicity multiplicity = Multiplicity::One;

    friend bool operator==(const PatternType&, const PatternType&) = default;
};

/// An override-connected family of methods; members are model method indices,
/// sorted ascending. Excludes constructors, statics, and methods whose only
/// override relations go through library-root declarations.
struct HookSet {
    std::vector<std::int32_t> methods;

    friend bool operator==(const HookSet&, const HookSet&) = default;
};

struct MetaPattern {
    std::int32_t template_method = -1;  // model method index
    std::int32_t hook_set = -1;         // index into the HookSet list
    PatternType type;

    friend bool operator==(const MetaPattern&, const MetaPattern&) = default;
};

struct DetectionResult {
    std::vector<HookSet> hook_sets;
    std::vector<MetaPattern> patterns;  // deduplicated, deterministic order
};

/// Partitions the hook-method universe into override-connected components.
std::vector<HookSet> detect_hooks(const CodeModel& model);

/// Emits one MetaPattern per distinct (caller, hook set, type) triple whose
/// callee belongs to a hook set.
std::vector<MetaPattern> detect_meta_patterns(const CodeModel& model, const std::vector<HookSet>& hooks);

/// Classifies one invocation of a hook by its template. Multiplicity is N iff
/// the template class (or a supertype) holds the hook class through a field
/// with is_collection; Unification always reports multiplicity One.
PatternType detect_pattern_type(const CodeModel& model, std::int32_t template_method,
                                std::int32_t hook_method, const InvocationSite& site);

DetectionResult detect(const CodeModel& model);

/// Pattern report (JSON) as emitted by the `detect` subcommand.
std::string serialize_patterns(const CodeModel& model, const DetectionResult& result);
DetectionResult parse_patterns(const CodeModel& model, const std::string& text, const std::string& origin);

}  // namespace clens
