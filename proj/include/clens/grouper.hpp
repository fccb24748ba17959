#pragma once

#include "clens/code_model.hpp"
#include "clens/pattern_detector.hpp"
#include "clens/trace_model.hpp"

#include <cstdint>
#include <vector>

namespace clens {

/// MP disallows delegate methods inside a template/hook call chain; MPD
/// ("MP+D") admits any method sharing a hook's name.
enum class GroupingMode : std::uint8_t { MP, MPD };

/// Pattern tables resolved against a trace's symbol tables. Valid as long as
/// the trace, model, and detection result it was built from stay alive.
class PatternIndex {
public:
    PatternIndex(const Trace& trace, const CodeModel& model, const DetectionResult& detection);

    [[nodiscard]] const std::vector<MetaPattern>& patterns() const { return detection_->patterns; }
    [[nodiscard]] const DetectionResult& detection() const { return *detection_; }

    /// Patterns whose template method is the given trace method handle.
    [[nodiscard]] const std::vector<std::int32_t>& patterns_of_template(std::int32_t trace_method) const;

    /// Name handle of a trace method (via the model); -1 if unresolved.
    [[nodiscard]] std::int32_t name_of(std::int32_t trace_method) const;
    /// Model method index of a trace method; -1 if unresolved.
    [[nodiscard]] std::int32_t model_method_of(std::int32_t trace_method) const;
    /// Declared method name, falling back to the raw trace token.
    [[nodiscard]] std::string display_name(const Trace& trace, std::int32_t trace_method) const;
    /// Declaring type index of a trace method; -1 if unresolved.
    [[nodiscard]] std::int32_t declaring_type_of(std::int32_t trace_method) const;

    /// True iff the method shares a name with a hook of the pattern.
    [[nodiscard]] bool hook_name_matches(std::int32_t pattern, std::int32_t trace_method) const;
    /// True iff the method shares name and declaring class with a hook.
    [[nodiscard]] bool hook_name_class_matches(std::int32_t pattern, std::int32_t trace_method) const;
    /// True iff the method is the pattern's template or shares a hook's
    /// name and declaring class (used for message routing).
    [[nodiscard]] bool is_pattern_method(std::int32_t pattern, std::int32_t trace_method) const;

private:
    const DetectionResult* detection_;
    const CodeModel* model_;
    std::vector<std::vector<std::int32_t>> by_template_;       // trace method -> pattern indices
    std::vector<std::int32_t> trace_method_name_;              // trace method -> name handle
    std::vector<std::int32_t> trace_method_type_;              // trace method -> declaring type
    std::vector<std::int32_t> trace_method_model_;             // trace method -> model method
    std::vector<std::vector<std::int32_t>> hook_names_;        // per pattern, sorted name handles
    std::vector<std::vector<std::uint64_t>> hook_name_class_;  // per pattern, sorted (type,name) keys
    std::vector<std::int32_t> template_trace_method_;          // per pattern; -1 if absent from trace
    std::vector<std::int32_t> empty_;
};

/// One grouping seed: the objects gathered for one template-method
/// activation of one pattern.
struct GroupSeed {
    std::int32_t template_object = -1;
    std::int32_t pattern = -1;
    std::vector<std::int32_t> members;  // sorted object handles
};

struct ObjectGroup {
    std::vector<std::int32_t> members;  // sorted object handles
    std::int32_t pattern = -1;
    std::int32_t template_object = -1;
};

/// Soft clusters: an object may appear in one group per pattern it
/// participates in. No group is a strict subset of a same-pattern group.
struct GroupingResult {
    std::vector<ObjectGroup> groups;
};

/// Walks the stack out of self-calls: returns the nearest enclosing entry
/// that is not a self-call (possibly `entry_pos` itself).
std::int32_t rewind_self_calls(const Trace& trace, std::int32_t entry_pos);

/// Chain traversal for recursive patterns. `entry_pos` must be an Entry
/// invoking the pattern's template method.
GroupSeed seed_recursive(const Trace& trace, const PatternIndex& index, std::int32_t entry_pos,
                         std::int32_t pattern, GroupingMode mode);

/// Direct-callee collection (MP) or chain traversal without the template
/// object (MPD) for connection patterns.
GroupSeed seed_connection(const Trace& trace, const PatternIndex& index, std::int32_t entry_pos,
                          std::int32_t pattern, GroupingMode mode);

/// Runs the full grouping pipeline: seeds every template-method activation,
/// unifies seeds sharing (template object, pattern), discards empty seeds,
/// and eliminates same-pattern strict subsets. Unification-pattern templates
/// produce no groups. Deterministic regardless of worker count.
GroupingResult group_objects(const Trace& trace, const CodeModel& model,
                             const DetectionResult& detection, GroupingMode mode);

std::string serialize_groups(const Trace& trace, const GroupingResult& result);
GroupingResult parse_groups(const Trace& trace, const DetectionResult& detection,
                            const std::string& text, const std::string& origin);

}  // namespace clens
