#pragma once

#include "clens/core_identifier.hpp"
#include "clens/grouper.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace clens {

enum class DiagramLevel : std::uint8_t { Instance, Class };
enum class DiagramFormat : std::uint8_t { PlantUml, Mermaid, Json };
enum class MessageKind : std::uint8_t { Call, Return };

/// A group chosen for display, before lifeline identity is assigned.
struct SelectedGroup {
    std::vector<std::int32_t> members;          // sorted object handles
    std::vector<std::int32_t> source_patterns;  // patterns it was built for; empty for created singletons
    bool from_pattern = false;
};

struct Lifeline {
    std::string group_id;
    std::string group_type_name;  // most frequent member type, ties lexicographic
    std::vector<std::int32_t> members;
    std::vector<std::int32_t> source_patterns;
    bool from_pattern = false;
};

inline constexpr std::int32_t kExternalLifeline = -1;

struct Message {
    std::uint64_t seq = 0;
    std::int32_t from = kExternalLifeline;  // lifeline index or kExternalLifeline
    std::int32_t to = 0;
    std::string label;
    MessageKind kind = MessageKind::Call;
};

struct SummarizedDiagram {
    DiagramLevel level = DiagramLevel::Class;
    std::vector<Lifeline> lifelines;  // ordered by first message, unmessaged last
    std::vector<Message> messages;    // trace order
};

struct DiagramOptions {
    double importance_threshold = 0.0;  // I_t
    DiagramLevel level = DiagramLevel::Class;
    bool include_external = false;
    bool with_returns = false;
};

/// Walks the ranking while importance exceeds the threshold; every group
/// containing a consumed object is selected, and objects in no group get a
/// fresh singleton.
std::vector<SelectedGroup> select_important_groups(const std::vector<ObjectProfile>& profiles,
                                                   const Ranking& ranking, double importance_threshold,
                                                   const GroupingResult& groups);

/// Unions selected groups whose member type-name sets are equal.
std::vector<SelectedGroup> to_class_level(const Trace& trace, const std::vector<SelectedGroup>& groups);

/// Sorted distinct type names of the members of one group.
std::vector<std::string> type_name_set(const Trace& trace, const std::vector<std::int32_t>& members);

/// Lifelines with stable ids: pattern groups and merged groups get grpN in a
/// deterministic order, created singletons carry their object id.
std::vector<Lifeline> assign_lifelines(const Trace& trace, const std::vector<SelectedGroup>& groups);

/// Lifeline receiving the message of an entry event whose callee is
/// displayed: a group built for a pattern of the invoked method wins,
/// otherwise the lexicographically smallest group_id. Returns -1 when the
/// callee is in no lifeline.
std::int32_t route_message(const Trace& trace, const PatternIndex& index, std::int32_t entry_pos,
                           const std::vector<Lifeline>& lifelines);

/// Draws intergroup interactions among the given lifelines. Intra-group
/// calls vanish; calls from undisplayed or absent callers appear as
/// EXTERNAL-sourced only when include_external is set.
SummarizedDiagram emit_diagram(const Trace& trace, const PatternIndex& index,
                               std::vector<Lifeline> lifelines, const DiagramOptions& options);

/// Full pipeline from a grouping result: select, convert, draw.
SummarizedDiagram summarize(const Trace& trace, const PatternIndex& index,
                            const std::vector<ObjectProfile>& profiles, const Ranking& ranking,
                            const GroupingResult& groups, const DiagramOptions& options);

std::string render_plantuml(const SummarizedDiagram& diagram);
std::string render_mermaid(const SummarizedDiagram& diagram);
std::string render_json(const Trace& trace, const SummarizedDiagram& diagram);
std::string render_diagram(const Trace& trace, const SummarizedDiagram& diagram, DiagramFormat format);

}  // namespace clens
