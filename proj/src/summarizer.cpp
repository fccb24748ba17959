#include "clens/summarizer.hpp"

#include <json.hpp>

#include <algorithm>
#include <map>
#include <unordered_map>

namespace clens {

using nlohmann::json;

std::vector<std::string> type_name_set(const Trace& trace, const std::vector<std::int32_t>& members) {
    std::vector<std::string> names;
    names.reserve(members.size());
    for (auto m : members) names.push_back(trace.object_at(m).type_name);
    std::sort(names.begin(), names.end());
    names.erase(std::unique(names.begin(), names.end()), names.end());
    return names;
}

std::vector<SelectedGroup> select_important_groups(const std::vector<ObjectProfile>& profiles,
                                                   const Ranking& ranking, double importance_threshold,
                                                   const GroupingResult& groups) {
    std::unordered_map<std::int32_t, std::vector<std::int32_t>> groups_of_object;
    for (std::size_t g = 0; g < groups.groups.size(); ++g)
        for (auto m : groups.groups[g].members)
            groups_of_object[m].push_back(static_cast<std::int32_t>(g));

    std::vector<bool> group_selected(groups.groups.size(), false);
    std::vector<std::int32_t> singletons;
    for (auto obj : ranking.objects) {
        if (profiles[static_cast<std::size_t>(obj)].importance <= importance_threshold) break;
        auto it = groups_of_object.find(obj);
        if (it == groups_of_object.end()) {
            singletons.push_back(obj);
        } else {
            for (auto g : it->second) group_selected[static_cast<std::size_t>(g)] = true;
        }
    }

    std::vector<SelectedGroup> out;
    for (std::size_t g = 0; g < groups.groups.size(); ++g) {
        if (!group_selected[g]) continue;
        SelectedGroup sg;
        sg.members = groups.groups[g].members;
        sg.source_patterns = {groups.groups[g].pattern};
        sg.from_pattern = true;
        out.push_back(std::move(sg));
    }
    for (auto obj : singletons) {
        SelectedGroup sg;
        sg.members = {obj};
        sg.from_pattern = false;
        out.push_back(std::move(sg));
    }
    return out;
}

std::vector<SelectedGroup> to_class_level(const Trace& trace, const std::vector<SelectedGroup>& groups) {
    std::map<std::vector<std::string>, SelectedGroup> merged;
    for (const auto& g : groups) {
        auto key = type_name_set(trace, g.members);
        auto& slot = merged[key];
        slot.members.insert(slot.members.end(), g.members.begin(), g.members.end());
        slot.source_patterns.insert(slot.source_patterns.end(), g.source_patterns.begin(),
                                    g.source_patterns.end());
        slot.from_pattern = slot.from_pattern || g.from_pattern;
    }
    std::vector<SelectedGroup> out;
    out.reserve(merged.size());
    for (auto& [key, g] : merged) {
        (void)key;
        auto uniq = [](auto& v) {
            std::sort(v.begin(), v.end());
            v.erase(std::unique(v.begin(), v.end()), v.end());
        };
        uniq(g.members);
        uniq(g.source_patterns);
        out.push_back(std::move(g));
    }
    return out;
}

namespace {

std::string display_type_name(const Trace& trace, const std::vector<std::int32_t>& members) {
    std::map<std::string, std::size_t> counts;
    for (auto m : members) counts[trace.object_at(m).type_name]++;
    std::string best;
    std::size_t best_count = 0;
    for (const auto& [name, count] : counts) {
        if (count > best_count) {  // map order makes the tie lexicographic
            best = name;
            best_count = count;
        }
    }
    return best;
}

std::uint64_t first_seen_seq(const Trace& trace, const std::vector<std::int32_t>& members) {
    std::uint64_t best = UINT64_MAX;
    for (auto m : members) {
        const auto& info = trace.object_at(m);
        if (info.seen_in_events) best = std::min(best, info.first_seq);
    }
    return best;
}

}  // namespace

std::vector<Lifeline> assign_lifelines(const Trace& trace, const std::vector<SelectedGroup>& groups) {
    struct Keyed {
        const SelectedGroup* group;
        std::uint64_t first_seq;
        std::string type_name;
        std::vector<std::string> member_ids;
    };
    std::vector<Keyed> keyed;
    keyed.reserve(groups.size());
    for (const auto& g : groups) {
        Keyed k{&g, first_seen_seq(trace, g.members), display_type_name(trace, g.members), {}};
        for (auto m : g.members) k.member_ids.push_back(trace.object_at(m).id);
        std::sort(k.member_ids.begin(), k.member_ids.end());
        keyed.push_back(std::move(k));
    }
    std::sort(keyed.begin(), keyed.end(), [](const Keyed& a, const Keyed& b) {
        if (a.first_seq != b.first_seq) return a.first_seq < b.first_seq;
        if (a.type_name != b.type_name) return a.type_name < b.type_name;
        return a.member_ids < b.member_ids;
    });

    std::vector<Lifeline> lifelines;
    lifelines.reserve(keyed.size());
    int next_group = 1;
    for (const auto& k : keyed) {
        Lifeline l;
        l.members = k.group->members;
        l.source_patterns = k.group->source_patterns;
        l.from_pattern = k.group->from_pattern;
        l.group_type_name = k.type_name;
        if (!k.group->from_pattern && k.group->members.size() == 1)
            l.group_id = k.member_ids.front();
        else
            l.group_id = "grp" + std::to_string(next_group++);
        lifelines.push_back(std::move(l));
    }
    return lifelines;
}

namespace {

/// Candidate lifelines per object, ordered by group_id.
std::unordered_map<std::int32_t, std::vector<std::int32_t>> build_object_index(
    const std::vector<Lifeline>& lifelines) {
    std::vector<std::int32_t> by_id(lifelines.size());
    for (std::size_t i = 0; i < lifelines.size(); ++i) by_id[i] = static_cast<std::int32_t>(i);
    std::sort(by_id.begin(), by_id.end(), [&](std::int32_t a, std::int32_t b) {
        return lifelines[static_cast<std::size_t>(a)].group_id < lifelines[static_cast<std::size_t>(b)].group_id;
    });
    std::unordered_map<std::int32_t, std::vector<std::int32_t>> index;
    for (auto li : by_id)
        for (auto m : lifelines[static_cast<std::size_t>(li)].members) index[m].push_back(li);
    return index;
}

std::int32_t route_with_index(
    const Trace& trace, const PatternIndex& pindex, std::int32_t entry_pos,
    const std::vector<Lifeline>& lifelines,
    const std::unordered_map<std::int32_t, std::vector<std::int32_t>>& object_index) {
    const auto& e = trace.event_at(entry_pos);
    auto it = object_index.find(e.object);
    if (it == object_index.end()) return -1;
    const auto& candidates = it->second;  // already in group_id order
    for (auto li : candidates) {
        for (auto p : lifelines[static_cast<std::size_t>(li)].source_patterns)
            if (pindex.is_pattern_method(p, e.member)) return li;
    }
    return candidates.front();
}

}  // namespace

std::int32_t route_message(const Trace& trace, const PatternIndex& index, std::int32_t entry_pos,
                           const std::vector<Lifeline>& lifelines) {
    auto object_index = build_object_index(lifelines);
    return route_with_index(trace, index, entry_pos, lifelines, object_index);
}

SummarizedDiagram emit_diagram(const Trace& trace, const PatternIndex& index,
                               std::vector<Lifeline> lifelines, const DiagramOptions& options) {
    SummarizedDiagram diagram;
    diagram.level = options.level;

    auto object_index = build_object_index(lifelines);

    // Display label per trace method: the declared name when resolvable.
    std::vector<std::string> labels(trace.methods().size());
    for (std::size_t m = 0; m < labels.size(); ++m)
        labels[m] = index.display_name(trace, static_cast<std::int32_t>(m)) + "()";

    struct Frame {
        std::int32_t routed;   // lifeline of this activation, -1 if undisplayed
        std::int32_t from;     // caller lifeline of the emitted call, -1 external
        bool emitted = false;
        std::string label;
    };
    std::vector<std::vector<Frame>> stacks(trace.thread_positions().size());

    const auto& events = trace.events();
    for (std::size_t pos = 0; pos < events.size(); ++pos) {
        const auto& e = events[pos];
        if (e.kind == EventKind::Entry) {
            auto& stack = stacks[static_cast<std::size_t>(e.thread)];
            Frame frame;
            frame.routed = route_with_index(trace, index, static_cast<std::int32_t>(pos), lifelines, object_index);
            if (frame.routed >= 0) {
                std::int32_t caller = stack.empty() ? kExternalLifeline : stack.back().routed;
                bool caller_displayed = caller >= 0;
                if (caller_displayed ? caller != frame.routed : options.include_external) {
                    frame.emitted = true;
                    frame.from = caller_displayed ? caller : kExternalLifeline;
                    frame.label = labels[static_cast<std::size_t>(e.member)];
                    diagram.messages.push_back(Message{e.seq, frame.from, frame.routed, frame.label,
                                                       MessageKind::Call});
                }
            }
            stack.push_back(std::move(frame));
        } else if (e.kind == EventKind::Exit) {
            auto& stack = stacks[static_cast<std::size_t>(e.thread)];
            if (stack.empty()) continue;
            Frame frame = std::move(stack.back());
            stack.pop_back();
            if (options.with_returns && frame.emitted) {
                diagram.messages.push_back(Message{e.seq, frame.routed, frame.from, "return",
                                                   MessageKind::Return});
            }
        }
    }

    // Lifelines read temporally: order by first message, silent ones last.
    std::vector<std::uint64_t> first_msg(lifelines.size(), UINT64_MAX);
    for (const auto& m : diagram.messages) {
        for (auto endpoint : {m.from, m.to}) {
            if (endpoint >= 0)
                first_msg[static_cast<std::size_t>(endpoint)] =
                    std::min(first_msg[static_cast<std::size_t>(endpoint)], m.seq);
        }
    }
    std::vector<std::int32_t> order(lifelines.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<std::int32_t>(i);
    std::sort(order.begin(), order.end(), [&](std::int32_t a, std::int32_t b) {
        auto fa = first_msg[static_cast<std::size_t>(a)];
        auto fb = first_msg[static_cast<std::size_t>(b)];
        if (fa != fb) return fa < fb;
        return lifelines[static_cast<std::size_t>(a)].group_id < lifelines[static_cast<std::size_t>(b)].group_id;
    });
    std::vector<std::int32_t> new_index(lifelines.size());
    for (std::size_t i = 0; i < order.size(); ++i)
        new_index[static_cast<std::size_t>(order[i])] = static_cast<std::int32_t>(i);
    diagram.lifelines.reserve(lifelines.size());
    for (auto old : order) diagram.lifelines.push_back(std::move(lifelines[static_cast<std::size_t>(old)]));
    for (auto& m : diagram.messages) {
        if (m.from >= 0) m.from = new_index[static_cast<std::size_t>(m.from)];
        if (m.to >= 0) m.to = new_index[static_cast<std::size_t>(m.to)];
    }
    return diagram;
}

SummarizedDiagram summarize(const Trace& trace, const PatternIndex& index,
                            const std::vector<ObjectProfile>& profiles, const Ranking& ranking,
                            const GroupingResult& groups, const DiagramOptions& options) {
    auto selected = select_important_groups(profiles, ranking, options.importance_threshold, groups);
    if (options.level == DiagramLevel::Class) selected = to_class_level(trace, selected);
    return emit_diagram(trace, index, assign_lifelines(trace, selected), options);
}

namespace {

std::string lifeline_title(const Lifeline& l) { return l.group_id + ":" + l.group_type_name; }

}  // namespace

std::string render_plantuml(const SummarizedDiagram& diagram) {
    std::string out = "@startuml\n";
    for (std::size_t i = 0; i < diagram.lifelines.size(); ++i) {
        out += "participant \"" + lifeline_title(diagram.lifelines[i]) + "\" as L" + std::to_string(i) + "\n";
    }
    for (const auto& m : diagram.messages) {
        const char* arrow = m.kind == MessageKind::Call ? "->" : "-->";
        if (m.from == kExternalLifeline) {
            out += "[" + std::string(arrow) + " L" + std::to_string(m.to) + " : " + m.label + "\n";
        } else if (m.to == kExternalLifeline) {
            out += "L" + std::to_string(m.from) + " " + arrow + "] : " + m.label + "\n";
        } else {
            out += "L" + std::to_string(m.from) + " " + arrow + " L" + std::to_string(m.to) + " : " +
                   m.label + "\n";
        }
    }
    out += "@enduml\n";
    return out;
}

std::string render_mermaid(const SummarizedDiagram& diagram) {
    std::string out = "sequenceDiagram\n";
    bool uses_external = false;
    for (const auto& m : diagram.messages)
        if (m.from == kExternalLifeline || m.to == kExternalLifeline) uses_external = true;
    if (uses_external) out += "  participant EXT as EXTERNAL\n";
    for (std::size_t i = 0; i < diagram.lifelines.size(); ++i)
        out += "  participant L" + std::to_string(i) + " as " + lifeline_title(diagram.lifelines[i]) + "\n";
    for (const auto& m : diagram.messages) {
        const char* arrow = m.kind == MessageKind::Call ? "->>" : "-->>";
        auto name = [](std::int32_t idx) {
            return idx == kExternalLifeline ? std::string("EXT") : "L" + std::to_string(idx);
        };
        out += "  " + name(m.from) + arrow + name(m.to) + ": " + m.label + "\n";
    }
    return out;
}

std::string render_json(const Trace& trace, const SummarizedDiagram& diagram) {
    json doc;
    doc["level"] = diagram.level == DiagramLevel::Class ? "class" : "instance";
    auto& jlifelines = doc["lifelines"] = json::array();
    for (const auto& l : diagram.lifelines) {
        std::vector<std::string> ids;
        ids.reserve(l.members.size());
        for (auto m : l.members) ids.push_back(trace.object_at(m).id);
        std::sort(ids.begin(), ids.end());
        jlifelines.push_back({{"group_id", l.group_id},
                              {"group_type_name", l.group_type_name},
                              {"members", ids},
                              {"types", type_name_set(trace, l.members)}});
    }
    auto& jmessages = doc["messages"] = json::array();
    for (const auto& m : diagram.messages) {
        auto endpoint = [&](std::int32_t idx) -> std::string {
            return idx == kExternalLifeline ? "EXTERNAL"
                                            : diagram.lifelines[static_cast<std::size_t>(idx)].group_id;
        };
        jmessages.push_back({{"seq", m.seq},
                             {"from", endpoint(m.from)},
                             {"to", endpoint(m.to)},
                             {"label", m.label},
                             {"kind", m.kind == MessageKind::Call ? "call" : "return"}});
    }
    return doc.dump(2) + "\n";
}

std::string render_diagram(const Trace& trace, const SummarizedDiagram& diagram, DiagramFormat format) {
    switch (format) {
        case DiagramFormat::PlantUml: return render_plantuml(diagram);
        case DiagramFormat::Mermaid: return render_mermaid(diagram);
        case DiagramFormat::Json: return render_json(trace, diagram);
    }
    return {};
}

}  // namespace clens
