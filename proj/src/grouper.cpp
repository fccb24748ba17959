#include "clens/grouper.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <map>
#include <thread>
#include <unordered_set>

namespace clens {

using nlohmann::json;

namespace {

std::uint64_t type_name_key(std::int32_t type, std::int32_t name) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(type)) << 32) |
           static_cast<std::uint32_t>(name);
}

}  // namespace

PatternIndex::PatternIndex(const Trace& trace, const CodeModel& model, const DetectionResult& detection)
    : detection_(&detection), model_(&model) {
    const auto n_trace_methods = trace.methods().size();
    trace_method_name_.assign(n_trace_methods, -1);
    trace_method_type_.assign(n_trace_methods, -1);
    trace_method_model_.assign(n_trace_methods, -1);
    by_template_.assign(n_trace_methods, {});

    // Method-name handles shared between trace methods and hook members so
    // the overload-blind name checks become integer comparisons.
    SymbolTable names;
    for (std::size_t tm = 0; tm < n_trace_methods; ++tm) {
        auto model_idx = model.method_index(trace.methods().name(static_cast<std::int32_t>(tm)));
        if (model_idx < 0) continue;  // methods outside the model never match
        trace_method_model_[tm] = model_idx;
        trace_method_name_[tm] = names.intern(model.method_at(model_idx).name);
        trace_method_type_[tm] = model.declaring_type_of(model_idx);
    }

    const auto& patterns = detection.patterns;
    hook_names_.resize(patterns.size());
    hook_name_class_.resize(patterns.size());
    template_trace_method_.assign(patterns.size(), -1);
    for (std::size_t pi = 0; pi < patterns.size(); ++pi) {
        const auto& p = patterns[pi];
        const auto& hooks = detection.hook_sets.at(static_cast<std::size_t>(p.hook_set));
        for (auto m : hooks.methods) {
            auto name = names.intern(model.method_at(m).name);
            auto type = model.declaring_type_of(m);
            hook_names_[pi].push_back(name);
            hook_name_class_[pi].push_back(type_name_key(type, name));
        }
        auto uniq = [](auto& v) {
            std::sort(v.begin(), v.end());
            v.erase(std::unique(v.begin(), v.end()), v.end());
        };
        uniq(hook_names_[pi]);
        uniq(hook_name_class_[pi]);

        auto tm = trace.methods().lookup(model.method_at(p.template_method).id);
        template_trace_method_[pi] = tm;
        if (tm >= 0) by_template_[static_cast<std::size_t>(tm)].push_back(static_cast<std::int32_t>(pi));
    }
}

const std::vector<std::int32_t>& PatternIndex::patterns_of_template(std::int32_t trace_method) const {
    if (trace_method < 0 || static_cast<std::size_t>(trace_method) >= by_template_.size()) return empty_;
    return by_template_[static_cast<std::size_t>(trace_method)];
}

std::int32_t PatternIndex::name_of(std::int32_t trace_method) const {
    return trace_method < 0 ? -1 : trace_method_name_[static_cast<std::size_t>(trace_method)];
}

std::int32_t PatternIndex::declaring_type_of(std::int32_t trace_method) const {
    return trace_method < 0 ? -1 : trace_method_type_[static_cast<std::size_t>(trace_method)];
}

std::int32_t PatternIndex::model_method_of(std::int32_t trace_method) const {
    return trace_method < 0 ? -1 : trace_method_model_[static_cast<std::size_t>(trace_method)];
}

std::string PatternIndex::display_name(const Trace& trace, std::int32_t trace_method) const {
    auto model_idx = model_method_of(trace_method);
    if (model_idx >= 0) return model_->method_at(model_idx).name;
    return trace.methods().name(trace_method);
}

bool PatternIndex::hook_name_matches(std::int32_t pattern, std::int32_t trace_method) const {
    auto name = name_of(trace_method);
    if (name < 0) return false;
    const auto& v = hook_names_[static_cast<std::size_t>(pattern)];
    return std::binary_search(v.begin(), v.end(), name);
}

bool PatternIndex::hook_name_class_matches(std::int32_t pattern, std::int32_t trace_method) const {
    auto name = name_of(trace_method);
    auto type = declaring_type_of(trace_method);
    if (name < 0 || type < 0) return false;
    const auto& v = hook_name_class_[static_cast<std::size_t>(pattern)];
    return std::binary_search(v.begin(), v.end(), type_name_key(type, name));
}

bool PatternIndex::is_pattern_method(std::int32_t pattern, std::int32_t trace_method) const {
    if (trace_method < 0) return false;
    if (template_trace_method_[static_cast<std::size_t>(pattern)] == trace_method) return true;
    return hook_name_class_matches(pattern, trace_method);
}

std::int32_t rewind_self_calls(const Trace& trace, std::int32_t entry_pos) {
    while (true) {
        auto parent = trace.parent_of(entry_pos);
        if (parent < 0) return entry_pos;
        if (trace.event_at(entry_pos).object != trace.event_at(parent).object) return entry_pos;
        entry_pos = parent;
    }
}

namespace {

struct ScanFrame {
    std::int32_t object;
    bool counts_against_chain;  // non-self frame that fails the hook check
};

/// Iterates the same-thread events strictly between an entry and its exit,
/// maintaining a call stack. `on_entry(event_pos, parent_object, chain_intact)`
/// runs for each Entry after it is pushed.
template <typename ChainPred, typename OnEntry>
void scan_activation(const Trace& trace, std::int32_t entry_pos, ChainPred chain_ok, OnEntry on_entry) {
    auto exit_pos = trace.match_of(entry_pos);
    if (exit_pos < 0) return;
    const auto& e0 = trace.event_at(entry_pos);
    const auto& lane = trace.thread_positions()[static_cast<std::size_t>(e0.thread)];
    auto lo = trace.thread_rank(entry_pos) + 1;
    auto hi = trace.thread_rank(exit_pos);  // exclusive

    std::vector<ScanFrame> stack;
    std::int32_t broken = 0;
    for (auto r = lo; r < hi; ++r) {
        auto pos = lane[static_cast<std::size_t>(r)];
        const auto& e = trace.event_at(pos);
        if (e.kind == EventKind::Entry) {
            auto parent_object = stack.empty() ? e0.object : stack.back().object;
            bool is_self = e.object == parent_object;
            bool counts = false;
            if (!is_self && !chain_ok(e.member)) {
                counts = true;
                ++broken;
            }
            stack.push_back(ScanFrame{e.object, counts});
            on_entry(pos, parent_object, broken == 0);
        } else if (e.kind == EventKind::Exit) {
            if (!stack.empty()) {
                if (stack.back().counts_against_chain) --broken;
                stack.pop_back();
            }
        }
    }
}

void push_member(std::vector<std::int32_t>& members, std::int32_t object) {
    members.push_back(object);
}

void finish_members(std::vector<std::int32_t>& members) {
    std::sort(members.begin(), members.end());
    members.erase(std::unique(members.begin(), members.end()), members.end());
}

GroupSeed chain_seed(const Trace& trace, const PatternIndex& index, std::int32_t entry_pos,
                     std::int32_t pattern, GroupingMode mode, bool include_initial_callee) {
    entry_pos = rewind_self_calls(trace, entry_pos);
    const auto& e0 = trace.event_at(entry_pos);

    GroupSeed seed;
    seed.pattern = pattern;
    seed.template_object = e0.object;

    if (include_initial_callee && index.hook_name_matches(pattern, e0.member))
        push_member(seed.members, e0.object);

    auto chain_ok = [&](std::int32_t method) {
        return mode == GroupingMode::MP ? index.hook_name_class_matches(pattern, method)
                                        : index.hook_name_matches(pattern, method);
    };
    scan_activation(trace, entry_pos, chain_ok,
                    [&](std::int32_t pos, std::int32_t, bool chain_intact) {
                        if (chain_intact) push_member(seed.members, trace.event_at(pos).object);
                    });
    finish_members(seed.members);
    return seed;
}

}  // namespace

GroupSeed seed_recursive(const Trace& trace, const PatternIndex& index, std::int32_t entry_pos,
                         std::int32_t pattern, GroupingMode mode) {
    return chain_seed(trace, index, entry_pos, pattern, mode, /*include_initial_callee=*/true);
}

GroupSeed seed_connection(const Trace& trace, const PatternIndex& index, std::int32_t entry_pos,
                          std::int32_t pattern, GroupingMode mode) {
    if (mode == GroupingMode::MPD) {
        // Same traversal as the recursive patterns; the template object is
        // never added to the resulting group.
        auto seed = chain_seed(trace, index, entry_pos, pattern, mode, /*include_initial_callee=*/false);
        seed.members.erase(std::remove(seed.members.begin(), seed.members.end(), seed.template_object),
                           seed.members.end());
        return seed;
    }

    const auto& e0 = trace.event_at(entry_pos);
    GroupSeed seed;
    seed.pattern = pattern;
    seed.template_object = e0.object;
    scan_activation(trace, entry_pos, [](std::int32_t) { return true; },
                    [&](std::int32_t pos, std::int32_t parent_object, bool) {
                        const auto& e = trace.event_at(pos);
                        if (parent_object == seed.template_object &&
                            index.hook_name_class_matches(pattern, e.member))
                            push_member(seed.members, e.object);
                    });
    finish_members(seed.members);
    return seed;
}

GroupingResult group_objects(const Trace& trace, const CodeModel& model,
                             const DetectionResult& detection, GroupingMode mode) {
    PatternIndex index(trace, model, detection);
    const auto& patterns = detection.patterns;

    // One task per distinct (activation, pattern). Recursive seeds and MPD
    // connection seeds start from the rewound frame, so self-call re-entries
    // collapse onto one task instead of rescanning the same slice.
    struct Task {
        std::int32_t entry_pos;
        std::int32_t pattern;
    };
    std::vector<Task> tasks;
    std::unordered_set<std::uint64_t> seen;
    const auto& events = trace.events();
    for (std::size_t pos = 0; pos < events.size(); ++pos) {
        const auto& e = events[pos];
        if (e.kind != EventKind::Entry) continue;
        for (auto pi : index.patterns_of_template(e.member)) {
            const auto cat = patterns[static_cast<std::size_t>(pi)].type.category;
            if (cat == PatternCategory::Unification) continue;
            auto start = static_cast<std::int32_t>(pos);
            const bool rewinds = is_recursive_category(cat) || mode == GroupingMode::MPD;
            if (rewinds) start = rewind_self_calls(trace, start);
            auto key = (static_cast<std::uint64_t>(static_cast<std::uint32_t>(start)) << 32) |
                       static_cast<std::uint32_t>(pi);
            if (seen.insert(key).second) tasks.push_back(Task{start, pi});
        }
    }

    std::vector<GroupSeed> seeds(tasks.size());
    auto run_task = [&](std::size_t i) {
        const auto& t = tasks[i];
        const auto cat = patterns[static_cast<std::size_t>(t.pattern)].type.category;
        seeds[i] = is_recursive_category(cat) ? seed_recursive(trace, index, t.entry_pos, t.pattern, mode)
                                              : seed_connection(trace, index, t.entry_pos, t.pattern, mode);
    };

    const auto workers = std::min<std::size_t>(effective_thread_count(), tasks.size());
    if (workers > 1) {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < tasks.size(); i = next.fetch_add(1)) run_task(i);
            });
        }
        for (auto& th : pool) th.join();
    } else {
        for (std::size_t i = 0; i < tasks.size(); ++i) run_task(i);
    }

    // Unify seeds sharing (template object, pattern); empty seeds drop out.
    std::map<std::pair<std::int32_t, std::int32_t>, std::vector<std::int32_t>> unified;
    for (const auto& s : seeds) {
        if (s.members.empty()) continue;
        auto& members = unified[{s.pattern, s.template_object}];
        members.insert(members.end(), s.members.begin(), s.members.end());
    }

    GroupingResult result;
    for (auto& [key, members] : unified) {
        finish_members(members);
        result.groups.push_back(ObjectGroup{std::move(members), key.first, key.second});
    }

    // Same-pattern strict subsets are redundant views of a larger group.
    std::vector<bool> dead(result.groups.size(), false);
    for (std::size_t i = 0; i < result.groups.size(); ++i) {
        for (std::size_t j = 0; j < result.groups.size(); ++j) {
            if (i == j || dead[i]) continue;
            const auto& a = result.groups[i];
            const auto& b = result.groups[j];
            if (a.pattern != b.pattern) continue;
            if (a.members.size() < b.members.size() &&
                std::includes(b.members.begin(), b.members.end(), a.members.begin(), a.members.end()))
                dead[i] = true;
        }
    }
    GroupingResult pruned;
    for (std::size_t i = 0; i < result.groups.size(); ++i)
        if (!dead[i]) pruned.groups.push_back(std::move(result.groups[i]));
    return pruned;
}

std::string serialize_groups(const Trace& trace, const GroupingResult& result) {
    // Canonical order: by pattern, then template object id, then members.
    std::vector<const ObjectGroup*> order;
    order.reserve(result.groups.size());
    for (const auto& g : result.groups) order.push_back(&g);
    auto members_as_ids = [&](const ObjectGroup& g) {
        std::vector<std::string> ids;
        ids.reserve(g.members.size());
        for (auto m : g.members) ids.push_back(trace.object_at(m).id);
        std::sort(ids.begin(), ids.end());
        return ids;
    };
    std::sort(order.begin(), order.end(), [&](const ObjectGroup* a, const ObjectGroup* b) {
        if (a->pattern != b->pattern) return a->pattern < b->pattern;
        const auto& ta = trace.object_at(a->template_object).id;
        const auto& tb = trace.object_at(b->template_object).id;
        if (ta != tb) return ta < tb;
        return members_as_ids(*a) < members_as_ids(*b);
    });

    json doc;
    auto& jgroups = doc["groups"] = json::array();
    int next_id = 0;
    for (const auto* g : order) {
        jgroups.push_back({{"id", "g" + std::to_string(next_id++)},
                           {"pattern", "p" + std::to_string(g->pattern)},
                           {"template_object", trace.object_at(g->template_object).id},
                           {"members", members_as_ids(*g)}});
    }
    return doc.dump(2) + "\n";
}

GroupingResult parse_groups(const Trace& trace, const DetectionResult& detection,
                            const std::string& text, const std::string& origin) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        input_error(origin + ": JSON parse error: " + e.what());
    }
    GroupingResult result;
    if (!doc.contains("groups")) input_error(origin + ": group file needs 'groups'");
    for (const auto& jg : doc["groups"]) {
        ObjectGroup g;
        auto pid = jg.at("pattern").get<std::string>();
        if (pid.size() < 2 || pid[0] != 'p') input_error(origin + ": bad pattern reference: " + pid);
        g.pattern = static_cast<std::int32_t>(std::stol(pid.substr(1)));
        if (g.pattern < 0 || static_cast<std::size_t>(g.pattern) >= detection.patterns.size())
            input_error(origin + ": pattern reference out of range: " + pid);
        auto tid = jg.at("template_object").get<std::string>();
        g.template_object = trace.object_handle(tid);
        if (g.template_object < 0) input_error(origin + ": unknown template object: " + tid);
        for (const auto& jm : jg.at("members")) {
            auto oid = jm.get<std::string>();
            auto handle = trace.object_handle(oid);
            if (handle < 0) input_error(origin + ": unknown member object: " + oid);
            g.members.push_back(handle);
        }
        std::sort(g.members.begin(), g.members.end());
        g.members.erase(std::unique(g.members.begin(), g.members.end()), g.members.end());
        result.groups.push_back(std::move(g));
    }
    return result;
}

}  // namespace clens
