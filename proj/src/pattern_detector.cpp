#include "clens/pattern_detector.hpp"

#include <json.hpp>

#include <algorithm>
#include <map>
#include <tuple>

namespace clens {

using nlohmann::json;

std::string category_name(PatternCategory c) {
    switch (c) {
        case PatternCategory::Unification: return "Unification";
        case PatternCategory::RecursiveUnification: return "RecursiveUnification";
        case PatternCategory::RecursiveConnection: return "RecursiveConnection";
        case PatternCategory::Connection: return "Connection";
    }
    return "?";
}

std::string pattern_short_name(PatternCategory c, Multiplicity m) {
    const char* mul = m == Multiplicity::One ? "11" : "1N";
    switch (c) {
        case PatternCategory::Unification: return "Uni";
        case PatternCategory::RecursiveUnification: return std::string(mul) + "-RUni";
        case PatternCategory::RecursiveConnection: return std::string(mul) + "-RCon";
        case PatternCategory::Connection: return std::string(mul) + "-Con";
    }
    return "?";
}

bool is_recursive_category(PatternCategory c) {
    return c == PatternCategory::RecursiveUnification || c == PatternCategory::RecursiveConnection;
}

namespace {

struct UnionFind {
    std::vector<std::int32_t> parent;
    explicit UnionFind(std::size_t n) : parent(n) {
        for (std::size_t i = 0; i < n; ++i) parent[i] = static_cast<std::int32_t>(i);
    }
    std::int32_t find(std::int32_t x) {
        while (parent[static_cast<std::size_t>(x)] != x) {
            parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
            x = parent[static_cast<std::size_t>(x)];
        }
        return x;
    }
    void unite(std::int32_t a, std::int32_t b) { parent[static_cast<std::size_t>(find(a))] = find(b); }
};

}  // namespace

std::vector<HookSet> detect_hooks(const CodeModel& model) {
    const auto& methods = model.methods();
    const auto n = methods.size();

    // Hook-eligible methods: no constructors, no statics, nothing declared in
    // a library-root type. Override edges through ineligible methods vanish,
    // so a method overriding only a root declaration ends up isolated.
    std::vector<bool> eligible(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& m = methods[i];
        if (m.is_constructor || m.is_static) continue;
        auto dt = model.declaring_type_of(static_cast<std::int32_t>(i));
        if (model.type_at(dt).is_library_root) continue;
        eligible[i] = true;
    }

    UnionFind uf(n);
    std::vector<bool> connected(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        if (!eligible[i]) continue;
        for (const auto& ov : methods[i].overrides) {
            auto j = model.method_index(ov);
            if (j < 0 || !eligible[static_cast<std::size_t>(j)]) continue;
            uf.unite(static_cast<std::int32_t>(i), j);
            connected[i] = connected[static_cast<std::size_t>(j)] = true;
        }
    }

    std::map<std::int32_t, std::vector<std::int32_t>> components;
    for (std::size_t i = 0; i < n; ++i) {
        if (!eligible[i] || !connected[i]) continue;
        components[uf.find(static_cast<std::int32_t>(i))].push_back(static_cast<std::int32_t>(i));
    }

    std::vector<HookSet> out;
    out.reserve(components.size());
    for (auto& [root, members] : components) {
        (void)root;
        std::sort(members.begin(), members.end());
        out.push_back(HookSet{std::move(members)});
    }
    std::sort(out.begin(), out.end(),
              [](const HookSet& a, const HookSet& b) { return a.methods.front() < b.methods.front(); });
    return out;
}

PatternType detect_pattern_type(const CodeModel& model, std::int32_t template_method,
                                std::int32_t hook_method, const InvocationSite& site) {
    if (template_method < 0 || static_cast<std::size_t>(template_method) >= model.methods().size() ||
        hook_method < 0 || static_cast<std::size_t>(hook_method) >= model.methods().size())
        input_error("detect_pattern_type: unknown method index");

    auto t_template = model.declaring_type_of(template_method);
    auto t_hook = model.declaring_type_of(hook_method);

    // The paper derives multiplicity from the template class's fields alone:
    // N iff some (possibly inherited) field refers to the hook class through
    // a collection. Holding it through both a scalar and a collection still
    // reports N; holding it through nothing reports One.
    Multiplicity mul = Multiplicity::One;
    for (const auto& f : model.fields()) {
        if (!f.is_collection) continue;
        auto decl_in = model.type_index(f.declaring_type);
        if (decl_in < 0 || !model.subtype_of_idx(t_template, decl_in)) continue;
        auto ft = model.type_index(f.declared_type);
        if (ft < 0) continue;  // external element type
        if (model.subtype_of_idx(ft, t_hook) || model.subtype_of_idx(t_hook, ft)) {
            mul = Multiplicity::N;
            break;
        }
    }

    if (site.receiver_kind == ReceiverKind::ThisOrSuper)
        return PatternType{PatternCategory::Unification, Multiplicity::One};
    if (t_template == t_hook)
        return PatternType{PatternCategory::RecursiveUnification, mul};
    if (model.subtype_of_idx(t_template, t_hook))
        return PatternType{PatternCategory::RecursiveConnection, mul};
    return PatternType{PatternCategory::Connection, mul};
}

std::vector<MetaPattern> detect_meta_patterns(const CodeModel& model, const std::vector<HookSet>& hooks) {
    std::vector<std::int32_t> hook_of(model.methods().size(), -1);
    for (std::size_t h = 0; h < hooks.size(); ++h)
        for (auto m : hooks[h].methods) hook_of[static_cast<std::size_t>(m)] = static_cast<std::int32_t>(h);

    std::vector<MetaPattern> out;
    for (const auto& site : model.invocations()) {
        auto callee = model.method_index(site.callee_method);
        auto caller = model.method_index(site.caller_method);
        auto hs = hook_of[static_cast<std::size_t>(callee)];
        if (hs < 0) continue;
        auto type = detect_pattern_type(model, caller, callee, site);
        out.push_back(MetaPattern{caller, hs, type});
    }

    auto key = [](const MetaPattern& p) {
        return std::make_tuple(p.template_method, p.hook_set, static_cast<int>(p.type.category),
                               static_cast<int>(p.type.multiplicity));
    };
    std::sort(out.begin(), out.end(), [&](const MetaPattern& a, const MetaPattern& b) { return key(a) < key(b); });
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

DetectionResult detect(const CodeModel& model) {
    DetectionResult result;
    result.hook_sets = detect_hooks(model);
    result.patterns = detect_meta_patterns(model, result.hook_sets);
    return result;
}

std::string serialize_patterns(const CodeModel& model, const DetectionResult& result) {
    json doc;
    auto& jhooks = doc["hook_sets"] = json::array();
    for (const auto& hs : result.hook_sets) {
        json methods = json::array();
        for (auto m : hs.methods) methods.push_back(model.method_at(m).id);
        jhooks.push_back({{"methods", methods}});
    }
    auto& jpatterns = doc["patterns"] = json::array();
    for (std::size_t i = 0; i < result.patterns.size(); ++i) {
        const auto& p = result.patterns[i];
        const auto& tm = model.method_at(p.template_method);
        json hook_names = json::array();
        for (auto m : result.hook_sets[static_cast<std::size_t>(p.hook_set)].methods)
            hook_names.push_back(model.method_at(m).name);
        std::sort(hook_names.begin(), hook_names.end());
        hook_names.erase(std::unique(hook_names.begin(), hook_names.end()), hook_names.end());
        jpatterns.push_back({{"id", "p" + std::to_string(i)},
                             {"template_method", tm.id},
                             {"template_method_name", tm.name},
                             {"hook_set", static_cast<int>(p.hook_set)},
                             {"hook_method_names", hook_names},
                             {"category", category_name(p.type.category)},
                             {"multiplicity", p.type.multiplicity == Multiplicity::One ? "One" : "N"},
                             {"pattern", pattern_short_name(p.type.category, p.type.multiplicity)}});
    }
    return doc.dump(2) + "\n";
}

DetectionResult parse_patterns(const CodeModel& model, const std::string& text, const std::string& origin) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        input_error(origin + ": JSON parse error: " + e.what());
    }
    DetectionResult result;
    if (!doc.contains("hook_sets") || !doc.contains("patterns"))
        input_error(origin + ": pattern file needs 'hook_sets' and 'patterns'");
    for (const auto& jh : doc["hook_sets"]) {
        HookSet hs;
        for (const auto& mid : jh.at("methods")) {
            auto idx = model.method_index(mid.get<std::string>());
            if (idx < 0) input_error(origin + ": hook set references unknown method id: " + mid.get<std::string>());
            hs.methods.push_back(idx);
        }
        std::sort(hs.methods.begin(), hs.methods.end());
        result.hook_sets.push_back(std::move(hs));
    }
    for (const auto& jp : doc["patterns"]) {
        MetaPattern p;
        auto tid = jp.at("template_method").get<std::string>();
        p.template_method = model.method_index(tid);
        if (p.template_method < 0) input_error(origin + ": pattern references unknown template method: " + tid);
        p.hook_set = jp.at("hook_set").get<std::int32_t>();
        if (p.hook_set < 0 || static_cast<std::size_t>(p.hook_set) >= result.hook_sets.size())
            input_error(origin + ": pattern references hook set out of range");
        auto cat = jp.at("category").get<std::string>();
        if (cat == "Unification") p.type.category = PatternCategory::Unification;
        else if (cat == "RecursiveUnification") p.type.category = PatternCategory::RecursiveUnification;
        else if (cat == "RecursiveConnection") p.type.category = PatternCategory::RecursiveConnection;
        else if (cat == "Connection") p.type.category = PatternCategory::Connection;
        else input_error(origin + ": unknown pattern category: " + cat);
        auto mul = jp.at("multiplicity").get<std::string>();
        if (mul == "One") p.type.multiplicity = Multiplicity::One;
        else if (mul == "N") p.type.multiplicity = Multiplicity::N;
        else input_error(origin + ": unknown multiplicity: " + mul);
        result.patterns.push_back(p);
    }
    return result;
}

}  // namespace clens
