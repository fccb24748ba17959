#include "clens/corpus_generator.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <deque>
#include <filesystem>
#include <random>
#include <set>
#include <unordered_map>

namespace clens {

using nlohmann::json;

void ScenarioSpec::validate() const {
    auto nonneg = [](int v, const char* what) {
        if (v < 0) throw UsageError(std::string("scenario spec: ") + what + " must be >= 0");
    };
    nonneg(mix.uni, "uni");
    nonneg(mix.runi_11, "runi_11");
    nonneg(mix.runi_1n, "runi_1n");
    nonneg(mix.con_11, "con_11");
    nonneg(mix.con_1n, "con_1n");
    nonneg(mix.rcon_11, "rcon_11");
    nonneg(mix.rcon_1n, "rcon_1n");
    if (depth_min < 1 || depth_max < depth_min) throw UsageError("scenario spec: bad depth range");
    if (fanout_min < 1 || fanout_max < fanout_min) throw UsageError("scenario spec: bad fanout range");
    if (episodes_min < 1 || episodes_max < episodes_min) throw UsageError("scenario spec: bad episode range");
    if (threads < 1) throw UsageError("scenario spec: threads must be >= 1");
    if (delegate_prob < 0.0 || delegate_prob > 1.0) throw UsageError("scenario spec: delegate_prob must be in [0,1]");
    if (temp_noise_rate < 0.0 || temp_noise_rate > 1.0)
        throw UsageError("scenario spec: temp_noise_rate must be in [0,1]");
}

namespace {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}
    std::uint64_t next() { return gen_(); }
    int range(int lo, int hi) {  // inclusive
        return lo + static_cast<int>(next() % static_cast<std::uint64_t>(hi - lo + 1));
    }
    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    bool chance(double p) { return unit() < p; }

private:
    std::mt19937_64 gen_;
};

enum class Cat { Uni, Runi11, Runi1N, Con11, Con1N, Rcon11, Rcon1N };

const char* short_name(Cat c) {
    switch (c) {
        case Cat::Uni: return "Uni";
        case Cat::Runi11: return "11-RUni";
        case Cat::Runi1N: return "1N-RUni";
        case Cat::Con11: return "11-Con";
        case Cat::Con1N: return "1N-Con";
        case Cat::Rcon11: return "11-RCon";
        case Cat::Rcon1N: return "1N-RCon";
    }
    return "?";
}

bool linear_shape(Cat c) { return c == Cat::Runi11 || c == Cat::Rcon11; }
bool same_class_shape(Cat c) { return c == Cat::Runi11 || c == Cat::Runi1N; }

constexpr std::int32_t kNoObj = -1;
constexpr std::int32_t kStaticObj = -2;

struct UnitEvent {
    EventKind kind;
    std::int32_t member;  // token
    std::int32_t object;  // object index, or kStaticObj for static writes
    std::int32_t value;   // object index or kNoObj ("-")
    bool is_constructor;
};

struct TreeNode {
    std::int32_t object;
    std::int32_t method;  // token of the dynamic op method
    bool helper_wrap = false;
    std::int32_t delegate = kNoObj;
    std::int32_t probe = kNoObj;
    std::vector<int> children;
};

struct TreeWiring {
    std::vector<TreeNode> nodes;  // nodes[0] is the root
    std::int32_t helper_method = -1;
    std::int32_t delegate_method = -1;
    std::int32_t probe_method = -1;
};

struct ListenerWiring {
    std::int32_t object;
    std::int32_t method;  // token of the dynamic on-method
    std::int32_t delegate = kNoObj;
};

struct SubjectWiring {
    std::int32_t object;
    std::int32_t notify_method = -1;
    std::int32_t helper_method = -1;
    std::int32_t delegate_method = -1;
    bool helper_wrap = false;
    std::vector<ListenerWiring> listeners;
    std::set<std::size_t> notified;  // listener indices actually messaged
};

struct Instance {
    Cat cat;
    int index;
    std::vector<TreeWiring> trees;
    std::vector<SubjectWiring> subjects;
    std::int32_t uni_object = kNoObj;
    std::int32_t uni_run = -1, uni_step = -1, uni_ctor = -1;
    std::int32_t temp_ctor = -1;
    std::string temp_type;
};

class CorpusBuilder {
public:
    explicit CorpusBuilder(const ScenarioSpec& spec) : spec_(spec), rng_(spec.seed) {}
    GeneratedCorpus build();

private:
    std::int32_t tok(const std::string& s) {
        auto it = token_idx_.find(s);
        if (it != token_idx_.end()) return it->second;
        auto id = static_cast<std::int32_t>(tokens_.size());
        tokens_.push_back(s);
        token_idx_.emplace(tokens_.back(), id);
        return id;
    }

    std::int32_t new_object(const std::string& type) {
        auto idx = static_cast<std::int32_t>(object_ids_.size());
        object_ids_.push_back("o" + std::to_string(idx + 1));
        object_types_.push_back(type);
        return idx;
    }

    void add_type(const std::string& id, TypeKind kind, std::vector<std::string> supers = {}) {
        types_.push_back(TypeDecl{id, id, kind, std::move(supers), false});
    }
    void add_method(const std::string& id, const std::string& name, const std::string& type,
                    std::vector<std::string> overrides = {}, bool ctor = false) {
        methods_.push_back(MethodDecl{id, name, type, ctor, false, std::move(overrides)});
    }
    void add_field(const std::string& id, const std::string& name, const std::string& in,
                   const std::string& of, bool collection) {
        fields_.push_back(FieldDecl{id, name, in, of, collection, false});
    }
    void add_site(const std::string& caller, const std::string& callee, ReceiverKind rk) {
        sites_.push_back(InvocationSite{caller, callee, rk});
    }
    std::int32_t add_ctor(const std::string& type) {
        add_method(type + "#<init>", "<init>", type, {}, true);
        return tok(type + "#<init>");
    }

    void construct_object(std::int32_t obj, std::int32_t ctor_method);
    void grow_tree(TreeWiring& tree, int node, int depth_left, Cat cat, const std::string& node_type,
                   std::int32_t node_method, const std::string& leaf_type, std::int32_t leaf_method,
                   const std::string& aide_type, const std::string& probe_type);
    Instance build_recursive_instance(Cat cat, int k);
    Instance build_connection_instance(Cat cat, int k);
    Instance build_uni_instance(int k);
    void emit_tree_activation(std::vector<UnitEvent>& out, const TreeWiring& tree, int node) const;

    const ScenarioSpec& spec_;
    Rng rng_;

    std::vector<std::string> tokens_;
    std::unordered_map<std::string, std::int32_t> token_idx_;
    std::vector<std::string> object_ids_;
    std::vector<std::string> object_types_;

    std::vector<TypeDecl> types_;
    std::vector<MethodDecl> methods_;
    std::vector<FieldDecl> fields_;
    std::vector<InvocationSite> sites_;

    std::vector<UnitEvent> prologue_, epilogue_;
    std::vector<std::pair<int, std::vector<UnitEvent>>> episode_units_;

    std::int32_t cfg_field_ = -1;
};

void CorpusBuilder::construct_object(std::int32_t obj, std::int32_t ctor_method) {
    prologue_.push_back({EventKind::Entry, ctor_method, obj, kNoObj, true});
    prologue_.push_back({EventKind::Exit, ctor_method, obj, kNoObj, false});
    prologue_.push_back({EventKind::FieldWrite, cfg_field_, obj, kNoObj, false});
    prologue_.push_back({EventKind::FieldRead, cfg_field_, obj, kNoObj, false});
    epilogue_.push_back({EventKind::FieldRead, cfg_field_, obj, kNoObj, false});
}

void CorpusBuilder::grow_tree(TreeWiring& tree, int node, int depth_left, Cat cat,
                              const std::string& node_type, std::int32_t node_method,
                              const std::string& leaf_type, std::int32_t leaf_method,
                              const std::string& aide_type, const std::string& probe_type) {
    if (rng_.chance(spec_.delegate_prob))
        tree.nodes[static_cast<std::size_t>(node)].delegate = new_object(aide_type);
    if (rng_.chance(0.25)) tree.nodes[static_cast<std::size_t>(node)].probe = new_object(probe_type);
    if (depth_left == 0) return;
    tree.nodes[static_cast<std::size_t>(node)].helper_wrap = rng_.chance(0.3);

    int fanout = linear_shape(cat) ? 1 : rng_.range(spec_.fanout_min, spec_.fanout_max);
    const bool has_leaf_class = !leaf_type.empty();
    for (int c = 0; c < fanout; ++c) {
        bool leaf = has_leaf_class && (depth_left == 1 || rng_.chance(0.35));
        TreeNode child;
        if (leaf) {
            child.object = new_object(leaf_type);
            child.method = leaf_method;
        } else {
            child.object = new_object(node_type);
            child.method = node_method;
        }
        tree.nodes.push_back(child);
        int child_idx = static_cast<int>(tree.nodes.size()) - 1;
        tree.nodes[static_cast<std::size_t>(node)].children.push_back(child_idx);
        if (leaf) {
            if (rng_.chance(spec_.delegate_prob))
                tree.nodes[static_cast<std::size_t>(child_idx)].delegate = new_object(aide_type);
        } else {
            grow_tree(tree, child_idx, depth_left - 1, cat, node_type, node_method, leaf_type,
                      leaf_method, aide_type, probe_type);
        }
    }
}

Instance CorpusBuilder::build_recursive_instance(Cat cat, int k) {
    Instance inst;
    inst.cat = cat;
    inst.index = k;
    const std::string tag = std::to_string(k);
    const std::string op = "op" + tag;

    std::string prefix, base, node, leaf;
    switch (cat) {
        case Cat::Runi11: prefix = "List" + tag; node = prefix + "Node"; break;
        case Cat::Runi1N: prefix = "Tree" + tag; node = prefix + "Node"; break;
        case Cat::Rcon11: prefix = "Deco" + tag; node = prefix + "Wrap"; leaf = prefix + "Core"; break;
        default:          prefix = "Comp" + tag; node = prefix + "Node"; leaf = prefix + "Leaf"; break;
    }
    base = prefix + "Base";
    const std::string aide = prefix + "Aide";
    const std::string probe = prefix + "Probe";

    add_type(base, TypeKind::Class);
    add_type(node, TypeKind::Class, {base});
    if (!leaf.empty()) add_type(leaf, TypeKind::Class, {base});
    add_type(aide, TypeKind::Class);
    add_type(probe, TypeKind::Class);

    add_method(base + "#" + op, op, base);
    add_method(node + "#" + op, op, node, {base + "#" + op});
    if (!leaf.empty()) add_method(leaf + "#" + op, op, leaf, {base + "#" + op});
    add_method(aide + "#" + op, op, aide);
    add_method(probe + "#probe" + tag, "probe" + tag, probe);
    add_method(node + "#helper" + tag, "helper" + tag, node);
    auto node_ctor = add_ctor(node);
    std::int32_t leaf_ctor = -1;
    if (!leaf.empty()) leaf_ctor = add_ctor(leaf);
    auto aide_ctor = add_ctor(aide);
    (void)node_ctor;
    (void)leaf_ctor;
    (void)aide_ctor;

    // Template method invokes the hook on referenced elements; for the
    // same-class shapes the field type is the class itself, so the declared
    // callee is the subclass method and template and hook types coincide.
    const bool same_class = same_class_shape(cat);
    const std::string callee = same_class ? node + "#" + op : base + "#" + op;
    add_site(node + "#" + op, callee, ReceiverKind::Other);
    add_site(node + "#" + op, node + "#helper" + tag, ReceiverKind::ThisOrSuper);
    add_site(node + "#" + op, probe + "#probe" + tag, ReceiverKind::Other);
    add_site(node + "#" + op, aide + "#" + op, ReceiverKind::Other);
    if (!leaf.empty()) add_site(leaf + "#" + op, aide + "#" + op, ReceiverKind::Other);
    add_field("f_items" + tag, "items" + tag, node, same_class ? node : base,
              cat == Cat::Runi1N || cat == Cat::Rcon1N);
    add_field("f_peer" + tag, "peer" + tag, leaf.empty() ? node : leaf, aide, false);

    int trees = 1 + (rng_.chance(0.4) ? 1 : 0);
    for (int t = 0; t < trees; ++t) {
        TreeWiring tree;
        tree.helper_method = tok(node + "#helper" + tag);
        tree.delegate_method = tok(aide + "#" + op);
        tree.probe_method = tok(probe + "#probe" + tag);
        TreeNode root;
        root.object = new_object(node);
        root.method = tok(node + "#" + op);
        tree.nodes.push_back(root);
        int depth = rng_.range(spec_.depth_min, spec_.depth_max);
        grow_tree(tree, 0, depth - 1, cat, node, tok(node + "#" + op), leaf,
                  leaf.empty() ? -1 : tok(leaf + "#" + op), aide, probe);
        inst.trees.push_back(std::move(tree));
    }

    inst.temp_type = "Scrap" + tag;
    inst.temp_ctor = tok(inst.temp_type + "#<init>");
    return inst;
}

Instance CorpusBuilder::build_connection_instance(Cat cat, int k) {
    Instance inst;
    inst.cat = cat;
    inst.index = k;
    const std::string tag = std::to_string(k);
    const bool one_to_n = cat == Cat::Con1N;
    const std::string prefix = one_to_n ? "Obs" + tag : "State" + tag;
    const std::string subject = one_to_n ? prefix + "Subject" : prefix + "Mgr";
    const std::string hook_base = one_to_n ? prefix + "Listener" : prefix + "Base";
    const std::string impl_a = one_to_n ? prefix + "ViewA" : prefix + "A";
    const std::string impl_b = one_to_n ? prefix + "ViewB" : prefix + "B";
    const std::string aide = prefix + "Aide";
    const std::string notify = "notify" + tag;
    const std::string on = "on" + tag;

    add_type(subject, TypeKind::Class);
    add_type(hook_base, one_to_n ? TypeKind::Interface : TypeKind::Class);
    add_type(impl_a, TypeKind::Class, {hook_base});
    add_type(impl_b, TypeKind::Class, {hook_base});
    add_type(aide, TypeKind::Class);

    add_method(subject + "#" + notify, notify, subject);
    add_method(subject + "#helper" + tag, "helper" + tag, subject);
    add_method(hook_base + "#" + on, on, hook_base);
    add_method(impl_a + "#" + on, on, impl_a, {hook_base + "#" + on});
    add_method(impl_b + "#" + on, on, impl_b, {hook_base + "#" + on});
    add_method(aide + "#" + on, on, aide);
    add_ctor(subject);
    add_ctor(impl_a);
    add_ctor(impl_b);
    add_ctor(aide);

    add_site(subject + "#" + notify, hook_base + "#" + on, ReceiverKind::Other);
    add_site(subject + "#" + notify, subject + "#helper" + tag, ReceiverKind::ThisOrSuper);
    add_site(impl_a + "#" + on, aide + "#" + on, ReceiverKind::Other);
    add_site(impl_b + "#" + on, aide + "#" + on, ReceiverKind::Other);
    add_field("f_refs" + tag, one_to_n ? "ears" + tag : "cur" + tag, subject, hook_base, one_to_n);
    add_field("f_peer" + tag, "peer" + tag, impl_a, aide, false);

    auto make_listeners = [&](int count) {
        std::vector<ListenerWiring> out;
        for (int i = 0; i < count; ++i) {
            ListenerWiring l;
            const auto& type = i % 2 == 0 ? impl_a : impl_b;
            l.object = new_object(type);
            l.method = tok(type + "#" + on);
            if (rng_.chance(spec_.delegate_prob)) l.delegate = new_object(aide);
            out.push_back(l);
        }
        return out;
    };

    int subjects = 1 + (rng_.chance(0.4) ? 1 : 0);
    for (int s = 0; s < subjects; ++s) {
        SubjectWiring si;
        si.object = new_object(subject);
        si.notify_method = tok(subject + "#" + notify);
        si.helper_method = tok(subject + "#helper" + tag);
        si.delegate_method = tok(aide + "#" + on);
        si.helper_wrap = rng_.chance(0.3);
        if (!one_to_n) {
            si.listeners = make_listeners(2);  // the two states
        } else if (s == 1 && inst.subjects[0].listeners.size() >= 2 && rng_.chance(0.5)) {
            // A strictly nested listener set: exercises same-pattern
            // subgroup elimination against the first subject's group.
            auto take = rng_.range(1, static_cast<int>(inst.subjects[0].listeners.size()) - 1);
            si.listeners.assign(inst.subjects[0].listeners.begin(),
                                inst.subjects[0].listeners.begin() + take);
        } else {
            si.listeners = make_listeners(rng_.range(spec_.fanout_min, spec_.fanout_max));
        }
        inst.subjects.push_back(std::move(si));
    }

    inst.temp_type = "Scrap" + tag;
    inst.temp_ctor = tok(inst.temp_type + "#<init>");
    return inst;
}

Instance CorpusBuilder::build_uni_instance(int k) {
    Instance inst;
    inst.cat = Cat::Uni;
    inst.index = k;
    const std::string tag = std::to_string(k);
    const std::string base = "Algo" + tag + "Base";
    const std::string impl = "Algo" + tag + "Impl";
    add_type(base, TypeKind::Class);
    add_type(impl, TypeKind::Class, {base});
    add_method(base + "#run" + tag, "run" + tag, base);
    add_method(base + "#step" + tag, "step" + tag, base);
    add_method(impl + "#step" + tag, "step" + tag, impl, {base + "#step" + tag});
    inst.uni_ctor = add_ctor(impl);
    add_site(base + "#run" + tag, base + "#step" + tag, ReceiverKind::ThisOrSuper);
    inst.uni_object = new_object(impl);
    inst.uni_run = tok(base + "#run" + tag);
    inst.uni_step = tok(impl + "#step" + tag);
    inst.temp_type = "Scrap" + tag;
    inst.temp_ctor = tok(inst.temp_type + "#<init>");
    return inst;
}

void CorpusBuilder::emit_tree_activation(std::vector<UnitEvent>& out, const TreeWiring& tree,
                                         int node) const {
    const auto& n = tree.nodes[static_cast<std::size_t>(node)];
    out.push_back({EventKind::Entry, n.method, n.object, kNoObj, false});
    if (n.probe != kNoObj) {
        out.push_back({EventKind::Entry, tree.probe_method, n.probe, kNoObj, false});
        out.push_back({EventKind::Exit, tree.probe_method, n.probe, kNoObj, false});
    }
    if (n.helper_wrap) out.push_back({EventKind::Entry, tree.helper_method, n.object, kNoObj, false});
    for (auto c : n.children) emit_tree_activation(out, tree, c);
    if (n.helper_wrap) out.push_back({EventKind::Exit, tree.helper_method, n.object, kNoObj, false});
    if (n.delegate != kNoObj) {
        out.push_back({EventKind::Entry, tree.delegate_method, n.delegate, kNoObj, false});
        out.push_back({EventKind::Exit, tree.delegate_method, n.delegate, kNoObj, false});
    }
    out.push_back({EventKind::Exit, n.method, n.object, kNoObj, false});
}

GeneratedCorpus CorpusBuilder::build() {
    spec_.validate();
    cfg_field_ = tok("cfg");

    std::vector<Instance> instances;
    int k = 0;
    auto emit_instances = [&](Cat cat, int count) {
        for (int i = 0; i < count; ++i) {
            ++k;
            if (cat == Cat::Uni) instances.push_back(build_uni_instance(k));
            else if (cat == Cat::Con11 || cat == Cat::Con1N) instances.push_back(build_connection_instance(cat, k));
            else instances.push_back(build_recursive_instance(cat, k));
        }
    };
    emit_instances(Cat::Uni, spec_.mix.uni);
    emit_instances(Cat::Runi11, spec_.mix.runi_11);
    emit_instances(Cat::Runi1N, spec_.mix.runi_1n);
    emit_instances(Cat::Con11, spec_.mix.con_11);
    emit_instances(Cat::Con1N, spec_.mix.con_1n);
    emit_instances(Cat::Rcon11, spec_.mix.rcon_11);
    emit_instances(Cat::Rcon1N, spec_.mix.rcon_1n);

    auto ctor_of = [&](std::int32_t obj) { return tok(object_types_[static_cast<std::size_t>(obj)] + "#<init>"); };

    // Prologue: construction plus config touches for every wired object, then
    // reference stores. Roots and subjects land in static registries, so they
    // escape globally; everything else escapes through its owner's field.
    std::set<std::int32_t> constructed;
    auto construct_once = [&](std::int32_t obj) {
        if (constructed.insert(obj).second) construct_object(obj, ctor_of(obj));
    };
    for (const auto& inst : instances) {
        const std::string tag = std::to_string(inst.index);
        auto reg_field = tok("reg" + tag);
        auto items_field = tok("items" + tag);
        auto peer_field = tok("peer" + tag);
        auto refs_field = tok(inst.cat == Cat::Con1N ? "ears" + tag : "cur" + tag);
        if (inst.cat == Cat::Uni) {
            construct_once(inst.uni_object);
            prologue_.push_back({EventKind::FieldWrite, reg_field, kStaticObj, inst.uni_object, false});
            continue;
        }
        for (const auto& tree : inst.trees) {
            for (std::size_t ni = 0; ni < tree.nodes.size(); ++ni) {
                const auto& n = tree.nodes[ni];
                construct_once(n.object);
                if (n.delegate != kNoObj) construct_once(n.delegate);
                if (ni == 0)
                    prologue_.push_back({EventKind::FieldWrite, reg_field, kStaticObj, n.object, false});
            }
            for (const auto& n : tree.nodes) {
                for (auto c : n.children)
                    prologue_.push_back({EventKind::FieldWrite, items_field, n.object,
                                         tree.nodes[static_cast<std::size_t>(c)].object, false});
                if (n.delegate != kNoObj)
                    prologue_.push_back({EventKind::FieldWrite, peer_field, n.object, n.delegate, false});
            }
        }
        for (const auto& s : inst.subjects) {
            construct_once(s.object);
            prologue_.push_back({EventKind::FieldWrite, reg_field, kStaticObj, s.object, false});
            for (const auto& l : s.listeners) {
                construct_once(l.object);
                if (l.delegate != kNoObj) construct_once(l.delegate);
                prologue_.push_back({EventKind::FieldWrite, refs_field, s.object, l.object, false});
                if (l.delegate != kNoObj)
                    prologue_.push_back({EventKind::FieldWrite, peer_field, l.object, l.delegate, false});
            }
        }
    }

    // Episodes assigned round-robin across threads with seeded jitter.
    int episode_counter = 0;
    auto assign_thread = [&] {
        int t = episode_counter % spec_.threads;
        if (spec_.threads > 1 && rng_.chance(0.3)) t = (t + 1) % spec_.threads;
        ++episode_counter;
        return t;
    };
    auto maybe_temp_unit = [&](const Instance& inst) {
        if (!rng_.chance(spec_.temp_noise_rate)) return;
        std::vector<UnitEvent> u;
        auto id = new_object(inst.temp_type);
        u.push_back({EventKind::Entry, inst.temp_ctor, id, kNoObj, true});
        u.push_back({EventKind::Exit, inst.temp_ctor, id, kNoObj, false});
        episode_units_.emplace_back(assign_thread(), std::move(u));
    };

    for (auto& inst : instances) {
        int episodes = rng_.range(spec_.episodes_min, spec_.episodes_max);
        if (inst.cat == Cat::Uni) {
            for (int e = 0; e < episodes; ++e) {
                std::vector<UnitEvent> u;
                u.push_back({EventKind::Entry, inst.uni_run, inst.uni_object, kNoObj, false});
                u.push_back({EventKind::Entry, inst.uni_step, inst.uni_object, kNoObj, false});
                u.push_back({EventKind::Exit, inst.uni_step, inst.uni_object, kNoObj, false});
                u.push_back({EventKind::Exit, inst.uni_run, inst.uni_object, kNoObj, false});
                episode_units_.emplace_back(assign_thread(), std::move(u));
                maybe_temp_unit(inst);
            }
            continue;
        }
        for (const auto& tree : inst.trees) {
            for (int e = 0; e < episodes; ++e) {
                std::vector<UnitEvent> u;
                emit_tree_activation(u, tree, 0);
                episode_units_.emplace_back(assign_thread(), std::move(u));
                maybe_temp_unit(inst);
            }
        }
        for (auto& s : inst.subjects) {
            for (int e = 0; e < episodes; ++e) {
                std::vector<UnitEvent> u;
                u.push_back({EventKind::Entry, s.notify_method, s.object, kNoObj, false});
                if (s.helper_wrap) u.push_back({EventKind::Entry, s.helper_method, s.object, kNoObj, false});
                auto notify_listener = [&](std::size_t li) {
                    const auto& l = s.listeners[li];
                    s.notified.insert(li);
                    u.push_back({EventKind::Entry, l.method, l.object, kNoObj, false});
                    if (l.delegate != kNoObj) {
                        u.push_back({EventKind::Entry, s.delegate_method, l.delegate, kNoObj, false});
                        u.push_back({EventKind::Exit, s.delegate_method, l.delegate, kNoObj, false});
                    }
                    u.push_back({EventKind::Exit, l.method, l.object, kNoObj, false});
                };
                if (inst.cat == Cat::Con11) {
                    // State pattern: one current state per activation.
                    notify_listener(static_cast<std::size_t>(e) % s.listeners.size());
                } else {
                    // Earlier episodes may notify a prefix; the last notifies
                    // everyone, so the union over episodes is the wired set.
                    std::size_t count = s.listeners.size();
                    if (e + 1 < episodes && count > 1)
                        count = static_cast<std::size_t>(rng_.range(1, static_cast<int>(count)));
                    for (std::size_t li = 0; li < count; ++li) notify_listener(li);
                }
                if (s.helper_wrap) u.push_back({EventKind::Exit, s.helper_method, s.object, kNoObj, false});
                u.push_back({EventKind::Exit, s.notify_method, s.object, kNoObj, false});
                episode_units_.emplace_back(assign_thread(), std::move(u));
                maybe_temp_unit(inst);
            }
        }
    }

    // Interleave the per-thread queues round-robin with seeded jitter.
    std::vector<std::deque<UnitEvent>> queues(static_cast<std::size_t>(spec_.threads));
    std::size_t total_events = prologue_.size() + epilogue_.size();
    for (auto& [thread, unit] : episode_units_) {
        total_events += unit.size();
        for (auto& ev : unit) queues[static_cast<std::size_t>(thread)].push_back(ev);
    }

    std::string text;
    text.reserve(total_events * 24 + object_ids_.size() * 16);
    for (std::size_t i = 0; i < object_ids_.size(); ++i)
        text += "O " + object_ids_[i] + " " + object_types_[i] + "\n";

    std::vector<std::string> thread_names;
    for (int t = 0; t < spec_.threads; ++t) thread_names.push_back("t" + std::to_string(t + 1));

    std::uint64_t seq = 0;
    char buf[24];
    auto append_number = [&](std::uint64_t v) {
        auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
        (void)ec;
        text.append(buf, static_cast<std::size_t>(end - buf));
    };
    auto emit_event = [&](const UnitEvent& ev, int thread) {
        ++seq;
        switch (ev.kind) {
            case EventKind::Entry: text += "E "; break;
            case EventKind::Exit: text += "X "; break;
            case EventKind::FieldWrite: text += "W "; break;
            case EventKind::FieldRead: text += "R "; break;
        }
        append_number(seq);
        text += ' ';
        text += thread_names[static_cast<std::size_t>(thread)];
        text += ' ';
        if (ev.kind == EventKind::Entry || ev.kind == EventKind::Exit) {
            text += tokens_[static_cast<std::size_t>(ev.member)];
            text += ' ';
            text += object_ids_[static_cast<std::size_t>(ev.object)];
            if (ev.is_constructor) text += " C";
        } else {
            if (ev.object == kStaticObj) text += "STATIC";
            else text += object_ids_[static_cast<std::size_t>(ev.object)];
            text += ' ';
            text += tokens_[static_cast<std::size_t>(ev.member)];
            if (ev.kind == EventKind::FieldWrite) {
                text += ' ';
                if (ev.value == kNoObj) text += '-';
                else text += object_ids_[static_cast<std::size_t>(ev.value)];
            }
        }
        text += '\n';
    };

    for (const auto& ev : prologue_) emit_event(ev, 0);
    bool remaining = true;
    while (remaining) {
        remaining = false;
        for (int t = 0; t < spec_.threads; ++t) {
            auto& q = queues[static_cast<std::size_t>(t)];
            if (q.empty()) continue;
            int burst = 1 + rng_.range(0, 2);
            while (burst-- > 0 && !q.empty()) {
                emit_event(q.front(), t);
                q.pop_front();
            }
            if (!q.empty()) remaining = true;
        }
    }
    for (const auto& ev : epilogue_) emit_event(ev, 0);

    GeneratedCorpus corpus;

    // Constructive oracles: one member set per wired structure; same-pattern
    // strict subsets drop out, exactly as the grouping pipeline prunes them.
    auto obj_id = [&](std::int32_t o) { return object_ids_[static_cast<std::size_t>(o)]; };
    auto add_groups = [&](std::vector<std::set<std::string>> groups,
                          std::vector<std::vector<std::string>>& out) {
        for (std::size_t i = 0; i < groups.size(); ++i) {
            if (groups[i].empty()) continue;
            bool subset = false;
            for (std::size_t j = 0; j < groups.size() && !subset; ++j) {
                if (i == j) continue;
                if (groups[i].size() < groups[j].size() &&
                    std::includes(groups[j].begin(), groups[j].end(), groups[i].begin(), groups[i].end()))
                    subset = true;
            }
            if (!subset) out.emplace_back(groups[i].begin(), groups[i].end());
        }
    };

    for (const auto& inst : instances) {
        if (inst.cat == Cat::Uni) continue;
        std::vector<std::set<std::string>> mp, mpd;
        for (const auto& tree : inst.trees) {
            std::set<std::string> nodes, with_delegates;
            for (const auto& n : tree.nodes) {
                nodes.insert(obj_id(n.object));
                with_delegates.insert(obj_id(n.object));
                if (n.delegate != kNoObj) with_delegates.insert(obj_id(n.delegate));
            }
            mp.push_back(std::move(nodes));
            mpd.push_back(std::move(with_delegates));
        }
        for (const auto& s : inst.subjects) {
            std::set<std::string> listeners, with_delegates;
            for (auto li : s.notified) {
                const auto& l = s.listeners[li];
                listeners.insert(obj_id(l.object));
                with_delegates.insert(obj_id(l.object));
                if (l.delegate != kNoObj) with_delegates.insert(obj_id(l.delegate));
            }
            mp.push_back(std::move(listeners));
            mpd.push_back(std::move(with_delegates));
        }
        add_groups(std::move(mp), corpus.oracle_mp);
        add_groups(std::move(mpd), corpus.oracle_mpd);
    }
    auto canonical = [](std::vector<std::vector<std::string>>& sets) {
        std::sort(sets.begin(), sets.end());
        sets.erase(std::unique(sets.begin(), sets.end()), sets.end());
    };
    canonical(corpus.oracle_mp);
    canonical(corpus.oracle_mpd);

    // Ground truth: one concept per structure family plus one per subject.
    auto obj_type = [&](std::int32_t o) { return object_types_[static_cast<std::size_t>(o)]; };
    for (const auto& inst : instances) {
        const std::string tag = std::to_string(inst.index);
        GroundTruth::Concept c;
        std::set<std::string> types;
        switch (inst.cat) {
            case Cat::Uni:
                c.name = "algorithm" + tag;
                types.insert(obj_type(inst.uni_object));
                break;
            case Cat::Con11:
            case Cat::Con1N: {
                c.name = inst.cat == Cat::Con1N ? "views" + tag : "states" + tag;
                for (const auto& s : inst.subjects)
                    for (const auto& l : s.listeners) {
                        types.insert(obj_type(l.object));
                        if (l.delegate != kNoObj) types.insert(obj_type(l.delegate));
                    }
                GroundTruth::Concept subject_concept;
                subject_concept.name = inst.cat == Cat::Con1N ? "subject" + tag : "manager" + tag;
                subject_concept.types.push_back(obj_type(inst.subjects.front().object));
                corpus.ground_truth.concepts.push_back(std::move(subject_concept));
                break;
            }
            default: {
                c.name = "structure" + tag;
                for (const auto& tree : inst.trees)
                    for (const auto& n : tree.nodes) {
                        types.insert(obj_type(n.object));
                        if (n.delegate != kNoObj) types.insert(obj_type(n.delegate));
                    }
                break;
            }
        }
        c.types.assign(types.begin(), types.end());
        corpus.ground_truth.concepts.push_back(std::move(c));
    }

    for (const auto& inst : instances) corpus.declared_pattern_counts[short_name(inst.cat)] += 1;

    corpus.model = CodeModel(std::move(types_), std::move(methods_), std::move(fields_), std::move(sites_));
    corpus.trace_text = std::move(text);
    return corpus;
}

}  // namespace

GeneratedCorpus generate(const ScenarioSpec& spec) {
    CorpusBuilder builder(spec);
    return builder.build();
}

void write_corpus(const GeneratedCorpus& corpus, const std::string& dir) {
    std::filesystem::create_directories(dir);
    save_code_model(corpus.model, dir + "/code_model.json");
    write_file(dir + "/trace.txt", corpus.trace_text);
    write_file(dir + "/oracle_groups.json", serialize_oracles(corpus));
    write_file(dir + "/ground_truth.json", serialize_ground_truth(corpus.ground_truth));
}

std::string serialize_oracles(const GeneratedCorpus& corpus) {
    json doc;
    doc["mp"] = corpus.oracle_mp;
    doc["mpd"] = corpus.oracle_mpd;
    return doc.dump(2) + "\n";
}

ScenarioSpec parse_scenario_spec(const std::string& text, const std::string& origin) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        input_error(origin + ": JSON parse error: " + e.what());
    }
    ScenarioSpec spec;
    auto get_int = [&](const char* key, int fallback) {
        return doc.contains(key) ? doc.at(key).get<int>() : fallback;
    };
    auto get_double = [&](const char* key, double fallback) {
        return doc.contains(key) ? doc.at(key).get<double>() : fallback;
    };
    spec.seed = doc.contains("seed") ? doc.at("seed").get<std::uint64_t>() : 1;
    spec.threads = get_int("threads", 1);
    spec.depth_min = get_int("depth_min", 2);
    spec.depth_max = get_int("depth_max", 3);
    spec.fanout_min = get_int("fanout_min", 1);
    spec.fanout_max = get_int("fanout_max", 3);
    spec.episodes_min = get_int("episodes_min", 1);
    spec.episodes_max = get_int("episodes_max", 3);
    spec.delegate_prob = get_double("delegate_prob", 0.0);
    spec.temp_noise_rate = get_double("temp_noise_rate", 0.2);
    if (doc.contains("pattern_mix")) {
        const auto& m = doc.at("pattern_mix");
        auto mix_int = [&](const char* key) { return m.contains(key) ? m.at(key).get<int>() : 0; };
        spec.mix.uni = mix_int("uni");
        spec.mix.runi_11 = mix_int("runi_11");
        spec.mix.runi_1n = mix_int("runi_1n");
        spec.mix.con_11 = mix_int("con_11");
        spec.mix.con_1n = mix_int("con_1n");
        spec.mix.rcon_11 = mix_int("rcon_11");
        spec.mix.rcon_1n = mix_int("rcon_1n");
    }
    spec.validate();
    return spec;
}

std::string serialize_scenario_spec(const ScenarioSpec& spec) {
    json doc;
    doc["seed"] = spec.seed;
    doc["threads"] = spec.threads;
    doc["depth_min"] = spec.depth_min;
    doc["depth_max"] = spec.depth_max;
    doc["fanout_min"] = spec.fanout_min;
    doc["fanout_max"] = spec.fanout_max;
    doc["episodes_min"] = spec.episodes_min;
    doc["episodes_max"] = spec.episodes_max;
    doc["delegate_prob"] = spec.delegate_prob;
    doc["temp_noise_rate"] = spec.temp_noise_rate;
    doc["pattern_mix"] = {{"uni", spec.mix.uni},         {"runi_11", spec.mix.runi_11},
                          {"runi_1n", spec.mix.runi_1n}, {"con_11", spec.mix.con_11},
                          {"con_1n", spec.mix.con_1n},   {"rcon_11", spec.mix.rcon_11},
                          {"rcon_1n", spec.mix.rcon_1n}};
    return doc.dump(2) + "\n";
}

}  // namespace clens
