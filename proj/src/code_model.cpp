#include "clens/code_model.hpp"

#include <json.hpp>

#include <algorithm>
#include <queue>

namespace clens {

using nlohmann::json;

CodeModel::CodeModel(std::vector<TypeDecl> types, std::vector<MethodDecl> methods,
                     std::vector<FieldDecl> fields, std::vector<InvocationSite> invocations)
    : types_(std::move(types)),
      methods_(std::move(methods)),
      fields_(std::move(fields)),
      invocations_(std::move(invocations)) {
    validate_and_index();
}

std::int32_t CodeModel::type_index(std::string_view id) const {
    auto it = type_idx_.find(std::string(id));
    return it == type_idx_.end() ? -1 : it->second;
}

std::int32_t CodeModel::method_index(std::string_view id) const {
    auto it = method_idx_.find(std::string(id));
    return it == method_idx_.end() ? -1 : it->second;
}

std::int32_t CodeModel::declaring_type_of(std::int32_t method_idx) const {
    return method_decl_type_.at(static_cast<std::size_t>(method_idx));
}

bool CodeModel::subtype_of_idx(std::int32_t a, std::int32_t b) const {
    const auto& anc = ancestors_.at(static_cast<std::size_t>(a));
    return std::binary_search(anc.begin(), anc.end(), b);
}

void CodeModel::validate_and_index() {
    type_idx_.clear();
    method_idx_.clear();

    for (std::size_t i = 0; i < types_.size(); ++i) {
        if (!type_idx_.emplace(types_[i].id, static_cast<std::int32_t>(i)).second)
            input_error("duplicate type id: " + types_[i].id);
    }
    for (std::size_t i = 0; i < methods_.size(); ++i) {
        if (!method_idx_.emplace(methods_[i].id, static_cast<std::int32_t>(i)).second)
            input_error("duplicate method id: " + methods_[i].id);
    }

    // Supertype edges must resolve, form a DAG, and stay out of library roots.
    for (const auto& t : types_) {
        for (const auto& sup : t.supertype_ids) {
            if (type_idx_.find(sup) == type_idx_.end())
                input_error("type " + t.id + " references unknown supertype id: " + sup);
        }
        if (t.is_library_root && !t.supertype_ids.empty())
            input_error("library-root type " + t.id + " must not declare supertypes");
    }

    // Ancestor sets via reverse-postorder walk; cycle detection on the way.
    const auto n = types_.size();
    ancestors_.assign(n, {});
    std::vector<std::uint8_t> state(n, 0);  // 0=unvisited 1=in-progress 2=done
    std::vector<std::int32_t> stack;
    for (std::size_t root = 0; root < n; ++root) {
        if (state[root] == 2) continue;
        stack.push_back(static_cast<std::int32_t>(root));
        while (!stack.empty()) {
            auto v = stack.back();
            auto& tv = types_[static_cast<std::size_t>(v)];
            if (state[static_cast<std::size_t>(v)] == 0) {
                state[static_cast<std::size_t>(v)] = 1;
                for (const auto& sup : tv.supertype_ids) {
                    auto s = type_idx_.at(sup);
                    if (state[static_cast<std::size_t>(s)] == 1)
                        input_error("supertype cycle involving type " + tv.id);
                    if (state[static_cast<std::size_t>(s)] == 0) stack.push_back(s);
                }
            } else {
                stack.pop_back();
                if (state[static_cast<std::size_t>(v)] == 2) continue;
                state[static_cast<std::size_t>(v)] = 2;
                auto& anc = ancestors_[static_cast<std::size_t>(v)];
                anc.push_back(v);
                for (const auto& sup : tv.supertype_ids) {
                    const auto& sanc = ancestors_[static_cast<std::size_t>(type_idx_.at(sup))];
                    anc.insert(anc.end(), sanc.begin(), sanc.end());
                }
                std::sort(anc.begin(), anc.end());
                anc.erase(std::unique(anc.begin(), anc.end()), anc.end());
            }
        }
    }

    method_decl_type_.resize(methods_.size());
    for (std::size_t i = 0; i < methods_.size(); ++i) {
        const auto& m = methods_[i];
        auto dt = type_index(m.declaring_type);
        if (dt < 0) input_error("method " + m.id + " references unknown declaring_type: " + m.declaring_type);
        method_decl_type_[i] = dt;
        if (m.is_constructor && !m.overrides.empty())
            input_error("constructor " + m.id + " must not declare overrides");
        for (const auto& ov : m.overrides) {
            auto oi = method_index(ov);
            if (oi < 0) input_error("method " + m.id + " references unknown override target: " + ov);
            const auto& target = methods_[static_cast<std::size_t>(oi)];
            if (target.name != m.name)
                input_error("method " + m.id + " overrides " + ov + " with a different name");
            auto tt = type_index(target.declaring_type);
            if (!subtype_of_idx(dt, tt) || tt == dt)
                input_error("method " + m.id + " overrides " + ov + " which is not declared in a proper supertype");
        }
    }

    for (const auto& f : fields_) {
        if (type_index(f.declaring_type) < 0)
            input_error("field " + f.id + " references unknown declaring_type: " + f.declaring_type);
        // declared_type may be an external name; no check.
    }
    for (const auto& inv : invocations_) {
        if (method_index(inv.caller_method) < 0)
            input_error("invocation references unknown caller_method: " + inv.caller_method);
        if (method_index(inv.callee_method) < 0)
            input_error("invocation references unknown callee_method: " + inv.callee_method);
    }
}

bool subtype_of(const CodeModel& model, std::string_view a, std::string_view b) {
    auto ia = model.type_index(a);
    auto ib = model.type_index(b);
    if (ia < 0) input_error("unknown type id: " + std::string(a));
    if (ib < 0) input_error("unknown type id: " + std::string(b));
    return model.subtype_of_idx(ia, ib);
}

namespace {

const json& require(const json& obj, const char* key, const std::string& ctx) {
    auto it = obj.find(key);
    if (it == obj.end()) input_error(ctx + ": missing key '" + key + "'");
    return *it;
}

std::string get_string(const json& obj, const char* key, const std::string& ctx) {
    const auto& v = require(obj, key, ctx);
    if (!v.is_string()) input_error(ctx + ": key '" + key + "' must be a string");
    return v.get<std::string>();
}

bool get_bool(const json& obj, const char* key, const std::string& ctx) {
    const auto& v = require(obj, key, ctx);
    if (!v.is_boolean()) input_error(ctx + ": key '" + key + "' must be a boolean");
    return v.get<bool>();
}

std::vector<std::string> get_string_array(const json& obj, const char* key, const std::string& ctx) {
    const auto& v = require(obj, key, ctx);
    if (!v.is_array()) input_error(ctx + ": key '" + key + "' must be an array");
    std::vector<std::string> out;
    out.reserve(v.size());
    for (const auto& e : v) {
        if (!e.is_string()) input_error(ctx + ": key '" + key + "' must contain strings");
        out.push_back(e.get<std::string>());
    }
    return out;
}

}  // namespace

CodeModel parse_code_model(const std::string& text, const std::string& origin) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        input_error(origin + ": JSON parse error: " + e.what());
    }
    if (!doc.is_object()) input_error(origin + ": top level must be an object");

    std::vector<TypeDecl> types;
    std::vector<MethodDecl> methods;
    std::vector<FieldDecl> fields;
    std::vector<InvocationSite> invocations;

    for (const auto& jt : require(doc, "types", origin)) {
        TypeDecl t;
        t.id = get_string(jt, "id", origin + " types");
        t.name = get_string(jt, "name", origin + " types");
        auto kind = get_string(jt, "kind", origin + " type " + t.id);
        if (kind == "class") t.kind = TypeKind::Class;
        else if (kind == "interface") t.kind = TypeKind::Interface;
        else input_error(origin + " type " + t.id + ": kind must be 'class' or 'interface'");
        t.supertype_ids = get_string_array(jt, "supertype_ids", origin + " type " + t.id);
        t.is_library_root = get_bool(jt, "is_library_root", origin + " type " + t.id);
        types.push_back(std::move(t));
    }
    for (const auto& jm : require(doc, "methods", origin)) {
        MethodDecl m;
        m.id = get_string(jm, "id", origin + " methods");
        m.name = get_string(jm, "name", origin + " methods");
        m.declaring_type = get_string(jm, "declaring_type", origin + " method " + m.id);
        m.is_constructor = get_bool(jm, "is_constructor", origin + " method " + m.id);
        m.is_static = get_bool(jm, "is_static", origin + " method " + m.id);
        m.overrides = get_string_array(jm, "overrides", origin + " method " + m.id);
        methods.push_back(std::move(m));
    }
    for (const auto& jf : require(doc, "fields", origin)) {
        FieldDecl f;
        f.id = get_string(jf, "id", origin + " fields");
        f.name = get_string(jf, "name", origin + " fields");
        f.declaring_type = get_string(jf, "declaring_type", origin + " field " + f.id);
        f.declared_type = get_string(jf, "declared_type", origin + " field " + f.id);
        f.is_collection = get_bool(jf, "is_collection", origin + " field " + f.id);
        f.is_static = get_bool(jf, "is_static", origin + " field " + f.id);
        fields.push_back(std::move(f));
    }
    for (const auto& ji : require(doc, "invocations", origin)) {
        InvocationSite s;
        s.caller_method = get_string(ji, "caller_method", origin + " invocations");
        s.callee_method = get_string(ji, "callee_method", origin + " invocations");
        auto rk = get_string(ji, "receiver_kind", origin + " invocations");
        if (rk == "this_or_super") s.receiver_kind = ReceiverKind::ThisOrSuper;
        else if (rk == "other") s.receiver_kind = ReceiverKind::Other;
        else input_error(origin + " invocations: receiver_kind must be 'this_or_super' or 'other'");
        invocations.push_back(std::move(s));
    }

    return CodeModel(std::move(types), std::move(methods), std::move(fields), std::move(invocations));
}

CodeModel load_code_model(const std::string& path) {
    return parse_code_model(read_file(path), path);
}

std::string serialize_code_model(const CodeModel& model) {
    json doc;
    auto& jtypes = doc["types"] = json::array();
    for (const auto& t : model.types()) {
        jtypes.push_back({{"id", t.id},
                          {"name", t.name},
                          {"kind", t.kind == TypeKind::Class ? "class" : "interface"},
                          {"supertype_ids", t.supertype_ids},
                          {"is_library_root", t.is_library_root}});
    }
    auto& jmethods = doc["methods"] = json::array();
    for (const auto& m : model.methods()) {
        jmethods.push_back({{"id", m.id},
                            {"name", m.name},
                            {"declaring_type", m.declaring_type},
                            {"is_constructor", m.is_constructor},
                            {"is_static", m.is_static},
                            {"overrides", m.overrides}});
    }
    auto& jfields = doc["fields"] = json::array();
    for (const auto& f : model.fields()) {
        jfields.push_back({{"id", f.id},
                           {"name", f.name},
                           {"declaring_type", f.declaring_type},
                           {"declared_type", f.declared_type},
                           {"is_collection", f.is_collection},
                           {"is_static", f.is_static}});
    }
    auto& jinv = doc["invocations"] = json::array();
    for (const auto& s : model.invocations()) {
        jinv.push_back({{"caller_method", s.caller_method},
                        {"callee_method", s.callee_method},
                        {"receiver_kind", s.receiver_kind == ReceiverKind::ThisOrSuper ? "this_or_super" : "other"}});
    }
    return doc.dump(2) + "\n";
}

void save_code_model(const CodeModel& model, const std::string& path) {
    write_file(path, serialize_code_model(model));
}

}  // namespace clens
