#pragma once

#include "clens/common.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace clens {

enum class TypeKind : std::uint8_t { Class, Interface };
enum class ReceiverKind : std::uint8_t { ThisOrSuper, Other };

struct TypeDecl {
    std::string id;
    std::string name;
    TypeKind kind = TypeKind::Class;
    std::vector<std::string> supertype_ids;
    bool is_library_root = false;
};

struct MethodDecl {
    std::string id;
    std::string name;
    std::string declaring_type;
    bool is_constructor = false;
    bool is_static = false;
    // Direct and transitive supertype overrides, as produced by the model
    // extractor. Detection only relies on the listed edges.
    std::vector<std::string> overrides;
};

struct FieldDecl {
    std::string id;
    std::string name;
    std::string declaring_type;
    // Either a type id from this model or an external type name.
    std::string declared_type;
    bool is_collection = false;
    bool is_static = false;
};

struct InvocationSite {
    std::string caller_method;
    std::string callee_method;
    ReceiverKind receiver_kind = ReceiverKind::Other;
};

/// Static facts about a subject program: the analyzer-facing replacement for
/// its source code. Immutable after load; safe to share across threads.
class CodeModel {
public:
    CodeModel() = default;
    CodeModel(std::vector<TypeDecl> types, std::vector<MethodDecl> methods,
              std::vector<FieldDecl> fields, std::vector<InvocationSite> invocations);

    [[nodiscard]] const std::vector<TypeDecl>& types() const { return types_; }
    [[nodiscard]] const std::vector<MethodDecl>& methods() const { return methods_; }
    [[nodiscard]] const std::vector<FieldDecl>& fields() const { return fields_; }
    [[nodiscard]] const std::vector<InvocationSite>& invocations() const { return invocations_; }

    [[nodiscard]] std::int32_t type_index(std::string_view id) const;    // -1 if unknown
    [[nodiscard]] std::int32_t method_index(std::string_view id) const;  // -1 if unknown

    [[nodiscard]] const TypeDecl& type_at(std::int32_t idx) const { return types_.at(static_cast<std::size_t>(idx)); }
    [[nodiscard]] const MethodDecl& method_at(std::int32_t idx) const { return methods_.at(static_cast<std::size_t>(idx)); }

    /// Index of the type declaring the given method.
    [[nodiscard]] std::int32_t declaring_type_of(std::int32_t method_idx) const;

    /// True iff `a` equals `b` or transitively extends/implements it.
    [[nodiscard]] bool subtype_of_idx(std::int32_t a, std::int32_t b) const;

private:
    void validate_and_index();

    std::vector<TypeDecl> types_;
    std::vector<MethodDecl> methods_;
    std::vector<FieldDecl> fields_;
    std::vector<InvocationSite> invocations_;

    std::unordered_map<std::string, std::int32_t> type_idx_;
    std::unordered_map<std::string, std::int32_t> method_idx_;
    std::vector<std::int32_t> method_decl_type_;
    // Per type: sorted indices of all supertypes including itself.
    std::vector<std::vector<std::int32_t>> ancestors_;
};

/// Loads and validates a code-model file (JSON; see docs/code_model.schema.json).
/// Throws InputError on parse failures or dangling id references.
CodeModel load_code_model(const std::string& path);
CodeModel parse_code_model(const std::string& text, const std::string& origin);

/// Serializes a model back to its file format. load(serialize(m)) == m.
std::string serialize_code_model(const CodeModel& model);
void save_code_model(const CodeModel& model, const std::string& path);

/// True iff type `a` is `b` or transitively extends/implements `b`.
/// Throws InputError if either id is unknown.
bool subtype_of(const CodeModel& model, std::string_view a, std::string_view b);

}  // namespace clens
