#pragma once

#include "clens/code_model.hpp"
#include "clens/trace_model.hpp"

#include <string>
#include <vector>

namespace clens::testing {

/// The file-system example: a composite of Dir/File under FileBase, where a
/// File delegates disk-usage computation to a B object that calls back into
/// the structure. B's callback site is deliberately absent from the static
/// model (its body is treated as unanalyzed code), so the only detected
/// pattern is the composite itself.
inline CodeModel fig2_model() {
    std::vector<TypeDecl> types{
        {"FileBase", "FileBase", TypeKind::Class, {}, false},
        {"Dir", "Dir", TypeKind::Class, {"FileBase"}, false},
        {"File", "File", TypeKind::Class, {"FileBase"}, false},
        {"B", "B", TypeKind::Class, {}, false},
    };
    std::vector<MethodDecl> methods{
        {"FileBase#getDiskUsage", "getDiskUsage", "FileBase", false, false, {}},
        {"Dir#getDiskUsage", "getDiskUsage", "Dir", false, false, {"FileBase#getDiskUsage"}},
        {"File#getDiskUsage", "getDiskUsage", "File", false, false, {"FileBase#getDiskUsage"}},
        {"B#getDiskUsage", "getDiskUsage", "B", false, false, {}},
    };
    std::vector<FieldDecl> fields{
        {"Dir.children", "children", "Dir", "FileBase", true, false},
        {"File.delegate", "delegate", "File", "B", false, false},
    };
    std::vector<InvocationSite> sites{
        {"Dir#getDiskUsage", "FileBase#getDiskUsage", ReceiverKind::Other},
        {"File#getDiskUsage", "B#getDiskUsage", ReceiverKind::Other},
    };
    return CodeModel(std::move(types), std::move(methods), std::move(fields), std::move(sites));
}

/// One getDiskUsage cascade: d1 -> {d2 -> f2, f1 -> b -> f2}, preceded by
/// config touches and the reference stores that wire the tree.
inline std::string fig2_trace_text() {
    return "O d1 Dir\n"
           "O d2 Dir\n"
           "O f1 File\n"
           "O f2 File\n"
           "O b B\n"
           "W 1 t1 d1 cfg -\n"
           "R 2 t1 d1 cfg\n"
           "W 3 t1 d2 cfg -\n"
           "R 4 t1 d2 cfg\n"
           "W 5 t1 f1 cfg -\n"
           "R 6 t1 f1 cfg\n"
           "W 7 t1 f2 cfg -\n"
           "R 8 t1 f2 cfg\n"
           "W 9 t1 b cfg -\n"
           "R 10 t1 b cfg\n"
           "W 11 t1 d1 children d2\n"
           "W 12 t1 d1 children f1\n"
           "W 13 t1 d2 children f2\n"
           "W 14 t1 f1 delegate b\n"
           "E 15 t1 Dir#getDiskUsage d1\n"
           "E 16 t1 Dir#getDiskUsage d2\n"
           "E 17 t1 File#getDiskUsage f2\n"
           "X 18 t1 File#getDiskUsage f2\n"
           "X 19 t1 Dir#getDiskUsage d2\n"
           "E 20 t1 File#getDiskUsage f1\n"
           "E 21 t1 B#getDiskUsage b\n"
           "E 22 t1 File#getDiskUsage f2\n"
           "X 23 t1 File#getDiskUsage f2\n"
           "X 24 t1 B#getDiskUsage b\n"
           "X 25 t1 File#getDiskUsage f1\n"
           "X 26 t1 Dir#getDiskUsage d1\n";
}

/// Observer shape: one model object notifying views, for connection-pattern
/// tests. Views v1..v3; two activations notify {v1,v2} then {v2,v3}.
inline CodeModel observer_model() {
    std::vector<TypeDecl> types{
        {"Model", "Model", TypeKind::Class, {}, false},
        {"View", "View", TypeKind::Interface, {}, false},
        {"TextView", "TextView", TypeKind::Class, {"View"}, false},
        {"Helper", "Helper", TypeKind::Class, {}, false},
    };
    std::vector<MethodDecl> methods{
        {"Model#notifyPropertyChanged", "notifyPropertyChanged", "Model", false, false, {}},
        {"View#onPropertyChanged", "onPropertyChanged", "View", false, false, {}},
        {"TextView#onPropertyChanged", "onPropertyChanged", "TextView", false, false, {"View#onPropertyChanged"}},
        {"Helper#onPropertyChanged", "onPropertyChanged", "Helper", false, false, {}},
    };
    std::vector<FieldDecl> fields{
        {"Model.listeners", "listeners", "Model", "View", true, false},
    };
    std::vector<InvocationSite> sites{
        {"Model#notifyPropertyChanged", "View#onPropertyChanged", ReceiverKind::Other},
    };
    return CodeModel(std::move(types), std::move(methods), std::move(fields), std::move(sites));
}

inline std::string observer_trace_text() {
    return "O m1 Model\n"
           "O v1 TextView\n"
           "O v2 TextView\n"
           "O v3 TextView\n"
           "O h1 Helper\n"
           "E 1 t1 Model#notifyPropertyChanged m1\n"
           "E 2 t1 TextView#onPropertyChanged v1\n"
           "X 3 t1 TextView#onPropertyChanged v1\n"
           "E 4 t1 TextView#onPropertyChanged v2\n"
           "E 5 t1 Helper#onPropertyChanged h1\n"
           "X 6 t1 Helper#onPropertyChanged h1\n"
           "X 7 t1 TextView#onPropertyChanged v2\n"
           "X 8 t1 Model#notifyPropertyChanged m1\n"
           "E 9 t1 Model#notifyPropertyChanged m1\n"
           "E 10 t1 TextView#onPropertyChanged v2\n"
           "X 11 t1 TextView#onPropertyChanged v2\n"
           "E 12 t1 TextView#onPropertyChanged v3\n"
           "X 13 t1 TextView#onPropertyChanged v3\n"
           "X 14 t1 Model#notifyPropertyChanged m1\n";
}

}  // namespace clens::testing
