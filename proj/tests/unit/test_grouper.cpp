#include "clens/grouper.hpp"

#include "support/fixtures.hpp"

#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <set>

using namespace clens;

namespace {

std::set<std::set<std::string>> member_sets(const Trace& trace, const GroupingResult& result) {
    std::set<std::set<std::string>> out;
    for (const auto& g : result.groups) {
        std::set<std::string> ids;
        for (auto m : g.members) ids.insert(trace.object_at(m).id);
        out.insert(std::move(ids));
    }
    return out;
}

}  // namespace

TEST_CASE("file-system composite grouping") {
    auto model = testing::fig2_model();
    auto trace = load_trace_text(testing::fig2_trace_text(), "mem");
    auto detection = detect(model);

    SUBCASE("MP gathers the chain and excludes the delegate") {
        auto result = group_objects(trace, model, detection, GroupingMode::MP);
        CHECK(member_sets(trace, result) == std::set<std::set<std::string>>{{"d1", "d2", "f1", "f2"}});
    }
    SUBCASE("MP+D absorbs the delegate") {
        auto result = group_objects(trace, model, detection, GroupingMode::MPD);
        CHECK(member_sets(trace, result) == std::set<std::set<std::string>>{{"d1", "d2", "f1", "f2", "b"}});
    }
    SUBCASE("every MP recursive group has a superset MPD counterpart") {
        auto mp = group_objects(trace, model, detection, GroupingMode::MP);
        auto mpd = group_objects(trace, model, detection, GroupingMode::MPD);
        for (const auto& g : mp.groups) {
            bool covered = false;
            for (const auto& h : mpd.groups) {
                if (h.pattern == g.pattern && h.template_object == g.template_object)
                    covered = std::includes(h.members.begin(), h.members.end(), g.members.begin(),
                                            g.members.end());
            }
            CHECK(covered);
        }
    }
}

TEST_CASE("observer activations unify into one group per template object") {
    auto model = testing::observer_model();
    auto trace = load_trace_text(testing::observer_trace_text(), "mem");
    auto detection = detect(model);

    SUBCASE("MP keeps the directly notified views") {
        auto result = group_objects(trace, model, detection, GroupingMode::MP);
        CHECK(member_sets(trace, result) == std::set<std::set<std::string>>{{"v1", "v2", "v3"}});
    }
    SUBCASE("MP+D pulls in the helper called from a view") {
        auto result = group_objects(trace, model, detection, GroupingMode::MPD);
        CHECK(member_sets(trace, result) == std::set<std::set<std::string>>{{"v1", "v2", "v3", "h1"}});
    }
}

TEST_CASE("hook-named call from a different sender stays out in MP") {
    auto model = testing::observer_model();
    auto trace = load_trace_text(
        "O m1 Model\nO v1 TextView\nO v2 TextView\n"
        "E 1 t1 Model#notifyPropertyChanged m1\n"
        "E 2 t1 TextView#onPropertyChanged v1\n"
        "E 3 t1 TextView#onPropertyChanged v2\n"  // sent by v1, not the model
        "X 4 t1 TextView#onPropertyChanged v2\n"
        "X 5 t1 TextView#onPropertyChanged v1\n"
        "X 6 t1 Model#notifyPropertyChanged m1\n",
        "mem");
    auto detection = detect(model);
    auto mp = group_objects(trace, model, detection, GroupingMode::MP);
    CHECK(member_sets(trace, mp) == std::set<std::set<std::string>>{{"v1"}});
    auto mpd = group_objects(trace, model, detection, GroupingMode::MPD);
    CHECK(member_sets(trace, mpd) == std::set<std::set<std::string>>{{"v1", "v2"}});
}

TEST_CASE("template activation with no hook calls produces no group") {
    auto model = testing::observer_model();
    auto trace = load_trace_text(
        "O m1 Model\n"
        "E 1 t1 Model#notifyPropertyChanged m1\n"
        "X 2 t1 Model#notifyPropertyChanged m1\n",
        "mem");
    auto result = group_objects(trace, model, detect(model), GroupingMode::MP);
    CHECK(result.groups.empty());
}

namespace {

CodeModel chain_model() {
    // T extends Base with the op hook family; A is unrelated with report.
    std::vector<TypeDecl> types{
        {"Base", "Base", TypeKind::Class, {}, false},
        {"T", "T", TypeKind::Class, {"Base"}, false},
        {"A", "A", TypeKind::Class, {}, false},
    };
    std::vector<MethodDecl> methods{
        {"Base#op", "op", "Base", false, false, {}},
        {"T#op", "op", "T", false, false, {"Base#op"}},
        {"T#wrap", "wrap", "T", false, false, {}},
        {"T#computeAll", "computeAll", "T", false, false, {}},
        {"A#report", "report", "A", false, false, {}},
    };
    std::vector<FieldDecl> fields{{"T.next", "next", "T", "Base", false, false}};
    std::vector<InvocationSite> sites{
        {"T#op", "Base#op", ReceiverKind::Other},
        {"T#computeAll", "Base#op", ReceiverKind::Other},
        {"T#op", "A#report", ReceiverKind::Other},
    };
    return CodeModel(std::move(types), std::move(methods), std::move(fields), std::move(sites));
}

}  // namespace

TEST_CASE("a non-chain, non-self call cuts the chain below it") {
    auto model = chain_model();
    // t1o -> n2, then an A#report interruption whose subtree re-enters the
    // hook family via x, then a clean chain call n3.
    auto trace = load_trace_text(
        "O t1o T\nO n2 T\nO a A\nO x T\nO n3 T\n"
        "E 1 t1 T#op t1o\n"
        "E 2 t1 T#op n2\n"
        "X 3 t1 T#op n2\n"
        "E 4 t1 A#report a\n"
        "E 5 t1 T#op x\n"
        "X 6 t1 T#op x\n"
        "X 7 t1 A#report a\n"
        "E 8 t1 T#op n3\n"
        "X 9 t1 T#op n3\n"
        "X 10 t1 T#op t1o\n",
        "mem");
    auto detection = detect(model);
    REQUIRE(detection.patterns.size() == 2);  // templated on T#op and on T#computeAll

    PatternIndex index(trace, model, detection);
    std::int32_t op_pattern = -1;
    for (std::size_t i = 0; i < detection.patterns.size(); ++i)
        if (model.method_at(detection.patterns[i].template_method).id == "T#op")
            op_pattern = static_cast<std::int32_t>(i);
    REQUIRE(op_pattern >= 0);

    auto seed = seed_recursive(trace, index, 0, op_pattern, GroupingMode::MP);
    std::set<std::string> ids;
    for (auto m : seed.members) ids.insert(trace.object_at(m).id);
    CHECK(ids == std::set<std::string>{"t1o", "n2", "n3"});  // a and x stay out

    // The activation of x seeds its own (trivially unbroken) group.
    auto result = group_objects(trace, model, detection, GroupingMode::MP);
    CHECK(member_sets(trace, result) == std::set<std::set<std::string>>{{"t1o", "n2", "n3"}, {"x"}});
}

TEST_CASE("a differently named template excludes the first receiver") {
    auto model = chain_model();
    auto trace = load_trace_text(
        "O c T\nO n1 T\nO n2 T\n"
        "E 1 t1 T#computeAll c\n"
        "E 2 t1 T#op n1\n"
        "E 3 t1 T#op n2\n"
        "X 4 t1 T#op n2\n"
        "X 5 t1 T#op n1\n"
        "X 6 t1 T#computeAll c\n",
        "mem");
    auto detection = detect(model);
    auto result = group_objects(trace, model, detection, GroupingMode::MP);
    // The computeAll seed excludes c; the inner T#op activation's own seed
    // {n1, n2} collapses into the same member set.
    CHECK(member_sets(trace, result) == std::set<std::set<std::string>>{{"n1", "n2"}});
}

TEST_CASE("a self-call template entry rewinds to the enclosing frame") {
    auto model = chain_model();
    auto trace = load_trace_text(
        "O o1 T\nO n2 T\n"
        "E 1 t1 T#wrap o1\n"
        "E 2 t1 T#op o1\n"  // self-call into the template method
        "E 3 t1 T#op n2\n"
        "X 4 t1 T#op n2\n"
        "X 5 t1 T#op o1\n"
        "X 6 t1 T#wrap o1\n",
        "mem");
    CHECK(rewind_self_calls(trace, 1) == 0);
    auto detection = detect(model);
    auto result = group_objects(trace, model, detection, GroupingMode::MP);
    CHECK(member_sets(trace, result) == std::set<std::set<std::string>>{{"o1", "n2"}});
    for (const auto& g : result.groups)
        CHECK(trace.object_at(g.template_object).id == "o1");
}

TEST_CASE("events on other threads never contribute members") {
    auto model = chain_model();
    auto trace = load_trace_text(
        "O r1 T\nO r2 T\nO c1 T\nO c2 T\n"
        "E 1 t1 T#op r1\n"
        "E 2 t2 T#op r2\n"
        "E 3 t1 T#op c1\n"
        "X 4 t1 T#op c1\n"
        "E 5 t2 T#op c2\n"
        "X 6 t2 T#op c2\n"
        "X 7 t1 T#op r1\n"
        "X 8 t2 T#op r2\n",
        "mem");
    auto result = group_objects(trace, model, detect(model), GroupingMode::MP);
    CHECK(member_sets(trace, result) == std::set<std::set<std::string>>{{"r1", "c1"}, {"r2", "c2"}});
}

TEST_CASE("overloads are equated by name and declaring class") {
    // Two distinct override families share the name op; a chain that mixes
    // them stays a chain because checks ignore the signature-distinct ids.
    std::vector<TypeDecl> types{
        {"Base", "Base", TypeKind::Class, {}, false},
        {"T", "T", TypeKind::Class, {"Base"}, false},
    };
    std::vector<MethodDecl> methods{
        {"Base#op(int)", "op", "Base", false, false, {}},
        {"T#op(int)", "op", "T", false, false, {"Base#op(int)"}},
        {"Base#op(str)", "op", "Base", false, false, {}},
        {"T#op(str)", "op", "T", false, false, {"Base#op(str)"}},
    };
    std::vector<InvocationSite> sites{{"T#op(int)", "Base#op(int)", ReceiverKind::Other}};
    CodeModel model(std::move(types), std::move(methods), {}, std::move(sites));
    auto trace = load_trace_text(
        "O r T\nO c T\nO d T\n"
        "E 1 t1 T#op(int) r\n"
        "E 2 t1 T#op(str) c\n"  // the other overload keeps the chain intact
        "E 3 t1 T#op(int) d\n"
        "X 4 t1 T#op(int) d\n"
        "X 5 t1 T#op(str) c\n"
        "X 6 t1 T#op(int) r\n",
        "mem");
    auto result = group_objects(trace, model, detect(model), GroupingMode::MP);
    CHECK(member_sets(trace, result) == std::set<std::set<std::string>>{{"r", "c", "d"}});
}

TEST_CASE("same-pattern strict subsets are eliminated, soft clusters persist") {
    auto model = testing::observer_model();
    // One model object notifies v1,v2; another notifies v1 only.
    auto trace = load_trace_text(
        "O m1 Model\nO m2 Model\nO v1 TextView\nO v2 TextView\n"
        "E 1 t1 Model#notifyPropertyChanged m1\n"
        "E 2 t1 TextView#onPropertyChanged v1\n"
        "X 3 t1 TextView#onPropertyChanged v1\n"
        "E 4 t1 TextView#onPropertyChanged v2\n"
        "X 5 t1 TextView#onPropertyChanged v2\n"
        "X 6 t1 Model#notifyPropertyChanged m1\n"
        "E 7 t1 Model#notifyPropertyChanged m2\n"
        "E 8 t1 TextView#onPropertyChanged v1\n"
        "X 9 t1 TextView#onPropertyChanged v1\n"
        "X 10 t1 Model#notifyPropertyChanged m2\n",
        "mem");
    auto result = group_objects(trace, model, detect(model), GroupingMode::MP);
    CHECK(member_sets(trace, result) == std::set<std::set<std::string>>{{"v1", "v2"}});

    // No surviving group is a strict subset of a same-pattern peer.
    for (const auto& a : result.groups)
        for (const auto& b : result.groups) {
            if (&a == &b || a.pattern != b.pattern) continue;
            bool strict_subset = a.members.size() < b.members.size() &&
                                 std::includes(b.members.begin(), b.members.end(), a.members.begin(),
                                               a.members.end());
            CHECK_FALSE(strict_subset);
        }
}

TEST_CASE("an object participating in two patterns lands in one group per pattern") {
    // x is a hook object of the f family and a listener of the g family.
    std::vector<TypeDecl> types{
        {"BaseF", "BaseF", TypeKind::Class, {}, false},
        {"TF", "TF", TypeKind::Class, {"BaseF"}, false},
        {"Subject", "Subject", TypeKind::Class, {}, false},
        {"BaseG", "BaseG", TypeKind::Class, {}, false},
    };
    std::vector<MethodDecl> methods{
        {"BaseF#f", "f", "BaseF", false, false, {}},
        {"TF#f", "f", "TF", false, false, {"BaseF#f"}},
        {"BaseG#g", "g", "BaseG", false, false, {}},
        {"TF#g", "g", "TF", false, false, {"BaseG#g"}},
        {"Subject#notify", "notify", "Subject", false, false, {}},
    };
    std::vector<TypeDecl>& ts = types;
    ts[1].supertype_ids.push_back("BaseG");  // TF extends BaseF and implements BaseG
    std::vector<InvocationSite> sites{
        {"TF#f", "BaseF#f", ReceiverKind::Other},
        {"Subject#notify", "BaseG#g", ReceiverKind::Other},
    };
    CodeModel model(std::move(types), std::move(methods), {}, std::move(sites));
    auto trace = load_trace_text(
        "O r TF\nO x TF\nO s Subject\n"
        "E 1 t1 TF#f r\n"
        "E 2 t1 TF#f x\n"
        "X 3 t1 TF#f x\n"
        "X 4 t1 TF#f r\n"
        "E 5 t1 Subject#notify s\n"
        "E 6 t1 TF#g x\n"
        "X 7 t1 TF#g x\n"
        "X 8 t1 Subject#notify s\n",
        "mem");
    auto detection = detect(model);
    REQUIRE(detection.patterns.size() == 2);
    auto result = group_objects(trace, model, detection, GroupingMode::MP);
    CHECK(member_sets(trace, result) == std::set<std::set<std::string>>{{"r", "x"}, {"x"}});
    // {x} survives despite being a subset of {r, x}: the patterns differ.
    CHECK(result.groups.size() == 2);
    CHECK(result.groups[0].pattern != result.groups[1].pattern);
}

TEST_CASE("grouping output is deterministic across reruns and worker counts") {
    auto model = testing::fig2_model();
    auto trace = load_trace_text(testing::fig2_trace_text(), "mem");
    auto detection = detect(model);

    setenv("CONCEPT_LENS_THREADS", "1", 1);
    auto one = serialize_groups(trace, group_objects(trace, model, detection, GroupingMode::MPD));
    setenv("CONCEPT_LENS_THREADS", "8", 1);
    auto eight = serialize_groups(trace, group_objects(trace, model, detection, GroupingMode::MPD));
    unsetenv("CONCEPT_LENS_THREADS");
    auto again = serialize_groups(trace, group_objects(trace, model, detection, GroupingMode::MPD));
    CHECK(one == eight);
    CHECK(one == again);
}

TEST_CASE("group file round-trips") {
    auto model = testing::fig2_model();
    auto trace = load_trace_text(testing::fig2_trace_text(), "mem");
    auto detection = detect(model);
    auto result = group_objects(trace, model, detection, GroupingMode::MP);
    auto text = serialize_groups(trace, result);
    auto loaded = parse_groups(trace, detection, text, "mem");
    CHECK(member_sets(trace, loaded) == member_sets(trace, result));
    CHECK(serialize_groups(trace, loaded) == text);
}
