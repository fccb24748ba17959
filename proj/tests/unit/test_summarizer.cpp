#include "clens/summarizer.hpp"

#include "support/fixtures.hpp"

#include <doctest.h>

#include <set>

using namespace clens;

namespace {

struct FileSystemPipeline {
    CodeModel model = testing::fig2_model();
    Trace trace = load_trace_text(testing::fig2_trace_text(), "mem");
    DetectionResult detection = detect(model);
    PatternIndex index{trace, model, detection};
    std::vector<ObjectProfile> profiles;
    Ranking ranking;

    explicit FileSystemPipeline() {
        profiles = build_profiles(trace);
        compute_importance(profiles);
        mark_temporaries(profiles, RankingConfig{});
        ranking = build_ranking(profiles, RankingConfig{});
    }

    GroupingResult groups(GroupingMode mode) const {
        return group_objects(trace, model, detection, mode);
    }
};

std::string golden(const std::string& name) { return read_file(std::string(CLENS_GOLDEN_DIR) + "/" + name); }

}  // namespace

TEST_CASE("file-system diagram matches the byte-exact golden") {
    FileSystemPipeline p;
    DiagramOptions options;
    options.importance_threshold = 0.5;
    options.level = DiagramLevel::Class;
    options.include_external = true;
    auto diagram = summarize(p.trace, p.index, p.profiles, p.ranking, p.groups(GroupingMode::MP), options);

    REQUIRE(diagram.lifelines.size() == 2);
    CHECK(diagram.lifelines[0].group_id == "grp1");
    CHECK(diagram.lifelines[0].group_type_name == "Dir");
    CHECK(diagram.lifelines[1].group_id == "b");
    CHECK(diagram.lifelines[1].group_type_name == "B");

    REQUIRE(diagram.messages.size() == 3);
    CHECK(diagram.messages[0].from == kExternalLifeline);
    CHECK(diagram.messages[0].to == 0);
    CHECK(diagram.messages[1].from == 0);
    CHECK(diagram.messages[1].to == 1);
    CHECK(diagram.messages[2].from == 1);
    CHECK(diagram.messages[2].to == 0);
    for (const auto& m : diagram.messages) CHECK(m.label == "getDiskUsage()");

    CHECK(render_plantuml(diagram) == golden("fig3.puml"));
}

TEST_CASE("MP+D absorbs the delegate into a single lifeline") {
    FileSystemPipeline p;
    DiagramOptions options;
    options.importance_threshold = 0.5;
    options.include_external = true;
    auto diagram = summarize(p.trace, p.index, p.profiles, p.ranking, p.groups(GroupingMode::MPD), options);
    REQUIRE(diagram.lifelines.size() == 1);
    CHECK(type_name_set(p.trace, diagram.lifelines[0].members) ==
          std::vector<std::string>{"B", "Dir", "File"});
    REQUIRE(diagram.messages.size() == 1);  // only the external entry remains
    CHECK(diagram.messages[0].from == kExternalLifeline);

    // With external callers hidden, a single displayed group has no messages.
    options.include_external = false;
    auto silent = summarize(p.trace, p.index, p.profiles, p.ranking, p.groups(GroupingMode::MPD), options);
    CHECK(silent.lifelines.size() == 1);
    CHECK(silent.messages.empty());
}

TEST_CASE("selection walks the ranking strictly above the threshold") {
    FileSystemPipeline p;
    auto groups = p.groups(GroupingMode::MP);

    SUBCASE("threshold above the maximum importance selects nothing") {
        auto selected = select_important_groups(p.profiles, p.ranking, 100.0, groups);
        CHECK(selected.empty());
        DiagramOptions options;
        options.importance_threshold = 100.0;
        auto diagram = summarize(p.trace, p.index, p.profiles, p.ranking, groups, options);
        CHECK(diagram.lifelines.empty());
        CHECK(diagram.messages.empty());
    }
    SUBCASE("objects at exactly the threshold are not selected") {
        // b has importance 1.0; the walk requires strictly greater.
        auto selected = select_important_groups(p.profiles, p.ranking, 1.0, groups);
        REQUIRE(selected.size() == 1);
        CHECK(selected[0].from_pattern);
    }
    SUBCASE("ungrouped important objects get fresh singletons") {
        auto selected = select_important_groups(p.profiles, p.ranking, 0.5, groups);
        REQUIRE(selected.size() == 2);
        bool saw_singleton = false;
        for (const auto& g : selected)
            if (!g.from_pattern) {
                CHECK(g.members.size() == 1);
                CHECK(p.trace.object_at(g.members[0]).id == "b");
                saw_singleton = true;
            }
        CHECK(saw_singleton);
    }
    SUBCASE("an object in several groups selects all of them") {
        GroupingResult two = groups;
        two.groups.push_back(two.groups.front());
        two.groups.back().pattern = 0;
        two.groups.back().members = {p.trace.object_handle("d1")};
        auto selected = select_important_groups(p.profiles, p.ranking, 0.5, two);
        CHECK(selected.size() == 3);  // both groups containing d1, plus b's singleton
    }
}

TEST_CASE("class-level conversion merges equal type-name sets") {
    FileSystemPipeline p;
    SelectedGroup a, b, c;
    a.members = {p.trace.object_handle("d1"), p.trace.object_handle("f1")};
    a.source_patterns = {0};
    a.from_pattern = true;
    b.members = {p.trace.object_handle("d2"), p.trace.object_handle("f2")};
    b.source_patterns = {0};
    b.from_pattern = true;
    c.members = {p.trace.object_handle("b")};

    SUBCASE("two groups with {Dir,File} types collapse") {
        auto merged = to_class_level(p.trace, {a, b, c});
        REQUIRE(merged.size() == 2);
        CHECK(merged[0].members.size() + merged[1].members.size() == 5);
    }
    SUBCASE("distinct type sets stay apart") {
        auto merged = to_class_level(p.trace, {a, c});
        CHECK(merged.size() == 2);
    }
}

TEST_CASE("routing prefers the pattern's own group and falls back by group id") {
    FileSystemPipeline p;
    auto groups = p.groups(GroupingMode::MP);
    auto selected = to_class_level(p.trace, select_important_groups(p.profiles, p.ranking, 0.5, groups));
    auto lifelines = assign_lifelines(p.trace, selected);
    REQUIRE(lifelines.size() == 2);

    // The first cascade entry is the pattern's template method on d1.
    auto entry_pos = p.trace.position_of_seq(15);
    REQUIRE(entry_pos >= 0);
    auto routed = route_message(p.trace, p.index, entry_pos, lifelines);
    REQUIRE(routed >= 0);
    CHECK(lifelines[static_cast<std::size_t>(routed)].group_id == "grp1");

    SUBCASE("non-pattern message to an object in two groups picks the smallest group id") {
        // Put b into a second artificial lifeline to force the tie-break.
        Lifeline extra;
        extra.group_id = "aaa";
        extra.members = {p.trace.object_handle("b")};
        auto with_extra = lifelines;
        with_extra.push_back(extra);
        auto b_entry = p.trace.position_of_seq(21);
        auto target = route_message(p.trace, p.index, b_entry, with_extra);
        CHECK(with_extra[static_cast<std::size_t>(target)].group_id == "aaa");
    }
}

TEST_CASE("external and return options") {
    FileSystemPipeline p;
    DiagramOptions options;
    options.importance_threshold = 0.5;

    SUBCASE("external callers are dropped by default") {
        auto diagram = summarize(p.trace, p.index, p.profiles, p.ranking, p.groups(GroupingMode::MP), options);
        REQUIRE(diagram.messages.size() == 2);  // grp->b and b->grp remain
        for (const auto& m : diagram.messages) CHECK(m.from != kExternalLifeline);
    }
    SUBCASE("returns mirror emitted calls when enabled") {
        options.include_external = true;
        options.with_returns = true;
        auto diagram = summarize(p.trace, p.index, p.profiles, p.ranking, p.groups(GroupingMode::MP), options);
        std::size_t calls = 0, returns = 0;
        for (const auto& m : diagram.messages)
            (m.kind == MessageKind::Call ? calls : returns)++;
        CHECK(calls == 3);
        CHECK(returns == 3);
        // Messages stay ordered by seq.
        for (std::size_t i = 1; i < diagram.messages.size(); ++i)
            CHECK(diagram.messages[i - 1].seq < diagram.messages[i].seq);
    }
}

TEST_CASE("instance level keeps groups unmerged") {
    FileSystemPipeline p;
    DiagramOptions options;
    options.importance_threshold = 0.5;
    options.level = DiagramLevel::Instance;
    options.include_external = true;
    auto diagram = summarize(p.trace, p.index, p.profiles, p.ranking, p.groups(GroupingMode::MP), options);
    REQUIRE(diagram.lifelines.size() == 2);
    CHECK(diagram.messages.size() == 3);
}

TEST_CASE("message endpoints always differ and count stays below entries") {
    FileSystemPipeline p;
    DiagramOptions options;
    options.include_external = true;
    auto diagram = summarize(p.trace, p.index, p.profiles, p.ranking, p.groups(GroupingMode::MP), options);
    std::size_t entries = 0;
    for (const auto& e : p.trace.events())
        if (e.kind == EventKind::Entry) ++entries;
    CHECK(diagram.messages.size() <= entries);
    for (const auto& m : diagram.messages) CHECK(m.from != m.to);
}

TEST_CASE("renderers are byte-stable across runs") {
    FileSystemPipeline p;
    DiagramOptions options;
    options.importance_threshold = 0.5;
    options.include_external = true;
    auto groups = p.groups(GroupingMode::MP);
    auto d1 = summarize(p.trace, p.index, p.profiles, p.ranking, groups, options);
    auto d2 = summarize(p.trace, p.index, p.profiles, p.ranking, groups, options);
    CHECK(render_plantuml(d1) == render_plantuml(d2));
    CHECK(render_mermaid(d1) == render_mermaid(d2));
    CHECK(render_json(p.trace, d1) == render_json(p.trace, d2));
    CHECK(render_mermaid(d1).find("sequenceDiagram") == 0);
    CHECK(render_json(p.trace, d1).find("\"lifelines\"") != std::string::npos);
}
