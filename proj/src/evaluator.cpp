#include "clens/evaluator.hpp"

#include <json.hpp>

#include <algorithm>

namespace clens {

using nlohmann::json;

EvaluationReport evaluate(const std::vector<std::vector<std::string>>& type_sets,
                          const GroundTruth& ground_truth) {
    if (ground_truth.concepts.empty()) input_error("ground truth has no concepts");
    std::size_t n = 0;
    for (const auto& c : ground_truth.concepts) {
        if (c.types.empty()) input_error("ground-truth concept '" + c.name + "' has no types");
        n += c.types.size();
    }

    std::vector<std::vector<std::string>> ts;
    ts.reserve(type_sets.size());
    for (auto t : type_sets) {
        std::sort(t.begin(), t.end());
        t.erase(std::unique(t.begin(), t.end()), t.end());
        ts.push_back(std::move(t));
    }

    EvaluationReport report;
    report.lifeline_count = static_cast<int>(ts.size());
    for (const auto& c : ground_truth.concepts) {
        auto ref = c.types;
        std::sort(ref.begin(), ref.end());
        ref.erase(std::unique(ref.begin(), ref.end()), ref.end());

        ConceptMatch match;
        match.concept_name = c.name;
        double best_recall = 0.0;
        double best_f = 0.0;
        for (const auto& t : ts) {
            if (t.empty()) continue;
            std::vector<std::string> inter;
            std::set_intersection(ref.begin(), ref.end(), t.begin(), t.end(), std::back_inserter(inter));
            double recall = static_cast<double>(inter.size()) / static_cast<double>(ref.size());
            double precision = static_cast<double>(inter.size()) / static_cast<double>(t.size());
            double f = recall + precision == 0.0 ? 0.0 : 2.0 * recall * precision / (recall + precision);
            best_recall = std::max(best_recall, recall);
            if (f > best_f) {
                best_f = f;
                match.matched_types = t;
                match.recall = recall;
                match.precision = precision;
                match.f = f;
            }
        }
        const double weight = static_cast<double>(ref.size()) / static_cast<double>(n);
        report.f += weight * best_f;
        report.recall += weight * best_recall;
        report.per_concept.push_back(std::move(match));
    }
    return report;
}

std::vector<SweepRow> sweep(const Trace& trace, const PatternIndex& index,
                            const std::vector<ObjectProfile>& profiles, const Ranking& ranking,
                            const GroupingResult& groups, const GroundTruth& ground_truth,
                            std::vector<double> thresholds) {
    (void)index;  // lifeline counting happens before any message routing
    std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

    std::vector<SweepRow> rows;
    rows.reserve(thresholds.size());
    for (double it : thresholds) {
        auto selected = to_class_level(trace, select_important_groups(profiles, ranking, it, groups));
        std::vector<std::vector<std::string>> ts;
        ts.reserve(selected.size());
        for (const auto& g : selected) ts.push_back(type_name_set(trace, g.members));
        SweepRow row{it, static_cast<int>(ts.size()), 0.0, 0.0};
        if (!ts.empty()) {
            auto report = evaluate(ts, ground_truth);
            row.f = report.f;
            row.recall = report.recall;
        }
        rows.push_back(row);
    }
    return rows;
}

std::string serialize_sweep_csv(const std::vector<SweepRow>& rows) {
    std::string out = "I_t,lifeline_count,F,Recall\n";
    for (const auto& r : rows) {
        out += format_double(r.importance_threshold);
        out += ',';
        out += std::to_string(r.lifeline_count);
        out += ',';
        out += format_double(r.f);
        out += ',';
        out += format_double(r.recall);
        out += '\n';
    }
    return out;
}

std::string serialize_report(const EvaluationReport& report) {
    json doc;
    doc["f"] = report.f;
    doc["recall"] = report.recall;
    doc["lifeline_count"] = report.lifeline_count;
    auto& per = doc["per_concept"] = json::array();
    for (const auto& m : report.per_concept) {
        per.push_back({{"concept", m.concept_name},
                       {"matched_types", m.matched_types},
                       {"recall", m.recall},
                       {"precision", m.precision},
                       {"f", m.f}});
    }
    return doc.dump(2) + "\n";
}

GroundTruth parse_ground_truth(const std::string& text, const std::string& origin) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        input_error(origin + ": JSON parse error: " + e.what());
    }
    if (!doc.contains("concepts") || !doc["concepts"].is_array())
        input_error(origin + ": ground truth needs a 'concepts' array");
    GroundTruth gt;
    for (const auto& jc : doc["concepts"]) {
        GroundTruth::Concept c;
        c.name = jc.at("concept_name").get<std::string>();
        for (const auto& t : jc.at("types")) c.types.push_back(t.get<std::string>());
        if (c.types.empty()) input_error(origin + ": concept '" + c.name + "' has no types");
        gt.concepts.push_back(std::move(c));
    }
    if (gt.concepts.empty()) input_error(origin + ": ground truth has no concepts");
    return gt;
}

std::string serialize_ground_truth(const GroundTruth& gt) {
    json doc;
    auto& jconcepts = doc["concepts"] = json::array();
    for (const auto& c : gt.concepts)
        jconcepts.push_back({{"concept_name", c.name}, {"types", c.types}});
    return doc.dump(2) + "\n";
}

GroundTruth load_ground_truth(const std::string& path) {
    return parse_ground_truth(read_file(path), path);
}

}  // namespace clens
