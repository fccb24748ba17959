#pragma once

#include "clens/summarizer.hpp"

#include <string>
#include <vector>

namespace clens {

/// Named concepts mapped to the type names implementing them.
struct GroundTruth {
    struct Concept {
        std::string name;
        std::vector<std::string> types;  // non-empty
    };
    std::vector<Concept> concepts;
};

struct ConceptMatch {
    std::string concept_name;
    std::vector<std::string> matched_types;  // best-matching group's type set
    double recall = 0.0;
    double precision = 0.0;
    double f = 0.0;
};

struct EvaluationReport {
    double f = 0.0;
    double recall = 0.0;
    int lifeline_count = 0;
    std::vector<ConceptMatch> per_concept;
};

/// Per-pair Recall/Precision/F with size-weighted maxima over the grouping
/// result. Empty TS scores 0 by convention; empty ground truth is an error.
EvaluationReport evaluate(const std::vector<std::vector<std::string>>& type_sets,
                          const GroundTruth& ground_truth);

struct SweepRow {
    double importance_threshold;
    int lifeline_count;
    double f;
    double recall;
};

/// One evaluation per threshold, lifelines counted after class-level
/// conversion; rows ordered by descending threshold.
std::vector<SweepRow> sweep(const Trace& trace, const PatternIndex& index,
                            const std::vector<ObjectProfile>& profiles, const Ranking& ranking,
                            const GroupingResult& groups, const GroundTruth& ground_truth,
                            std::vector<double> thresholds);

std::string serialize_sweep_csv(const std::vector<SweepRow>& rows);
std::string serialize_report(const EvaluationReport& report);

GroundTruth parse_ground_truth(const std::string& text, const std::string& origin);
std::string serialize_ground_truth(const GroundTruth& gt);
GroundTruth load_ground_truth(const std::string& path);

}  // namespace clens
