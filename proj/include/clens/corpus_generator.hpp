#pragma once

#include "clens/code_model.hpp"
#include "clens/evaluator.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace clens {

/// Shape parameters for one synthetic corpus. The seed fully determines the
/// output: generating twice yields byte-identical artifacts.
struct ScenarioSpec {
    struct PatternMix {
        int uni = 0;
        int runi_11 = 0;
        int runi_1n = 0;
        int con_11 = 0;
        int con_1n = 0;
        int rcon_11 = 0;
        int rcon_1n = 0;
    };
    PatternMix mix;
    int depth_min = 2;
    int depth_max = 3;
    int fanout_min = 1;
    int fanout_max = 3;
    double delegate_prob = 0.0;
    int threads = 1;
    double temp_noise_rate = 0.2;
    int episodes_min = 1;
    int episodes_max = 3;
    std::uint64_t seed = 1;

    void validate() const;
};

/// A generated (model, trace, oracles, ground truth) quadruple. The oracle
/// group sets are derived from the wiring itself, not from the grouper.
struct GeneratedCorpus {
    CodeModel model;
    std::string trace_text;
    std::vector<std::vector<std::string>> oracle_mp;   // sorted member-id sets
    std::vector<std::vector<std::string>> oracle_mpd;
    GroundTruth ground_truth;
    std::map<std::string, int> declared_pattern_counts;  // short pattern name -> count
};

GeneratedCorpus generate(const ScenarioSpec& spec);

/// Writes code_model.json, trace.txt, oracle_groups.json, ground_truth.json.
void write_corpus(const GeneratedCorpus& corpus, const std::string& dir);

ScenarioSpec parse_scenario_spec(const std::string& text, const std::string& origin);
std::string serialize_scenario_spec(const ScenarioSpec& spec);
std::string serialize_oracles(const GeneratedCorpus& corpus);

}  // namespace clens
