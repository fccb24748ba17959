#include "clens/cli.hpp"

#include "clens/corpus_generator.hpp"
#include "clens/evaluator.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <memory>
#include <optional>

namespace clens::cli {

namespace {

void emit_output(const std::string& content, const std::string& out_path) {
    if (out_path.empty()) {
        std::fwrite(content.data(), 1, content.size(), stdout);
    } else {
        write_file(out_path, content);
    }
}

GroupingMode parse_mode(const std::string& mode) {
    if (mode == "mp") return GroupingMode::MP;
    if (mode == "mpd") return GroupingMode::MPD;
    throw UsageError("unknown grouping mode: " + mode + " (expected mp or mpd)");
}

/// Shared lazy pipeline: stages read from files when given, and are computed
/// in-process otherwise, so stepwise and end-to-end runs agree byte for byte.
struct Pipeline {
    std::string model_path, trace_path, patterns_path, groups_path, rank_path;
    std::string mode = "mpd";
    double lt_long = 0.5, lt_short = 0.1;
    bool progress = false;

    std::optional<CodeModel> model;
    std::optional<Trace> trace;
    std::optional<DetectionResult> detection;
    std::optional<GroupingResult> grouping;
    std::optional<std::vector<ObjectProfile>> profiles;
    std::optional<Ranking> ranking;
    std::optional<PatternIndex> pattern_index;

    const CodeModel& get_model() {
        if (!model) model = load_code_model(model_path);
        return *model;
    }
    const Trace& get_trace() {
        if (!trace) trace = load_trace(trace_path, progress);
        return *trace;
    }
    const DetectionResult& get_detection() {
        if (!detection) {
            detection = patterns_path.empty()
                            ? detect(get_model())
                            : parse_patterns(get_model(), read_file(patterns_path), patterns_path);
        }
        return *detection;
    }
    const GroupingResult& get_grouping() {
        if (!grouping) {
            grouping = groups_path.empty()
                           ? group_objects(get_trace(), get_model(), get_detection(), parse_mode(mode))
                           : parse_groups(get_trace(), get_detection(), read_file(groups_path), groups_path);
        }
        return *grouping;
    }
    const std::vector<ObjectProfile>& get_profiles() {
        if (!profiles) {
            RankingConfig config{lt_long, lt_short, 0.0};
            if (rank_path.empty()) {
                profiles = build_profiles(get_trace());
                compute_importance(*profiles);
                mark_temporaries(*profiles, config);
            } else {
                profiles = parse_profiles_csv(get_trace(), read_file(rank_path), rank_path);
            }
        }
        return *profiles;
    }
    const Ranking& get_ranking() {
        if (!ranking) ranking = build_ranking(get_profiles(), RankingConfig{lt_long, lt_short, 0.0});
        return *ranking;
    }
    const PatternIndex& get_pattern_index() {
        if (!pattern_index) pattern_index.emplace(get_trace(), get_model(), get_detection());
        return *pattern_index;
    }
};

void add_pipeline_options(CLI::App* cmd, Pipeline& pipe, bool with_patterns = true,
                          bool with_groups = true, bool with_rank = true) {
    cmd->add_option("--model", pipe.model_path, "code model file (JSON)")->required();
    cmd->add_option("--trace", pipe.trace_path, "trace file")->required();
    if (with_patterns) cmd->add_option("--patterns", pipe.patterns_path, "pattern report (computed if omitted)");
    if (with_groups) cmd->add_option("--groups", pipe.groups_path, "group file (computed if omitted)");
    if (with_rank) cmd->add_option("--rank", pipe.rank_path, "rank CSV (computed if omitted)");
    cmd->add_option("--mode", pipe.mode, "grouping mode: mp|mpd (default mpd)");
    cmd->add_option("--lt-long", pipe.lt_long, "long-lived lifetime threshold factor (default 0.5)");
    cmd->add_option("--lt-short", pipe.lt_short, "short-lived lifetime threshold factor (default 0.1)");
    cmd->add_flag("--progress", pipe.progress, "emit event-count heartbeats to stderr");
}

std::vector<double> parse_grid(const std::string& grid, Pipeline& pipe) {
    std::vector<double> values;
    if (grid.empty() || grid == "auto") {
        for (const auto& p : pipe.get_profiles())
            if (!p.is_temporary && p.importance > 0.0) values.push_back(p.importance);
        values.push_back(0.0);
        return values;
    }
    std::size_t start = 0;
    while (start <= grid.size()) {
        auto comma = grid.find(',', start);
        auto token = grid.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        if (!token.empty()) {
            try {
                values.push_back(std::stod(token));
            } catch (const std::exception&) {
                throw UsageError("bad threshold in --it-grid: " + token);
            }
        }
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    if (values.empty()) throw UsageError("--it-grid has no thresholds");
    return values;
}

int dispatch(int argc, const char* const* argv) {
    CLI::App app{
        "concept-lens: recovers horizontally summarized sequence diagrams from execution traces.\n"
        "Internal parallelism is capped by the CONCEPT_LENS_THREADS environment variable."};
    app.require_subcommand(1);

    // detect
    auto pipe = std::make_shared<Pipeline>();
    std::string out_path;

    auto* cmd_detect = app.add_subcommand("detect", "detect meta patterns in a code model");
    cmd_detect->add_option("--model", pipe->model_path, "code model file (JSON)")->required();
    cmd_detect->add_option("--out", out_path, "write output here instead of stdout");
    cmd_detect->callback([pipe, &out_path] {
        emit_output(serialize_patterns(pipe->get_model(), pipe->get_detection()), out_path);
    });

    auto* cmd_group = app.add_subcommand("group", "construct object groups from a trace");
    add_pipeline_options(cmd_group, *pipe, true, false, false);
    cmd_group->add_option("--out", out_path, "write output here instead of stdout");
    cmd_group->callback([pipe, &out_path] {
        emit_output(serialize_groups(pipe->get_trace(), pipe->get_grouping()), out_path);
    });

    auto* cmd_rank = app.add_subcommand("rank", "profile objects and rank them by importance");
    cmd_rank->add_option("--trace", pipe->trace_path, "trace file")->required();
    cmd_rank->add_option("--lt-long", pipe->lt_long, "long-lived lifetime threshold factor (default 0.5)");
    cmd_rank->add_option("--lt-short", pipe->lt_short, "short-lived lifetime threshold factor (default 0.1)");
    cmd_rank->add_flag("--progress", pipe->progress, "emit event-count heartbeats to stderr");
    cmd_rank->add_option("--out", out_path, "write output here instead of stdout");
    cmd_rank->callback([pipe, &out_path] { emit_output(serialize_profiles_csv(pipe->get_profiles()), out_path); });

    auto* cmd_summarize = app.add_subcommand("summarize", "emit a summarized sequence diagram");
    DiagramOptions diagram_options;
    std::string level = "class", format = "plantuml";
    add_pipeline_options(cmd_summarize, *pipe);
    cmd_summarize->add_option("--it", diagram_options.importance_threshold, "importance threshold I_t (default 0)");
    cmd_summarize->add_option("--level", level, "class|instance (default class)");
    cmd_summarize->add_option("--format", format, "plantuml|mermaid|json (default plantuml)");
    cmd_summarize->add_flag("--include-external", diagram_options.include_external,
                            "show messages from undisplayed or external callers");
    cmd_summarize->add_flag("--returns", diagram_options.with_returns, "emit return messages");
    cmd_summarize->add_option("--out", out_path, "write output here instead of stdout");
    cmd_summarize->callback([pipe, &out_path, &diagram_options, &level, &format] {
        if (level == "class") diagram_options.level = DiagramLevel::Class;
        else if (level == "instance") diagram_options.level = DiagramLevel::Instance;
        else throw UsageError("unknown level: " + level);
        DiagramFormat fmt;
        if (format == "plantuml") fmt = DiagramFormat::PlantUml;
        else if (format == "mermaid") fmt = DiagramFormat::Mermaid;
        else if (format == "json") fmt = DiagramFormat::Json;
        else throw UsageError("unknown format: " + format);
        auto diagram = summarize(pipe->get_trace(), pipe->get_pattern_index(), pipe->get_profiles(),
                                 pipe->get_ranking(), pipe->get_grouping(), diagram_options);
        emit_output(render_diagram(pipe->get_trace(), diagram, fmt), out_path);
    });

    auto* cmd_evaluate = app.add_subcommand("evaluate", "score class-level grouping against a ground truth");
    std::string gt_path;
    double eval_it = 0.0;
    add_pipeline_options(cmd_evaluate, *pipe);
    cmd_evaluate->add_option("--ground-truth", gt_path, "ground truth file (JSON)")->required();
    cmd_evaluate->add_option("--it", eval_it, "importance threshold I_t (default 0)");
    cmd_evaluate->add_option("--out", out_path, "write output here instead of stdout");
    cmd_evaluate->callback([pipe, &out_path, &gt_path, &eval_it] {
        auto gt = load_ground_truth(gt_path);
        auto selected = to_class_level(
            pipe->get_trace(),
            select_important_groups(pipe->get_profiles(), pipe->get_ranking(), eval_it, pipe->get_grouping()));
        std::vector<std::vector<std::string>> ts;
        for (const auto& g : selected) ts.push_back(type_name_set(pipe->get_trace(), g.members));
        auto report = evaluate(ts, gt);
        emit_output(serialize_report(report), out_path);
    });

    auto* cmd_sweep = app.add_subcommand("sweep", "evaluate across a threshold grid");
    std::string grid;
    add_pipeline_options(cmd_sweep, *pipe);
    cmd_sweep->add_option("--ground-truth", gt_path, "ground truth file (JSON)")->required();
    cmd_sweep->add_option("--it-grid", grid, "comma-separated thresholds, or 'auto' (default)");
    cmd_sweep->add_option("--out", out_path, "write output here instead of stdout");
    cmd_sweep->callback([pipe, &out_path, &gt_path, &grid] {
        auto gt = load_ground_truth(gt_path);
        auto rows = sweep(pipe->get_trace(), pipe->get_pattern_index(), pipe->get_profiles(),
                          pipe->get_ranking(), pipe->get_grouping(), gt, parse_grid(grid, *pipe));
        emit_output(serialize_sweep_csv(rows), out_path);
    });

    auto* cmd_generate = app.add_subcommand("generate", "generate a synthetic corpus with grouping oracles");
    std::string spec_path, out_dir;
    ScenarioSpec spec;
    cmd_generate->add_option("--spec", spec_path, "scenario spec file (JSON); inline flags override nothing if given");
    cmd_generate->add_option("--out", out_dir, "output directory")->required();
    cmd_generate->add_option("--seed", spec.seed, "random seed (default 1)");
    cmd_generate->add_option("--threads", spec.threads, "trace thread count (default 1)");
    cmd_generate->add_option("--depth-min", spec.depth_min, "minimum chain depth (default 2)");
    cmd_generate->add_option("--depth-max", spec.depth_max, "maximum chain depth (default 3)");
    cmd_generate->add_option("--fanout-min", spec.fanout_min, "minimum fan-out (default 1)");
    cmd_generate->add_option("--fanout-max", spec.fanout_max, "maximum fan-out (default 3)");
    cmd_generate->add_option("--episodes-min", spec.episodes_min, "minimum activations per structure (default 1)");
    cmd_generate->add_option("--episodes-max", spec.episodes_max, "maximum activations per structure (default 3)");
    cmd_generate->add_option("--delegate-prob", spec.delegate_prob, "delegate injection probability (default 0)");
    cmd_generate->add_option("--noise", spec.temp_noise_rate, "temporary-object noise rate (default 0.2)");
    cmd_generate->add_option("--uni", spec.mix.uni, "number of Uni instances");
    cmd_generate->add_option("--runi11", spec.mix.runi_11, "number of 11-RUni instances");
    cmd_generate->add_option("--runi1n", spec.mix.runi_1n, "number of 1N-RUni instances");
    cmd_generate->add_option("--con11", spec.mix.con_11, "number of 11-Con instances");
    cmd_generate->add_option("--con1n", spec.mix.con_1n, "number of 1N-Con instances");
    cmd_generate->add_option("--rcon11", spec.mix.rcon_11, "number of 11-RCon instances");
    cmd_generate->add_option("--rcon1n", spec.mix.rcon_1n, "number of 1N-RCon instances");
    cmd_generate->callback([&spec_path, &out_dir, &spec] {
        auto effective = spec_path.empty() ? spec : parse_scenario_spec(read_file(spec_path), spec_path);
        effective.validate();
        write_corpus(generate(effective), out_dir);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        auto code = app.exit(e);
        return code == 0 ? 0 : 1;
    }
    return 0;
}

}  // namespace

int run(int argc, const char* const* argv) {
    try {
        return dispatch(argc, argv);
    } catch (const UsageError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const InputError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}

}  // namespace clens::cli
