#include "clens/corpus_generator.hpp"

#include "support/cli_runner.hpp"
#include "support/fixtures.hpp"

#include <doctest.h>

#include <filesystem>

using namespace clens;
namespace fs = std::filesystem;

namespace {

struct FixtureDir {
    fs::path dir = testing::fresh_temp_dir("fixture");
    std::string model = (dir / "model.json").string();
    std::string trace = (dir / "trace.txt").string();

    FixtureDir() {
        save_code_model(testing::fig2_model(), model);
        write_file(trace, testing::fig2_trace_text());
    }
    ~FixtureDir() { fs::remove_all(dir); }
    std::string path(const std::string& name) const { return (dir / name).string(); }
};

}  // namespace

TEST_CASE("summarize happy path exits 0 and prints a diagram") {
    FixtureDir fx;
    auto result = testing::run_cli({"summarize", "--model", fx.model, "--trace", fx.trace, "--mode", "mp",
                                    "--it", "0.5", "--level", "class", "--format", "plantuml",
                                    "--include-external"});
    CHECK(result.exit_code == 0);
    CHECK(result.out.find("@startuml") == 0);
    CHECK(result.out.find("getDiskUsage()") != std::string::npos);
}

TEST_CASE("missing required input is a usage error (exit 1)") {
    auto result = testing::run_cli({"summarize", "--model", "whatever.json"});
    CHECK(result.exit_code == 1);
}

TEST_CASE("unknown subcommand is a usage error") {
    auto result = testing::run_cli({"frobnicate"});
    CHECK(result.exit_code == 1);
}

TEST_CASE("corrupt trace line is an input-format error naming the line (exit 2)") {
    FixtureDir fx;
    // Mangle line 17 of the trace file.
    auto text = testing::fig2_trace_text();
    std::size_t line_start = 0;
    for (int i = 1; i < 17; ++i) line_start = text.find('\n', line_start) + 1;
    auto line_end = text.find('\n', line_start);
    text.replace(line_start, line_end - line_start, "E banana");
    auto corrupt = fx.path("corrupt.txt");
    write_file(corrupt, text);

    auto result = testing::run_cli({"rank", "--trace", corrupt});
    CHECK(result.exit_code == 2);
    CHECK(result.err.find("line 17") != std::string::npos);
}

TEST_CASE("stepwise pipeline equals the end-to-end run byte for byte") {
    FixtureDir fx;
    auto patterns = fx.path("patterns.json");
    auto groups = fx.path("groups.json");
    auto rank = fx.path("rank.csv");
    auto step_diagram = fx.path("step.puml");
    auto direct_diagram = fx.path("direct.puml");

    CHECK(testing::run_cli({"detect", "--model", fx.model, "--out", patterns}).exit_code == 0);
    CHECK(testing::run_cli({"group", "--model", fx.model, "--trace", fx.trace, "--patterns", patterns,
                            "--mode", "mp", "--out", groups})
              .exit_code == 0);
    CHECK(testing::run_cli({"rank", "--trace", fx.trace, "--out", rank}).exit_code == 0);
    CHECK(testing::run_cli({"summarize", "--model", fx.model, "--trace", fx.trace, "--patterns", patterns,
                            "--groups", groups, "--rank", rank, "--it", "0.5", "--level", "class",
                            "--mode", "mp", "--format", "plantuml", "--include-external", "--out",
                            step_diagram})
              .exit_code == 0);
    CHECK(testing::run_cli({"summarize", "--model", fx.model, "--trace", fx.trace, "--it", "0.5",
                            "--level", "class", "--mode", "mp", "--format", "plantuml",
                            "--include-external", "--out", direct_diagram})
              .exit_code == 0);
    CHECK(read_file(step_diagram) == read_file(direct_diagram));
}

TEST_CASE("generate writes the four corpus files consumable by the pipeline") {
    auto dir = testing::fresh_temp_dir("gen");
    auto out = (dir / "corpus").string();
    auto result = testing::run_cli({"generate", "--out", out, "--seed", "3", "--rcon1n", "1", "--con1n",
                                    "1", "--delegate-prob", "1.0"});
    CHECK(result.exit_code == 0);
    for (const char* name : {"code_model.json", "trace.txt", "oracle_groups.json", "ground_truth.json"})
        CHECK(fs::exists(fs::path(out) / name));

    auto sweep = testing::run_cli({"sweep", "--model", out + "/code_model.json", "--trace",
                                   out + "/trace.txt", "--ground-truth", out + "/ground_truth.json"});
    CHECK(sweep.exit_code == 0);
    CHECK(sweep.out.rfind("I_t,lifeline_count,F,Recall\n", 0) == 0);

    auto eval = testing::run_cli({"evaluate", "--model", out + "/code_model.json", "--trace",
                                  out + "/trace.txt", "--ground-truth", out + "/ground_truth.json"});
    CHECK(eval.exit_code == 0);
    CHECK(eval.out.find("\"recall\"") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("malformed model file is an input-format error") {
    FixtureDir fx;
    auto bad = fx.path("bad.json");
    write_file(bad, "{not json");
    auto result = testing::run_cli({"detect", "--model", bad});
    CHECK(result.exit_code == 2);
}
