#include "clens/evaluator.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>

using namespace clens;

namespace {

GroundTruth gt(std::vector<std::vector<std::string>> concepts) {
    GroundTruth out;
    int i = 0;
    for (auto& c : concepts) out.concepts.push_back({"c" + std::to_string(i++), std::move(c)});
    return out;
}

}  // namespace

TEST_CASE("perfect clustering scores 1") {
    auto report = evaluate({{"A", "B"}, {"C"}}, gt({{"A", "B"}, {"C"}}));
    CHECK(report.f == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(report.recall == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(report.lifeline_count == 2);
}

TEST_CASE("hand-computed example") {
    // RS = {{A,B,C},{D}}, TS = {{A,B},{D,E}}:
    //   concept 1: Recall 2/3, Precision 1, F 0.8; concept 2: Recall 1, Precision 1/2, F 2/3
    //   F = (3/4)*0.8 + (1/4)*(2/3) = 23/30; Recall = (3/4)*(2/3) + (1/4)*1 = 3/4
    auto report = evaluate({{"A", "B"}, {"D", "E"}}, gt({{"A", "B", "C"}, {"D"}}));
    CHECK(report.f == doctest::Approx(23.0 / 30.0).epsilon(1e-9));
    CHECK(report.recall == doctest::Approx(0.75).epsilon(1e-9));
    REQUIRE(report.per_concept.size() == 2);
    CHECK(report.per_concept[0].f == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(report.per_concept[1].precision == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("the power set of all type names reaches F = 1") {
    std::vector<std::string> universe{"A", "B", "C"};
    std::vector<std::vector<std::string>> power;
    for (unsigned mask = 1; mask < 8; ++mask) {
        std::vector<std::string> subset;
        for (unsigned bit = 0; bit < 3; ++bit)
            if (mask & (1u << bit)) subset.push_back(universe[bit]);
        power.push_back(std::move(subset));
    }
    auto report = evaluate(power, gt({{"A", "C"}, {"B"}}));
    CHECK(report.f == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(report.recall == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("empty grouping scores zero; empty ground truth is an error") {
    auto report = evaluate({}, gt({{"A"}}));
    CHECK(report.f == 0.0);
    CHECK(report.recall == 0.0);
    CHECK_THROWS_AS(evaluate({{"A"}}, GroundTruth{}), InputError);
}

TEST_CASE("concepts may share types") {
    auto report = evaluate({{"S", "A"}}, gt({{"S", "A"}, {"S", "B"}}));
    CHECK(report.f > 0.0);
    CHECK(report.per_concept.size() == 2);
}

TEST_CASE("evaluate is invariant under reordering and adding groups never hurts") {
    std::mt19937_64 gen(41);
    auto random_sets = [&](int max_sets) {
        std::vector<std::vector<std::string>> sets;
        int n = 1 + static_cast<int>(gen() % static_cast<std::uint64_t>(max_sets));
        for (int i = 0; i < n; ++i) {
            std::vector<std::string> s;
            for (char c = 'A'; c <= 'F'; ++c)
                if (gen() % 2) s.push_back(std::string(1, c));
            if (s.empty()) s.push_back("A");
            sets.push_back(std::move(s));
        }
        return sets;
    };
    for (int round = 0; round < 100; ++round) {
        auto rs = random_sets(4);
        auto ts = random_sets(5);
        auto base = evaluate(ts, gt(rs));

        auto shuffled = ts;
        std::shuffle(shuffled.begin(), shuffled.end(), gen);
        auto same = evaluate(shuffled, gt(rs));
        CHECK(same.f == doctest::Approx(base.f).epsilon(1e-12));
        CHECK(same.recall == doctest::Approx(base.recall).epsilon(1e-12));

        auto extended = ts;
        extended.push_back(random_sets(1).front());
        auto grown = evaluate(extended, gt(rs));
        CHECK(grown.f >= base.f - 1e-12);
        CHECK(grown.recall >= base.recall - 1e-12);
    }
}

TEST_CASE("scores stay within [0,1]") {
    std::mt19937_64 gen(43);
    for (int round = 0; round < 100; ++round) {
        std::vector<std::vector<std::string>> ts;
        std::vector<std::vector<std::string>> rs;
        auto fill = [&](std::vector<std::vector<std::string>>& out, int max_sets) {
            int n = 1 + static_cast<int>(gen() % static_cast<std::uint64_t>(max_sets));
            for (int i = 0; i < n; ++i) {
                std::vector<std::string> s;
                for (char c = 'A'; c <= 'E'; ++c)
                    if (gen() % 2) s.push_back(std::string(1, c));
                if (s.empty()) s.push_back("E");
                out.push_back(std::move(s));
            }
        };
        fill(ts, 4);
        fill(rs, 3);
        auto report = evaluate(ts, gt(rs));
        CHECK(report.f >= 0.0);
        CHECK(report.f <= 1.0 + 1e-12);
        CHECK(report.recall >= 0.0);
        CHECK(report.recall <= 1.0 + 1e-12);
        for (const auto& m : report.per_concept) {
            CHECK(m.recall >= 0.0);
            CHECK(m.recall <= 1.0 + 1e-12);
            CHECK(m.precision >= 0.0);
            CHECK(m.precision <= 1.0 + 1e-12);
        }
    }
}

TEST_CASE("ground truth file round-trips") {
    auto truth = gt({{"A", "B"}, {"C"}});
    auto text = serialize_ground_truth(truth);
    auto loaded = parse_ground_truth(text, "mem");
    REQUIRE(loaded.concepts.size() == 2);
    CHECK(loaded.concepts[0].types == truth.concepts[0].types);
    CHECK(serialize_ground_truth(loaded) == text);
}
