#include <doctest.h>

#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "sapt/error.hpp"
#include "sapt/repertoire.hpp"

using namespace sapt;

namespace {

RepertoireEntry entry(double x, double safety) {
    RepertoireEntry e;
    e.policy = {x, safety};
    e.descriptor = Descriptor{{x}};
    e.safety_prior = safety;
    e.trajectory = Trajectory(1, 1, 0.1);
    e.trajectory.push_state(std::array{x});
    e.trajectory.push_action(std::array{0.5});
    e.trajectory.push_state(std::array{x + 1.0});
    return e;
}

Repertoire small_repertoire() {
    Repertoire rep(GridSpec{{10}, {0.0}, {10.0}}, "test", {{1.0}, {2.0}});
    for (double x : {0.5, 3.5, 7.25, 9.9}) rep.try_insert(entry(x, x * 2.0));
    return rep;
}

}  // namespace

TEST_CASE("discretize maps descriptors to row-major cells") {
    const GridSpec g1{{10}, {0.0}, {1.0}};
    CHECK(discretize(Descriptor{{0.05}}, g1) == 0);
    CHECK(discretize(Descriptor{{0.55}}, g1) == 5);
    CHECK(discretize(Descriptor{{1.0}}, g1) == 9);
    CHECK(discretize(Descriptor{{-0.5}}, g1) == 0);
    CHECK(discretize(Descriptor{{1.5}}, g1) == 9);

    const GridSpec g2{{3, 4}, {0.0, 0.0}, {3.0, 4.0}};
    CHECK(discretize(Descriptor{{1.5, 2.5}}, g2) == 1 * 4 + 2);
    CHECK(discretize(Descriptor{{2.9, 3.9}}, g2) == 11);
    CHECK(g2.num_cells() == 12);
}

TEST_CASE("discretize rejects non-finite and mis-sized descriptors") {
    const GridSpec g{{10}, {0.0}, {1.0}};
    CHECK_THROWS_AS(discretize(Descriptor{{std::nan("")}}, g), InvalidDescriptor);
    CHECK_THROWS_AS(discretize(Descriptor{{std::numeric_limits<double>::infinity()}}, g), InvalidDescriptor);
    CHECK_THROWS_AS(discretize(Descriptor{{0.1, 0.2}}, g), InvalidDescriptor);
}

TEST_CASE("grid validation") {
    CHECK_THROWS_AS((GridSpec{{0}, {0.0}, {1.0}}.validate()), ConfigError);
    CHECK_THROWS_AS((GridSpec{{4}, {1.0}, {1.0}}.validate()), ConfigError);
    CHECK_THROWS_AS((GridSpec{{4, 4}, {0.0}, {1.0}}.validate()), ConfigError);
    CHECK_NOTHROW((GridSpec{{4}, {-1.0}, {1.0}}.validate()));
}

TEST_CASE("try_insert keeps the strictly safer elite") {
    Repertoire rep(GridSpec{{10}, {0.0}, {10.0}});
    CHECK(rep.try_insert(entry(2.5, 1.0)) == InsertOutcome::Inserted);
    CHECK(rep.try_insert(entry(2.6, 3.0)) == InsertOutcome::Replaced);
    CHECK(rep.find(2)->safety_prior == 3.0);
    CHECK(rep.try_insert(entry(2.7, 3.0)) == InsertOutcome::Discarded);
    CHECK(rep.find(2)->descriptor[0] == 2.6);
    CHECK(rep.try_insert(entry(2.8, 2.0)) == InsertOutcome::Discarded);
    CHECK(rep.size() == 1);
    CHECK(rep.find(3) == nullptr);
}

TEST_CASE("random_elite is uniform over occupied cells") {
    Repertoire empty(GridSpec{{10}, {0.0}, {10.0}});
    Rng rng(3);
    CHECK_THROWS_AS(empty.random_elite(rng), EmptyArchive);

    const Repertoire rep = small_repertoire();
    std::map<double, int> counts;
    const int draws = 40000;
    for (int i = 0; i < draws; ++i) ++counts[rep.random_elite(rng).descriptor[0]];
    CHECK(counts.size() == 4);
    for (const auto& [x, n] : counts) CHECK(std::abs(n / double(draws) - 0.25) < 0.01);
}

TEST_CASE("assign_rewards annotates entries and leaves safety untouched") {
    Repertoire rep = small_repertoire();
    const std::vector<double> goal{5.0};
    assign_rewards(rep, goal, [](const Trajectory& tr, std::span<const double> g) {
        return -std::abs(tr.final_state()[0] - g[0]);
    });
    for (const auto& [cell, e] : rep.entries()) {
        REQUIRE(e.reward_prior.has_value());
        CHECK(*e.reward_prior == doctest::Approx(-std::abs(e.descriptor[0] + 1.0 - 5.0)));
        CHECK(e.safety_prior == e.descriptor[0] * 2.0);
    }

    rep.mutable_entries().begin()->second.trajectory = Trajectory{};
    CHECK_THROWS_AS(assign_rewards(rep, goal, [](const Trajectory&, std::span<const double>) { return 0.0; }),
                    CorruptRepertoire);
}

TEST_CASE("save and load round-trip") {
    Repertoire rep = small_repertoire();
    rep.mutable_entries().begin()->second.reward_prior = 0.25;
    std::stringstream ss;
    save(rep, ss);
    const Repertoire back = load(ss);
    CHECK(back == rep);
    CHECK(back.env_id() == "test");
    CHECK(back.dynamics_conditions().size() == 2);

    // Doubles survive exactly.
    Repertoire r2(GridSpec{{10}, {0.0}, {1.0}});
    r2.try_insert(entry(0.1 + 0.2, 1.0 / 3.0));
    std::stringstream s2;
    save(r2, s2);
    CHECK(load(s2) == r2);
}

TEST_CASE("empty repertoire round-trips") {
    const Repertoire rep(GridSpec{{5, 5}, {0.0, 0.0}, {1.0, 1.0}}, "arm");
    std::stringstream ss;
    save(rep, ss);
    const Repertoire back = load(ss);
    CHECK(back.empty());
    CHECK(back.grid() == rep.grid());
}

TEST_CASE("load reports malformed files") {
    std::stringstream ss;
    save(small_repertoire(), ss);
    const std::string text = ss.str();

    SUBCASE("truncated file") {
        const auto cut = text.rfind('\n', text.size() - 2);
        std::stringstream t(text.substr(0, cut + 1));
        CHECK_THROWS_AS(load(t), ParseError);
    }
    SUBCASE("garbage line carries its line number") {
        std::string bad = text;
        const auto first_nl = bad.find('\n');
        const auto second_nl = bad.find('\n', first_nl + 1);
        bad.replace(first_nl + 1, second_nl - first_nl - 1, "{not json");
        std::stringstream t(bad);
        try {
            load(t);
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.line() == 2);
        }
    }
    SUBCASE("unknown format version") {
        std::string bad = text;
        const auto pos = bad.find("\"format_version\":1");
        REQUIRE(pos != std::string::npos);
        bad.replace(pos, 18, "\"format_version\":2");
        std::stringstream t(bad);
        CHECK_THROWS_AS(load(t), VersionError);
    }
    SUBCASE("empty input") {
        std::stringstream t;
        CHECK_THROWS_AS(load(t), ParseError);
    }
}
