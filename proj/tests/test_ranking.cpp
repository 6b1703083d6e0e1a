#include "sega/errors.hpp"
#include "sega/ranking.hpp"

#include <doctest.h>

#include <random>

using namespace sega;

namespace {

TeamStanding standing(std::string id, double r_dsc, double r_hd, double r_var, double r_inter, double runtime = 0.0) {
    TeamStanding s;
    s.team_id = std::move(id);
    s.r_dsc = r_dsc;
    s.r_hd = r_hd;
    s.r_var = r_var;
    s.r_inter = r_inter;
    s.mean_runtime_s = runtime;
    return s;
}

TeamRecord record(std::string id, std::vector<double> dsc, std::vector<double> hd, double p_var, double p_inter,
                  double runtime = 0.0) {
    return {std::move(id), std::move(dsc), std::move(hd), p_var, p_inter, runtime, false};
}

}  // namespace

TEST_SUITE("ranking") {

TEST_CASE("robust statistics") {
    const std::vector<double> a{1, 2, 3};
    CHECK(robust_stats(a).median == 2.0);
    CHECK(robust_stats(a).variance == 1.0);
    CHECK(robust_stats(a).skewness == 0.0);

    const std::vector<double> one{5};
    CHECK(robust_stats(one).median == 5.0);
    CHECK(robust_stats(one).variance == 0.0);
    CHECK(robust_stats(one).skewness == 0.0);

    const std::vector<double> b{1, 1, 1, 7};
    const auto s = robust_stats(b);
    CHECK(s.median == 1.0);
    CHECK(s.variance == doctest::Approx(9.0).epsilon(1e-14));
    CHECK(s.skewness == doctest::Approx(2.0).epsilon(1e-12));

    CHECK_THROWS_AS(robust_stats(std::vector<double>{}), DomainError);
}

TEST_CASE("rank values") {
    const std::vector<double> a{0.9, 0.8, 0.95};
    CHECK(rank_values(a, RankDirection::HigherBetter) == std::vector<double>{2, 3, 1});
    const std::vector<double> b{0.9, 0.9, 0.8};
    CHECK(rank_values(b, RankDirection::HigherBetter) == std::vector<double>{1.5, 1.5, 3});
    CHECK(rank_values(std::vector<double>{4.2}, RankDirection::LowerBetter) == std::vector<double>{1});
    const std::vector<double> c{2, 1, 2, 2};
    CHECK(rank_values(c, RankDirection::LowerBetter) == std::vector<double>{3, 1, 3, 3});
}

TEST_CASE("aggregation formulas") {
    CHECK(p_metric(1, 1, 1) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(std::abs(p_metric(1, 2, 3) - 1.55) < 1e-12);
    CHECK(std::abs(p_metric(3, 3, 3) - 3.0) < 1e-12);
    CHECK(std::abs(p_jacobian(1, 1, 1, 1) - 1.0) < 1e-12);
    CHECK(std::abs(p_jacobian(2, 1, 3, 1) - 1.6) < 1e-12);
    CHECK(std::abs(p_jacobian(4, 4, 4, 4) - 4.0) < 1e-12);
}

TEST_CASE("three finalists table") {
    auto atb = standing("ATB", 0, 0, 0, 0);
    atb.nr = true;
    atb.r_dsc.reset();
    const auto board = final_ranking({atb, standing("Brightskies", 2, 2, 3, 2), standing("NVAUTO", 3, 1, 2, 1)});
    REQUIRE(board.rows.size() == 3);
    CHECK(board.rows[0].team_id == "NVAUTO");
    CHECK(std::abs(*board.rows[0].p_fin - 5.0 / 3.0) < 1e-12);
    CHECK(board.rows[1].team_id == "Brightskies");
    CHECK(std::abs(*board.rows[1].p_fin - 7.0 / 3.0) < 1e-12);
    CHECK(board.rows[2].team_id == "ATB");
    CHECK(board.rows[2].nr);
    CHECK_FALSE(board.rows[2].p_fin.has_value());
    CHECK(board.rows[2].position == 3);
}

TEST_CASE("score ties go to the faster team") {
    const auto board = final_ranking({standing("slow", 1, 2, 1, 2, 12.0), standing("fast", 2, 1, 2, 1, 10.0)});
    CHECK(*board.rows[0].p_fin == *board.rows[1].p_fin);
    CHECK(board.rows[0].team_id == "fast");
    CHECK(board.rows[1].team_id == "slow");
}

TEST_CASE("missing intermediate rank") {
    auto s = standing("x", 1, 1, 1, 1);
    s.r_var.reset();
    CHECK_THROWS_AS(final_ranking({s}), IncompleteRecord);
    CHECK_THROWS_AS(build_leaderboard({}), EmptyField);
}

TEST_CASE("single team takes first place") {
    const auto board = build_leaderboard({record("solo", {0.9, 0.8}, {3, 4}, 0.5, 0.1)});
    CHECK(board.rows[0].position == 1);
    CHECK(*board.rows[0].r_dsc == 1.0);
    CHECK(*board.rows[0].p_fin == doctest::Approx(1.0));
}

TEST_CASE("intermediate ranking directions") {
    const auto rows = intermediate_ranking({
        record("a", {0.9, 0.9, 0.9}, {1, 1, 1}, 0.9, 0.05),
        record("b", {0.5, 0.6, 0.7}, {5, 6, 9}, 0.5, -0.30),
        record("c", {0.8, 0.85, 0.7}, {2, 3, 2}, 0.7, 0.10),
    });
    CHECK(*rows[0].r_dsc == 1.0);
    CHECK(*rows[0].r_hd == 1.0);
    CHECK(*rows[0].r_var == 1.0);
    CHECK(*rows[0].r_inter == 1.0);
    CHECK(*rows[1].r_var == 3.0);
    CHECK(*rows[1].r_inter == 3.0);  // |-0.30| is the largest interaction
    CHECK(*rows[2].r_inter == 2.0);
}

TEST_CASE("NR teams sit after every ranked team") {
    auto r = record("zzz_nr", {1.0}, {0.0}, 1.0, 0.0);
    r.nr_flag = true;
    const auto board = build_leaderboard({r, record("b", {0.5}, {9}, 0.1, 0.5), record("a", {0.6}, {8}, 0.2, 0.4)});
    CHECK(board.rows.back().team_id == "zzz_nr");
    CHECK_FALSE(board.rows.back().r_dsc.has_value());
    CHECK(board.rows[0].team_id == "a");
}

TEST_CASE("improving median DSC never worsens its rank") {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(0.5, 1.0), h(0.0, 20.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<TeamRecord> recs;
        for (int t = 0; t < 5; ++t) {
            std::vector<double> dsc(5), hd(5);
            for (auto& v : dsc) v = u(rng);
            for (auto& v : hd) v = h(rng);
            recs.push_back(record("t" + std::to_string(t), dsc, hd, u(rng), u(rng) - 0.75));
        }
        const auto before = robust_stats(recs[0].dsc_values);
        std::vector<double> dm(5);
        for (int t = 0; t < 5; ++t) dm[t] = robust_stats(recs[t].dsc_values).median;
        const double r0 = rank_values(dm, RankDirection::HigherBetter)[0];
        for (auto& v : recs[0].dsc_values) v += 0.05;  // shift raises the median, keeps spread
        dm[0] = robust_stats(recs[0].dsc_values).median;
        CHECK(dm[0] > before.median);
        CHECK(rank_values(dm, RankDirection::HigherBetter)[0] <= r0);
        const auto a = intermediate_ranking(recs);
        CHECK(a[0].r_dsc.has_value());
    }
}

TEST_CASE("ranks ignore a positive rescaling of all teams") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.1, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> v(6);
        for (auto& x : v) x = u(rng);
        auto scaled = v;
        for (auto& x : scaled) x *= 4.0;
        CHECK(rank_values(v, RankDirection::LowerBetter) == rank_values(scaled, RankDirection::LowerBetter));
    }
}

TEST_CASE("jacobian ranking") {
    MeshTeamRecord good{"good", {1.0, 0.0, 0.0}, 0.0, false};
    MeshTeamRecord bad{"bad", {0.6, 0.1, -1.0}, 2.0, false};
    MeshTeamRecord broken{"broken", {}, 0.0, true};
    const auto out = jacobian_ranking({bad, broken, good});
    CHECK(out[0].team_id == "good");
    CHECK(*out[0].r_invalid == 1.0);
    CHECK(*out[1].r_invalid == 2.0);
    CHECK(*out[0].p_j == doctest::Approx(1.0));
    CHECK(out[2].team_id == "broken");
    CHECK_FALSE(out[2].p_j.has_value());
    CHECK_THROWS_AS(jacobian_ranking({}), EmptyField);
}

}
