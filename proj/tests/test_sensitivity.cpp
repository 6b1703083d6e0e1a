#include "sega/errors.hpp"
#include "sega/sensitivity.hpp"
#include "support.hpp"

#include <doctest.h>

#include <functional>
#include <numeric>

using namespace sega;

namespace {

using Model = std::function<double(const std::vector<double>&)>;

SobolIndices run(const Model& f, std::size_t n, std::size_t m, std::uint64_t seed) {
    const auto design = build_saltelli_design(n, m, seed);
    std::vector<double> y;
    y.reserve(design.rows.size());
    for (const auto& r : design.rows) y.push_back(f(r.unit_point));
    return estimate_sobol(design, y, "Y");
}

double additive(const std::vector<double>& u) { return std::accumulate(u.begin(), u.end(), 0.0); }

double additive_error(std::size_t n, std::uint64_t seed) {
    const auto ix = run(additive, n, 4, seed);
    double e = 0.0;
    for (int i = 0; i < 4; ++i) e += std::abs(ix.s1[i] - 0.25) + std::abs(ix.st[i] - 0.25);
    return e / 8.0;
}

}  // namespace

TEST_SUITE("sensitivity") {

TEST_CASE("design layout") {
    const auto d = build_saltelli_design(25, 4, 7);
    CHECK(d.rows.size() == 150);
    CHECK(build_saltelli_design(2, 4, 7).rows.size() == 12);
    for (std::size_t n = 0; n < 25; ++n) {
        const auto& a = d.rows[d.row_index(RowKind::A, 0, n)].unit_point;
        const auto& b = d.rows[d.row_index(RowKind::B, 0, n)].unit_point;
        for (std::size_t i = 0; i < 4; ++i) {
            const auto& ab = d.rows[d.row_index(RowKind::AB, i, n)].unit_point;
            for (std::size_t c = 0; c < 4; ++c) CHECK(ab[c] == (c == i ? b[c] : a[c]));
        }
        for (const double x : a) CHECK((x > 0.0 && x < 1.0));
    }
    for (std::size_t r = 0; r < d.rows.size(); ++r) {
        const auto c = classify_row(r, 25, 4);
        CHECK(c.kind == d.rows[r].kind);
        CHECK(c.factor == d.rows[r].factor);
        CHECK(c.base == d.rows[r].base);
    }
}

TEST_CASE("design determinism and seed sensitivity") {
    const auto a = build_saltelli_design(25, 4, 123), b = build_saltelli_design(25, 4, 123);
    const auto c = build_saltelli_design(25, 4, 124);
    bool differs = false;
    for (std::size_t r = 0; r < a.rows.size(); ++r) {
        CHECK(a.rows[r].unit_point == b.rows[r].unit_point);
        differs = differs || a.rows[r].unit_point != c.rows[r].unit_point;
    }
    CHECK(differs);
}

TEST_CASE("design preconditions") {
    CHECK_THROWS_AS(build_saltelli_design(1, 4, 0), DomainError);
    CHECK_THROWS_AS(build_saltelli_design(10, 0, 0), DomainError);
    CHECK_THROWS_AS(build_saltelli_design(10, 9, 0), DomainError);
}

TEST_CASE("sequence stays in the open unit cube and is equidistributed") {
    SobolSequence seq(16, 5);
    std::vector<int> hist(16 * 4, 0);
    for (int n = 0; n < 1024; ++n) {
        const auto x = seq.next();
        for (std::size_t d = 0; d < 16; ++d) {
            REQUIRE((x[d] > 0.0 && x[d] < 1.0));
            ++hist[d * 4 + static_cast<int>(x[d] * 4)];
        }
    }
    // first 2^k points of a digitally shifted net fill every dyadic bin equally
    for (const int h : hist) CHECK(h == 256);
}

TEST_CASE("additive model") {
    const auto ix = run(additive, 1 << 14, 4, 1);
    CHECK_FALSE(ix.degenerate);
    for (int i = 0; i < 4; ++i) {
        CHECK(std::abs(ix.s1[i] - 0.25) < 0.01);
        CHECK(std::abs(ix.st[i] - 0.25) < 0.01);
    }
    CHECK(std::abs(robustness_scores(ix).p_inter) < 0.02);
}

TEST_CASE("ishigami function") {
    const double pi = std::acos(-1.0);
    const auto truth = oracle::ishigami_indices(7.0, 0.1);
    const auto ix = run(
        [&](const std::vector<double>& u) {
            return oracle::ishigami(-pi + 2 * pi * u[0], -pi + 2 * pi * u[1], -pi + 2 * pi * u[2]);
        },
        1 << 14, 3, 2);
    CHECK(std::abs(ix.s1[0] - truth.s1) < 0.01);
    CHECK(std::abs(ix.s1[1] - truth.s2) < 0.01);
    CHECK(std::abs(ix.s1[2] - truth.s3) < 0.01);
    CHECK(std::abs(ix.st[0] - truth.st1) < 0.01);
    CHECK(std::abs(ix.st[1] - truth.st2) < 0.01);
    CHECK(std::abs(ix.st[2] - truth.st3) < 0.01);
    CHECK(truth.s1 == doctest::Approx(0.3139).epsilon(1e-3));
    CHECK(truth.st3 == doctest::Approx(0.2437).epsilon(1e-3));
}

TEST_CASE("constant output is degenerate") {
    const auto ix = run([](const std::vector<double>&) { return 3.5; }, 64, 4, 0);
    CHECK(ix.degenerate);
    for (int i = 0; i < 4; ++i) {
        CHECK(ix.s1[i] == 0.0);
        CHECK(ix.st[i] == 0.0);
    }
}

TEST_CASE("incomplete output vector") {
    const auto d = build_saltelli_design(8, 4, 0);
    std::vector<double> y(d.rows.size() - 1, 1.0);
    CHECK_THROWS_AS(estimate_sobol(d, y), IncompleteDesign);
}

TEST_CASE("robustness score examples") {
    SobolIndices ix;
    ix.s1 = {0.25, 0.25, 0.25, 0.25};
    ix.st = ix.s1;
    CHECK(robustness_scores(ix).p_var == 1.0);
    CHECK(robustness_scores(ix).p_inter == 0.0);

    ix.s1 = {1, 0, 0, 0};
    CHECK(std::abs(robustness_scores(ix).p_var - (-0.5)) < 1e-12);

    ix.s1 = {0.2, 0.3, 0.1, 0.1};
    ix.st = {0.3, 0.5, 0.1, 0.1};
    CHECK(std::abs(robustness_scores(ix).p_inter - 0.3) < 1e-12);
}

TEST_CASE("p_var never exceeds 1") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-0.5, 1.5);
    for (int t = 0; t < 500; ++t) {
        SobolIndices ix;
        ix.s1 = {u(rng), u(rng), u(rng), u(rng)};
        ix.st = ix.s1;
        CHECK(robustness_scores(ix).p_var <= 1.0);
    }
}

TEST_CASE("permuting factors permutes the indices") {
    const auto d = build_saltelli_design(256, 4, 11);
    const std::array<std::size_t, 4> perm{2, 0, 3, 1};
    const std::array<double, 4> w{1.0, 2.0, 0.5, 3.0};
    auto f = [&](const std::vector<double>& u) { return w[0] * u[0] + w[1] * u[1] * u[1] + w[2] * u[2] + w[3] * u[0] * u[3]; };

    std::vector<double> y_a(256), y_b(256);
    std::vector<std::vector<double>> y_ab(4, std::vector<double>(256));
    std::vector<std::vector<double>> p_ab(4, std::vector<double>(256));
    for (std::size_t n = 0; n < 256; ++n) {
        y_a[n] = f(d.rows[d.row_index(RowKind::A, 0, n)].unit_point);
        y_b[n] = f(d.rows[d.row_index(RowKind::B, 0, n)].unit_point);
        for (std::size_t i = 0; i < 4; ++i) y_ab[i][n] = f(d.rows[d.row_index(RowKind::AB, i, n)].unit_point);
    }
    for (std::size_t i = 0; i < 4; ++i) p_ab[i] = y_ab[perm[i]];
    const auto base = estimate_sobol(y_a, y_b, y_ab);
    const auto permuted = estimate_sobol(y_a, y_b, p_ab);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(permuted.s1[i] == base.s1[perm[i]]);
        CHECK(permuted.st[i] == base.st[perm[i]]);
    }
}

TEST_CASE("estimates converge as N grows") {
    // the design is a digitally shifted net, so errors shrink at least as
    // fast as the Monte Carlo rate (half per fourfold N)
    auto mean_error = [](std::size_t n) {
        double e = 0.0;
        for (std::uint64_t s = 0; s < 20; ++s) e += additive_error(n, s);
        return e / 20.0;
    };
    double prev = mean_error(64);
    for (std::size_t n : {256, 1024, 4096}) {
        const double now = mean_error(n);
        CHECK(now / prev <= 0.5 * 1.25);
        prev = now;
    }
}

}
