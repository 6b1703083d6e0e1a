#include "sega/errors.hpp"
#include "sega/metrics.hpp"
#include "support.hpp"

#include <doctest.h>

using namespace sega;

namespace {

LabelMask box(Dims3 dims, Vec3 spacing = {1, 1, 1}) {
    Geometry g;
    g.dims = dims;
    g.spacing = spacing;
    return LabelMask(g);
}

}  // namespace

TEST_SUITE("seg-metrics") {

TEST_CASE("dice examples") {
    auto a = box({4, 4, 4}), b = box({4, 4, 4});
    a.at(0, 0, 0) = 1;
    b.at(0, 0, 0) = 1;
    b.at(1, 0, 0) = 1;
    CHECK(dice(a, b) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(dice(b, b) == 1.0);
    auto c = box({4, 4, 4});
    c.at(3, 3, 3) = 1;
    CHECK(dice(a, c) == 0.0);
    CHECK(dice(box({2, 2, 2}), box({2, 2, 2})) == 1.0);
    CHECK_THROWS_AS(dice(a, box({4, 4, 5})), GeometryMismatch);
}

TEST_CASE("surface voxels") {
    auto single = box({3, 3, 3});
    single.at(1, 1, 1) = 1;
    CHECK(surface_voxels(single) == std::vector<Index3>{{1, 1, 1}});

    auto block = box({5, 5, 5});
    for (int k = 1; k < 4; ++k)
        for (int j = 1; j < 4; ++j)
            for (int i = 1; i < 4; ++i) block.at(i, j, k) = 1;
    const auto s = surface_voxels(block);
    CHECK(s.size() == 26);
    CHECK(std::find(s.begin(), s.end(), Index3{2, 2, 2}) == s.end());

    // touching the grid border counts as surface
    auto full = box({3, 3, 3});
    std::fill(full.values.begin(), full.values.end(), 1);
    CHECK(surface_voxels(full).size() == 26);

    CHECK(surface_voxels(box({3, 3, 3})).empty());
}

TEST_CASE("distance transform examples") {
    auto m = box({5, 5, 1});
    m.at(0, 0, 0) = 1;
    const auto d = distance_transform(m);
    CHECK(d[0] == 0.0);
    CHECK(d[m.geometry.linear(3, 4, 0)] == 5.0);

    auto a = box({2, 2, 2}, {0.5, 0.5, 2});
    a.at(0, 0, 0) = 1;
    CHECK(distance_transform(a)[a.geometry.linear(0, 0, 1)] == 2.0);

    CHECK_THROWS_AS(distance_transform(box({2, 2, 2})), EmptyMask);
}

TEST_CASE("hausdorff examples") {
    auto a = box({6, 3, 3}), b = box({6, 3, 3});
    a.at(0, 1, 1) = 1;
    b.at(3, 1, 1) = 1;
    CHECK(hausdorff(a, b) == 3.0);
    CHECK(hausdorff(a, a) == 0.0);

    auto seg = box({5, 1, 1}), centre = box({5, 1, 1});
    for (int i = 0; i < 5; ++i) seg.at(i, 0, 0) = 1;
    centre.at(2, 0, 0) = 1;
    CHECK(hausdorff(centre, seg) == 2.0);
}

TEST_CASE("volumes") {
    CHECK(mask_volume_ml(box({4, 4, 4})) == 0.0);
    auto m = box({10, 10, 10});
    std::fill(m.values.begin(), m.values.end(), 1);
    CHECK(mask_volume_ml(m) == doctest::Approx(1.0).epsilon(1e-15));
    auto h = box({10, 10, 2}, {0.5, 0.5, 2});
    std::fill(h.values.begin(), h.values.begin() + 100, 1);
    CHECK(mask_volume_ml(h) == doctest::Approx(0.05).epsilon(1e-15));
}

TEST_CASE("degenerate pairs") {
    auto gt = box({4, 5, 6}, {1, 2, 0.5});
    gt.at(1, 1, 1) = 1;
    const auto empty = box({4, 5, 6}, {1, 2, 0.5});
    const double diag = std::sqrt(16.0 + 100.0 + 9.0);

    const auto r = evaluate_pair(empty, gt);
    CHECK(r.dsc == 0.0);
    CHECK(r.hd_mm == doctest::Approx(diag).epsilon(1e-15));
    CHECK(r.degenerate == DegenerateFlag::EmptyPrediction);

    const auto s = evaluate_pair(gt, empty);
    CHECK(s.degenerate == DegenerateFlag::EmptyReference);
    CHECK(s.hd_mm == r.hd_mm);

    const auto both = evaluate_pair(empty, empty);
    CHECK(both.dsc == 1.0);
    CHECK(both.hd_mm == 0.0);
    CHECK(both.degenerate == DegenerateFlag::None);
}

TEST_CASE("edt equals brute force on random grids") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 100; ++trial) {
        const auto g = oracle::random_geometry(rng, 9, trial % 2 == 0);
        auto m = oracle::random_mask(rng, g, trial % 3 == 0 ? 0.02 : 0.2);
        if (m.empty()) m.values[0] = 1;
        CHECK(squared_distance_transform(m) == oracle::brute_sq_edt(m));
    }
}

TEST_CASE("hausdorff and dice equal brute force on random pairs") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 80; ++trial) {
        const auto g = oracle::random_geometry(rng, 10, trial % 2 == 0);
        auto a = oracle::random_mask(rng, g, 0.3);
        auto b = oracle::random_mask(rng, g, trial % 4 == 0 ? 0.05 : 0.3);
        if (a.empty()) a.values[0] = 1;
        if (b.empty()) b.values.back() = 1;
        CHECK(dice(a, b) == oracle::brute_dice(a, b));
        const double hd = hausdorff(a, b);
        CHECK(std::abs(hd - oracle::brute_hausdorff(a, b)) < 1e-9);
        CHECK(hd == hausdorff(b, a));
        CHECK(dice(a, b) == dice(b, a));
    }
}

TEST_CASE("hausdorff is zero exactly when surfaces coincide") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 50; ++trial) {
        const auto g = oracle::random_geometry(rng, 6);
        auto a = oracle::random_mask(rng, g, 0.5);
        if (a.empty()) a.values[0] = 1;
        auto b = a;
        std::uniform_int_distribution<std::size_t> pick(0, b.values.size() - 1);
        b.values[pick(rng)] ^= 1;
        if (b.empty()) continue;
        const bool same_surface = oracle::surface(a) == oracle::surface(b);
        CHECK((hausdorff(a, b) == 0.0) == same_surface);
    }
}

TEST_CASE("adding reference voxels to the prediction never lowers dice") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 40; ++trial) {
        const auto g = oracle::random_geometry(rng, 8);
        auto pred = oracle::random_mask(rng, g, 0.2);
        const auto gt = oracle::random_mask(rng, g, 0.3);
        double prev = dice(pred, gt);
        for (std::size_t i = 0; i < gt.values.size(); ++i) {
            if (!gt.values[i] || pred.values[i]) continue;
            pred.values[i] = 1;
            const double now = dice(pred, gt);
            CHECK(now >= prev);
            prev = now;
        }
    }
}

}
