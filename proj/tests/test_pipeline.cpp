#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "support.hpp"
#include "tpsalign/pipeline.hpp"

using namespace tpsalign;
using tpsalign::fixtures::Rng;

namespace {

/// Gaussian dots (sigma 1.5 px) at every landmark.
FeatureMap<double> dot_image(const LandmarkSet& set) {
    FeatureMap<double> img(1, set.height(), set.width());
    for (const auto& p : set.all_points()) {
        for (std::size_t r = 0; r < set.height(); ++r) {
            for (std::size_t c = 0; c < set.width(); ++c) {
                const double d2 = (c - p.x) * (c - p.x) + (r - p.y) * (r - p.y);
                img(0, r, c) += std::exp(-d2 / (2.0 * 1.5 * 1.5));
            }
        }
    }
    return img;
}

/// Intensity centroid in a window around `guess`.
Point2 centroid(const FeatureMap<double>& img, const Point2& guess, double radius) {
    double sx = 0.0, sy = 0.0, sw = 0.0;
    for (std::size_t r = 0; r < img.height(); ++r) {
        for (std::size_t c = 0; c < img.width(); ++c) {
            if (std::hypot(c - guess.x, r - guess.y) > radius) {
                continue;
            }
            const double v = img(0, r, c);
            sx += v * c;
            sy += v * r;
            sw += v;
        }
    }
    return {sx / sw, sy / sw};
}

/// Random landmark set whose first-group points sit at integer pixels.
LandmarkSet integer_landmarks(Rng& rng, std::size_t w, std::size_t h, std::size_t groups) {
    auto set = fixtures::random_landmarks(rng, w, h, groups);
    std::vector<LandmarkGroup> g = set.groups();
    for (auto& grp : g) {
        for (auto& p : grp.points) {
            p = {std::round(p.x), std::round(p.y)};
        }
    }
    return LandmarkSet(w, h, set.points_per_group(), std::move(g));
}

} // namespace

TEST(BuildWarp, SameLandmarksGiveIdentity) {
    Rng rng(1);
    const auto set = fixtures::random_landmarks(rng, 64, 64, 3);
    for (auto mode : {WarpMode::grouped, WarpMode::global}) {
        const auto f = build_warp(set, set, 64, 64, {.mode = mode});
        EXPECT_TRUE(f.is_identity());
        EXPECT_EQ(f.max_abs_difference(identity_field(64, 64)), 0.0);
    }
}

TEST(BuildWarp, GlobalFieldHitsSourceAtTargetLandmarks) {
    Rng rng(2);
    for (int trial = 0; trial < 10; ++trial) {
        const auto to = integer_landmarks(rng, 96, 80, 1);
        const auto from = fixtures::displaced(to, fixtures::random_displacement(rng, 5.0, 60.0));
        const auto f = build_warp(from, to, 80, 96, {.mode = WarpMode::global});
        const auto src = from.normalized_points();
        const auto dst = to.all_points();
        for (std::size_t i = 0; i < dst.size(); ++i) {
            const Point2 at = f.at(static_cast<std::size_t>(dst[i].y), static_cast<std::size_t>(dst[i].x));
            EXPECT_NEAR(at.x, src[i].x, 1e-6);
            EXPECT_NEAR(at.y, src[i].y, 1e-6);
        }
    }
}

TEST(BuildWarp, GroupedFieldTracksLandmarksAndSoloFields) {
    Rng rng(3);
    for (int trial = 0; trial < 5; ++trial) {
        const auto to = integer_landmarks(rng, 128, 128, 2);
        const auto from = fixtures::displaced(to, fixtures::random_displacement(rng, 4.0, 80.0));
        const auto grouped = build_warp(from, to, 128, 128, {.mode = WarpMode::grouped});
        const auto src = from.normalized_points();
        const auto dst = to.all_points();
        for (std::size_t i = 0; i < dst.size(); ++i) {
            const Point2 at = grouped.at(static_cast<std::size_t>(dst[i].y), static_cast<std::size_t>(dst[i].x));
            EXPECT_NEAR(at.x, src[i].x, 1e-2);
            EXPECT_NEAR(at.y, src[i].y, 1e-2);
        }
        for (std::size_t k = 0; k < 2; ++k) {
            const auto solo = rasterize_group_field(
                solve_tps(to.normalized_group(k), from.normalized_group(k)), 128, 128);
            for (const auto& p : to.group(k).points) {
                const auto r = static_cast<std::size_t>(p.y);
                const auto c = static_cast<std::size_t>(p.x);
                EXPECT_NEAR(grouped.at(r, c).x, solo.at(r, c).x, 1e-2);
                EXPECT_NEAR(grouped.at(r, c).y, solo.at(r, c).y, 1e-2);
            }
        }
    }
}

TEST(BuildWarp, Errors) {
    const LandmarkSet a(16, 16, 3, {{"a", {{1, 1}, {5, 2}, {3, 8}}}});
    const LandmarkSet b(16, 16, 3, {{"b", {{1, 1}, {5, 2}, {3, 8}}}});
    EXPECT_THROW(build_warp(a, b, 16, 16), ValidationError);
    const LandmarkSet line(16, 16, 3, {{"a", {{1, 1}, {2, 2}, {3, 3}}}});
    EXPECT_THROW(build_warp(a, line, 16, 16, {.mode = WarpMode::global, .regularization = 0.0}), GeometryError);
}

TEST(AlignStyleToPortrait, SameLandmarksReturnStyleExactly) {
    Rng rng(4);
    const auto lm = fixtures::random_landmarks(rng, 48, 40, 2);
    const auto style = fixtures::smooth_image(rng, 3, 40, 48);
    const auto pair = align_style_to_portrait(style, lm, lm);
    EXPECT_EQ(pair.warped_image, style);
    EXPECT_FALSE(pair.reference_image.has_value());
    EXPECT_EQ(pair.shared_landmarks, lm);
}

TEST(AlignStyleToPortrait, DotsMoveToPortraitLandmarks) {
    Rng rng(5);
    for (auto mode : {WarpMode::global, WarpMode::grouped}) {
        const auto style_lm = fixtures::random_landmarks(rng, 128, 128, 2);
        const auto portrait_lm = fixtures::displaced(style_lm, fixtures::random_displacement(rng, 5.0, 80.0));
        const auto pair = align_style_to_portrait(dot_image(style_lm), style_lm, portrait_lm, {.mode = mode});
        for (const auto& p : portrait_lm.all_points()) {
            const Point2 found = centroid(pair.warped_image, p, 2.5);
            EXPECT_LE(std::hypot(found.x - p.x, found.y - p.y), 1.0);
        }
    }
}

TEST(AlignStyleToPortrait, RoundTripPsnr) {
    Rng rng(6);
    for (int seed = 0; seed < 5; ++seed) {
        const auto style_lm = fixtures::random_landmarks(rng, 128, 128, 4);
        const auto portrait_lm = fixtures::displaced(style_lm, fixtures::random_displacement(rng, 4.0, 96.0));
        const auto style = fixtures::smooth_image(rng, 3, 128, 128);
        const auto portrait = fixtures::smooth_image(rng, 3, 128, 128);
        const auto there = align_style_to_portrait(style, style_lm, portrait, portrait_lm);
        ASSERT_TRUE(there.reference_image.has_value());
        const auto back = align_style_to_portrait(there.warped_image, portrait_lm, style, style_lm);
        EXPECT_GE(fixtures::interior_psnr(back.warped_image, style, 16), 30.0);
    }
}

TEST(MultiscaleFields, ResolutionsAndIdentity) {
    Rng rng(7);
    const auto lm = fixtures::random_landmarks(rng, 64, 64, 2);
    const auto fields = multiscale_fields(lm, lm, 64, 64, 4);
    ASSERT_EQ(fields.size(), 4u);
    for (std::size_t k = 0; k < 4; ++k) {
        EXPECT_EQ(fields[k].height(), 64u >> k);
        EXPECT_TRUE(fields[k].is_identity());
    }
    EXPECT_THROW(multiscale_fields(lm, lm, 60, 64, 4), ShapeError);
    EXPECT_THROW(multiscale_fields(lm, lm, 64, 64, 0), ValidationError);
}

TEST(MultiscaleFields, SingleScaleMatchesBuildWarp) {
    Rng rng(8);
    const auto from = fixtures::random_landmarks(rng, 64, 64, 2);
    const auto to = fixtures::displaced(from, fixtures::random_displacement(rng, 3.0, 48.0));
    const auto fields = multiscale_fields(from, to, 64, 64, 1);
    ASSERT_EQ(fields.size(), 1u);
    EXPECT_EQ(fields[0].max_abs_difference(build_warp(from, to, 64, 64)), 0.0);
}

TEST(MultiscaleFields, CrossScaleAgreement) {
    Rng rng(9);
    for (int trial = 0; trial < 5; ++trial) {
        const auto from = fixtures::random_landmarks(rng, 128, 128, 2);
        const auto to = fixtures::displaced(from, fixtures::random_displacement(rng, 4.0, 96.0));
        const auto fields = multiscale_fields(from, to, 128, 128, 3);
        for (std::size_t k = 1; k < fields.size(); ++k) {
            EXPECT_LE(upsample_field(fields[k], 128, 128).max_abs_difference(fields[0]), 1e-2);
        }
    }
}

TEST(BranchPairings, OrderAndShapes) {
    const FeatureMap<double> portrait(1, 2, 2, 1.0);
    const FeatureMap<double> stylized(1, 2, 2, 2.0);
    const FeatureMap<double> stylized_warped(1, 2, 2, 3.0);
    const FeatureMap<double> portrait_warped(1, 2, 2, 4.0);
    const auto pairs = branch_pairings(portrait, stylized, stylized_warped, portrait_warped);
    ASSERT_EQ(pairs.size(), 2u);
    EXPECT_EQ(pairs[0].first, stylized);
    EXPECT_EQ(pairs[0].second, portrait);
    EXPECT_EQ(pairs[1].first, stylized_warped);
    EXPECT_EQ(pairs[1].second, portrait_warped);

    const auto same = branch_pairings(portrait, portrait, portrait, portrait);
    EXPECT_EQ(same[0], same[1]);
    EXPECT_THROW(branch_pairings(portrait, FeatureMap<double>(1, 3, 2), stylized_warped, portrait_warped), ShapeError);
}

TEST(BranchPairings, MatchedPairsScoreLowerThanShuffled) {
    Rng rng(10);
    const SpatialCorrelativeOptions opts{2, 36, 0.07};
    double matched = 0.0;
    double shuffled = 0.0;
    for (int seed = 0; seed < 20; ++seed) {
        const auto p = fixtures::smooth_image(rng, 3, 32, 32, 8.0);
        const auto pw = fixtures::smooth_image(rng, 3, 32, 32, 8.0);
        // Stylized images keep the portraits' structure exactly.
        const auto pairs = branch_pairings(p, p, pw, pw);
        for (const auto& [a, b] : pairs) {
            matched += spatial_correlative_loss(a, b, opts);
        }
        shuffled += spatial_correlative_loss(pairs[0].first, pairs[1].second, opts);
        shuffled += spatial_correlative_loss(pairs[1].first, pairs[0].second, opts);
    }
    EXPECT_LT(matched, shuffled);
}

TEST(DiscriminationPairings, Order) {
    const FeatureMap<double> a(1, 2, 2, 1.0), b(1, 2, 2, 2.0), c(1, 2, 2, 3.0), d(1, 2, 2, 4.0);
    const auto pairs = discrimination_pairings(a, b, c, d);
    EXPECT_EQ(pairs[0].first, a);
    EXPECT_EQ(pairs[0].second, b);
    EXPECT_EQ(pairs[1].first, c);
    EXPECT_EQ(pairs[1].second, d);
}
