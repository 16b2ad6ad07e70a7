// Aligns a synthetic checkerboard to a shifted copy of its landmarks and
// reports how far the warped landmarks are from where they should be.

#include <cmath>
#include <cstdio>

#include "tpsalign/tpsalign.hpp"

using namespace tpsalign;

int main() {
    constexpr std::size_t kSize = 128;

    FeatureMap<double> style(1, kSize, kSize);
    for (std::size_t r = 0; r < kSize; ++r) {
        for (std::size_t c = 0; c < kSize; ++c) {
            style(0, r, c) = ((r / 16 + c / 16) % 2) ? 1.0 : 0.0;
        }
    }

    std::vector<LandmarkGroup> style_groups{{"left_eye", {}}, {"right_eye", {}}};
    std::vector<LandmarkGroup> portrait_groups = style_groups;
    for (int i = 0; i < 10; ++i) {
        const double a = 2.0 * M_PI * i / 10.0;
        const Point2 ring{12.0 * std::cos(a), 8.0 * std::sin(a)};
        style_groups[0].points.push_back(Point2{40, 56} + ring);
        style_groups[1].points.push_back(Point2{88, 56} + ring);
        // The portrait's eyes sit a little further apart and lower.
        portrait_groups[0].points.push_back(Point2{36, 60} + ring);
        portrait_groups[1].points.push_back(Point2{92, 60} + ring);
    }
    const LandmarkSet style_lm(kSize, kSize, 10, style_groups);
    const LandmarkSet portrait_lm(kSize, kSize, 10, portrait_groups);

    const auto aligned = align_style_to_portrait(style, style_lm, portrait_lm);

    // The warped style sampled at a portrait landmark should read the style
    // at the matching style landmark.
    double worst = 0.0;
    const auto src = style_lm.normalized_points();
    const auto dst = portrait_lm.all_points();
    for (std::size_t i = 0; i < dst.size(); ++i) {
        const Point2 at = aligned.field.at(static_cast<std::size_t>(std::lround(dst[i].y)),
                                           static_cast<std::size_t>(std::lround(dst[i].x)));
        worst = std::max(worst, distance(at, src[i]) * kSize / 2.0);
    }
    std::printf("groups: %zu, landmarks: %zu\n", style_lm.group_count(), dst.size());
    std::printf("max landmark miss after alignment: %.3f px (rounding to the pixel grid included)\n", worst);
    return 0;
}
