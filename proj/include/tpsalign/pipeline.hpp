#pragma once

// Portrait/style alignment flow: landmark sets in, backward warp fields and
// aligned image pairs out, plus the image pairings the losses consume.

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tpsalign/errors.hpp"
#include "tpsalign/feature_map.hpp"
#include "tpsalign/landmarks.hpp"
#include "tpsalign/sampler.hpp"
#include "tpsalign/tps.hpp"
#include "tpsalign/warp_field.hpp"

namespace tpsalign {

inline constexpr std::size_t kDefaultScales = 4;

enum class WarpMode {
    grouped, ///< one TPS per landmark group, blended by proximity
    global,  ///< a single TPS through every landmark
};

struct WarpOptions {
    WarpMode mode = WarpMode::grouped;
    /// Unset: default_regularization() of each solve's constraint points.
    std::optional<double> regularization;
    double blend_epsilon = kDefaultBlendEpsilon;
    std::size_t threads = 1;
};

namespace detail {

inline TpsTransform solve_backward(const Points& target, const Points& source, const WarpOptions& options) {
    return options.regularization ? solve_tps(target, source, *options.regularization) : solve_tps(target, source);
}

} // namespace detail

/// Field that, applied to an image carrying landmarks `from`, yields an
/// image carrying landmarks `to`. Each output pixel samples the source
/// location that the target-to-source TPS assigns to it.
inline WarpField build_warp(const LandmarkSet& from, const LandmarkSet& to, std::size_t height, std::size_t width,
                            const WarpOptions& options = {}) {
    if (!from.compatible_with(to)) {
        throw ValidationError("build_warp: landmark sets are not compatible (group names, order or size differ)");
    }
    const Points source = from.normalized_points();
    const Points target = to.normalized_points();
    if (source == target) {
        return identity_field(height, width);
    }
    if (options.mode == WarpMode::global || from.group_count() == 1) {
        return rasterize_group_field(detail::solve_backward(target, source, options), height, width, options.threads);
    }
    std::vector<WarpField> fields;
    std::vector<Points> target_groups;
    fields.reserve(from.group_count());
    for (std::size_t k = 0; k < from.group_count(); ++k) {
        Points tk = to.normalized_group(k);
        try {
            fields.push_back(rasterize_group_field(
                detail::solve_backward(tk, from.normalized_group(k), options), height, width, options.threads));
        } catch (const GeometryError& e) {
            throw GeometryError("group '" + from.group(k).name + "': " + e.what());
        }
        target_groups.push_back(std::move(tk));
    }
    return blend_group_fields(fields, target_groups, options.blend_epsilon, options.threads);
}

template <class T>
struct AlignedPair {
    /// The image whose geometry the warped image now shares; absent when
    /// only the target landmarks were supplied.
    std::optional<FeatureMap<T>> reference_image;
    FeatureMap<T> warped_image;
    LandmarkSet shared_landmarks;
    LandmarkSet source_landmarks;
    WarpField field;

    void validate() const {
        if (warped_image.height() != field.height() || warped_image.width() != field.width()) {
            throw ShapeError("AlignedPair: warped image and field differ in size");
        }
        if (reference_image && (reference_image->height() != field.height() ||
                                reference_image->width() != field.width())) {
            throw ShapeError("AlignedPair: reference image and field differ in size");
        }
        if (!shared_landmarks.compatible_with(source_landmarks)) {
            throw ValidationError("AlignedPair: landmark sets are not compatible");
        }
    }
};

/// Warps `style` from its own landmarks onto `portrait_lm`, at the portrait
/// landmark set's resolution.
template <class T>
AlignedPair<T> align_style_to_portrait(const FeatureMap<T>& style, const LandmarkSet& style_lm,
                                       const LandmarkSet& portrait_lm, const WarpOptions& options = {},
                                       Border border = Border::clamp) {
    WarpField field = build_warp(style_lm, portrait_lm, portrait_lm.height(), portrait_lm.width(), options);
    FeatureMap<T> warped = warp_image(style, field, border, options.threads);
    AlignedPair<T> pair{std::nullopt, std::move(warped), portrait_lm, style_lm, std::move(field)};
    pair.validate();
    return pair;
}

template <class T>
AlignedPair<T> align_style_to_portrait(const FeatureMap<T>& style, const LandmarkSet& style_lm,
                                       const FeatureMap<T>& portrait, const LandmarkSet& portrait_lm,
                                       const WarpOptions& options = {}, Border border = Border::clamp) {
    WarpField field = build_warp(style_lm, portrait_lm, portrait.height(), portrait.width(), options);
    FeatureMap<T> warped = warp_image(style, field, border, options.threads);
    AlignedPair<T> pair{portrait, std::move(warped), portrait_lm, style_lm, std::move(field)};
    pair.validate();
    return pair;
}

/// Fields for a feature pyramid: level k has resolution base / 2^k and is
/// built from landmarks downscaled by 2^k.
inline std::vector<WarpField> multiscale_fields(const LandmarkSet& from, const LandmarkSet& to,
                                                std::size_t base_height, std::size_t base_width,
                                                std::size_t scales = kDefaultScales, const WarpOptions& options = {}) {
    if (scales == 0) {
        throw ValidationError("multiscale_fields: scales must be >= 1");
    }
    if (scales > 31) {
        throw ValidationError("multiscale_fields: too many scales");
    }
    const std::size_t coarsest = std::size_t{1} << (scales - 1);
    if (base_height % coarsest != 0 || base_width % coarsest != 0) {
        throw ShapeError("multiscale_fields: " + std::to_string(base_height) + "x" + std::to_string(base_width) +
                         " is not divisible by " + std::to_string(coarsest));
    }
    std::vector<WarpField> fields;
    fields.reserve(scales);
    for (std::size_t k = 0; k < scales; ++k) {
        const std::size_t factor = std::size_t{1} << k;
        fields.push_back(build_warp(downscale_landmarks(from, factor), downscale_landmarks(to, factor),
                                    base_height / factor, base_width / factor, options));
    }
    return fields;
}

template <class T>
using FeaturePair = std::pair<FeatureMap<T>, FeatureMap<T>>;

/// The two landmark-identical pairs compared by the spatial-correlative
/// constraint: (stylized, portrait) and (stylized_warped, portrait_warped).
template <class T>
std::vector<FeaturePair<T>> branch_pairings(const FeatureMap<T>& portrait, const FeatureMap<T>& stylized,
                                            const FeatureMap<T>& stylized_warped,
                                            const FeatureMap<T>& portrait_warped) {
    if (!portrait.same_shape(stylized)) {
        throw ShapeError("branch_pairings: portrait " + shape_string(portrait) + " vs stylized " +
                         shape_string(stylized));
    }
    if (!portrait_warped.same_shape(stylized_warped)) {
        throw ShapeError("branch_pairings: portrait_warped " + shape_string(portrait_warped) +
                         " vs stylized_warped " + shape_string(stylized_warped));
    }
    return {{stylized, portrait}, {stylized_warped, portrait_warped}};
}

/// The geometry-aligned pairs fed to the style discriminator:
/// (stylized, style_warped) and (stylized_warped, style).
template <class T>
std::vector<FeaturePair<T>> discrimination_pairings(const FeatureMap<T>& stylized, const FeatureMap<T>& style_warped,
                                                    const FeatureMap<T>& stylized_warped,
                                                    const FeatureMap<T>& style) {
    if (!stylized.same_shape(style_warped) || !stylized_warped.same_shape(style)) {
        throw ShapeError("discrimination_pairings: paired maps differ in shape");
    }
    return {{stylized, style_warped}, {stylized_warped, style}};
}

} // namespace tpsalign
