#pragma once

// Dense backward sampling fields. coords(r, c) is the normalized source
// location sampled for output pixel (r, c).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tpsalign/errors.hpp"
#include "tpsalign/geometry.hpp"
#include "tpsalign/landmarks.hpp"
#include "tpsalign/parallel.hpp"
#include "tpsalign/tps.hpp"

namespace tpsalign {

inline constexpr double kDefaultBlendEpsilon = 1e-4;

class WarpField {
public:
    WarpField(std::size_t height, std::size_t width, std::vector<Point2> coords)
        : height_(height), width_(width), coords_(std::move(coords)) {
        if (height_ == 0 || width_ == 0) {
            throw ShapeError("WarpField: zero dimension");
        }
        if (coords_.size() != height_ * width_) {
            throw ShapeError("WarpField: expected " + std::to_string(height_ * width_) + " coordinates, got " +
                             std::to_string(coords_.size()));
        }
        for (const auto& p : coords_) {
            if (!is_finite(p)) {
                throw ValidationError("WarpField: non-finite coordinate");
            }
        }
    }

    /// Every pixel samples its own center. Samplers copy instead of
    /// interpolating when they see this flag and sizes match.
    static WarpField identity(std::size_t height, std::size_t width) {
        if (height == 0 || width == 0) {
            throw ShapeError("identity_field: zero dimension");
        }
        std::vector<Point2> coords(height * width);
        for (std::size_t r = 0; r < height; ++r) {
            for (std::size_t c = 0; c < width; ++c) {
                coords[r * width + c] = pixel_center(r, c, height, width);
            }
        }
        WarpField f(height, width, std::move(coords));
        f.identity_ = true;
        return f;
    }

    static Point2 pixel_center(std::size_t r, std::size_t c, std::size_t height, std::size_t width) {
        return normalize_point({static_cast<double>(c), static_cast<double>(r)}, width, height);
    }

    std::size_t height() const { return height_; }
    std::size_t width() const { return width_; }
    bool is_identity() const { return identity_; }
    const Point2& at(std::size_t r, std::size_t c) const { return coords_[r * width_ + c]; }
    std::span<const Point2> coords() const { return coords_; }

    /// Largest coordinate difference to another field of the same size.
    double max_abs_difference(const WarpField& other) const {
        if (other.height_ != height_ || other.width_ != width_) {
            throw ShapeError("WarpField: size mismatch");
        }
        double worst = 0.0;
        for (std::size_t i = 0; i < coords_.size(); ++i) {
            worst = std::max({worst, std::abs(coords_[i].x - other.coords_[i].x),
                              std::abs(coords_[i].y - other.coords_[i].y)});
        }
        return worst;
    }

private:
    std::size_t height_;
    std::size_t width_;
    std::vector<Point2> coords_;
    bool identity_ = false;
};

inline WarpField identity_field(std::size_t height, std::size_t width) { return WarpField::identity(height, width); }

/// Evaluates the transform at every pixel center. Rows are split across
/// threads; each pixel goes through exactly the same arithmetic as eval_tps.
inline WarpField rasterize_group_field(const TpsTransform& t, std::size_t height, std::size_t width,
                                       std::size_t threads = 1) {
    if (height == 0 || width == 0) {
        throw ShapeError("rasterize_group_field: zero dimension");
    }
    std::vector<Point2> coords(height * width);
    parallel_rows(height, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t r = begin; r < end; ++r) {
            for (std::size_t c = 0; c < width; ++c) {
                coords[r * width + c] = t(WarpField::pixel_center(r, c, height, width));
            }
        }
    });
    return WarpField(height, width, std::move(coords));
}

/// Combines K per-group fields into one. Each pixel takes a convex
/// combination of the groups' displacements with weights proportional to
/// 1 / (d_k^2 + epsilon), d_k being the normalized distance to the nearest
/// landmark of group k. Terms are summed in group order.
inline WarpField blend_group_fields(std::span<const WarpField> fields, std::span<const Points> groups,
                                    double epsilon = kDefaultBlendEpsilon, std::size_t threads = 1) {
    if (fields.empty()) {
        throw ShapeError("blend_group_fields: no fields");
    }
    if (fields.size() != groups.size()) {
        throw ShapeError("blend_group_fields: " + std::to_string(fields.size()) + " fields but " +
                         std::to_string(groups.size()) + " groups");
    }
    if (!(epsilon > 0.0)) {
        throw ValidationError("blend_group_fields: epsilon must be positive");
    }
    const std::size_t h = fields[0].height();
    const std::size_t w = fields[0].width();
    for (const auto& f : fields) {
        if (f.height() != h || f.width() != w) {
            throw ShapeError("blend_group_fields: fields differ in size");
        }
    }
    for (const auto& g : groups) {
        if (g.empty()) {
            throw ValidationError("blend_group_fields: empty landmark group");
        }
    }
    if (fields.size() == 1) {
        return fields[0];
    }

    const std::size_t k_count = fields.size();
    std::vector<Point2> coords(h * w);
    parallel_rows(h, threads, [&](std::size_t begin, std::size_t end) {
        std::vector<double> weight(k_count);
        for (std::size_t r = begin; r < end; ++r) {
            for (std::size_t c = 0; c < w; ++c) {
                const Point2 p = WarpField::pixel_center(r, c, h, w);
                double total = 0.0;
                for (std::size_t k = 0; k < k_count; ++k) {
                    double nearest = std::numeric_limits<double>::infinity();
                    for (const auto& q : groups[k]) {
                        nearest = std::min(nearest, squared_distance(p, q));
                    }
                    weight[k] = 1.0 / (nearest + epsilon);
                    total += weight[k];
                }
                Point2 disp{0.0, 0.0};
                for (std::size_t k = 0; k < k_count; ++k) {
                    const Point2 dk = fields[k].at(r, c) - p;
                    disp = disp + dk * (weight[k] / total);
                }
                coords[r * w + c] = p + disp;
            }
        }
    });
    return WarpField(h, w, std::move(coords));
}

/// Resamples a field to another resolution by bilinear interpolation of its
/// displacement (coords minus the pixel's own center), replicating the edge
/// displacement outside the source grid.
inline WarpField upsample_field(const WarpField& field, std::size_t height, std::size_t width) {
    if (height == 0 || width == 0) {
        throw ShapeError("upsample_field: zero dimension");
    }
    const std::size_t sh = field.height();
    const std::size_t sw = field.width();
    auto displacement = [&](std::size_t r, std::size_t c) {
        return field.at(r, c) - WarpField::pixel_center(r, c, sh, sw);
    };
    std::vector<Point2> coords(height * width);
    for (std::size_t r = 0; r < height; ++r) {
        for (std::size_t c = 0; c < width; ++c) {
            const Point2 p = WarpField::pixel_center(r, c, height, width);
            const Point2 src = denormalize_point(p, sw, sh);
            const double x = std::clamp(src.x, 0.0, static_cast<double>(sw - 1));
            const double y = std::clamp(src.y, 0.0, static_cast<double>(sh - 1));
            const auto x0 = static_cast<std::size_t>(std::floor(x));
            const auto y0 = static_cast<std::size_t>(std::floor(y));
            const std::size_t x1 = std::min(x0 + 1, sw - 1);
            const std::size_t y1 = std::min(y0 + 1, sh - 1);
            const double fx = x - static_cast<double>(x0);
            const double fy = y - static_cast<double>(y0);
            const Point2 top = displacement(y0, x0) * (1.0 - fx) + displacement(y0, x1) * fx;
            const Point2 bottom = displacement(y1, x0) * (1.0 - fx) + displacement(y1, x1) * fx;
            coords[r * width + c] = p + top * (1.0 - fy) + bottom * fy;
        }
    }
    return WarpField(height, width, std::move(coords));
}

} // namespace tpsalign
