#pragma once

// Bilinear resampling of feature maps through a WarpField, with the exact
// backward pass for both the sampled values and the field coordinates.
//
// A normalized coordinate u maps to pixel position (u + 1) * W / 2 - 0.5.
// Under Border::clamp the position is clamped to [0, W - 1] before
// interpolation, which replicates edge pixels; the coordinate gradient is
// zero along an axis whose position was clamped. Under Border::zeros the
// taps that fall outside the image read as 0.

#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "tpsalign/errors.hpp"
#include "tpsalign/feature_map.hpp"
#include "tpsalign/geometry.hpp"
#include "tpsalign/parallel.hpp"
#include "tpsalign/warp_field.hpp"

namespace tpsalign {

enum class Border { clamp, zeros };

namespace detail {

/// Two taps along one axis: indices, weights, and whether each tap is inside
/// the image. d_pos is d(position)/d(normalized coordinate), zero if clamped.
struct AxisTaps {
    std::array<std::ptrdiff_t, 2> index{};
    std::array<double, 2> weight{};
    std::array<bool, 2> inside{};
    double d_pos = 0.0;
};

inline AxisTaps axis_taps(double normalized, std::size_t extent, Border border) {
    const double n = static_cast<double>(extent);
    double pos = (normalized + 1.0) * 0.5 * n - 0.5;
    AxisTaps taps;
    taps.d_pos = 0.5 * n;
    if (border == Border::clamp) {
        const double hi = n - 1.0;
        if (pos <= 0.0 || pos >= hi) {
            if (pos < 0.0 || pos > hi) {
                taps.d_pos = 0.0;
            }
            pos = std::clamp(pos, 0.0, hi);
        }
    }
    const double f = std::floor(pos);
    const auto i0 = static_cast<std::ptrdiff_t>(f);
    const double frac = pos - f;
    taps.index = {i0, i0 + 1};
    taps.weight = {1.0 - frac, frac};
    const auto last = static_cast<std::ptrdiff_t>(extent) - 1;
    for (int k = 0; k < 2; ++k) {
        if (border == Border::clamp) {
            taps.index[k] = std::min(taps.index[k], last);
            taps.inside[k] = true;
        } else {
            taps.inside[k] = taps.index[k] >= 0 && taps.index[k] <= last;
        }
    }
    return taps;
}

} // namespace detail

template <class T>
FeatureMap<T> grid_sample(const FeatureMap<T>& input, const WarpField& field, Border border = Border::clamp,
                          std::size_t threads = 1) {
    const std::size_t h = field.height();
    const std::size_t w = field.width();
    if (field.is_identity() && input.height() == h && input.width() == w) {
        return input;
    }
    const std::size_t channels = input.channels();
    FeatureMap<T> out(channels, h, w);
    parallel_rows(h, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t r = begin; r < end; ++r) {
            for (std::size_t s = 0; s < w; ++s) {
                const Point2& p = field.at(r, s);
                const auto tx = detail::axis_taps(p.x, input.width(), border);
                const auto ty = detail::axis_taps(p.y, input.height(), border);
                for (std::size_t c = 0; c < channels; ++c) {
                    double acc = 0.0;
                    for (int j = 0; j < 2; ++j) {
                        if (!ty.inside[j]) {
                            continue;
                        }
                        for (int i = 0; i < 2; ++i) {
                            if (!tx.inside[i]) {
                                continue;
                            }
                            const double wgt = ty.weight[j] * tx.weight[i];
                            if (wgt == 0.0) {
                                continue;
                            }
                            acc += wgt * static_cast<double>(input(c, static_cast<std::size_t>(ty.index[j]),
                                                                   static_cast<std::size_t>(tx.index[i])));
                        }
                    }
                    out(c, r, s) = static_cast<T>(acc);
                }
            }
        }
    });
    return out;
}

template <class T>
struct GridSampleGrad {
    FeatureMap<T> grad_input;
    /// d(loss)/d(field coordinate), one (dx, dy) per output pixel, row-major.
    std::vector<Point2> grad_field;
};

template <class T>
GridSampleGrad<T> grid_sample_backward(const FeatureMap<T>& grad_output, const FeatureMap<T>& input,
                                       const WarpField& field, Border border = Border::clamp) {
    const std::size_t h = field.height();
    const std::size_t w = field.width();
    const std::size_t channels = input.channels();
    if (grad_output.channels() != channels || grad_output.height() != h || grad_output.width() != w) {
        throw ShapeError("grid_sample_backward: grad_output is " + shape_string(grad_output) + ", expected " +
                         std::to_string(channels) + "x" + std::to_string(h) + "x" + std::to_string(w));
    }
    GridSampleGrad<T> grads{FeatureMap<T>(channels, input.height(), input.width()),
                            std::vector<Point2>(h * w)};
    // Accumulate grad_input in double, in output-pixel order.
    std::vector<double> grad_in(input.size(), 0.0);
    const std::size_t plane = input.plane_size();
    for (std::size_t r = 0; r < h; ++r) {
        for (std::size_t s = 0; s < w; ++s) {
            const Point2& p = field.at(r, s);
            const auto tx = detail::axis_taps(p.x, input.width(), border);
            const auto ty = detail::axis_taps(p.y, input.height(), border);
            double gx = 0.0;
            double gy = 0.0;
            for (std::size_t c = 0; c < channels; ++c) {
                const double g = static_cast<double>(grad_output(c, r, s));
                double v[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
                for (int j = 0; j < 2; ++j) {
                    for (int i = 0; i < 2; ++i) {
                        if (!ty.inside[j] || !tx.inside[i]) {
                            continue;
                        }
                        const auto row = static_cast<std::size_t>(ty.index[j]);
                        const auto col = static_cast<std::size_t>(tx.index[i]);
                        v[j][i] = static_cast<double>(input(c, row, col));
                        grad_in[c * plane + row * input.width() + col] += g * ty.weight[j] * tx.weight[i];
                    }
                }
                // d out / d pos_x and d out / d pos_y of the bilinear patch.
                const double dpx = ty.weight[0] * (v[0][1] - v[0][0]) + ty.weight[1] * (v[1][1] - v[1][0]);
                const double dpy = tx.weight[0] * (v[1][0] - v[0][0]) + tx.weight[1] * (v[1][1] - v[0][1]);
                gx += g * dpx;
                gy += g * dpy;
            }
            grads.grad_field[r * w + s] = {gx * tx.d_pos, gy * ty.d_pos};
        }
    }
    auto out = grads.grad_input.values();
    for (std::size_t i = 0; i < grad_in.size(); ++i) {
        out[i] = static_cast<T>(grad_in[i]);
    }
    return grads;
}

/// Image-space warp; identical numerics to grid_sample.
template <class T>
FeatureMap<T> warp_image(const FeatureMap<T>& image, const WarpField& field, Border border = Border::clamp,
                         std::size_t threads = 1) {
    return grid_sample(image, field, border, threads);
}

/// Bilinear resize (align_corners = false convention, edge replication).
template <class T>
FeatureMap<T> resize_bilinear(const FeatureMap<T>& input, std::size_t height, std::size_t width) {
    return grid_sample(input, identity_field(height, width), Border::clamp);
}

/// Averages factor x factor blocks. Dimensions must divide evenly.
template <class T>
FeatureMap<T> downsample_average(const FeatureMap<T>& input, std::size_t factor) {
    if (factor == 0 || input.height() % factor != 0 || input.width() % factor != 0) {
        throw ShapeError("downsample_average: " + shape_string(input) + " not divisible by " +
                         std::to_string(factor));
    }
    const std::size_t h = input.height() / factor;
    const std::size_t w = input.width() / factor;
    FeatureMap<T> out(input.channels(), h, w);
    const double norm = 1.0 / static_cast<double>(factor * factor);
    for (std::size_t c = 0; c < input.channels(); ++c) {
        for (std::size_t r = 0; r < h; ++r) {
            for (std::size_t s = 0; s < w; ++s) {
                double acc = 0.0;
                for (std::size_t dr = 0; dr < factor; ++dr) {
                    for (std::size_t ds = 0; ds < factor; ++ds) {
                        acc += static_cast<double>(input(c, r * factor + dr, s * factor + ds));
                    }
                }
                out(c, r, s) = static_cast<T>(acc * norm);
            }
        }
    }
    return out;
}

} // namespace tpsalign
