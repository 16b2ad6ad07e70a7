#pragma once

// Generators for randomized tests: landmark configurations, smooth images,
// smooth displacement fields, and image-quality metrics.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "tpsalign/tpsalign.hpp"

namespace tpsalign::fixtures {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

/// n points in [lo, hi]^2 at least min_sep apart.
inline Points random_points(Rng& rng, std::size_t n, double lo = -0.8, double hi = 0.8, double min_sep = 0.05) {
    Points pts;
    while (pts.size() < n) {
        const Point2 p{uniform(rng, lo, hi), uniform(rng, lo, hi)};
        const bool ok = std::all_of(pts.begin(), pts.end(), [&](const Point2& q) { return distance(p, q) >= min_sep; });
        if (ok) {
            pts.push_back(p);
        }
    }
    return pts;
}

/// Smooth random displacement: a few low-frequency sinusoids, amplitude in
/// the same units as the points it is applied to.
struct SmoothDisplacement {
    struct Term {
        double ax, ay, kx, ky, phase;
    };
    std::vector<Term> terms;
    Point2 shift{0.0, 0.0};

    Point2 operator()(const Point2& p) const {
        Point2 d = shift;
        for (const auto& t : terms) {
            const double s = std::sin(t.kx * p.x + t.ky * p.y + t.phase);
            d.x += t.ax * s;
            d.y += t.ay * s;
        }
        return d;
    }
};

/// Wavelengths are at least `min_wavelength` (in the same units as the points).
inline SmoothDisplacement random_displacement(Rng& rng, double amplitude, double min_wavelength) {
    SmoothDisplacement d;
    d.shift = {uniform(rng, -amplitude, amplitude) * 0.5, uniform(rng, -amplitude, amplitude) * 0.5};
    const double kmax = 2.0 * std::numbers::pi / min_wavelength;
    for (int i = 0; i < 3; ++i) {
        d.terms.push_back({uniform(rng, -amplitude, amplitude) * 0.5, uniform(rng, -amplitude, amplitude) * 0.5,
                           uniform(rng, -kmax, kmax), uniform(rng, -kmax, kmax),
                           uniform(rng, 0.0, 2.0 * std::numbers::pi)});
    }
    return d;
}

/// A face-like set: `groups` clusters of n points, each cluster inside its
/// own cell of a grid covering the central part of the image.
inline LandmarkSet random_landmarks(Rng& rng, std::size_t width, std::size_t height, std::size_t groups,
                                    std::size_t n = kDefaultPointsPerGroup, double margin_fraction = 0.2) {
    const auto cols = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(groups))));
    const std::size_t rows = (groups + cols - 1) / cols;
    const double x0 = margin_fraction * static_cast<double>(width);
    const double y0 = margin_fraction * static_cast<double>(height);
    const double cw = (1.0 - 2.0 * margin_fraction) * static_cast<double>(width) / static_cast<double>(cols);
    const double ch = (1.0 - 2.0 * margin_fraction) * static_cast<double>(height) / static_cast<double>(rows);
    std::vector<LandmarkGroup> out;
    for (std::size_t k = 0; k < groups; ++k) {
        const double gx = x0 + static_cast<double>(k % cols) * cw;
        const double gy = y0 + static_cast<double>(k / cols) * ch;
        LandmarkGroup g{"group" + std::to_string(k), {}};
        const double sep = 0.08 * std::min(cw, ch);
        while (g.points.size() < n) {
            const Point2 p{uniform(rng, gx + 0.1 * cw, gx + 0.9 * cw), uniform(rng, gy + 0.1 * ch, gy + 0.9 * ch)};
            const bool ok =
                std::all_of(g.points.begin(), g.points.end(), [&](const Point2& q) { return distance(p, q) >= sep; });
            if (ok) {
                g.points.push_back(p);
            }
        }
        out.push_back(std::move(g));
    }
    return LandmarkSet(width, height, n, std::move(out));
}

/// The same groups moved by a displacement (pixel units).
template <class Displacement>
LandmarkSet displaced(const LandmarkSet& set, const Displacement& d) {
    std::vector<LandmarkGroup> groups = set.groups();
    for (auto& g : groups) {
        for (auto& p : g.points) {
            p = p + d(p);
        }
    }
    return LandmarkSet(set.width(), set.height(), set.points_per_group(), std::move(groups));
}

/// Sum of a few low-frequency sinusoids per channel, values in [0, 1].
inline FeatureMap<double> smooth_image(Rng& rng, std::size_t channels, std::size_t height, std::size_t width,
                                       double min_wavelength_px = 32.0) {
    FeatureMap<double> img(channels, height, width);
    const double kmax = 2.0 * std::numbers::pi / min_wavelength_px;
    for (std::size_t c = 0; c < channels; ++c) {
        struct Wave {
            double kx, ky, phase, amp;
        };
        std::vector<Wave> waves;
        for (int i = 0; i < 4; ++i) {
            waves.push_back({uniform(rng, -kmax, kmax), uniform(rng, -kmax, kmax),
                             uniform(rng, 0.0, 2.0 * std::numbers::pi), uniform(rng, 0.05, 0.12)});
        }
        for (std::size_t r = 0; r < height; ++r) {
            for (std::size_t s = 0; s < width; ++s) {
                double v = 0.5;
                for (const auto& w : waves) {
                    v += w.amp * std::sin(w.kx * static_cast<double>(s) + w.ky * static_cast<double>(r) + w.phase);
                }
                img(c, r, s) = std::clamp(v, 0.0, 1.0);
            }
        }
    }
    return img;
}

inline FeatureMap<double> random_map(Rng& rng, std::size_t c, std::size_t h, std::size_t w, double lo = -1.0,
                                     double hi = 1.0) {
    FeatureMap<double> m(c, h, w);
    for (auto& v : m.values()) {
        v = uniform(rng, lo, hi);
    }
    return m;
}

/// PSNR (peak 1) over pixels at least `margin` from every border.
inline double interior_psnr(const FeatureMap<double>& a, const FeatureMap<double>& b, std::size_t margin) {
    double se = 0.0;
    std::size_t count = 0;
    for (std::size_t c = 0; c < a.channels(); ++c) {
        for (std::size_t r = margin; r + margin < a.height(); ++r) {
            for (std::size_t s = margin; s + margin < a.width(); ++s) {
                const double d = a(c, r, s) - b(c, r, s);
                se += d * d;
                ++count;
            }
        }
    }
    const double mse = se / static_cast<double>(count);
    return mse == 0.0 ? std::numeric_limits<double>::infinity() : 10.0 * std::log10(1.0 / mse);
}

inline double mean_abs_difference(const FeatureMap<double>& a, const FeatureMap<double>& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        acc += std::abs(a.values()[i] - b.values()[i]);
    }
    return acc / static_cast<double>(a.size());
}

/// Random smooth field around the identity, pixel-scale displacement up to
/// `amplitude_px`.
inline WarpField random_smooth_field(Rng& rng, std::size_t height, std::size_t width, double amplitude_px) {
    const auto d = random_displacement(rng, amplitude_px, 0.75 * static_cast<double>(std::max(height, width)));
    std::vector<Point2> coords(height * width);
    for (std::size_t r = 0; r < height; ++r) {
        for (std::size_t c = 0; c < width; ++c) {
            const Point2 px{static_cast<double>(c), static_cast<double>(r)};
            coords[r * width + c] = normalize_point(px + d(px), width, height);
        }
    }
    return WarpField(height, width, std::move(coords));
}

} // namespace tpsalign::fixtures
