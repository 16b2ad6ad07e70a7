#pragma once

// Training objectives as plain numerical kernels. Networks are out of
// scope: discriminator scores, discriminator features and perceptual
// feature stacks all come from the caller.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tpsalign/errors.hpp"
#include "tpsalign/feature_map.hpp"

namespace tpsalign {

inline constexpr double kScoreClamp = 1e-7;
inline constexpr double kDefaultTemperature = 0.07;
inline constexpr std::size_t kDefaultWindowRadius = 4;
inline constexpr std::size_t kDefaultQueryCount = 256;

struct LossWeights {
    double lambda1 = 1.0;  // feature matching
    double lambda2 = 1.0;  // spatial-correlative
    double lambda3 = 10.0; // cycle consistency

    void validate() const {
        for (double v : {lambda1, lambda2, lambda3}) {
            if (!std::isfinite(v) || v < 0.0) {
                throw ValidationError("LossWeights: weights must be finite and non-negative");
            }
        }
    }
};

inline double clamp_probability(double p) { return std::clamp(p, kScoreClamp, 1.0 - kScoreClamp); }

namespace detail {

inline double mean_log(std::span<const double> scores, bool complement) {
    double acc = 0.0;
    for (double s : scores) {
        const double p = clamp_probability(s);
        acc += std::log(complement ? 1.0 - p : p);
    }
    return acc / static_cast<double>(scores.size());
}

template <class T>
void require_same_shape(const FeatureMap<T>& a, const FeatureMap<T>& b, const char* what) {
    if (!a.same_shape(b)) {
        throw ShapeError(std::string(what) + ": shapes " + shape_string(a) + " and " + shape_string(b) + " differ");
    }
}

inline double cosine(std::span<const double> a, std::span<const double> b) {
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) {
        return 0.0;
    }
    return std::clamp(dot / std::sqrt(na * nb), -1.0, 1.0);
}

} // namespace detail

/// Discriminator objective: -(E log D(real) + E log(1 - D(fake))).
inline double gan_loss_discriminator(std::span<const double> real_scores, std::span<const double> fake_scores) {
    if (real_scores.empty() || fake_scores.empty()) {
        throw ValidationError("gan_loss_discriminator: empty score list");
    }
    return -(detail::mean_log(real_scores, false) + detail::mean_log(fake_scores, true));
}

enum class GeneratorLoss { minimax, non_saturating };

inline double gan_loss_generator(std::span<const double> fake_scores,
                                 GeneratorLoss mode = GeneratorLoss::non_saturating) {
    if (fake_scores.empty()) {
        throw ValidationError("gan_loss_generator: empty score list");
    }
    return mode == GeneratorLoss::minimax ? detail::mean_log(fake_scores, true)
                                          : -detail::mean_log(fake_scores, false);
}

enum class ChannelReduction { mean, max };

/// Collapses channels to one H x W map, in double.
template <class T>
std::vector<double> reduce_channels(const FeatureMap<T>& m, ChannelReduction reduction) {
    const std::size_t plane = m.plane_size();
    std::vector<double> out(plane, reduction == ChannelReduction::max ? -std::numeric_limits<double>::infinity() : 0.0);
    for (std::size_t c = 0; c < m.channels(); ++c) {
        const auto ch = m.channel(c);
        for (std::size_t i = 0; i < plane; ++i) {
            const double v = static_cast<double>(ch[i]);
            out[i] = reduction == ChannelReduction::max ? std::max(out[i], v) : out[i] + v;
        }
    }
    if (reduction == ChannelReduction::mean) {
        for (double& v : out) {
            v /= static_cast<double>(m.channels());
        }
    }
    return out;
}

/// L1 between the channel-reduced spatial maps of real and fake
/// discriminator features, averaged over pixels.
template <class T>
double feature_matching_loss(const FeatureMap<T>& real_features, const FeatureMap<T>& fake_features,
                             ChannelReduction reduction = ChannelReduction::mean) {
    detail::require_same_shape(real_features, fake_features, "feature_matching_loss");
    const auto a = reduce_channels(real_features, reduction);
    const auto b = reduce_channels(fake_features, reduction);
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        acc += std::abs(a[i] - b[i]);
    }
    return acc / static_cast<double>(a.size());
}

struct QueryLocation {
    std::size_t row = 0;
    std::size_t col = 0;

    friend bool operator==(const QueryLocation&, const QueryLocation&) = default;
    friend auto operator<=>(const QueryLocation&, const QueryLocation&) = default;
};

/// Per query, the cosine similarity of its feature vector against every
/// position of the (2r+1)^2 window around it, row-major.
struct SimilarityMapSet {
    std::vector<QueryLocation> query_locations;
    std::vector<std::vector<double>> maps;
    std::size_t window_radius = 0;
};

/// Up to `count` query positions on a uniform grid, kept r pixels inside
/// every border. Small maps yield fewer (deduplicated) positions.
inline std::vector<QueryLocation> interior_query_grid(std::size_t height, std::size_t width, std::size_t radius,
                                                      std::size_t count = kDefaultQueryCount) {
    if (height < 2 * radius + 1 || width < 2 * radius + 1) {
        throw ShapeError("interior_query_grid: " + std::to_string(height) + "x" + std::to_string(width) +
                         " map too small for window radius " + std::to_string(radius));
    }
    const auto side = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(count)))));
    auto axis = [&](std::size_t extent) {
        std::vector<std::size_t> v;
        const double lo = static_cast<double>(radius);
        const double hi = static_cast<double>(extent - 1 - radius);
        for (std::size_t i = 0; i < side; ++i) {
            const double t = side == 1 ? 0.5 : static_cast<double>(i) / static_cast<double>(side - 1);
            v.push_back(static_cast<std::size_t>(std::lround(lo + t * (hi - lo))));
        }
        v.erase(std::unique(v.begin(), v.end()), v.end());
        return v;
    };
    std::vector<QueryLocation> out;
    for (std::size_t r : axis(height)) {
        for (std::size_t c : axis(width)) {
            out.push_back({r, c});
        }
    }
    return out;
}

template <class T>
SimilarityMapSet spatial_correlative_maps(const FeatureMap<T>& features, std::span<const QueryLocation> queries,
                                          std::size_t window_radius = kDefaultWindowRadius) {
    const std::size_t channels = features.channels();
    const auto rad = static_cast<std::ptrdiff_t>(window_radius);
    auto vector_at = [&](std::size_t r, std::size_t c) {
        std::vector<double> v(channels);
        for (std::size_t k = 0; k < channels; ++k) {
            v[k] = static_cast<double>(features(k, r, c));
        }
        return v;
    };
    SimilarityMapSet out;
    out.window_radius = window_radius;
    out.query_locations.assign(queries.begin(), queries.end());
    out.maps.reserve(queries.size());
    for (const auto& q : queries) {
        if (q.row < window_radius || q.col < window_radius || q.row + window_radius >= features.height() ||
            q.col + window_radius >= features.width()) {
            throw ShapeError("spatial_correlative_maps: query (" + std::to_string(q.row) + ", " +
                             std::to_string(q.col) + ") is closer than " + std::to_string(window_radius) +
                             " pixels to the border");
        }
        const auto center = vector_at(q.row, q.col);
        std::vector<double> map;
        map.reserve((2 * window_radius + 1) * (2 * window_radius + 1));
        for (std::ptrdiff_t dr = -rad; dr <= rad; ++dr) {
            for (std::ptrdiff_t dc = -rad; dc <= rad; ++dc) {
                const auto nb = vector_at(static_cast<std::size_t>(static_cast<std::ptrdiff_t>(q.row) + dr),
                                          static_cast<std::size_t>(static_cast<std::ptrdiff_t>(q.col) + dc));
                map.push_back(detail::cosine(center, nb));
            }
        }
        out.maps.push_back(std::move(map));
    }
    return out;
}

/// InfoNCE over similarity maps. For query q the positive is maps_b[q];
/// the negatives are maps_b[k] for every other query k.
inline double spatial_correlative_loss(const SimilarityMapSet& maps_a, const SimilarityMapSet& maps_b,
                                       double tau = kDefaultTemperature) {
    if (!(tau > 0.0) || !std::isfinite(tau)) {
        throw ValidationError("spatial_correlative_loss: temperature must be positive");
    }
    if (maps_a.window_radius != maps_b.window_radius || maps_a.query_locations != maps_b.query_locations ||
        maps_a.maps.size() != maps_b.maps.size()) {
        throw ShapeError("spatial_correlative_loss: map sets use different queries or window radii");
    }
    const std::size_t q_count = maps_a.maps.size();
    if (q_count < 2) {
        throw ValidationError("spatial_correlative_loss: at least 2 queries are required");
    }
    std::vector<double> logits(q_count);
    double total = 0.0;
    for (std::size_t q = 0; q < q_count; ++q) {
        double peak = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < q_count; ++k) {
            logits[k] = detail::cosine(maps_a.maps[q], maps_b.maps[k]) / tau;
            peak = std::max(peak, logits[k]);
        }
        double sum = 0.0;
        for (double l : logits) {
            sum += std::exp(l - peak);
        }
        total += peak + std::log(sum) - logits[q];
    }
    return total / static_cast<double>(q_count);
}

struct SpatialCorrelativeOptions {
    std::size_t window_radius = kDefaultWindowRadius;
    std::size_t query_count = kDefaultQueryCount;
    double tau = kDefaultTemperature;
};

/// Maps both feature tensors on the same interior query grid and returns
/// spatial_correlative_loss between them.
template <class T>
double spatial_correlative_loss(const FeatureMap<T>& a, const FeatureMap<T>& b,
                                const SpatialCorrelativeOptions& options = {}) {
    detail::require_same_shape(a, b, "spatial_correlative_loss");
    const auto queries = interior_query_grid(a.height(), a.width(), options.window_radius, options.query_count);
    return spatial_correlative_loss(spatial_correlative_maps(a, queries, options.window_radius),
                                    spatial_correlative_maps(b, queries, options.window_radius), options.tau);
}

/// Weighted sum over layers of the mean absolute difference. Empty weights
/// mean 1 for every layer.
template <class T>
double cycle_loss(std::span<const FeatureMap<T>> features_a, std::span<const FeatureMap<T>> features_b,
                  std::span<const double> layer_weights = {}) {
    if (features_a.size() != features_b.size()) {
        throw ShapeError("cycle_loss: stacks have " + std::to_string(features_a.size()) + " and " +
                         std::to_string(features_b.size()) + " layers");
    }
    if (!layer_weights.empty() && layer_weights.size() != features_a.size()) {
        throw ShapeError("cycle_loss: " + std::to_string(layer_weights.size()) + " weights for " +
                         std::to_string(features_a.size()) + " layers");
    }
    double total = 0.0;
    for (std::size_t l = 0; l < features_a.size(); ++l) {
        detail::require_same_shape(features_a[l], features_b[l], "cycle_loss");
        const auto a = features_a[l].values();
        const auto b = features_b[l].values();
        double acc = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            acc += std::abs(static_cast<double>(a[i]) - static_cast<double>(b[i]));
        }
        const double weight = layer_weights.empty() ? 1.0 : layer_weights[l];
        total += weight * acc / static_cast<double>(a.size());
    }
    return total;
}

inline double total_loss(double gan, double feature_matching, double spatial_correlative, double cycle,
                         const LossWeights& weights = {}) {
    weights.validate();
    return gan + weights.lambda1 * feature_matching + weights.lambda2 * spatial_correlative +
           weights.lambda3 * cycle;
}

/// Mean over pairs of 1 - cos(a_i, b_i).
inline double embedding_cosine_distance(std::span<const std::vector<double>> embeddings_a,
                                        std::span<const std::vector<double>> embeddings_b) {
    if (embeddings_a.size() != embeddings_b.size()) {
        throw ShapeError("embedding_cosine_distance: " + std::to_string(embeddings_a.size()) + " vs " +
                         std::to_string(embeddings_b.size()) + " embeddings");
    }
    if (embeddings_a.empty()) {
        throw ValidationError("embedding_cosine_distance: no embeddings");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < embeddings_a.size(); ++i) {
        const auto& a = embeddings_a[i];
        const auto& b = embeddings_b[i];
        if (a.size() != b.size()) {
            throw ShapeError("embedding_cosine_distance: pair " + std::to_string(i) + " has dimensions " +
                             std::to_string(a.size()) + " and " + std::to_string(b.size()));
        }
        double dot = 0.0;
        double na = 0.0;
        double nb = 0.0;
        for (std::size_t k = 0; k < a.size(); ++k) {
            dot += a[k] * b[k];
            na += a[k] * a[k];
            nb += b[k] * b[k];
        }
        if (na == 0.0 || nb == 0.0) {
            throw ValidationError("embedding_cosine_distance: pair " + std::to_string(i) + " has a zero vector");
        }
        total += 1.0 - std::clamp(dot / std::sqrt(na * nb), -1.0, 1.0);
    }
    return total / static_cast<double>(embeddings_a.size());
}

} // namespace tpsalign
