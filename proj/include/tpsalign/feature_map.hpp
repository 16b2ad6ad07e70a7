#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tpsalign/errors.hpp"

namespace tpsalign {

/// C x H x W tensor stored channel-major, row-major within a channel.
template <class T>
class FeatureMap {
public:
    using value_type = T;

    FeatureMap() = default;

    FeatureMap(std::size_t channels, std::size_t height, std::size_t width, T fill = T{})
        : channels_(channels), height_(height), width_(width), values_(channels * height * width, fill) {
        check_dims();
    }

    FeatureMap(std::size_t channels, std::size_t height, std::size_t width, std::vector<T> values)
        : channels_(channels), height_(height), width_(width), values_(std::move(values)) {
        check_dims();
        if (values_.size() != channels_ * height_ * width_) {
            throw ShapeError("FeatureMap: expected " + std::to_string(channels_ * height_ * width_) +
                             " values, got " + std::to_string(values_.size()));
        }
    }

    std::size_t channels() const { return channels_; }
    std::size_t height() const { return height_; }
    std::size_t width() const { return width_; }
    std::size_t size() const { return values_.size(); }
    std::size_t plane_size() const { return height_ * width_; }

    T& operator()(std::size_t c, std::size_t r, std::size_t s) { return values_[(c * height_ + r) * width_ + s]; }
    const T& operator()(std::size_t c, std::size_t r, std::size_t s) const {
        return values_[(c * height_ + r) * width_ + s];
    }

    std::span<T> values() { return values_; }
    std::span<const T> values() const { return values_; }
    std::span<const T> channel(std::size_t c) const { return std::span<const T>(values_).subspan(c * plane_size(), plane_size()); }

    bool same_shape(const FeatureMap& o) const {
        return channels_ == o.channels_ && height_ == o.height_ && width_ == o.width_;
    }

    bool all_finite() const {
        return std::all_of(values_.begin(), values_.end(), [](T v) { return std::isfinite(static_cast<double>(v)); });
    }

    friend bool operator==(const FeatureMap&, const FeatureMap&) = default;

private:
    void check_dims() const {
        if (channels_ == 0 || height_ == 0 || width_ == 0) {
            throw ShapeError("FeatureMap: dimensions must be >= 1");
        }
    }

    std::size_t channels_ = 0;
    std::size_t height_ = 0;
    std::size_t width_ = 0;
    std::vector<T> values_;
};

template <class T>
std::string shape_string(const FeatureMap<T>& m) {
    return std::to_string(m.channels()) + "x" + std::to_string(m.height()) + "x" + std::to_string(m.width());
}

} // namespace tpsalign
