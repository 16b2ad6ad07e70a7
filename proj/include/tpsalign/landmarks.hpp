#pragma once

// Landmark sets: K named groups of N pixel-space points on one image, the
// JSON file format that carries them, and the pixel <-> normalized mapping
// used by every other module.
//
// Normalized coordinates put pixel centers at 2 * (x + 0.5) / W - 1, so the
// outer edges of the image sit at -1 and +1. This is the same convention as
// align_corners=false grid sampling.

#include <cmath>
#include <cstddef>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "tpsalign/errors.hpp"
#include "tpsalign/geometry.hpp"

namespace tpsalign {

inline constexpr std::size_t kDefaultPointsPerGroup = 10;
inline constexpr int kLandmarkFormatVersion = 1;

inline Point2 normalize_point(const Point2& p, std::size_t width, std::size_t height) {
    return {2.0 * (p.x + 0.5) / static_cast<double>(width) - 1.0,
            2.0 * (p.y + 0.5) / static_cast<double>(height) - 1.0};
}

inline Point2 denormalize_point(const Point2& p, std::size_t width, std::size_t height) {
    return {(p.x + 1.0) * 0.5 * static_cast<double>(width) - 0.5,
            (p.y + 1.0) * 0.5 * static_cast<double>(height) - 0.5};
}

inline Points normalize_points(const Points& points, std::size_t width, std::size_t height) {
    if (width == 0 || height == 0) {
        throw ValidationError("normalize_points: zero-sized image");
    }
    Points out;
    out.reserve(points.size());
    for (const auto& p : points) {
        out.push_back(normalize_point(p, width, height));
    }
    return out;
}

inline Points denormalize_points(const Points& points, std::size_t width, std::size_t height) {
    if (width == 0 || height == 0) {
        throw ValidationError("denormalize_points: zero-sized image");
    }
    Points out;
    out.reserve(points.size());
    for (const auto& p : points) {
        out.push_back(denormalize_point(p, width, height));
    }
    return out;
}

struct LandmarkGroup {
    std::string name;
    Points points;

    friend bool operator==(const LandmarkGroup&, const LandmarkGroup&) = default;
};

/// How strictly a LandmarkSet checks point bounds.
///   pixel_grid:   x in [0, W), y in [0, H)  (what files must satisfy)
///   image_extent: x in [-0.5, W + 0.5)     (sets derived by downscaling,
///                 where half-pixel-center rescaling can step past the grid)
enum class Bounds { pixel_grid, image_extent };

class LandmarkSet {
public:
    LandmarkSet(std::size_t width, std::size_t height, std::size_t points_per_group,
                std::vector<LandmarkGroup> groups, Bounds bounds = Bounds::pixel_grid)
        : width_(width), height_(height), points_per_group_(points_per_group), groups_(std::move(groups)) {
        validate(bounds);
    }

    std::size_t width() const { return width_; }
    std::size_t height() const { return height_; }
    std::size_t points_per_group() const { return points_per_group_; }
    std::size_t group_count() const { return groups_.size(); }
    const std::vector<LandmarkGroup>& groups() const { return groups_; }
    const LandmarkGroup& group(std::size_t k) const { return groups_.at(k); }

    /// All points, group by group, in file order.
    Points all_points() const {
        Points out;
        out.reserve(groups_.size() * points_per_group_);
        for (const auto& g : groups_) {
            out.insert(out.end(), g.points.begin(), g.points.end());
        }
        return out;
    }

    Points normalized_points() const { return normalize_points(all_points(), width_, height_); }

    Points normalized_group(std::size_t k) const { return normalize_points(group(k).points, width_, height_); }

    /// Same group names in the same order with the same N.
    bool compatible_with(const LandmarkSet& other) const {
        if (points_per_group_ != other.points_per_group_ || groups_.size() != other.groups_.size()) {
            return false;
        }
        for (std::size_t k = 0; k < groups_.size(); ++k) {
            if (groups_[k].name != other.groups_[k].name) {
                return false;
            }
        }
        return true;
    }

    friend bool operator==(const LandmarkSet&, const LandmarkSet&) = default;

private:
    void validate(Bounds bounds) const {
        if (width_ == 0 || height_ == 0) {
            throw ValidationError("landmarks: image dimensions must be positive");
        }
        if (points_per_group_ == 0) {
            throw ValidationError("landmarks: n_per_group must be positive");
        }
        if (groups_.empty()) {
            throw ValidationError("landmarks: at least one group is required");
        }
        const double lo = bounds == Bounds::pixel_grid ? 0.0 : -0.5;
        const double pad = bounds == Bounds::pixel_grid ? 0.0 : 0.5;
        const double w = static_cast<double>(width_) + pad;
        const double h = static_cast<double>(height_) + pad;
        std::unordered_set<std::string> names;
        for (const auto& g : groups_) {
            if (!names.insert(g.name).second) {
                throw ValidationError("landmarks: duplicate group name '" + g.name + "'");
            }
            if (g.points.size() != points_per_group_) {
                throw ValidationError("landmarks: group '" + g.name + "' has " + std::to_string(g.points.size()) +
                                      " points, expected " + std::to_string(points_per_group_));
            }
            for (std::size_t i = 0; i < g.points.size(); ++i) {
                const Point2& p = g.points[i];
                if (!is_finite(p)) {
                    throw ValidationError("landmarks: group '" + g.name + "' point " + std::to_string(i) +
                                          " is not finite");
                }
                if (p.x < lo || p.x >= w || p.y < lo || p.y >= h) {
                    std::ostringstream msg;
                    msg << "landmarks: group '" << g.name << "' point " << i << " (" << p.x << ", " << p.y
                        << ") is outside the " << width_ << "x" << height_ << " image";
                    throw ValidationError(msg.str());
                }
            }
        }
    }

    std::size_t width_;
    std::size_t height_;
    std::size_t points_per_group_;
    std::vector<LandmarkGroup> groups_;
};

namespace detail {

inline std::size_t json_positive_int(const nlohmann::json& doc, const char* key) {
    if (!doc.contains(key)) {
        throw ParseError(std::string("landmarks: missing field '") + key + "'");
    }
    const auto& v = doc.at(key);
    if (!v.is_number_integer() || v.get<long long>() <= 0) {
        throw ParseError(std::string("landmarks: field '") + key + "' must be a positive integer");
    }
    return static_cast<std::size_t>(v.get<long long>());
}

} // namespace detail

/// Parse and validate the landmark JSON document.
inline LandmarkSet parse_landmarks(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("landmarks: invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) {
        throw ParseError("landmarks: top level must be an object");
    }
    if (!doc.contains("version") || !doc["version"].is_number_integer() ||
        doc["version"].get<int>() != kLandmarkFormatVersion) {
        throw ParseError("landmarks: unsupported or missing version (expected 1)");
    }
    const std::size_t width = detail::json_positive_int(doc, "width");
    const std::size_t height = detail::json_positive_int(doc, "height");
    const std::size_t n = doc.contains("n_per_group") ? detail::json_positive_int(doc, "n_per_group")
                                                      : kDefaultPointsPerGroup;
    if (!doc.contains("groups") || !doc["groups"].is_array()) {
        throw ParseError("landmarks: 'groups' must be an array");
    }
    std::vector<LandmarkGroup> groups;
    for (std::size_t k = 0; k < doc["groups"].size(); ++k) {
        const auto& g = doc["groups"][k];
        if (!g.is_object() || !g.contains("name") || !g["name"].is_string()) {
            throw ParseError("landmarks: group " + std::to_string(k) + " needs a string 'name'");
        }
        LandmarkGroup group{g["name"].get<std::string>(), {}};
        if (!g.contains("points") || !g["points"].is_array()) {
            throw ParseError("landmarks: group '" + group.name + "' needs a 'points' array");
        }
        for (std::size_t i = 0; i < g["points"].size(); ++i) {
            const auto& p = g["points"][i];
            if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
                throw ParseError("landmarks: group '" + group.name + "' point " + std::to_string(i) +
                                 " must be [x, y]");
            }
            group.points.push_back({p[0].get<double>(), p[1].get<double>()});
        }
        groups.push_back(std::move(group));
    }
    return LandmarkSet(width, height, n, std::move(groups));
}

inline LandmarkSet load_landmarks(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("landmarks: cannot open '" + path + "'");
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    try {
        return parse_landmarks(buffer.str());
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    } catch (const ValidationError& e) {
        throw ValidationError(path + ": " + e.what());
    }
}

inline std::string to_json(const LandmarkSet& set) {
    nlohmann::json doc;
    doc["version"] = kLandmarkFormatVersion;
    doc["width"] = set.width();
    doc["height"] = set.height();
    doc["n_per_group"] = set.points_per_group();
    doc["groups"] = nlohmann::json::array();
    for (const auto& g : set.groups()) {
        nlohmann::json pts = nlohmann::json::array();
        for (const auto& p : g.points) {
            pts.push_back({p.x, p.y});
        }
        doc["groups"].push_back({{"name", g.name}, {"points", pts}});
    }
    return doc.dump();
}

inline void save_landmarks(const LandmarkSet& set, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw ParseError("landmarks: cannot write '" + path + "'");
    }
    out << to_json(set) << '\n';
}

/// Rescale a set to a feature map `factor` times smaller. Pixel centers map
/// to pixel centers, so normalized coordinates are unchanged whenever the
/// dimensions divide evenly.
inline LandmarkSet downscale_landmarks(const LandmarkSet& set, std::size_t factor) {
    if (factor == 0) {
        throw ValidationError("downscale_landmarks: factor must be >= 1");
    }
    if (factor == 1) {
        return set;
    }
    const std::size_t w = set.width() / factor;
    const std::size_t h = set.height() / factor;
    if (w < 2 || h < 2) {
        throw ValidationError("downscale_landmarks: factor " + std::to_string(factor) + " shrinks " +
                              std::to_string(set.width()) + "x" + std::to_string(set.height()) +
                              " below 2 pixels");
    }
    const double f = static_cast<double>(factor);
    std::vector<LandmarkGroup> groups = set.groups();
    for (auto& g : groups) {
        for (auto& p : g.points) {
            p = {(p.x + 0.5) / f - 0.5, (p.y + 0.5) / f - 0.5};
        }
    }
    return LandmarkSet(w, h, set.points_per_group(), std::move(groups), Bounds::image_extent);
}

} // namespace tpsalign
