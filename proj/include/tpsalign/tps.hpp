#pragma once

// Thin-plate spline interpolation in 2-D.
//
//   F(p) = A [p; 1] + sum_i w_i U(|c_i - p|),   U(r) = r^2 log r^2
//
// The transform is direction-agnostic: it maps constraint points onto
// constraint values and its RBF centers are the constraint points. Callers
// that warp images (warp_field.hpp) pass target landmarks as constraint
// points so the result is a backward sampling map.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "tpsalign/errors.hpp"
#include "tpsalign/geometry.hpp"

namespace tpsalign {

/// Constraint points closer than this (normalized units) are duplicates.
inline constexpr double kDuplicatePointThreshold = 1e-9;

/// Reciprocal condition estimate below which the system is treated as singular.
inline constexpr double kSingularRcond = 1e-13;

/// U evaluated from a squared distance; exactly 0 at the origin.
inline double rbf_from_squared(double r2) { return r2 > 0.0 ? r2 * std::log(r2) : 0.0; }

inline double rbf_u(double r) {
    if (!(r >= 0.0)) {
        throw ValidationError("rbf_u: radius must be non-negative");
    }
    return rbf_from_squared(r * r);
}

struct TpsTransform {
    /// Row d gives output coordinate d as (coef_x, coef_y, offset).
    std::array<std::array<double, 3>, 2> affine{{{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}}};
    /// One (wx, wy) pair per center.
    std::vector<Point2> weights;
    std::vector<Point2> centers;
    double regularization = 0.0;

    std::size_t size() const { return centers.size(); }

    Point2 operator()(const Point2& p) const {
        double fx = affine[0][0] * p.x + affine[0][1] * p.y + affine[0][2];
        double fy = affine[1][0] * p.x + affine[1][1] * p.y + affine[1][2];
        for (std::size_t i = 0; i < centers.size(); ++i) {
            const double u = rbf_from_squared(squared_distance(centers[i], p));
            fx += weights[i].x * u;
            fy += weights[i].y * u;
        }
        return {fx, fy};
    }
};

/// 1e-8 times the squared mean pairwise distance of the points.
inline double default_regularization(const Points& points) {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        for (std::size_t j = i + 1; j < points.size(); ++j) {
            sum += distance(points[i], points[j]);
            ++count;
        }
    }
    if (count == 0) {
        return 0.0;
    }
    const double mean = sum / static_cast<double>(count);
    return 1e-8 * mean * mean;
}

inline TpsTransform solve_tps(const Points& constraint_points, const Points& constraint_values,
                              double regularization) {
    const std::size_t n = constraint_points.size();
    if (n != constraint_values.size()) {
        throw ShapeError("solve_tps: " + std::to_string(n) + " constraint points but " +
                         std::to_string(constraint_values.size()) + " values");
    }
    if (n < 3) {
        throw GeometryError("solve_tps: at least 3 constraint points are required, got " + std::to_string(n));
    }
    if (!(regularization >= 0.0) || !std::isfinite(regularization)) {
        throw ValidationError("solve_tps: regularization must be finite and non-negative");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!is_finite(constraint_points[i]) || !is_finite(constraint_values[i])) {
            throw ValidationError("solve_tps: constraint " + std::to_string(i) + " is not finite");
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (distance(constraint_points[i], constraint_points[j]) <= kDuplicatePointThreshold) {
                throw GeometryError("solve_tps: constraint points " + std::to_string(i) + " and " +
                                    std::to_string(j) + " coincide");
            }
        }
    }

    const auto m = static_cast<Eigen::Index>(n);
    Eigen::MatrixXd system = Eigen::MatrixXd::Zero(m + 3, m + 3);
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(m + 3, 2);
    for (Eigen::Index i = 0; i < m; ++i) {
        const Point2& ci = constraint_points[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < m; ++j) {
            system(i, j) = rbf_from_squared(squared_distance(ci, constraint_points[static_cast<std::size_t>(j)]));
        }
        system(i, i) += regularization;
        system(i, m) = 1.0;
        system(i, m + 1) = ci.x;
        system(i, m + 2) = ci.y;
        system(m, i) = 1.0;
        system(m + 1, i) = ci.x;
        system(m + 2, i) = ci.y;
        rhs(i, 0) = constraint_values[static_cast<std::size_t>(i)].x;
        rhs(i, 1) = constraint_values[static_cast<std::size_t>(i)].y;
    }

    const Eigen::FullPivLU<Eigen::MatrixXd> lu(system);
    const double rcond = lu.rcond();
    if (!lu.isInvertible() || !(rcond > kSingularRcond)) {
        std::ostringstream msg;
        msg << "solve_tps: singular system (reciprocal condition " << rcond
            << "); constraint points may be collinear, increase regularization";
        throw GeometryError(msg.str());
    }
    const Eigen::MatrixXd solution = lu.solve(rhs);
    if (!solution.allFinite()) {
        throw GeometryError("solve_tps: non-finite solution; increase regularization");
    }

    TpsTransform t;
    t.regularization = regularization;
    t.centers = constraint_points;
    t.weights.resize(n);
    for (Eigen::Index i = 0; i < m; ++i) {
        t.weights[static_cast<std::size_t>(i)] = {solution(i, 0), solution(i, 1)};
    }
    for (int d = 0; d < 2; ++d) {
        t.affine[d] = {solution(m + 1, d), solution(m + 2, d), solution(m, d)};
    }
    return t;
}

/// Solve with the default regularization for the given constraint points.
inline TpsTransform solve_tps(const Points& constraint_points, const Points& constraint_values) {
    return solve_tps(constraint_points, constraint_values, default_regularization(constraint_points));
}

inline Points eval_tps(const TpsTransform& t, const Points& points) {
    Points out;
    out.reserve(points.size());
    for (const auto& p : points) {
        out.push_back(t(p));
    }
    return out;
}

/// Value of the bending-energy integral over the plane, in closed form.
/// With U = r^2 log r^2 the kernel satisfies laplacian^2 U = 16 pi delta, so
/// the integral equals 16 pi * sum_d w_d^T K w_d.
inline double bending_energy(const TpsTransform& t) {
    const std::size_t n = t.size();
    double quad = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double k = rbf_from_squared(squared_distance(t.centers[i], t.centers[j]));
            quad += k * (t.weights[i].x * t.weights[j].x + t.weights[i].y * t.weights[j].y);
        }
    }
    return 16.0 * std::numbers::pi * quad;
}

/// Largest violation of sum w = 0, sum w x = 0, sum w y = 0 over both outputs.
inline double side_condition_residual(const TpsTransform& t) {
    double s[2][3] = {{0, 0, 0}, {0, 0, 0}};
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double w[2] = {t.weights[i].x, t.weights[i].y};
        for (int d = 0; d < 2; ++d) {
            s[d][0] += w[d];
            s[d][1] += w[d] * t.centers[i].x;
            s[d][2] += w[d] * t.centers[i].y;
        }
    }
    double worst = 0.0;
    for (auto& row : s) {
        for (double v : row) {
            worst = std::max(worst, std::abs(v));
        }
    }
    return worst;
}

inline nlohmann::json transform_to_json(const TpsTransform& t) {
    nlohmann::json doc;
    doc["affine"] = {{t.affine[0][0], t.affine[0][1], t.affine[0][2]},
                     {t.affine[1][0], t.affine[1][1], t.affine[1][2]}};
    doc["weights"] = nlohmann::json::array();
    doc["centers"] = nlohmann::json::array();
    for (std::size_t i = 0; i < t.size(); ++i) {
        doc["weights"].push_back({t.weights[i].x, t.weights[i].y});
        doc["centers"].push_back({t.centers[i].x, t.centers[i].y});
    }
    doc["regularization"] = t.regularization;
    return doc;
}

} // namespace tpsalign
