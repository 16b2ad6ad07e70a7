#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <random>
#include <vector>

#include "png_io.hpp"
#include "tpsalign/binary_io.hpp"
#include "tpsalign/landmarks.hpp"
#include "tpsalign/losses.hpp"

namespace tpsalign::cli {

namespace {

void require_matching_size(const FeatureMap<double>& image, const LandmarkSet& lm, const std::string& image_path,
                           const std::string& lm_path) {
    if (image.width() != lm.width() || image.height() != lm.height()) {
        throw ValidationError("image '" + image_path + "' is " + std::to_string(image.width()) + "x" +
                              std::to_string(image.height()) + " but '" + lm_path + "' describes a " +
                              std::to_string(lm.width()) + "x" + std::to_string(lm.height()) + " image");
    }
}

void require_compatible(const LandmarkSet& a, const LandmarkSet& b, const std::string& path_a,
                        const std::string& path_b) {
    if (!a.compatible_with(b)) {
        throw ValidationError("landmark files '" + path_a + "' and '" + path_b +
                              "' are not compatible (group names, order or size differ)");
    }
}

WarpField build_warp_for_files(const LandmarkSet& from, const LandmarkSet& to, std::size_t height, std::size_t width,
                                const WarpOptions& options, const std::string& from_path, const std::string& to_path) {
    try {
        return build_warp(from, to, height, width, options);
    } catch (const GeometryError& e) {
        throw GeometryError("landmarks '" + from_path + "' -> '" + to_path + "': " + e.what());
    }
}

std::vector<std::vector<double>> load_embeddings(const std::string& path) {
    const Tensor t = load_tensor(path);
    try {
        return tensor_rows(t);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

double percentile(std::vector<double> sorted, double q) {
    std::sort(sorted.begin(), sorted.end());
    const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(sorted.size())));
    return sorted[std::clamp<std::size_t>(rank, 1, sorted.size()) - 1];
}

} // namespace

void run_warp(const WarpArgs& args) {
    const auto image = read_png(args.image);
    const auto from = load_landmarks(args.from_landmarks);
    const auto to = load_landmarks(args.to_landmarks);
    require_matching_size(image, from, args.image, args.from_landmarks);
    require_compatible(from, to, args.from_landmarks, args.to_landmarks);
    const auto field =
        build_warp_for_files(from, to, to.height(), to.width(), args.options, args.from_landmarks, args.to_landmarks);
    write_png(args.out, warp_image(image, field, args.border, args.options.threads));
}

void run_align_pair(const AlignPairArgs& args) {
    const auto portrait = read_png(args.portrait);
    const auto style = read_png(args.style);
    const auto portrait_lm = load_landmarks(args.portrait_landmarks);
    const auto style_lm = load_landmarks(args.style_landmarks);
    require_matching_size(portrait, portrait_lm, args.portrait, args.portrait_landmarks);
    require_matching_size(style, style_lm, args.style, args.style_landmarks);
    require_compatible(portrait_lm, style_lm, args.portrait_landmarks, args.style_landmarks);

    auto align = [&](const FeatureMap<double>& image, const LandmarkSet& image_lm, const FeatureMap<double>& reference,
                     const LandmarkSet& reference_lm) {
        try {
            return align_style_to_portrait(image, image_lm, reference, reference_lm, args.options, args.border);
        } catch (const GeometryError& e) {
            throw GeometryError("landmarks '" + args.style_landmarks + "' / '" + args.portrait_landmarks +
                                "': " + e.what());
        }
    };
    const auto style_aligned = align(style, style_lm, portrait, portrait_lm);
    const auto portrait_aligned = align(portrait, portrait_lm, style, style_lm);

    const std::filesystem::path dir(args.out_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw ParseError("cannot create output directory '" + args.out_dir + "': " + ec.message());
    }
    write_png((dir / "style_warped.png").string(), style_aligned.warped_image);
    write_png((dir / "portrait_warped.png").string(), portrait_aligned.warped_image);
    save_field(style_aligned.field, (dir / "style_to_portrait.tpsf").string());
    save_field(portrait_aligned.field, (dir / "portrait_to_style.tpsf").string());
}

void run_field(const FieldArgs& args) {
    const auto from = load_landmarks(args.from_landmarks);
    const auto to = load_landmarks(args.to_landmarks);
    require_compatible(from, to, args.from_landmarks, args.to_landmarks);
    const std::size_t h = args.height ? args.height : to.height();
    const std::size_t w = args.width ? args.width : to.width();
    save_field(build_warp_for_files(from, to, h, w, args.options, args.from_landmarks, args.to_landmarks), args.out);
}

double run_eval_dist(const std::string& embeddings_a, const std::string& embeddings_b) {
    const auto a = load_embeddings(embeddings_a);
    const auto b = load_embeddings(embeddings_b);
    if (a.size() != b.size()) {
        throw ShapeError("'" + embeddings_a + "' has " + std::to_string(a.size()) + " embeddings but '" +
                         embeddings_b + "' has " + std::to_string(b.size()));
    }
    return embedding_cosine_distance(a, b);
}

nlohmann::json run_solve(const std::string& from_landmarks, const std::string& to_landmarks, WarpMode mode) {
    const auto from = load_landmarks(from_landmarks);
    const auto to = load_landmarks(to_landmarks);
    require_compatible(from, to, from_landmarks, to_landmarks);
    nlohmann::json doc;
    doc["direction"] = "target_to_source";
    doc["transforms"] = nlohmann::json::array();
    if (mode == WarpMode::global) {
        auto t = transform_to_json(solve_tps(to.normalized_points(), from.normalized_points()));
        t["group"] = nullptr;
        doc["transforms"].push_back(std::move(t));
    } else {
        for (std::size_t k = 0; k < from.group_count(); ++k) {
            auto t = transform_to_json(solve_tps(to.normalized_group(k), from.normalized_group(k)));
            t["group"] = from.group(k).name;
            doc["transforms"].push_back(std::move(t));
        }
    }
    return doc;
}

BenchReport run_bench(const BenchConfig& config) {
    if (config.size < 32) {
        throw ValidationError("bench: --size must be at least 32");
    }
    if (config.iterations < 10) {
        throw ValidationError("bench: --iters must be at least 10");
    }
    std::mt19937_64 rng(config.seed);
    std::uniform_real_distribution<double> coord(-0.8, 0.8);
    std::uniform_real_distribution<double> jitter(-0.05, 0.05);
    Points targets;
    while (targets.size() < config.landmarks) {
        const Point2 p{coord(rng), coord(rng)};
        if (std::all_of(targets.begin(), targets.end(), [&](const Point2& q) { return distance(p, q) > 0.05; })) {
            targets.push_back(p);
        }
    }
    Points sources = targets;
    for (auto& p : sources) {
        p = p + Point2{jitter(rng), jitter(rng)};
    }
    const TpsTransform transform = solve_tps(targets, sources);

    std::uniform_real_distribution<double> unit(0.0, 1.0);
    FeatureMap<double> image(3, config.size, config.size);
    for (auto& v : image.values()) {
        v = unit(rng);
    }

    const std::size_t threads = resolve_threads(config.threads);
    std::vector<double> times;
    times.reserve(config.iterations);
    FeatureMap<double> warped;
    for (std::size_t i = 0; i < config.iterations; ++i) {
        const auto start = std::chrono::steady_clock::now();
        const WarpField field = rasterize_group_field(transform, config.size, config.size, threads);
        warped = warp_image(image, field, Border::clamp, threads);
        const auto stop = std::chrono::steady_clock::now();
        times.push_back(std::chrono::duration<double, std::milli>(stop - start).count());
    }

    BenchReport report;
    report.image_size = config.size;
    report.iterations = config.iterations;
    report.threads = threads;
    report.mean_ms = std::accumulate(times.begin(), times.end(), 0.0) / static_cast<double>(times.size());
    report.p50_ms = percentile(times, 0.50);
    report.p95_ms = percentile(times, 0.95);
    report.throughput_fps = 1000.0 / report.mean_ms;
    report.checksum = std::accumulate(warped.values().begin(), warped.values().end(), 0.0);
    return report;
}

nlohmann::json to_json(const BenchReport& report) {
    return {{"image_size", report.image_size}, {"iterations", report.iterations}, {"threads", report.threads},
            {"mean_ms", report.mean_ms},       {"p50_ms", report.p50_ms},         {"p95_ms", report.p95_ms},
            {"throughput_fps", report.throughput_fps}, {"checksum", report.checksum}};
}

} // namespace tpsalign::cli
