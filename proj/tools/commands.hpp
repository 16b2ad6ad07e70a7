#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include <json.hpp>

#include "tpsalign/pipeline.hpp"
#include "tpsalign/sampler.hpp"

namespace tpsalign::cli {

enum ExitCode : int { kOk = 0, kIoError = 2, kGeometryError = 3 };

struct WarpArgs {
    std::string image;
    std::string from_landmarks;
    std::string to_landmarks;
    std::string out;
    WarpOptions options;
    Border border = Border::clamp;
};

struct AlignPairArgs {
    std::string portrait;
    std::string style;
    std::string portrait_landmarks;
    std::string style_landmarks;
    std::string out_dir;
    WarpOptions options;
    Border border = Border::clamp;
};

struct FieldArgs {
    std::string from_landmarks;
    std::string to_landmarks;
    std::string out;
    std::size_t height = 0; ///< 0: the target landmark file's height
    std::size_t width = 0;
    WarpOptions options;
};

struct BenchConfig {
    std::size_t size = 256;
    std::size_t iterations = 50;
    std::size_t threads = 0;
    std::uint64_t seed = 42;
    std::size_t landmarks = kDefaultPointsPerGroup;
};

struct BenchReport {
    std::size_t image_size = 0;
    std::size_t iterations = 0;
    std::size_t threads = 0;
    double mean_ms = 0.0;
    double p50_ms = 0.0;
    double p95_ms = 0.0;
    double throughput_fps = 0.0;
    /// Sum of the last warped image; identical across runs with one seed.
    double checksum = 0.0;
};

void run_warp(const WarpArgs& args);
void run_align_pair(const AlignPairArgs& args);
void run_field(const FieldArgs& args);
double run_eval_dist(const std::string& embeddings_a, const std::string& embeddings_b);
nlohmann::json run_solve(const std::string& from_landmarks, const std::string& to_landmarks, WarpMode mode);
BenchReport run_bench(const BenchConfig& config);

nlohmann::json to_json(const BenchReport& report);

} // namespace tpsalign::cli
