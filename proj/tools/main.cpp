// tpsalign: batch front end for landmark-driven thin-plate-spline alignment.

#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"
#include "tpsalign/tpsalign.hpp"

using namespace tpsalign;

namespace {

const std::map<std::string, WarpMode> kModes{{"grouped", WarpMode::grouped}, {"global", WarpMode::global}};
const std::map<std::string, Border> kBorders{{"clamp", Border::clamp}, {"zeros", Border::zeros}};

void add_warp_options(CLI::App* cmd, WarpOptions& options, double& lambda) {
    cmd->add_option("--mode", options.mode, "grouped: one TPS per landmark group, blended; global: one TPS")
        ->transform(CLI::CheckedTransformer(kModes, CLI::ignore_case))
        ->default_str("grouped");
    cmd->add_option("--lambda", lambda, "TPS regularization (default: scaled to the landmark spread)");
    cmd->add_option("--epsilon", options.blend_epsilon, "group blending epsilon")->default_val(kDefaultBlendEpsilon);
    cmd->add_option("--threads", options.threads, "worker threads, 0 = all cores")->default_val(0);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Landmark-driven thin-plate-spline alignment"};
    app.require_subcommand(1);

    double lambda = -1.0;

    cli::WarpArgs warp;
    auto* warp_cmd = app.add_subcommand("warp", "Warp an image so its landmarks land on the target landmarks");
    warp_cmd->add_option("--image", warp.image, "input PNG")->required();
    warp_cmd->add_option("--from-landmarks", warp.from_landmarks, "landmarks of the input image")->required();
    warp_cmd->add_option("--to-landmarks", warp.to_landmarks, "target landmarks")->required();
    warp_cmd->add_option("--out", warp.out, "output PNG")->required();
    warp_cmd->add_option("--border", warp.border, "clamp or zeros")
        ->transform(CLI::CheckedTransformer(kBorders, CLI::ignore_case))
        ->default_str("clamp");
    add_warp_options(warp_cmd, warp.options, lambda);

    cli::AlignPairArgs pair;
    auto* pair_cmd = app.add_subcommand("align-pair", "Align a style image and a portrait to each other");
    pair_cmd->add_option("--portrait", pair.portrait, "portrait PNG")->required();
    pair_cmd->add_option("--style", pair.style, "style PNG")->required();
    pair_cmd->add_option("--portrait-landmarks", pair.portrait_landmarks, "portrait landmarks")->required();
    pair_cmd->add_option("--style-landmarks", pair.style_landmarks, "style landmarks")->required();
    pair_cmd->add_option("--out-dir", pair.out_dir, "output directory")->required();
    pair_cmd->add_option("--border", pair.border, "clamp or zeros")
        ->transform(CLI::CheckedTransformer(kBorders, CLI::ignore_case))
        ->default_str("clamp");
    add_warp_options(pair_cmd, pair.options, lambda);

    cli::FieldArgs field;
    auto* field_cmd = app.add_subcommand("field", "Export the sampling field as a TPSF file");
    field_cmd->add_option("--from-landmarks", field.from_landmarks, "source landmarks")->required();
    field_cmd->add_option("--to-landmarks", field.to_landmarks, "target landmarks")->required();
    field_cmd->add_option("--out", field.out, "output TPSF file")->required();
    field_cmd->add_option("--height", field.height, "field height (default: target image height)");
    field_cmd->add_option("--width", field.width, "field width (default: target image width)");
    add_warp_options(field_cmd, field.options, lambda);

    std::string solve_from, solve_to;
    WarpMode solve_mode = WarpMode::grouped;
    auto* solve_cmd = app.add_subcommand("solve", "Print the fitted transforms as JSON");
    solve_cmd->add_option("--from-landmarks", solve_from, "source landmarks")->required();
    solve_cmd->add_option("--to-landmarks", solve_to, "target landmarks")->required();
    solve_cmd->add_option("--mode", solve_mode, "grouped or global")
        ->transform(CLI::CheckedTransformer(kModes, CLI::ignore_case))
        ->default_str("grouped");

    std::string emb_a, emb_b;
    auto* dist_cmd = app.add_subcommand("eval-dist", "Mean cosine distance between paired embeddings");
    dist_cmd->add_option("--embeddings-a", emb_a, "TNSR file, rank 2")->required();
    dist_cmd->add_option("--embeddings-b", emb_b, "TNSR file, rank 2")->required();

    cli::BenchConfig bench;
    auto* bench_cmd = app.add_subcommand("bench", "Time field rasterization plus warping");
    bench_cmd->add_option("--size", bench.size, "image side in pixels")->default_val(bench.size);
    bench_cmd->add_option("--iters", bench.iterations, "timed iterations")->default_val(bench.iterations);
    bench_cmd->add_option("--threads", bench.threads, "worker threads, 0 = all cores")->default_val(bench.threads);
    bench_cmd->add_option("--seed", bench.seed, "RNG seed")->default_val(bench.seed);

    auto* version_cmd = app.add_subcommand("version", "Print the version");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : cli::kIoError;
    }

    if (lambda >= 0.0) {
        warp.options.regularization = pair.options.regularization = field.options.regularization = lambda;
    }

    try {
        if (warp_cmd->parsed()) {
            cli::run_warp(warp);
        } else if (pair_cmd->parsed()) {
            cli::run_align_pair(pair);
        } else if (field_cmd->parsed()) {
            cli::run_field(field);
        } else if (solve_cmd->parsed()) {
            std::cout << cli::run_solve(solve_from, solve_to, solve_mode).dump(2) << '\n';
        } else if (dist_cmd->parsed()) {
            const double d = cli::run_eval_dist(emb_a, emb_b);
            std::cout << nlohmann::json{{"mean_cosine_distance", d}}.dump() << '\n';
        } else if (bench_cmd->parsed()) {
            std::cout << cli::to_json(cli::run_bench(bench)).dump(2) << '\n';
        } else if (version_cmd->parsed()) {
            std::cout << TPSALIGN_VERSION << '\n';
        }
    } catch (const GeometryError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return cli::kGeometryError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return cli::kIoError;
    }
    return cli::kOk;
}
