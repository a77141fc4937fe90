// caplow: solve the p-capacitary Orlicz-Minkowski problem by normalized
// inverse Gauss curvature flow, or run the capacity / verification /
// uniqueness utilities, from a JSON run config.
#include <CLI11.hpp>

#include <iostream>

#include "caplow/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"p-capacitary Orlicz-Minkowski flow solver"};
    std::string mode, config_path, out_dir;
    int threads = 1;
    bool deterministic = false;
    app.add_option("mode", mode, "solve | capacity | verify | uniqueness")
        ->required()
        ->check(CLI::IsMember({"solve", "capacity", "verify", "uniqueness"}));
    app.add_option("--config", config_path, "JSON run config")->required();
    app.add_option("--out", out_dir, "output directory (overrides output.dir)");
    app.add_option("--threads", threads, "parallel runs in uniqueness mode")
        ->check(CLI::PositiveNumber);
    app.add_flag("--deterministic", deterministic,
                 "force single-threaded execution for byte-identical artifacts");
    CLI11_PARSE(app, argc, argv);

    if (deterministic) threads = 1;
    try {
        const auto config = caplow::cli::parse_config(config_path);
        return caplow::cli::run_mode(mode, config, out_dir, threads, std::cout);
    } catch (const caplow::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        const auto code = e.code();
        return (code == caplow::ErrorCode::ParseError ||
                code == caplow::ErrorCode::ValidationError)
                   ? 2
                   : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
