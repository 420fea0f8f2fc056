#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "fieldtrack/error.hpp"
#include "fieldtrack/homography.hpp"
#include "fieldtrack/pipeline.hpp"
#include "fieldtrack/service.hpp"

using namespace fieldtrack;

int main(int argc, char** argv) {
    CLI::App app{"fieldtrack: robot soccer video analytics engine"};
    app.require_subcommand(1);
    app.fallthrough();  // --config and --set may follow the subcommand

    std::string config_file;
    std::vector<std::string> overrides;
    app.add_option("--config", config_file, "pipeline configuration (JSON)");
    app.add_option("--set", overrides, "override a config value, e.g. --set tracker.max_age=40")
        ->allow_extra_args(false)
        ->take_all();

    auto* calibrate = app.add_subcommand("calibrate", "estimate intrinsics and distortion from planar views");
    auto* bgsub = app.add_subcommand("bgsub", "background subtraction over the frame directory");
    auto* homography = app.add_subcommand("homography", "automatic image-to-field homography from landmarks");

    TrackOptions track_opts;
    auto* track = app.add_subcommand("track", "detections -> tracks -> field positions -> identities -> events");
    track->add_flag("--no-gc", track_opts.no_gc, "ignore GameController data");
    track->add_flag("--literal-counters", track_opts.literal_counters, "count every qualifying window");

    StatsOptions stats_opts;
    std::string entity;
    auto* stats = app.add_subcommand("stats", "scoreboard, heatmaps, trackmaps, pass and shot map");
    stats->add_option("--entity", entity, "track id or 'ball'");
    stats->add_flag("--heatmap", stats_opts.heatmap, "write the heatmap of --entity");
    stats->add_flag("--trackmap", stats_opts.trackmap, "write the trackmap of --entity");
    stats->add_flag("--literal-counters", stats_opts.literal_counters, "count every qualifying window");

    int port = 8080;
    auto* serve_cmd = app.add_subcommand("serve", "JSON-over-HTTP service for the calibration console");
    serve_cmd->add_option("--port", port, "listen port")->check(CLI::Range(1, 65535));

    auto* synth = app.add_subcommand("synth", "render a synthetic scene script into pipeline inputs");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        const auto config = load_config(config_file.empty() ? std::nullopt : std::optional<fs::path>(config_file), overrides);
        if (*calibrate) {
            cmd_calibrate(config, std::cout);
        } else if (*bgsub) {
            cmd_bgsub(config, std::cout);
        } else if (*homography) {
            cmd_homography(config, std::cout);
        } else if (*track) {
            cmd_track(config, track_opts, std::cout);
        } else if (*stats) {
            if (!entity.empty()) stats_opts.entity = entity;
            if ((stats_opts.heatmap || stats_opts.trackmap) && !stats_opts.entity)
                throw UsageError("--heatmap and --trackmap need --entity");
            cmd_stats(config, stats_opts, std::cout);
        } else if (*serve_cmd) {
            std::optional<Homography> h;
            std::optional<fs::path> h_path;
            if (!config.paths.homography.empty()) {
                h_path = config.paths.homography;
                if (fs::exists(*h_path)) h = load_homography(*h_path);
            }
            Service service(load_service_data(config), h, config.homography.gate_px, h_path);
            serve(service, port);
        } else if (*synth) {
            cmd_synth(config, std::cout);
        }
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
