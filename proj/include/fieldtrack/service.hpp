#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "json.hpp"

#include "fieldtrack/detections.hpp"
#include "fieldtrack/field_model.hpp"
#include "fieldtrack/game_data.hpp"
#include "fieldtrack/homography.hpp"
#include "fieldtrack/pipeline.hpp"

namespace fieldtrack {

struct HttpResponse {
    int status = 200;
    std::string content_type = "application/json";
    std::string body;
};

/// Read-only artifacts the service answers from.
struct ServiceData {
    FieldModel field = default_field_model();
    fs::path frames_dir;
    std::optional<DetectionStream> detections;
    std::vector<GameDataRow> game_data;
    std::vector<RadarFrame> radar;
    std::optional<nlohmann::json> scoreboard;
    HeatmapParams heatmap;
};

/// Homography state: the accepted estimate plus a manual candidate awaiting acceptance.
struct HomographyState {
    std::optional<Homography> current;
    std::optional<Homography> pending;
};

/// JSON-over-HTTP request handler, usable without sockets. Reads see a consistent snapshot;
/// writes replace the homography snapshot atomically under a single writer lock.
class Service {
public:
    Service(ServiceData data, std::optional<Homography> homography, double gate_px,
            std::optional<fs::path> homography_path = std::nullopt);

    HttpResponse handle(const std::string& method, const std::string& path,
                        const std::map<std::string, std::string>& query, const std::string& body) const;

    std::shared_ptr<const HomographyState> homography_state() const;

private:
    HttpResponse get(const std::string& path, const std::map<std::string, std::string>& query) const;
    HttpResponse post_manual(const std::string& body) const;
    HttpResponse post_accept(const std::string& body) const;
    void publish(std::shared_ptr<const HomographyState> next) const;

    ServiceData data_;
    double gate_px_;
    std::optional<fs::path> homography_path_;
    mutable std::mutex write_mutex_;
    mutable std::mutex snapshot_mutex_;
    mutable std::shared_ptr<const HomographyState> state_;
};

/// Loads whatever artifacts exist under the configured paths and output directory.
ServiceData load_service_data(const PipelineConfig& config);

/// Called once the socket is bound with the actual port and a thread-safe stop function.
using ServeReady = std::function<void(int port, std::function<void()> stop)>;

/// Blocks serving `service` on 127.0.0.1:`port`; port 0 binds any free port.
void serve(const Service& service, int port, const ServeReady& ready = {});

}  // namespace fieldtrack
