#include "fieldtrack/service.hpp"

#include <charconv>
#include <iostream>

#include "httplib.h"

#include "fieldtrack/error.hpp"
#include "fieldtrack/image.hpp"
#include "fieldtrack/rules.hpp"
#include "fieldtrack/statistics.hpp"
#include "fieldtrack/text_io.hpp"

namespace fieldtrack {

using nlohmann::json;

namespace {

HttpResponse json_response(int status, const json& doc) { return {status, "application/json", doc.dump()}; }

HttpResponse error(int status, const std::string& message) { return json_response(status, {{"error", message}}); }

std::optional<int> to_int(std::string_view s) {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

json row_json(const GameDataRow& r) {
    json j = {{"frame", r.frame},
              {"track_id", r.track_id},
              {"class", std::string(to_string(r.cls))},
              {"bbox", {r.bbox.x, r.bbox.y, r.bbox.w, r.bbox.h}},
              {"field", nullptr},
              {"team", nullptr},
              {"jersey", nullptr},
              {"fallen", r.fallen}};
    if (r.field) j["field"] = {r.field->x, r.field->y};
    if (r.team) j["team"] = *r.team;
    if (r.jersey) j["jersey"] = *r.jersey;
    return j;
}

Point2 point_of(const json& j, const char* what) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw DataError(std::string(what) + " must be [x, y]");
    return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace

Service::Service(ServiceData data, std::optional<Homography> homography, double gate_px,
                 std::optional<fs::path> homography_path)
    : data_(std::move(data)),
      gate_px_(gate_px),
      homography_path_(std::move(homography_path)),
      state_(std::make_shared<const HomographyState>(HomographyState{std::move(homography), std::nullopt})) {}

std::shared_ptr<const HomographyState> Service::homography_state() const {
    std::lock_guard lock(snapshot_mutex_);
    return state_;
}

void Service::publish(std::shared_ptr<const HomographyState> next) const {
    std::lock_guard lock(snapshot_mutex_);
    state_ = std::move(next);
}

HttpResponse Service::handle(const std::string& method, const std::string& path,
                             const std::map<std::string, std::string>& query, const std::string& body) const {
    try {
        if (method == "GET") return get(path, query);
        if (method == "POST") {
            if (path == "/homography/manual") return post_manual(body);
            if (path == "/homography/accept") return post_accept(body);
            return error(404, "no such endpoint");
        }
        return error(405, "method not allowed");
    } catch (const DataError& e) {
        return error(400, e.what());
    } catch (const UsageError& e) {
        return error(400, e.what());
    } catch (const json::exception& e) {
        return error(400, e.what());
    }
}

HttpResponse Service::get(const std::string& path, const std::map<std::string, std::string>& query) const {
    auto query_int = [&](const char* key) -> std::optional<int> {
        auto it = query.find(key);
        if (it == query.end()) return std::nullopt;
        auto v = to_int(it->second);
        if (!v) throw DataError(std::string("query parameter '") + key + "' must be an integer");
        return v;
    };

    if (path == "/field") return json_response(200, to_json(data_.field));

    if (path.rfind("/frame/", 0) == 0) {
        const auto n = to_int(std::string_view(path).substr(7));
        if (!n) return error(400, "frame index must be an integer");
        if (data_.frames_dir.empty()) return error(404, "no frames directory configured");
        const auto p = frame_path(data_.frames_dir, *n);
        if (!p) return error(404, "frame not found");
        const auto png = encode_png(read_image(*p));
        return {200, "image/png", std::string(png.begin(), png.end())};
    }

    if (path.rfind("/landmarks/", 0) == 0) {
        const auto n = to_int(std::string_view(path).substr(11));
        if (!n) return error(400, "frame index must be an integer");
        json out = json::array();
        if (data_.detections) {
            for (const auto& d : data_.detections->frame(*n)) {
                if (d.cls != ObjectClass::Landmark) continue;
                const Point2 c = d.bbox.center();
                out.push_back({{"id", d.landmark->to_string()}, {"image", {c.x, c.y}}, {"confidence", d.confidence}});
            }
        }
        return json_response(200, out);
    }

    if (path == "/tracks") {
        const auto frame = query_int("frame");
        if (!frame) return error(400, "missing query parameter 'frame'");
        json out = json::array();
        for (const auto& r : data_.game_data)
            if (r.frame == *frame) out.push_back(row_json(r));
        return json_response(200, out);
    }

    if (path == "/stats/scoreboard") {
        if (!data_.scoreboard) return error(404, "no statistics available");
        return json_response(200, *data_.scoreboard);
    }

    if (path == "/stats/heatmap") {
        auto it = query.find("entity");
        if (it == query.end()) return error(400, "missing query parameter 'entity'");
        const Entity e = Entity::parse(it->second);
        if (entity_points(data_.radar, e).empty()) return error(404, "unknown entity " + e.to_string());
        const auto grid = heatmap(data_.radar, e, data_.field, data_.heatmap);
        json rows = json::array();
        for (int r = 0; r < grid.rows; ++r) {
            json row = json::array();
            for (int c = 0; c < grid.cols; ++c) row.push_back(grid.at(r, c));
            rows.push_back(row);
        }
        return json_response(200, {{"entity", e.to_string()},
                                   {"rows", grid.rows},
                                   {"cols", grid.cols},
                                   {"cell_mm", grid.cell_mm},
                                   {"values", rows}});
    }

    if (path == "/homography") {
        const auto state = homography_state();
        json out = {{"gate_px", gate_px_}, {"current", nullptr}, {"pending", nullptr}};
        if (state->current) out["current"] = to_json(*state->current);
        if (state->pending) out["pending"] = to_json(*state->pending);
        return json_response(200, out);
    }

    return error(404, "no such endpoint");
}

HttpResponse Service::post_manual(const std::string& body) const {
    const json doc = json::parse(body);
    const auto& list = doc.at("correspondences");
    if (!list.is_array()) throw DataError("correspondences must be an array");
    std::vector<Correspondence> cs;
    for (const auto& jc : list) {
        Correspondence c;
        c.image = point_of(jc.at("image"), "image");
        if (jc.contains("landmark")) {
            c.landmark = LandmarkId::parse(jc.at("landmark").get<std::string>());
            auto it = data_.field.landmarks.find(*c.landmark);
            if (it == data_.field.landmarks.end()) throw DataError("unknown landmark " + c.landmark->to_string());
            c.field = it->second;
        } else {
            c.field = point_of(jc.at("field"), "field");
        }
        cs.push_back(c);
    }
    if (cs.size() < 4) return error(400, "at least 4 correspondences are required");

    std::lock_guard writer(write_mutex_);
    // every clicked point counts, so the reported error exposes a bad click
    RansacOptions all_points;
    all_points.enabled = false;
    const Homography h = estimate_homography(cs, HomographySource::Manual, all_points);
    auto next = std::make_shared<HomographyState>(*homography_state());
    next->pending = h;
    publish(next);
    json out = to_json(h);
    out["gate_px"] = gate_px_;
    out["within_gate"] = h.rms_reprojection_error <= gate_px_;
    return json_response(200, out);
}

HttpResponse Service::post_accept(const std::string& body) const {
    const json doc = body.empty() ? json::object() : json::parse(body);
    const bool force = doc.value("force", false);
    std::lock_guard writer(write_mutex_);
    const auto state = homography_state();
    if (!state->pending) return error(409, "no pending homography to accept");
    if (state->pending->rms_reprojection_error > gate_px_ && !force)
        return error(409, "reprojection error " + text::format_fixed(state->pending->rms_reprojection_error, 3) +
                              " px exceeds the gate; resend with force to accept");
    auto next = std::make_shared<HomographyState>(HomographyState{state->pending, std::nullopt});
    if (homography_path_) save_homography(*homography_path_, *next->current);
    publish(next);
    return json_response(200, {{"accepted", true}, {"homography", to_json(*next->current)}});
}

ServiceData load_service_data(const PipelineConfig& config) {
    ServiceData d;
    d.field = config_field_model(config);
    d.frames_dir = config.paths.frames_dir;
    d.heatmap = config.heatmap;
    if (!config.paths.detections.empty() && fs::exists(config.paths.detections))
        d.detections = load_detections(config.paths.detections);
    const fs::path gd = config.paths.output_dir / "game_data.csv";
    if (fs::exists(gd)) {
        d.game_data = load_game_data(gd);
        int frames = 0;
        for (const auto& r : d.game_data) frames = std::max(frames, r.frame + 1);
        d.radar = radar_from_game_data(d.game_data, d.field, frames, config.localization.margin_mm);
        const auto events = game_events(d.radar, d.field, config.rules);
        d.scoreboard = to_json(scoreboard(events, possession(d.radar)));
    }
    return d;
}

void serve(const Service& service, int port, const ServeReady& ready) {
    httplib::Server server;
    auto dispatch = [&service](const httplib::Request& req, httplib::Response& res) {
        std::map<std::string, std::string> query;
        for (const auto& [k, v] : req.params) query.emplace(k, v);
        const auto r = service.handle(req.method, req.path, query, req.body);
        res.status = r.status;
        res.set_content(r.body, r.content_type);
        res.set_header("Access-Control-Allow-Origin", "*");
    };
    server.Get(R"(/.*)", dispatch);
    server.Post(R"(/.*)", dispatch);
    const int bound = port == 0 ? server.bind_to_any_port("127.0.0.1") : (server.bind_to_port("127.0.0.1", port) ? port : -1);
    if (bound <= 0) throw DataError("cannot listen on port " + std::to_string(port));
    std::cerr << "serving on http://127.0.0.1:" << bound << "\n";
    if (ready) ready(bound, [&server] { server.stop(); });
    server.listen_after_bind();
}

}  // namespace fieldtrack
