#include "fieldtrack/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <ostream>

#include "fieldtrack/camera.hpp"
#include "fieldtrack/error.hpp"
#include "fieldtrack/game_data.hpp"
#include "fieldtrack/manifest.hpp"
#include "fieldtrack/synthetic.hpp"
#include "fieldtrack/text_io.hpp"

namespace fieldtrack {

using nlohmann::json;

namespace {

constexpr const char* kPathKeys[] = {"frames_dir",  "detections", "gc_log", "calibration", "calibration_views",
                                     "homography",  "field_model", "script", "output_dir"};

void check_known_keys(const json& defaults, const json& doc, const std::string& prefix) {
    if (!doc.is_object()) throw UsageError("config: '" + prefix + "' must be an object");
    for (const auto& [key, value] : doc.items()) {
        const std::string where = prefix.empty() ? key : prefix + "." + key;
        if (!defaults.contains(key)) throw UsageError("config: unknown key '" + where + "'");
        if (defaults[key].is_object()) check_known_keys(defaults[key], value, where);
    }
}

template <typename F>
auto stage(const char* name, F&& body) -> decltype(body()) {
    try {
        return body();
    } catch (const UsageError&) {
        throw;
    } catch (const std::exception& e) {
        throw DataError(std::string(name) + ": " + e.what());
    }
}

std::string frame_name(int frame, const char* ext) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%06d%s", frame, ext);
    return buf;
}

const fs::path& require_path(const fs::path& p, const char* key) {
    if (p.empty()) throw UsageError("paths." + std::string(key) + " is not configured");
    if (!fs::exists(p)) throw UsageError("paths." + std::string(key) + " does not exist: " + p.string());
    return p;
}

std::optional<CameraProfile> optional_camera(const PipelineConfig& c) {
    if (c.paths.calibration.empty() || !fs::exists(c.paths.calibration)) return std::nullopt;
    return load_camera_profile(c.paths.calibration);
}

fs::path output_or(const fs::path& configured, const PipelineConfig& c, const char* name) {
    return configured.empty() ? c.paths.output_dir / name : configured;
}

std::string digest_dir(const fs::path& dir) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file()) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    std::string acc;
    for (const auto& f : files) acc += f.filename().string() + ':' + sha256_file(f) + '\n';
    return sha256_hex(acc);
}

void record_output(Manifest& m, const PipelineConfig& c, const fs::path& p) {
    const auto rel = fs::relative(p, c.paths.output_dir).generic_string();
    m.outputs[rel] = fs::is_directory(p) ? digest_dir(p) : sha256_file(p);
}

void write_output(Manifest& m, const PipelineConfig& c, const fs::path& p, std::string_view content) {
    text::write_file(p, content);
    record_output(m, c, p);
}

CalibrationView view_from_json(const json& jv) {
    CalibrationView v;
    for (const auto& jp : jv)
        v.push_back({{jp.at("image").at(0).get<double>(), jp.at("image").at(1).get<double>()},
                     {jp.at("field").at(0).get<double>(), jp.at("field").at(1).get<double>()}});
    return v;
}

}  // namespace

json default_config_json() {
    const PipelineConfig d;
    json paths = json::object();
    for (const char* k : kPathKeys) paths[k] = "";
    paths["output_dir"] = "out";
    return {{"schema_version", 1},
            {"paths", paths},
            {"bgs",
             {{"num_samples", d.bgs.num_samples},
              {"sampling_period", d.bgs.sampling_period},
              {"association_threshold", d.bgs.association_threshold},
              {"min_weight", d.bgs.min_weight},
              {"max_modes", d.bgs.max_modes},
              {"tile_rows", d.bgs.tile_rows},
              {"tile_cols", d.bgs.tile_cols},
              {"workers", d.workers}}},
            {"detections",
             {{"min_confidence", d.filter.min_confidence},
              {"min_confidence_robot", nullptr},
              {"min_confidence_ball", nullptr},
              {"min_foreground_overlap", d.filter.min_foreground_overlap},
              {"use_masks", d.use_masks}}},
            {"tracker",
             {{"iou_threshold", d.tracker.iou_threshold},
              {"max_age", d.tracker.max_age},
              {"min_hits", d.tracker.min_hits},
              {"lambda_app", d.tracker.lambda_app},
              {"ema_alpha", d.tracker.ema_alpha},
              {"fall_threshold", d.tracker.fall_threshold},
              {"max_coast", d.tracker.max_coast},
              {"process_noise_scale", d.tracker.kalman.process_noise_scale},
              {"measurement_noise_scale", d.tracker.kalman.measurement_noise_scale},
              {"confidence_kappa", d.tracker.kalman.confidence_kappa}}},
            {"localization", {{"margin_mm", d.localization.margin_mm}}},
            {"rules",
             {{"pass_min", d.rules.pass_min},
              {"pass_max", d.rules.pass_max},
              {"window", d.rules.window},
              {"refractory", d.rules.refractory},
              {"illegal_count", d.rules.illegal_count},
              {"fall_debounce", d.rules.fall_debounce},
              {"literal", d.rules.literal}}},
            {"identity",
             {{"window_frames", d.identity.window_frames},
              {"reject_mm", d.identity.reject_mm},
              {"kmeans_iterations", d.identity.kmeans_iterations}}},
            {"statistics",
             {{"cell_mm", d.heatmap.cell_mm}, {"blur_sigma_cells", d.heatmap.blur_sigma_cells}, {"gap_break", d.gap_break}}},
            {"homography",
             {{"gate_px", d.homography.gate_px},
              {"ransac_enabled", d.homography.ransac.enabled},
              {"ransac_threshold_px", d.homography.ransac.threshold_px},
              {"ransac_iterations", d.homography.ransac.iterations},
              {"ransac_seed", d.homography.ransac.seed}}},
            {"calibration",
             {{"fix_k3", d.calibration.fix_k3},
              {"fix_tangential", d.calibration.fix_tangential},
              {"fix_distortion", d.calibration.fix_distortion},
              {"max_iterations", d.calibration.max_iterations}}},
            {"output", {{"radar_png", d.radar_png}, {"radar_every", d.radar_every}}},
            {"synth",
             {{"gc_sigma_mm", d.synth.gc_sigma_mm},
              {"gc_seed", d.synth.gc_seed},
              {"render_frames", d.synth.render_frames},
              {"render_noise", d.synth.render_noise},
              {"texture_seed", d.synth.texture_seed}}}};
}

PipelineConfig config_from_json(const json& user, const fs::path& base_dir) {
    const json defaults = default_config_json();
    check_known_keys(defaults, user, "");
    json doc = defaults;
    doc.merge_patch(user);
    if (doc["schema_version"] != 1) throw UsageError("config: schema_version must be 1");
    try {
        PipelineConfig c;
        const auto& p = doc["paths"];
        auto path = [&](const char* key) -> fs::path {
            const auto s = p[key].get<std::string>();
            if (s.empty()) return {};
            const fs::path raw(s);
            return raw.is_absolute() ? raw : base_dir / raw;
        };
        c.paths = {path("frames_dir"), path("detections"),  path("gc_log"), path("calibration"), path("calibration_views"),
                   path("homography"), path("field_model"), path("script"), path("output_dir")};
        if (c.paths.output_dir.empty()) c.paths.output_dir = base_dir / "out";

        const auto& b = doc["bgs"];
        c.bgs = {b["num_samples"], b["sampling_period"], b["association_threshold"], b["min_weight"],
                 b["max_modes"],   b["tile_rows"],       b["tile_cols"]};
        c.workers = b["workers"];
        const auto& d = doc["detections"];
        c.filter.min_confidence = d["min_confidence"];
        if (!d["min_confidence_robot"].is_null()) c.filter.min_confidence_robot = d["min_confidence_robot"].get<double>();
        if (!d["min_confidence_ball"].is_null()) c.filter.min_confidence_ball = d["min_confidence_ball"].get<double>();
        c.filter.min_foreground_overlap = d["min_foreground_overlap"];
        c.use_masks = d["use_masks"];
        const auto& t = doc["tracker"];
        c.tracker.iou_threshold = t["iou_threshold"];
        c.tracker.max_age = t["max_age"];
        c.tracker.min_hits = t["min_hits"];
        c.tracker.lambda_app = t["lambda_app"];
        c.tracker.ema_alpha = t["ema_alpha"];
        c.tracker.fall_threshold = t["fall_threshold"];
        c.tracker.max_coast = t["max_coast"];
        c.tracker.kalman = {t["process_noise_scale"], t["measurement_noise_scale"], t["confidence_kappa"]};
        c.localization.margin_mm = doc["localization"]["margin_mm"];
        const auto& r = doc["rules"];
        c.rules = {r["pass_min"], r["pass_max"], r["window"], r["refractory"], r["illegal_count"], r["fall_debounce"],
                   r["literal"]};
        const auto& i = doc["identity"];
        c.identity = {i["window_frames"], i["reject_mm"], i["kmeans_iterations"]};
        const auto& s = doc["statistics"];
        c.heatmap = {s["cell_mm"], s["blur_sigma_cells"]};
        c.gap_break = s["gap_break"];
        const auto& h = doc["homography"];
        c.homography.gate_px = h["gate_px"];
        c.homography.ransac.enabled = h["ransac_enabled"];
        c.homography.ransac.threshold_px = h["ransac_threshold_px"];
        c.homography.ransac.iterations = h["ransac_iterations"];
        c.homography.ransac.seed = h["ransac_seed"];
        const auto& k = doc["calibration"];
        c.calibration = {k["fix_k3"], k["fix_tangential"], k["fix_distortion"], k["max_iterations"]};
        c.radar_png = doc["output"]["radar_png"];
        c.radar_every = doc["output"]["radar_every"];
        const auto& y = doc["synth"];
        c.synth = {y["gc_sigma_mm"], y["gc_seed"], y["render_frames"], y["render_noise"], y["texture_seed"]};

        try {
            c.bgs.validate();
        } catch (const DataError& e) {
            throw UsageError(std::string("config bgs: ") + e.what());
        }
        c.tracker.validate();
        c.rules.validate();
        if (c.workers < 1 || c.radar_every < 1 || c.gap_break < 0 || c.identity.window_frames < 1)
            throw UsageError("config: workers, radar_every, identity.window_frames >= 1 and gap_break >= 0 required");
        return c;
    } catch (const json::exception& e) {
        throw UsageError(std::string("config: ") + e.what());
    }
}

json PipelineConfig::parameters() const {
    json doc = default_config_json();
    doc.erase("paths");
    doc["bgs"] = {{"num_samples", bgs.num_samples},
                  {"sampling_period", bgs.sampling_period},
                  {"association_threshold", bgs.association_threshold},
                  {"min_weight", bgs.min_weight},
                  {"max_modes", bgs.max_modes},
                  {"tile_rows", bgs.tile_rows},
                  {"tile_cols", bgs.tile_cols},
                  {"workers", workers}};
    doc["detections"] = {{"min_confidence", filter.min_confidence},
                         {"min_confidence_robot", filter.min_confidence_robot ? json(*filter.min_confidence_robot) : json()},
                         {"min_confidence_ball", filter.min_confidence_ball ? json(*filter.min_confidence_ball) : json()},
                         {"min_foreground_overlap", filter.min_foreground_overlap},
                         {"use_masks", use_masks}};
    doc["tracker"] = {{"iou_threshold", tracker.iou_threshold},
                      {"max_age", tracker.max_age},
                      {"min_hits", tracker.min_hits},
                      {"lambda_app", tracker.lambda_app},
                      {"ema_alpha", tracker.ema_alpha},
                      {"fall_threshold", tracker.fall_threshold},
                      {"max_coast", tracker.max_coast},
                      {"process_noise_scale", tracker.kalman.process_noise_scale},
                      {"measurement_noise_scale", tracker.kalman.measurement_noise_scale},
                      {"confidence_kappa", tracker.kalman.confidence_kappa}};
    doc["localization"] = {{"margin_mm", localization.margin_mm}};
    doc["rules"] = {{"pass_min", rules.pass_min},     {"pass_max", rules.pass_max},
                    {"window", rules.window},         {"refractory", rules.refractory},
                    {"illegal_count", rules.illegal_count}, {"fall_debounce", rules.fall_debounce},
                    {"literal", rules.literal}};
    doc["identity"] = {{"window_frames", identity.window_frames},
                       {"reject_mm", identity.reject_mm},
                       {"kmeans_iterations", identity.kmeans_iterations}};
    doc["statistics"] = {{"cell_mm", heatmap.cell_mm}, {"blur_sigma_cells", heatmap.blur_sigma_cells}, {"gap_break", gap_break}};
    doc["homography"] = {{"gate_px", homography.gate_px},
                         {"ransac_enabled", homography.ransac.enabled},
                         {"ransac_threshold_px", homography.ransac.threshold_px},
                         {"ransac_iterations", homography.ransac.iterations},
                         {"ransac_seed", homography.ransac.seed}};
    doc["calibration"] = {{"fix_k3", calibration.fix_k3},
                          {"fix_tangential", calibration.fix_tangential},
                          {"fix_distortion", calibration.fix_distortion},
                          {"max_iterations", calibration.max_iterations}};
    doc["output"] = {{"radar_png", radar_png}, {"radar_every", radar_every}};
    doc["synth"] = {{"gc_sigma_mm", synth.gc_sigma_mm},
                    {"gc_seed", synth.gc_seed},
                    {"render_frames", synth.render_frames},
                    {"render_noise", synth.render_noise},
                    {"texture_seed", synth.texture_seed}};
    return doc;
}

void apply_override(json& doc, std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos || eq == 0) throw UsageError("--set expects key=value, got '" + std::string(assignment) + "'");
    const auto key = assignment.substr(0, eq);
    const std::string value(assignment.substr(eq + 1));
    json parsed = json::parse(value, nullptr, false);
    if (parsed.is_discarded()) parsed = value;
    json* node = &doc;
    for (const auto& part : text::split(key, '.')) {
        if (part.empty()) throw UsageError("--set: empty key segment in '" + std::string(key) + "'");
        if (!node->is_object()) *node = json::object();
        node = &(*node)[std::string(part)];
    }
    *node = parsed;
}

PipelineConfig load_config(const std::optional<fs::path>& file, std::span<const std::string> overrides) {
    json doc = json::object();
    fs::path base = fs::current_path();
    if (file) {
        if (!fs::exists(*file)) throw UsageError("config file not found: " + file->string());
        doc = json::parse(text::read_file(*file), nullptr, false);
        if (doc.is_discarded()) throw UsageError("config file is not valid JSON: " + file->string());
        base = fs::absolute(*file).parent_path();
    }
    for (const auto& o : overrides) apply_override(doc, o);
    return config_from_json(doc, base);
}

std::optional<fs::path> frame_path(const fs::path& dir, int frame) {
    for (const char* ext : {".png", ".ppm"}) {
        auto p = dir / frame_name(frame, ext);
        if (fs::exists(p)) return p;
    }
    return std::nullopt;
}

std::vector<int> list_frames(const fs::path& dir) {
    std::vector<int> out;
    if (!fs::is_directory(dir)) return out;
    for (const auto& e : fs::directory_iterator(dir)) {
        const auto stem = e.path().stem().string();
        const auto ext = e.path().extension().string();
        if (ext != ".png" && ext != ".ppm") continue;
        int n = 0;
        const auto [ptr, ec] = std::from_chars(stem.data(), stem.data() + stem.size(), n);
        if (ec == std::errc() && ptr == stem.data() + stem.size() && stem.size() == 6) out.push_back(n);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

FieldModel config_field_model(const PipelineConfig& config) {
    if (config.paths.field_model.empty()) return default_field_model();
    return load_field_model_file(require_path(config.paths.field_model, "field_model"));
}

std::optional<int> best_landmark_frame(const DetectionStream& stream) {
    std::map<int, int> counts;
    for (const auto& d : stream.detections)
        if (d.cls == ObjectClass::Landmark) ++counts[d.frame];
    std::optional<int> best;
    for (const auto& [f, n] : counts)
        if (!best || n > counts[*best]) best = f;
    return best;
}

void cmd_calibrate(const PipelineConfig& config, std::ostream& log) {
    Manifest m;
    m.command = "calibrate";
    std::vector<CalibrationView> views;
    int width = 0, height = 0;
    if (!config.paths.calibration_views.empty()) {
        const auto& p = require_path(config.paths.calibration_views, "calibration_views");
        stage("calibrate/input", [&] {
            const json doc = json::parse(text::read_file(p));
            width = doc.at("image_width");
            height = doc.at("image_height");
            for (const auto& jv : doc.at("views")) views.push_back(view_from_json(jv));
        });
        m.inputs["calibration_views"] = sha256_file(p);
    } else if (!config.paths.detections.empty()) {
        const auto& p = require_path(config.paths.detections, "detections");
        const auto stream = stage("calibrate/detections", [&] { return load_detections(p); });
        const FieldModel field = config_field_model(config);
        width = stream.meta.image_width;
        height = stream.meta.image_height;
        std::map<int, CalibrationView> by_frame;
        for (const auto& d : stream.detections) {
            if (d.cls != ObjectClass::Landmark) continue;
            auto it = field.landmarks.find(*d.landmark);
            if (it != field.landmarks.end()) by_frame[d.frame].push_back({d.bbox.center(), it->second});
        }
        for (auto& [f, v] : by_frame)
            if (v.size() >= 6) views.push_back(std::move(v));
        m.inputs["detections"] = sha256_file(p);
    } else {
        throw UsageError("calibrate needs paths.calibration_views or paths.detections");
    }
    if (views.empty()) throw DataError("calibrate: no view with at least 6 correspondences");
    const auto result = stage("calibrate", [&] { return calibrate_planar(views, width, height, config.calibration); });
    const fs::path out = output_or(config.paths.calibration, config, "calibration.json");
    save_camera_profile(out, result.profile);
    log << "calibrated " << views.size() << " view(s): fx=" << text::format_fixed(result.profile.fx, 3)
        << " fy=" << text::format_fixed(result.profile.fy, 3) << " rms=" << text::format_fixed(result.rms, 6) << " px\n";
    m.parameters = config.parameters()["calibration"];
    m.outputs[out.filename().string()] = sha256_file(out);
    m.write(config.paths.output_dir / "manifest_calibrate.json");
}

void cmd_bgsub(const PipelineConfig& config, std::ostream& log) {
    const auto& dir = require_path(config.paths.frames_dir, "frames_dir");
    const auto frames = list_frames(dir);
    if (frames.empty()) throw DataError("bgsub: no frames in " + dir.string());
    Manifest m;
    m.command = "bgsub";
    m.parameters = config.parameters()["bgs"];
    const fs::path mask_dir = config.paths.output_dir / "masks";
    fs::create_directories(mask_dir);
    std::optional<BackgroundSubtractor> bgs;
    std::string input_digests;
    for (int f : frames) {
        const auto path = *frame_path(dir, f);
        input_digests += sha256_file(path) + '\n';
        const Image img = stage("bgsub/read", [&] { return read_image(path); });
        if (!bgs) bgs.emplace(img.width(), img.height(), config.bgs, config.workers);
        const auto mask = stage("bgsub", [&] { return bgs->process(img); });
        write_pgm(mask_dir / frame_name(f, ".pgm"), mask);
    }
    m.inputs["frames"] = sha256_hex(input_digests);
    const fs::path snapshot = config.paths.output_dir / "background.ftbg";
    bgs->classifying_model().save_snapshot(snapshot);
    record_output(m, config, mask_dir);
    record_output(m, config, snapshot);
    log << "processed " << frames.size() << " frames, model quality " << text::format_fixed(bgs->quality(), 3) << "\n";
    m.write(config.paths.output_dir / "manifest_bgsub.json");
}

namespace {

Homography auto_from_detections(const DetectionStream& stream, const FieldModel& field, const CameraProfile* camera,
                                const AutoHomographyOptions& options) {
    const auto frame = best_landmark_frame(stream);
    if (!frame) throw DataError("no landmark detections; supply paths.homography or use the manual console");
    const auto obs = landmark_observations(stream.frame(*frame));
    auto result = auto_homography(obs, field, camera, options);
    if (auto* manual = std::get_if<NeedsManual>(&result))
        throw DataError("automatic homography rejected (" + manual->reason + "); manual correspondences required");
    return std::get<Homography>(result);
}

}  // namespace

void cmd_homography(const PipelineConfig& config, std::ostream& log) {
    const auto& p = require_path(config.paths.detections, "detections");
    const auto stream = stage("homography/detections", [&] { return load_detections(p); });
    const FieldModel field = config_field_model(config);
    const auto camera = optional_camera(config);
    const auto h = stage("homography", [&] {
        return auto_from_detections(stream, field, camera ? &*camera : nullptr, config.homography);
    });
    const fs::path out = output_or(config.paths.homography, config, "homography.json");
    save_homography(out, h);
    log << "homography from " << h.correspondences.size() << " landmarks, rms "
        << text::format_fixed(h.rms_reprojection_error, 4) << " px\n";
    Manifest m;
    m.command = "homography";
    m.inputs["detections"] = sha256_file(p);
    m.parameters = config.parameters()["homography"];
    m.seeds["ransac"] = config.homography.ransac.seed;
    m.outputs[out.filename().string()] = sha256_file(out);
    m.write(config.paths.output_dir / "manifest_homography.json");
}

void cmd_track(const PipelineConfig& config, const TrackOptions& options, std::ostream& log) {
    Manifest m;
    m.command = "track";
    const auto& det_path = require_path(config.paths.detections, "detections");
    m.inputs["detections"] = sha256_file(det_path);
    auto stream = stage("detections", [&] { return load_detections(det_path); });
    const FieldModel field = config_field_model(config);
    if (!config.paths.field_model.empty()) m.inputs["field_model"] = sha256_file(config.paths.field_model);
    const auto camera = optional_camera(config);
    if (camera) m.inputs["calibration"] = sha256_file(config.paths.calibration);

    std::vector<ForegroundMask> masks;
    if (config.use_masks) {
        const fs::path mask_dir = config.paths.output_dir / "masks";
        for (int f = 0; f <= stream.last_frame(); ++f) {
            const auto p = mask_dir / frame_name(f, ".pgm");
            if (!fs::exists(p)) throw UsageError("detections.use_masks set but mask missing: " + p.string());
            masks.push_back(read_pgm(p));
        }
    }
    stream = stage("detections/filter", [&] { return filter_detections(stream, config.filter, masks); });

    Homography h;
    if (!config.paths.homography.empty() && fs::exists(config.paths.homography)) {
        h = stage("homography", [&] { return load_homography(config.paths.homography); });
        m.inputs["homography"] = sha256_file(config.paths.homography);
    } else {
        h = stage("homography", [&] {
            return auto_from_detections(stream, field, camera ? &*camera : nullptr, config.homography);
        });
        m.seeds["ransac"] = config.homography.ransac.seed;
    }

    const int frame_count = stream.last_frame() + 1;
    const auto reports = stage("tracking", [&] { return track_stream(stream, config.tracker); });
    auto radar = stage("localization", [&] {
        return localize_all(reports, frame_count, h.H, field, camera ? &*camera : nullptr, config.localization);
    });

    const fs::path out = config.paths.output_dir;
    fs::create_directories(out);
    const bool use_gc = !options.no_gc && !config.paths.gc_log.empty();
    if (use_gc) {
        const auto& gc_path = require_path(config.paths.gc_log, "gc_log");
        m.inputs["gc_log"] = sha256_file(gc_path);
        radar = stage("identity", [&] {
            const auto gc = load_gc_log(gc_path);
            auto map = associate_identities(radar, gc, config.identity);
            auto annotated = propagate_identities(map, radar, gc, config.identity);
            write_output(m, config, out / "identity.json", to_json(map).dump(2) + "\n");
            log << "identities: " << map.assignments.size() << " tracks assigned, " << map.unassigned.size()
                << " unassigned, residual " << text::format_fixed(map.residual_mm, 1) << " mm\n";
            return annotated;
        });
    } else {
        log << "warning: no GameController data; team and jersey columns left empty\n";
    }

    RuleParams rules = config.rules;
    if (options.literal_counters) {
        rules.literal = true;
        rules.refractory = 0;
    }
    const auto events = stage("rules", [&] { return game_events(radar, field, rules); });
    const auto rows = build_game_data(reports, radar);

    write_output(m, config, out / "game_data.csv", write_game_data(rows));
    write_output(m, config, out / "tracks.csv", write_track_dump(reports));
    write_output(m, config, out / "events.csv", write_events_csv(events));
    if (config.radar_png) {
        const fs::path radar_dir = out / "radar";
        fs::create_directories(radar_dir);
        for (const auto& f : radar)
            if (f.frame % config.radar_every == 0)
                write_png(radar_dir / frame_name(f.frame, ".png"), render_radar(f, field));
        record_output(m, config, radar_dir);
    }
    auto params = config.parameters();
    params["rules"]["literal"] = rules.literal;
    params["rules"]["refractory"] = rules.refractory;
    m.parameters = {{"detections", params["detections"]}, {"tracker", params["tracker"]},
                    {"localization", params["localization"]}, {"identity", params["identity"]},
                    {"rules", params["rules"]}, {"homography", params["homography"]},
                    {"output", params["output"]}, {"gc", use_gc}};
    m.write(out / "manifest_track.json");
    log << "tracked " << frame_count << " frames: " << rows.size() << " rows, " << events.size() << " events\n";
}

void cmd_stats(const PipelineConfig& config, const StatsOptions& options, std::ostream& log) {
    Manifest m;
    m.command = "stats";
    const fs::path out = config.paths.output_dir;
    const fs::path gd = out / "game_data.csv";
    if (!fs::exists(gd)) throw DataError("stats: game_data not found at " + gd.string() + "; run track first");
    m.inputs["game_data"] = sha256_file(gd);
    const auto rows = stage("stats/game_data", [&] { return load_game_data(gd); });
    const FieldModel field = config_field_model(config);
    int frame_count = 0;
    for (const auto& r : rows) frame_count = std::max(frame_count, r.frame + 1);
    const auto radar = radar_from_game_data(rows, field, frame_count, config.localization.margin_mm);

    RuleParams rules = config.rules;
    if (options.literal_counters) {
        rules.literal = true;
        rules.refractory = 0;
    }
    if (rows.empty()) log << "warning: game_data is empty; scoreboard is zero\n";
    const bool has_teams = std::any_of(rows.begin(), rows.end(), [](const GameDataRow& r) { return r.team.has_value(); });
    if (!rows.empty() && !has_teams) log << "warning: no team labels; team statistics skipped\n";

    const auto events = stage("stats/rules", [&] { return game_events(radar, field, rules); });
    const auto tally = possession(radar);
    const auto board = stage("stats/scoreboard", [&] { return scoreboard(events, tally); });
    write_output(m, config, out / "scoreboard.json", to_json(board).dump(2) + "\n");
    const std::string table = scoreboard_text(board);
    write_output(m, config, out / "scoreboard.txt", table);
    log << table;

    const auto ball = ball_trajectory(radar);
    const auto segments = pass_shot_map(events, ball, rules.window);
    write_png(out / "pass_shot_map.png", render_pass_shot_map(segments, field));
    record_output(m, config, out / "pass_shot_map.png");

    std::vector<Entity> entities;
    if (options.entity) {
        entities.push_back(Entity::parse(*options.entity));
    } else if (std::any_of(rows.begin(), rows.end(), [](const GameDataRow& r) { return r.cls == ObjectClass::Ball && r.field; })) {
        entities.push_back(Entity::of_ball());
    }
    const bool heat = options.heatmap || !(options.heatmap || options.trackmap);
    const bool track = options.trackmap || !(options.heatmap || options.trackmap);
    for (const auto& e : entities) {
        const std::string name = e.to_string();
        if (heat) {
            const auto grid = stage("stats/heatmap", [&] { return heatmap(radar, e, field, config.heatmap); });
            write_output(m, config, out / ("heatmap_" + name + ".csv"), heatmap_csv(grid));
            write_png(out / ("heatmap_" + name + ".png"), render_heatmap(grid, field));
            record_output(m, config, out / ("heatmap_" + name + ".png"));
        }
        if (track) {
            const auto lines = stage("stats/trackmap", [&] { return trackmap(radar, e, config.gap_break); });
            write_png(out / ("trackmap_" + name + ".png"), render_trackmap(lines, field));
            record_output(m, config, out / ("trackmap_" + name + ".png"));
        }
    }
    auto params = config.parameters();
    params["rules"]["literal"] = rules.literal;
    params["rules"]["refractory"] = rules.refractory;
    m.parameters = {{"rules", params["rules"]}, {"statistics", params["statistics"]},
                    {"localization", params["localization"]}};
    m.write(out / "manifest_stats.json");
}

void cmd_synth(const PipelineConfig& config, std::ostream& log) {
    const auto& sp = require_path(config.paths.script, "script");
    const auto script = stage("synth/script", [&] { return load_scene_script(sp); });
    const auto scene = stage("synth", [&] { return synthesize_scene(script); });
    const fs::path out = config.paths.output_dir;
    Manifest m;
    m.command = "synth";
    m.inputs["script"] = sha256_file(sp);
    m.seeds["scene"] = script.seed;
    m.parameters = config.parameters()["synth"];

    write_output(m, config, out / "detections.csv", write_detections(scene.stream));
    std::string truth = "frame,object_id,class,x,y,w,h,visible,fallen,pos_x,pos_y\n";
    for (const auto& t : scene.truth)
        truth += std::to_string(t.frame) + ',' + std::to_string(t.object_id) + ',' + std::string(to_string(t.cls)) + ',' +
                 text::format_double(t.bbox.x) + ',' + text::format_double(t.bbox.y) + ',' +
                 text::format_double(t.bbox.w) + ',' + text::format_double(t.bbox.h) + ',' + (t.visible ? "1" : "0") +
                 ',' + (t.fallen ? "1" : "0") + ',' + text::format_double(t.position.x) + ',' +
                 text::format_double(t.position.y) + '\n';
    write_output(m, config, out / "truth.csv", truth);

    const bool any_identity = std::any_of(script.objects.begin(), script.objects.end(),
                                          [](const ScriptObject& o) { return o.team && o.jersey; });
    if (script.field_space && any_identity) {
        const auto gc = synthesize_gc(script, config.synth.gc_sigma_mm, config.synth.gc_seed);
        write_output(m, config, out / "gc.csv", write_gc_log(gc));
        m.seeds["gc"] = config.synth.gc_seed;
    }
    if (config.synth.render_frames) {
        RenderSpec spec;
        spec.width = script.image_width;
        spec.height = script.image_height;
        spec.noise = config.synth.render_noise;
        spec.texture_seed = config.synth.texture_seed;
        const Image background = render_background(spec);
        const fs::path frame_dir = out / "frames";
        fs::create_directories(frame_dir);
        for (int f = 0; f < script.frames; ++f) {
            const auto boxes = scene.at(f);
            write_png(frame_dir / frame_name(f, ".png"), render_frame(background, spec, f, boxes, script.objects).image);
        }
        record_output(m, config, frame_dir);
    }
    m.write(out / "manifest_synth.json");
    log << "synthesized " << script.frames << " frames, " << scene.stream.detections.size() << " detections\n";
}

}  // namespace fieldtrack
