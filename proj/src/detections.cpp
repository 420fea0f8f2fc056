#include "fieldtrack/detections.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fieldtrack/error.hpp"
#include "fieldtrack/text_io.hpp"

namespace fieldtrack {

namespace {

DataError line_error(std::size_t line, const std::string& what) {
    return DataError("detections line " + std::to_string(line) + ": " + what);
}

void check_detection(const Detection& d, int dim, const std::string& where) {
    if (d.frame < 0) throw DataError(where + ": negative frame index");
    if (!(d.bbox.w > 0) || !(d.bbox.h > 0)) throw DataError(where + ": box width and height must be positive");
    if (!std::isfinite(d.bbox.x) || !std::isfinite(d.bbox.y) || !std::isfinite(d.bbox.w) || !std::isfinite(d.bbox.h))
        throw DataError(where + ": non-finite box");
    if (!(d.confidence >= 0.0 && d.confidence <= 1.0)) throw DataError(where + ": confidence outside [0,1]");
    if (static_cast<int>(d.embedding.size()) != dim)
        throw DataError(where + ": embedding dimension " + std::to_string(d.embedding.size()) + " != stream dimension " +
                        std::to_string(dim));
    if (dim > 0) {
        double n2 = 0;
        for (double v : d.embedding) n2 += v * v;
        if (!(std::abs(std::sqrt(n2) - 1.0) <= 1e-6)) throw DataError(where + ": embedding is not unit-norm");
    }
    if ((d.cls == ObjectClass::Landmark) != d.landmark.has_value())
        throw DataError(where + ": landmark id present iff class is landmark");
}

}  // namespace

std::string_view to_string(ObjectClass cls) {
    switch (cls) {
        case ObjectClass::Robot: return "robot";
        case ObjectClass::Ball: return "ball";
        case ObjectClass::Landmark: break;
    }
    return "landmark";
}

std::string Detection::class_label() const {
    if (cls == ObjectClass::Landmark) return "landmark:" + landmark->to_string();
    return std::string(to_string(cls));
}

std::span<const Detection> DetectionStream::frame(int f) const {
    const auto lo = std::lower_bound(detections.begin(), detections.end(), f,
                                     [](const Detection& d, int v) { return d.frame < v; });
    const auto hi = std::upper_bound(lo, detections.end(), f, [](int v, const Detection& d) { return v < d.frame; });
    return {lo, hi};
}

void validate(const DetectionStream& stream) {
    int prev = -1;
    for (std::size_t i = 0; i < stream.detections.size(); ++i) {
        const auto& d = stream.detections[i];
        check_detection(d, stream.meta.embedding_dim, "detection " + std::to_string(i));
        if (d.frame < prev) throw DataError("detection " + std::to_string(i) + ": frame index decreases");
        prev = d.frame;
    }
}

DetectionStream parse_detections(std::string_view csv) {
    DetectionStream out;
    std::size_t line_no = 0;
    bool header_seen = false;
    int dim = 0;
    std::optional<int> declared_dim;
    int prev_frame = -1;
    std::size_t pos = 0;
    while (pos <= csv.size()) {
        const std::size_t end = std::min(csv.find('\n', pos), csv.size());
        const std::string_view line = text::trim(csv.substr(pos, end - pos));
        pos = end + 1;
        ++line_no;
        if (line.empty()) {
            if (end == csv.size()) break;
            continue;
        }
        if (line.front() == '#') {
            for (auto tok : text::split(line.substr(1), ' ')) {
                tok = text::trim(tok);
                const auto eq = tok.find('=');
                if (eq == std::string_view::npos) continue;
                const auto key = tok.substr(0, eq);
                const auto val = tok.substr(eq + 1);
                if (key == "schema_version") {
                    if (text::parse_int(val) != kDetectionSchemaVersion)
                        throw line_error(line_no, "unsupported schema_version " + std::string(val));
                } else if (key == "image_width") {
                    out.meta.image_width = static_cast<int>(text::parse_int(val).value_or(0));
                } else if (key == "image_height") {
                    out.meta.image_height = static_cast<int>(text::parse_int(val).value_or(0));
                } else if (key == "fps") {
                    out.meta.fps = text::parse_double(val).value_or(0);
                } else if (key == "embedding_dim") {
                    declared_dim = static_cast<int>(text::parse_int(val).value_or(-1));
                }
            }
            continue;
        }
        const auto fields = text::split(line, ',');
        if (!header_seen) {
            static constexpr std::string_view kBase[] = {"frame", "class", "x", "y", "w", "h", "conf"};
            if (fields.size() < 7) throw line_error(line_no, "missing header");
            for (std::size_t i = 0; i < 7; ++i)
                if (text::trim(fields[i]) != kBase[i]) throw line_error(line_no, "missing header");
            for (std::size_t i = 7; i < fields.size(); ++i)
                if (text::trim(fields[i]) != "e" + std::to_string(i - 7))
                    throw line_error(line_no, "embedding columns must be e0..e{d-1}");
            dim = static_cast<int>(fields.size() - 7);
            if (declared_dim && *declared_dim != dim)
                throw line_error(line_no, "embedding_dim metadata disagrees with header");
            out.meta.embedding_dim = dim;
            header_seen = true;
            continue;
        }
        if (fields.size() != static_cast<std::size_t>(7 + dim))
            throw line_error(line_no, "expected " + std::to_string(7 + dim) + " fields, got " +
                                          std::to_string(fields.size()));
        Detection d;
        const auto frame = text::parse_int(fields[0]);
        if (!frame) throw line_error(line_no, "malformed frame index");
        d.frame = static_cast<int>(*frame);
        const auto cls = text::trim(fields[1]);
        if (cls == "robot") {
            d.cls = ObjectClass::Robot;
        } else if (cls == "ball") {
            d.cls = ObjectClass::Ball;
        } else if (cls.starts_with("landmark:")) {
            d.cls = ObjectClass::Landmark;
            try {
                d.landmark = LandmarkId::parse(cls.substr(9));
            } catch (const DataError& e) {
                throw line_error(line_no, e.what());
            }
        } else {
            throw line_error(line_no, "unknown class '" + std::string(cls) + "'");
        }
        double* targets[] = {&d.bbox.x, &d.bbox.y, &d.bbox.w, &d.bbox.h, &d.confidence};
        for (int i = 0; i < 5; ++i) {
            const auto v = text::parse_double(fields[2 + i]);
            if (!v) throw line_error(line_no, "malformed number '" + std::string(fields[2 + i]) + "'");
            *targets[i] = *v;
        }
        for (int i = 0; i < dim; ++i) {
            const auto v = text::parse_double(fields[7 + i]);
            if (!v) throw line_error(line_no, "malformed embedding value");
            d.embedding.push_back(*v);
        }
        try {
            check_detection(d, dim, "row");
        } catch (const DataError& e) {
            throw line_error(line_no, std::string(e.what()).substr(5));
        }
        if (d.frame < prev_frame) throw line_error(line_no, "frame index decreases");
        prev_frame = d.frame;
        out.detections.push_back(std::move(d));
    }
    if (!header_seen) throw DataError("detections: missing header");
    return out;
}

DetectionStream load_detections(const std::filesystem::path& path) {
    try {
        return parse_detections(text::read_file(path));
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

std::string write_detections(const DetectionStream& s) {
    std::ostringstream out;
    out << "# schema_version=" << kDetectionSchemaVersion << " image_width=" << s.meta.image_width
        << " image_height=" << s.meta.image_height << " fps=" << text::format_double(s.meta.fps)
        << " embedding_dim=" << s.meta.embedding_dim << "\n";
    out << "frame,class,x,y,w,h,conf";
    for (int i = 0; i < s.meta.embedding_dim; ++i) out << ",e" << i;
    out << "\n";
    for (const auto& d : s.detections) {
        out << d.frame << ',' << d.class_label() << ',' << text::format_double(d.bbox.x) << ','
            << text::format_double(d.bbox.y) << ',' << text::format_double(d.bbox.w) << ','
            << text::format_double(d.bbox.h) << ',' << text::format_double(d.confidence);
        for (double e : d.embedding) out << ',' << text::format_double(e);
        out << "\n";
    }
    return out.str();
}

void save_detections(const std::filesystem::path& path, const DetectionStream& stream) {
    text::write_file(path, write_detections(stream));
}

double foreground_overlap(const BBox& box, const ForegroundMask& mask) {
    const int x0 = std::max(0, static_cast<int>(std::ceil(box.x - 0.5)));
    const int y0 = std::max(0, static_cast<int>(std::ceil(box.y - 0.5)));
    const int x1 = std::min(mask.width(), static_cast<int>(std::ceil(box.x + box.w - 0.5)));
    const int y1 = std::min(mask.height(), static_cast<int>(std::ceil(box.y + box.h - 0.5)));
    std::size_t fg = 0;
    for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x) fg += mask.at(x, y) != 0;
    return static_cast<double>(fg) / box.area();
}

DetectionStream filter_detections(const DetectionStream& stream, const DetectionFilter& filter,
                                  std::span<const ForegroundMask> masks) {
    if (!masks.empty()) {
        if (static_cast<int>(masks.size()) <= stream.last_frame())
            throw DataError("filter_detections: no mask for frame " + std::to_string(masks.size()));
        for (const auto& mask : masks)
            if (stream.meta.image_width > 0 &&
                (mask.width() != stream.meta.image_width || mask.height() != stream.meta.image_height))
                throw DataError("filter_detections: mask size does not match the stream image size");
    }
    DetectionStream out;
    out.meta = stream.meta;
    for (const auto& d : stream.detections) {
        double threshold = filter.min_confidence;
        if (d.cls == ObjectClass::Robot && filter.min_confidence_robot) threshold = *filter.min_confidence_robot;
        if (d.cls == ObjectClass::Ball && filter.min_confidence_ball) threshold = *filter.min_confidence_ball;
        if (d.confidence < threshold) continue;
        if (!masks.empty() && d.cls != ObjectClass::Landmark) {
            if (foreground_overlap(d.bbox, masks[d.frame]) < filter.min_foreground_overlap) continue;
        }
        out.detections.push_back(d);
    }
    return out;
}

std::vector<LandmarkObservation> landmark_observations(std::span<const Detection> detections) {
    std::vector<LandmarkObservation> out;
    for (const auto& d : detections)
        if (d.cls == ObjectClass::Landmark) out.push_back({*d.landmark, d.bbox.center(), d.confidence});
    return out;
}

}  // namespace fieldtrack
