#include "fieldtrack/imbs.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <thread>

#include "fieldtrack/error.hpp"
#include "fieldtrack/text_io.hpp"

namespace fieldtrack {

namespace {

constexpr char kSnapshotMagic[4] = {'F', 'T', 'B', 'G'};
constexpr std::uint32_t kSnapshotVersion = 1;

bool less_rgb(const std::uint8_t* a, const std::uint8_t* b) {
    if (a[0] != b[0]) return a[0] < b[0];
    if (a[1] != b[1]) return a[1] < b[1];
    return a[2] < b[2];
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::vector<std::uint8_t>& in, std::size_t& pos) {
    if (pos + 4 > in.size()) throw DataError("background snapshot: truncated");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in[pos + i]) << (8 * i);
    pos += 4;
    return v;
}

}  // namespace

void BgParams::validate() const {
    if (min_weight < 1 || num_samples < min_weight)
        throw DataError("background params: need num_samples >= min_weight >= 1");
    if (num_samples > 255) throw DataError("background params: num_samples must be <= 255");
    if (max_modes < 1) throw DataError("background params: max_modes must be >= 1");
    if (sampling_period < 1) throw DataError("background params: sampling_period must be >= 1");
    if (association_threshold < 0) throw DataError("background params: negative association_threshold");
    if (tile_rows < 1 || tile_cols < 1) throw DataError("background params: tile grid must be at least 1x1");
}

BackgroundModel::BackgroundModel(int width, int height, BgParams params)
    : width_(width), height_(height), params_(params) {
    params_.validate();
    if (width <= 0 || height <= 0) throw DataError("background model: image size must be positive");
    const std::size_t npix = static_cast<std::size_t>(width) * height;
    samples_.assign(npix * params_.num_samples * 3, 0);
    modes_.assign(npix * params_.max_modes, BgMode{});
    mode_count_.assign(npix, 0);
}

void BackgroundModel::check_size(const Image& frame) const {
    if (frame.width() != width_ || frame.height() != height_)
        throw DataError("background model: frame size " + std::to_string(frame.width()) + "x" +
                        std::to_string(frame.height()) + " does not match model " + std::to_string(width_) + "x" +
                        std::to_string(height_));
}

void BackgroundModel::rebuild_modes(std::size_t pixel) {
    const int M = params_.max_modes;
    const double A = params_.association_threshold;
    struct Acc {
        double mean[3];
        int weight;
        int order;
    };
    Acc acc[256];
    int used = 0, created = 0;
    const std::uint8_t* s = samples_.data() + pixel * params_.num_samples * 3;
    for (int i = 0; i < sample_count_; ++i, s += 3) {
        int hit = -1;
        for (int m = 0; m < used; ++m) {
            if (std::abs(s[0] - acc[m].mean[0]) <= A && std::abs(s[1] - acc[m].mean[1]) <= A &&
                std::abs(s[2] - acc[m].mean[2]) <= A) {
                hit = m;
                break;
            }
        }
        if (hit >= 0) {
            Acc& a = acc[hit];
            ++a.weight;
            for (int c = 0; c < 3; ++c) a.mean[c] += (s[c] - a.mean[c]) / a.weight;
            continue;
        }
        if (used == M) {
            // evict the lightest mode; among equals, the most recently opened
            int victim = 0;
            for (int m = 1; m < used; ++m) {
                if (acc[m].weight < acc[victim].weight ||
                    (acc[m].weight == acc[victim].weight && acc[m].order > acc[victim].order))
                    victim = m;
            }
            acc[victim] = acc[used - 1];
            --used;
        }
        acc[used++] = Acc{{double(s[0]), double(s[1]), double(s[2])}, 1, created++};
    }
    BgMode* out = modes_.data() + pixel * M;
    for (int m = 0; m < used; ++m) {
        out[m] = BgMode{static_cast<std::uint8_t>(std::lround(acc[m].mean[0])),
                        static_cast<std::uint8_t>(std::lround(acc[m].mean[1])),
                        static_cast<std::uint8_t>(std::lround(acc[m].mean[2])),
                        static_cast<std::uint8_t>(acc[m].weight)};
    }
    mode_count_[pixel] = static_cast<std::uint8_t>(used);
}

void BackgroundModel::absorb(const Image& frame) {
    check_size(frame);
    if (sample_count_ == params_.num_samples) sample_count_ = 0;
    const int N = params_.num_samples;
    const std::size_t npix = static_cast<std::size_t>(width_) * height_;
    const std::uint8_t* src = frame.bytes().data();
    for (std::size_t p = 0; p < npix; ++p) {
        std::uint8_t* base = samples_.data() + p * N * 3;
        const std::uint8_t* px = src + p * 3;
        int pos = sample_count_;
        while (pos > 0 && less_rgb(px, base + (pos - 1) * 3)) {
            std::memcpy(base + pos * 3, base + (pos - 1) * 3, 3);
            --pos;
        }
        std::memcpy(base + pos * 3, px, 3);
    }
    ++sample_count_;
    for (std::size_t p = 0; p < npix; ++p) rebuild_modes(p);
}

void BackgroundModel::classify_rows(const Image& frame, ForegroundMask& mask, int y0, int y1, int x0, int x1) const {
    const int M = params_.max_modes;
    const int A = params_.association_threshold;
    const int D = params_.min_weight;
    for (int y = y0; y < y1; ++y) {
        const std::uint8_t* row = frame.row(y);
        for (int x = x0; x < x1; ++x) {
            const std::size_t p = static_cast<std::size_t>(y) * width_ + x;
            const std::uint8_t* px = row + x * 3;
            const BgMode* modes = modes_.data() + p * M;
            bool background = false;
            for (int m = 0; m < mode_count_[p]; ++m) {
                const BgMode& md = modes[m];
                if (md.weight >= D && std::abs(px[0] - md.r) <= A && std::abs(px[1] - md.g) <= A &&
                    std::abs(px[2] - md.b) <= A) {
                    background = true;
                    break;
                }
            }
            mask.at(x, y) = background ? 0 : 255;
        }
    }
}

ForegroundMask BackgroundModel::classify(const Image& frame) const {
    check_size(frame);
    ForegroundMask mask(width_, height_, 255);
    if (sample_count_ > 0) classify_rows(frame, mask, 0, height_, 0, width_);
    return mask;
}

ForegroundMask BackgroundModel::classify_tiled(const Image& frame, int workers) const {
    check_size(frame);
    ForegroundMask mask(width_, height_, 255);
    if (sample_count_ == 0) return mask;
    const int rows = std::min(params_.tile_rows, height_);
    const int cols = std::min(params_.tile_cols, width_);
    const int tiles = rows * cols;
    auto run_tile = [&](int t) {
        const int r = t / cols, c = t % cols;
        classify_rows(frame, mask, height_ * r / rows, height_ * (r + 1) / rows, width_ * c / cols,
                      width_ * (c + 1) / cols);
    };
    workers = std::clamp(workers, 1, tiles);
    if (workers == 1) {
        for (int t = 0; t < tiles; ++t) run_tile(t);
        return mask;
    }
    std::atomic<int> next{0};
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (int t = next++; t < tiles; t = next++) run_tile(t);
        });
    }
    pool.clear();
    return mask;
}

double BackgroundModel::quality() const {
    return std::min(1.0, static_cast<double>(sample_count_) / params_.num_samples);
}

std::span<const BgMode> BackgroundModel::modes_at(int x, int y) const {
    const std::size_t p = static_cast<std::size_t>(y) * width_ + x;
    return {modes_.data() + p * params_.max_modes, mode_count_[p]};
}

void BackgroundModel::save_snapshot(const std::filesystem::path& path) const {
    std::vector<std::uint8_t> out(kSnapshotMagic, kSnapshotMagic + 4);
    put_u32(out, kSnapshotVersion);
    put_u32(out, static_cast<std::uint32_t>(width_));
    put_u32(out, static_cast<std::uint32_t>(height_));
    for (int v : {params_.num_samples, params_.sampling_period, params_.association_threshold, params_.min_weight,
                  params_.max_modes, params_.tile_rows, params_.tile_cols})
        put_u32(out, static_cast<std::uint32_t>(v));
    put_u32(out, static_cast<std::uint32_t>(sample_count_));
    out.insert(out.end(), samples_.begin(), samples_.end());
    out.insert(out.end(), mode_count_.begin(), mode_count_.end());
    for (const auto& m : modes_) {
        out.push_back(m.r);
        out.push_back(m.g);
        out.push_back(m.b);
        out.push_back(m.weight);
    }
    text::write_binary(path, out);
}

BackgroundModel BackgroundModel::load_snapshot(const std::filesystem::path& path) {
    const auto in = text::read_binary(path);
    if (in.size() < 4 || std::memcmp(in.data(), kSnapshotMagic, 4) != 0)
        throw DataError("background snapshot: bad magic in " + path.string());
    std::size_t pos = 4;
    if (get_u32(in, pos) != kSnapshotVersion) throw DataError("background snapshot: unsupported version");
    const int w = static_cast<int>(get_u32(in, pos));
    const int h = static_cast<int>(get_u32(in, pos));
    BgParams p;
    for (int* f : {&p.num_samples, &p.sampling_period, &p.association_threshold, &p.min_weight, &p.max_modes,
                   &p.tile_rows, &p.tile_cols})
        *f = static_cast<int>(get_u32(in, pos));
    BackgroundModel model(w, h, p);
    model.sample_count_ = static_cast<int>(get_u32(in, pos));
    if (model.sample_count_ < 0 || model.sample_count_ > p.num_samples)
        throw DataError("background snapshot: sample count out of range");
    const std::size_t need = model.samples_.size() + model.mode_count_.size() + model.modes_.size() * 4;
    if (in.size() - pos != need) throw DataError("background snapshot: payload size mismatch");
    std::memcpy(model.samples_.data(), in.data() + pos, model.samples_.size());
    pos += model.samples_.size();
    std::memcpy(model.mode_count_.data(), in.data() + pos, model.mode_count_.size());
    pos += model.mode_count_.size();
    for (auto& m : model.modes_) {
        m = BgMode{in[pos], in[pos + 1], in[pos + 2], in[pos + 3]};
        pos += 4;
    }
    return model;
}

BackgroundSubtractor::BackgroundSubtractor(int width, int height, BgParams params, int workers)
    : params_(params), workers_(std::max(1, workers)), building_(width, height, params) {}

ForegroundMask BackgroundSubtractor::process(const Image& frame) {
    ForegroundMask mask = classifying_model().classify_tiled(frame, workers_);
    if (frames_ % params_.sampling_period == 0) {
        building_.absorb(frame);
        if (building_.sample_count() == params_.num_samples) {
            active_ = std::move(building_);
            building_ = BackgroundModel(active_->width(), active_->height(), params_);
        }
    }
    ++frames_;
    return mask;
}

double mask_f1(const ForegroundMask& mask, const ForegroundMask& truth) {
    if (mask.width() != truth.width() || mask.height() != truth.height())
        throw DataError("mask_f1: size mismatch");
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < mask.bytes().size(); ++i) {
        const bool m = mask.bytes()[i] != 0, t = truth.bytes()[i] != 0;
        tp += m && t;
        fp += m && !t;
        fn += !m && t;
    }
    if (tp + fp + fn == 0) return 1.0;
    return 2.0 * tp / (2.0 * tp + fp + fn);
}

}  // namespace fieldtrack
