#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "fieldtrack/image.hpp"

namespace fieldtrack {

/// Foreground mask: 255 foreground, 0 background.
using ForegroundMask = GrayImage;

struct BgParams {
    int num_samples = 30;           // N: samples per model window
    int sampling_period = 10;       // P: frames between samples
    int association_threshold = 5;  // A: per-channel color distance
    int min_weight = 2;             // D: modes lighter than this never classify
    int max_modes = 5;              // M
    int tile_rows = 4;
    int tile_cols = 4;

    /// Throws DataError unless N >= D >= 1, M >= 1, P >= 1, tiles >= 1, N <= 255.
    void validate() const;
    friend bool operator==(const BgParams&, const BgParams&) = default;
};

struct BgMode {
    std::uint8_t r = 0, g = 0, b = 0;
    std::uint8_t weight = 0;
};

/// One window of the per-pixel multimodal background model.
///
/// Each pixel keeps the multiset of color samples absorbed in the current window. Modes
/// are rebuilt from that multiset, visited in canonical (sorted) order: a sample joins the
/// first mode within A on every channel, moving its mean as a running average, or opens a
/// new mode, evicting the lightest one when M are in use. Visiting samples in sorted order
/// makes the modes, and therefore classification, independent of absorption order.
class BackgroundModel {
public:
    BackgroundModel(int width, int height, BgParams params = {});

    int width() const { return width_; }
    int height() const { return height_; }
    const BgParams& params() const { return params_; }
    int sample_count() const { return sample_count_; }

    /// Adds one sample per pixel. A model that already holds N samples restarts its window
    /// first: the old statistics are dropped, not blended.
    void absorb(const Image& frame);

    ForegroundMask classify(const Image& frame) const;

    /// Same function as classify(), evaluated on the tile grid by `workers` threads.
    ForegroundMask classify_tiled(const Image& frame, int workers) const;

    /// sample_count / N, clamped to 1.
    double quality() const;

    std::span<const BgMode> modes_at(int x, int y) const;

    void save_snapshot(const std::filesystem::path& path) const;
    static BackgroundModel load_snapshot(const std::filesystem::path& path);

private:
    void check_size(const Image& frame) const;
    void classify_rows(const Image& frame, ForegroundMask& mask, int y0, int y1, int x0, int x1) const;
    void rebuild_modes(std::size_t pixel);

    int width_ = 0;
    int height_ = 0;
    BgParams params_;
    int sample_count_ = 0;
    std::vector<std::uint8_t> samples_;     // N RGB triples per pixel, sorted
    std::vector<BgMode> modes_;             // M per pixel
    std::vector<std::uint8_t> mode_count_;  // used modes per pixel
};

/// Frame-by-frame driver. Classifies every frame and absorbs every P-th frame. A second
/// window accumulates while the first one classifies; when it reaches N samples it becomes
/// the classifying model and a fresh window starts. Before the first window completes, the
/// partially built window classifies.
class BackgroundSubtractor {
public:
    BackgroundSubtractor(int width, int height, BgParams params = {}, int workers = 1);

    ForegroundMask process(const Image& frame);

    const BackgroundModel& classifying_model() const { return active_ ? *active_ : building_; }
    double quality() const { return classifying_model().quality(); }
    long frames_processed() const { return frames_; }

private:
    BgParams params_;
    int workers_;
    std::optional<BackgroundModel> active_;
    BackgroundModel building_;
    long frames_ = 0;
};

/// Precision/recall F1 of `mask` against `truth` (both 0/255). 1 when both are empty.
double mask_f1(const ForegroundMask& mask, const ForegroundMask& truth);

}  // namespace fieldtrack
