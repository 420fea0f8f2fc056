#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace fieldtrack {

struct Rgb {
    std::uint8_t r = 0, g = 0, b = 0;
    friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// Interleaved 8-bit RGB image, row-major, no padding.
class Image {
public:
    Image() = default;
    Image(int width, int height, Rgb fill = {});

    int width() const { return width_; }
    int height() const { return height_; }
    bool empty() const { return width_ == 0 || height_ == 0; }

    std::uint8_t* row(int y) { return data_.data() + static_cast<std::size_t>(y) * width_ * 3; }
    const std::uint8_t* row(int y) const { return data_.data() + static_cast<std::size_t>(y) * width_ * 3; }

    Rgb at(int x, int y) const {
        const std::uint8_t* p = row(y) + x * 3;
        return {p[0], p[1], p[2]};
    }
    void set(int x, int y, Rgb c) {
        std::uint8_t* p = row(y) + x * 3;
        p[0] = c.r;
        p[1] = c.g;
        p[2] = c.b;
    }

    std::vector<std::uint8_t>& bytes() { return data_; }
    const std::vector<std::uint8_t>& bytes() const { return data_; }

    friend bool operator==(const Image&, const Image&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> data_;
};

/// Single-channel 8-bit image. Foreground masks use 0 (background) and 255 (foreground).
class GrayImage {
public:
    GrayImage() = default;
    GrayImage(int width, int height, std::uint8_t fill = 0);

    int width() const { return width_; }
    int height() const { return height_; }

    std::uint8_t& at(int x, int y) { return data_[static_cast<std::size_t>(y) * width_ + x]; }
    std::uint8_t at(int x, int y) const { return data_[static_cast<std::size_t>(y) * width_ + x]; }

    std::vector<std::uint8_t>& bytes() { return data_; }
    const std::vector<std::uint8_t>& bytes() const { return data_; }

    friend bool operator==(const GrayImage&, const GrayImage&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> data_;
};

std::vector<std::uint8_t> encode_png(const Image& image);
std::vector<std::uint8_t> encode_png(const GrayImage& image);

void write_png(const std::filesystem::path& path, const Image& image);
void write_png(const std::filesystem::path& path, const GrayImage& image);
/// Binary P5 PGM.
void write_pgm(const std::filesystem::path& path, const GrayImage& image);
/// Binary P6 PPM.
void write_ppm(const std::filesystem::path& path, const Image& image);

/// Reads PNG (gray, gray+alpha, RGB, RGBA; 8-bit) or binary PPM/PGM into RGB.
Image read_image(const std::filesystem::path& path);
GrayImage read_pgm(const std::filesystem::path& path);

}  // namespace fieldtrack
