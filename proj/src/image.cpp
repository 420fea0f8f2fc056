#include "fieldtrack/image.hpp"

#include <png.h>

#include <cstring>
#include <fstream>
#include <sstream>

#include "fieldtrack/error.hpp"
#include "fieldtrack/text_io.hpp"

namespace fieldtrack {

Image::Image(int width, int height, Rgb fill) : width_(width), height_(height) {
    if (width < 0 || height < 0) throw UsageError("negative image size");
    data_.resize(static_cast<std::size_t>(width) * height * 3);
    for (std::size_t i = 0; i < data_.size(); i += 3) {
        data_[i] = fill.r;
        data_[i + 1] = fill.g;
        data_[i + 2] = fill.b;
    }
}

GrayImage::GrayImage(int width, int height, std::uint8_t fill)
    : width_(width), height_(height), data_(static_cast<std::size_t>(width) * height, fill) {
    if (width < 0 || height < 0) throw UsageError("negative image size");
}

namespace {

void png_write_to_vector(png_structp png, png_bytep data, png_size_t length) {
    auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
    out->insert(out->end(), data, data + length);
}

void png_flush_noop(png_structp) {}

void png_error_throw(png_structp, png_const_charp msg) { throw DataError(std::string("png: ") + msg); }

void png_warning_ignore(png_structp, png_const_charp) {}

std::vector<std::uint8_t> encode(int width, int height, int color_type, int channels,
                                 const std::uint8_t* pixels) {
    std::vector<std::uint8_t> out;
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_throw,
                                              png_warning_ignore);
    if (!png) throw DataError("png: cannot create write struct");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw DataError("png: cannot create info struct");
    }
    try {
        png_set_write_fn(png, &out, png_write_to_vector, png_flush_noop);
        png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8,
                     color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                     PNG_FILTER_TYPE_DEFAULT);
        png_set_compression_level(png, 6);
        png_write_info(png, info);
        const std::size_t stride = static_cast<std::size_t>(width) * channels;
        for (int y = 0; y < height; ++y) {
            png_write_row(png, const_cast<png_bytep>(pixels + y * stride));
        }
        png_write_end(png, nullptr);
    } catch (...) {
        png_destroy_write_struct(&png, &info);
        throw;
    }
    png_destroy_write_struct(&png, &info);
    return out;
}

struct PngReadCursor {
    const std::vector<std::uint8_t>* data;
    std::size_t offset;
};

void png_read_from_vector(png_structp png, png_bytep out, png_size_t length) {
    auto* cur = static_cast<PngReadCursor*>(png_get_io_ptr(png));
    if (cur->offset + length > cur->data->size()) png_error(png, "truncated file");
    std::memcpy(out, cur->data->data() + cur->offset, length);
    cur->offset += length;
}

Image decode_png(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) throw DataError("not a PNG file");
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_throw,
                                             png_warning_ignore);
    if (!png) throw DataError("png: cannot create read struct");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw DataError("png: cannot create info struct");
    }
    Image img;
    try {
        PngReadCursor cursor{&bytes, 0};
        png_set_read_fn(png, &cursor, png_read_from_vector);
        png_read_info(png, info);
        png_set_strip_16(png);
        png_set_strip_alpha(png);
        png_set_palette_to_rgb(png);
        png_set_expand_gray_1_2_4_to_8(png);
        png_set_gray_to_rgb(png);
        png_read_update_info(png, info);
        const int w = static_cast<int>(png_get_image_width(png, info));
        const int h = static_cast<int>(png_get_image_height(png, info));
        if (png_get_channels(png, info) != 3) throw DataError("png: unsupported channel layout");
        img = Image(w, h);
        for (int y = 0; y < h; ++y) png_read_row(png, img.row(y), nullptr);
        png_read_end(png, nullptr);
    } catch (...) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw;
    }
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

// Netpbm header: magic, width, height, maxval with '#' comments between tokens.
struct PnmHeader {
    std::string magic;
    int width = 0, height = 0, maxval = 0;
    std::size_t data_offset = 0;
};

PnmHeader parse_pnm_header(const std::vector<std::uint8_t>& bytes) {
    PnmHeader hdr;
    std::size_t pos = 0;
    auto next_token = [&]() -> std::string {
        while (pos < bytes.size()) {
            if (bytes[pos] == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            } else if (std::isspace(bytes[pos])) {
                ++pos;
            } else {
                break;
            }
        }
        std::string tok;
        while (pos < bytes.size() && !std::isspace(bytes[pos])) tok.push_back(static_cast<char>(bytes[pos++]));
        return tok;
    };
    hdr.magic = next_token();
    auto w = text::parse_int(next_token());
    auto h = text::parse_int(next_token());
    auto m = text::parse_int(next_token());
    if (!w || !h || !m || *w <= 0 || *h <= 0 || *m != 255) throw DataError("unsupported PNM header");
    hdr.width = static_cast<int>(*w);
    hdr.height = static_cast<int>(*h);
    hdr.maxval = static_cast<int>(*m);
    hdr.data_offset = pos + 1;  // single whitespace after maxval
    return hdr;
}

}  // namespace

std::vector<std::uint8_t> encode_png(const Image& image) {
    return encode(image.width(), image.height(), PNG_COLOR_TYPE_RGB, 3, image.bytes().data());
}

std::vector<std::uint8_t> encode_png(const GrayImage& image) {
    return encode(image.width(), image.height(), PNG_COLOR_TYPE_GRAY, 1, image.bytes().data());
}

void write_png(const std::filesystem::path& path, const Image& image) {
    text::write_binary(path, encode_png(image));
}

void write_png(const std::filesystem::path& path, const GrayImage& image) {
    text::write_binary(path, encode_png(image));
}

void write_pgm(const std::filesystem::path& path, const GrayImage& image) {
    std::string header = "P5\n" + std::to_string(image.width()) + " " + std::to_string(image.height()) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.insert(out.end(), image.bytes().begin(), image.bytes().end());
    text::write_binary(path, out);
}

void write_ppm(const std::filesystem::path& path, const Image& image) {
    std::string header = "P6\n" + std::to_string(image.width()) + " " + std::to_string(image.height()) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.insert(out.end(), image.bytes().begin(), image.bytes().end());
    text::write_binary(path, out);
}

Image read_image(const std::filesystem::path& path) {
    const auto bytes = text::read_binary(path);
    if (bytes.size() >= 8 && png_sig_cmp(bytes.data(), 0, 8) == 0) return decode_png(bytes);
    const PnmHeader hdr = parse_pnm_header(bytes);
    const std::size_t npix = static_cast<std::size_t>(hdr.width) * hdr.height;
    Image img(hdr.width, hdr.height);
    if (hdr.magic == "P6") {
        if (bytes.size() < hdr.data_offset + npix * 3) throw DataError("truncated PPM: " + path.string());
        std::memcpy(img.bytes().data(), bytes.data() + hdr.data_offset, npix * 3);
    } else if (hdr.magic == "P5") {
        if (bytes.size() < hdr.data_offset + npix) throw DataError("truncated PGM: " + path.string());
        for (std::size_t i = 0; i < npix; ++i) {
            const std::uint8_t v = bytes[hdr.data_offset + i];
            img.bytes()[i * 3] = img.bytes()[i * 3 + 1] = img.bytes()[i * 3 + 2] = v;
        }
    } else {
        throw DataError("unsupported image format: " + path.string());
    }
    return img;
}

GrayImage read_pgm(const std::filesystem::path& path) {
    const auto bytes = text::read_binary(path);
    const PnmHeader hdr = parse_pnm_header(bytes);
    if (hdr.magic != "P5") throw DataError("not a binary PGM: " + path.string());
    const std::size_t npix = static_cast<std::size_t>(hdr.width) * hdr.height;
    if (bytes.size() < hdr.data_offset + npix) throw DataError("truncated PGM: " + path.string());
    GrayImage img(hdr.width, hdr.height);
    std::memcpy(img.bytes().data(), bytes.data() + hdr.data_offset, npix);
    return img;
}

}  // namespace fieldtrack
