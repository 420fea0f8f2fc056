#include "fieldtrack/raster.hpp"

#include <algorithm>
#include <cstdlib>

namespace fieldtrack::raster {

void fill_rect(Image& img, int x0, int y0, int x1, int y1, Rgb color) {
    if (x0 > x1) std::swap(x0, x1);
    if (y0 > y1) std::swap(y0, y1);
    x0 = std::max(x0, 0);
    y0 = std::max(y0, 0);
    x1 = std::min(x1, img.width() - 1);
    y1 = std::min(y1, img.height() - 1);
    for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x) img.set(x, y, color);
}

namespace {

void stamp(Image& img, int x, int y, Rgb color, int thickness) {
    const int lo = -(thickness - 1) / 2;
    const int hi = thickness / 2;
    for (int dy = lo; dy <= hi; ++dy) {
        for (int dx = lo; dx <= hi; ++dx) {
            const int px = x + dx, py = y + dy;
            if (px >= 0 && py >= 0 && px < img.width() && py < img.height()) img.set(px, py, color);
        }
    }
}

}  // namespace

void draw_line(Image& img, int x0, int y0, int x1, int y1, Rgb color, int thickness) {
    // Bresenham
    const int dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
    const int dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
    int err = dx + dy;
    for (;;) {
        stamp(img, x0, y0, color, thickness);
        if (x0 == x1 && y0 == y1) break;
        const int e2 = 2 * err;
        if (e2 >= dy) {
            err += dy;
            x0 += sx;
        }
        if (e2 <= dx) {
            err += dx;
            y0 += sy;
        }
    }
}

void draw_circle(Image& img, int cx, int cy, int radius, Rgb color, int thickness) {
    // midpoint circle, eight-way symmetric
    int x = radius, y = 0, err = 1 - radius;
    while (x >= y) {
        const int pts[8][2] = {{x, y}, {y, x}, {-y, x}, {-x, y}, {-x, -y}, {-y, -x}, {y, -x}, {x, -y}};
        for (const auto& p : pts) stamp(img, cx + p[0], cy + p[1], color, thickness);
        ++y;
        if (err < 0) {
            err += 2 * y + 1;
        } else {
            --x;
            err += 2 * (y - x) + 1;
        }
    }
}

void fill_disc(Image& img, int cx, int cy, int radius, Rgb color) {
    const int r2 = radius * radius;
    for (int dy = -radius; dy <= radius; ++dy) {
        for (int dx = -radius; dx <= radius; ++dx) {
            if (dx * dx + dy * dy > r2) continue;
            const int px = cx + dx, py = cy + dy;
            if (px >= 0 && py >= 0 && px < img.width() && py < img.height()) img.set(px, py, color);
        }
    }
}

}  // namespace fieldtrack::raster
