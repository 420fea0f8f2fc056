#pragma once

#include "fieldtrack/image.hpp"

namespace fieldtrack::raster {

// Integer-coordinate primitives; everything outside the image is clipped.

void fill_rect(Image& img, int x0, int y0, int x1, int y1, Rgb color);
void draw_line(Image& img, int x0, int y0, int x1, int y1, Rgb color, int thickness = 1);
void draw_circle(Image& img, int cx, int cy, int radius, Rgb color, int thickness = 1);
void fill_disc(Image& img, int cx, int cy, int radius, Rgb color);

}  // namespace fieldtrack::raster
