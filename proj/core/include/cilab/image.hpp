#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cilab/field.hpp"

namespace cilab {

struct Rgb8 {
    std::uint8_t r = 0, g = 0, b = 0;
};

class Image {
public:
    Image() = default;
    Image(int width, int height, Rgb8 fill = {255, 255, 255})
        : width_(width), height_(height),
          pixels_(static_cast<size_t>(width) * height, fill) {}

    int width() const { return width_; }
    int height() const { return height_; }
    Rgb8& at(int x, int y) { return pixels_[static_cast<size_t>(y) * width_ + x]; }
    const Rgb8& at(int x, int y) const { return pixels_[static_cast<size_t>(y) * width_ + x]; }

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<Rgb8> pixels_;
};

/// 8-bit RGB PNG via zlib. Fixed compression settings, so identical
/// inputs produce identical bytes within one build.
void write_png(const Image& image, const std::filesystem::path& path);

/// Symmetric diverging color for t in [lo, hi]: blue through white to red.
Rgb8 diverging_color(double t, double lo = -1.0, double hi = 1.0);

/// Field as a color panel, nearest-neighbor upscaled by `upscale`.
Image render_field(const Field& u, double lo = -1.0, double hi = 1.0, int upscale = 1);

/// Three captioned panels (source | generated | target) on the shared
/// symmetric color scale [-1,1] in scaled units.
void render_triptych(const Field& src, const Field& generated, const Field& tar,
                     const std::filesystem::path& path);

} // namespace cilab
