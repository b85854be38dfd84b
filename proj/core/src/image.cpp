#include "cilab/image.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>

#include <zlib.h>

#include "cilab/errors.hpp"

namespace cilab {

namespace {

void put_be32(std::vector<unsigned char>& out, std::uint32_t v) {
    out.push_back(static_cast<unsigned char>(v >> 24));
    out.push_back(static_cast<unsigned char>(v >> 16));
    out.push_back(static_cast<unsigned char>(v >> 8));
    out.push_back(static_cast<unsigned char>(v));
}

void put_chunk(std::vector<unsigned char>& out, const char type[4],
               const std::vector<unsigned char>& data) {
    put_be32(out, static_cast<std::uint32_t>(data.size()));
    const size_t crc_start = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), data.begin(), data.end());
    const uLong crc = ::crc32(0L, out.data() + crc_start,
                              static_cast<uInt>(out.size() - crc_start));
    put_be32(out, static_cast<std::uint32_t>(crc));
}

// 5x7 glyphs for the caption strings; row bit 4 is the leftmost pixel.
struct Glyph {
    char c;
    std::array<std::uint8_t, 7> rows;
};

constexpr Glyph kGlyphs[] = {
    {'A', {0x0E, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11}},
    {'C', {0x0E, 0x11, 0x10, 0x10, 0x10, 0x11, 0x0E}},
    {'D', {0x1E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x1E}},
    {'E', {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x1F}},
    {'G', {0x0E, 0x11, 0x10, 0x17, 0x11, 0x11, 0x0F}},
    {'N', {0x11, 0x19, 0x15, 0x13, 0x11, 0x11, 0x11}},
    {'O', {0x0E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E}},
    {'R', {0x1E, 0x11, 0x11, 0x1E, 0x14, 0x12, 0x11}},
    {'S', {0x0F, 0x10, 0x10, 0x0E, 0x01, 0x01, 0x1E}},
    {'T', {0x1F, 0x04, 0x04, 0x04, 0x04, 0x04, 0x04}},
    {'U', {0x11, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E}},
};

const std::array<std::uint8_t, 7>* find_glyph(char c) {
    for (const auto& g : kGlyphs) {
        if (g.c == c) return &g.rows;
    }
    return nullptr;
}

void draw_text(Image& img, int x, int y, const std::string& text, Rgb8 color) {
    for (char c : text) {
        if (const auto* rows = find_glyph(c)) {
            for (int r = 0; r < 7; ++r) {
                for (int b = 0; b < 5; ++b) {
                    if ((*rows)[r] & (1 << (4 - b))) {
                        const int px = x + b;
                        const int py = y + r;
                        if (px >= 0 && px < img.width() && py >= 0 && py < img.height()) {
                            img.at(px, py) = color;
                        }
                    }
                }
            }
        }
        x += 6; // 5 px glyph + 1 px spacing
    }
}

void blit(Image& dst, const Image& src, int x0, int y0) {
    for (int y = 0; y < src.height(); ++y) {
        for (int x = 0; x < src.width(); ++x) {
            dst.at(x0 + x, y0 + y) = src.at(x, y);
        }
    }
}

} // namespace

void write_png(const Image& image, const std::filesystem::path& path) {
    if (image.width() <= 0 || image.height() <= 0) {
        throw IoError("cannot write empty image " + path.string());
    }

    // filter byte 0 per scanline, then raw RGB
    const size_t stride = static_cast<size_t>(image.width()) * 3 + 1;
    std::vector<unsigned char> raw(stride * image.height());
    for (int y = 0; y < image.height(); ++y) {
        unsigned char* row = raw.data() + stride * y;
        row[0] = 0;
        for (int x = 0; x < image.width(); ++x) {
            const Rgb8& p = image.at(x, y);
            row[1 + 3 * x + 0] = p.r;
            row[1 + 3 * x + 1] = p.g;
            row[1 + 3 * x + 2] = p.b;
        }
    }

    uLongf compressed_size = compressBound(static_cast<uLong>(raw.size()));
    std::vector<unsigned char> compressed(compressed_size);
    if (compress2(compressed.data(), &compressed_size, raw.data(),
                  static_cast<uLong>(raw.size()), 6) != Z_OK) {
        throw IoError("zlib compression failed for " + path.string());
    }
    compressed.resize(compressed_size);

    std::vector<unsigned char> out;
    const unsigned char signature[8] = {137, 80, 78, 71, 13, 10, 26, 10};
    out.insert(out.end(), signature, signature + 8);

    std::vector<unsigned char> ihdr;
    put_be32(ihdr, static_cast<std::uint32_t>(image.width()));
    put_be32(ihdr, static_cast<std::uint32_t>(image.height()));
    ihdr.push_back(8); // bit depth
    ihdr.push_back(2); // truecolor
    ihdr.push_back(0);
    ihdr.push_back(0);
    ihdr.push_back(0);
    put_chunk(out, "IHDR", ihdr);
    put_chunk(out, "IDAT", compressed);
    put_chunk(out, "IEND", {});

    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot write " + path.string());
    os.write(reinterpret_cast<const char*>(out.data()),
             static_cast<std::streamsize>(out.size()));
    if (!os) throw IoError("write failed for " + path.string());
}

Rgb8 diverging_color(double t, double lo, double hi) {
    double x = (t - lo) / (hi - lo);
    x = std::clamp(x, 0.0, 1.0);

    // blue (59,76,192) -> near-white (242,242,242) -> red (180,4,38)
    const auto lerp = [](double a, double b, double s) { return a + (b - a) * s; };
    double r, g, b;
    if (x < 0.5) {
        const double s = x * 2.0;
        r = lerp(59, 242, s);
        g = lerp(76, 242, s);
        b = lerp(192, 242, s);
    } else {
        const double s = (x - 0.5) * 2.0;
        r = lerp(242, 180, s);
        g = lerp(242, 4, s);
        b = lerp(242, 38, s);
    }
    return {static_cast<std::uint8_t>(std::lround(r)),
            static_cast<std::uint8_t>(std::lround(g)),
            static_cast<std::uint8_t>(std::lround(b))};
}

Image render_field(const Field& u, double lo, double hi, int upscale) {
    const int n = u.n();
    Image img(n * upscale, n * upscale);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const Rgb8 c = diverging_color(u(i, j), lo, hi);
            for (int dy = 0; dy < upscale; ++dy) {
                for (int dx = 0; dx < upscale; ++dx) {
                    img.at(j * upscale + dx, i * upscale + dy) = c;
                }
            }
        }
    }
    return img;
}

void render_triptych(const Field& src, const Field& generated, const Field& tar,
                     const std::filesystem::path& path) {
    if (src.n() != generated.n() || src.n() != tar.n()) {
        throw ShapeError("triptych panels must share one grid size");
    }
    const int n = src.n();
    const int upscale = std::max(1, 192 / n);
    const int panel = n * upscale;
    const int margin = 6;
    const int caption = 12;

    const int width = 3 * panel + 4 * margin;
    const int height = panel + caption + 2 * margin;
    Image img(width, height);

    const Field* fields[3] = {&src, &generated, &tar};
    const char* labels[3] = {"SOURCE", "GENERATED", "TARGET"};
    for (int k = 0; k < 3; ++k) {
        const int x0 = margin + k * (panel + margin);
        draw_text(img, x0, margin, labels[k], {40, 40, 40});
        blit(img, render_field(*fields[k], -1.0, 1.0, upscale), x0, margin + caption);
    }
    write_png(img, path);
}

} // namespace cilab
