#ifndef WEAKVID_IMAGE_HPP
#define WEAKVID_IMAGE_HPP

#include <cstdint>
#include <filesystem>
#include <vector>

namespace weakvid {

// 8-bit image, interleaved row-major. channels is 1 (gray) or 3 (RGB).
struct Image {
    int width = 0;
    int height = 0;
    int channels = 0;
    std::vector<std::uint8_t> pixels;

    Image() = default;
    Image(int w, int h, int c) : width(w), height(h), channels(c), pixels(static_cast<std::size_t>(w) * h * c, 0) {}

    std::uint8_t at(int x, int y, int c = 0) const {
        return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
    void set(int x, int y, int c, std::uint8_t v) {
        pixels[(static_cast<std::size_t>(y) * width + x) * channels + c] = v;
    }
    bool empty() const { return pixels.empty(); }
};

// Binary PPM (P6) for color, PGM (P5) for gray. The synthetic corpora and all
// intermediate crops use this format exclusively.
Image read_pnm(const std::filesystem::path& path);
void write_pnm(const Image& img, const std::filesystem::path& path);

// luma = round(0.299 R + 0.587 G + 0.114 B); identity on single-channel input.
Image to_grayscale(const Image& img);

// Rectangle is clamped against the image by the caller; x/y/w/h must lie inside.
Image crop_image(const Image& img, int x, int y, int w, int h);

Image resize_bilinear(const Image& img, int out_w, int out_h);

// h, s, v each in [0,1).
void rgb_to_hsv(std::uint8_t r, std::uint8_t g, std::uint8_t b, double& h, double& s, double& v);

} // namespace weakvid

#endif
