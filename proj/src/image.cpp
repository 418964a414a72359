#include "weakvid/image.hpp"

#include "weakvid/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace weakvid {

namespace {

int read_pnm_int(std::istream& in) {
    // Skips whitespace and '#' comments per the netpbm grammar.
    int c = in.get();
    while (c != EOF && (std::isspace(c) || c == '#')) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = in.get();
        }
        c = in.get();
    }
    int value = 0;
    bool any = false;
    while (c != EOF && std::isdigit(c)) {
        value = value * 10 + (c - '0');
        any = true;
        c = in.get();
    }
    if (!any) throw Error("image", "MalformedImage", "expected integer in PNM header");
    return value;
}

} // namespace

Image read_pnm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("image", "ImageLoadError", "cannot open " + path.string());
    char p = 0, kind = 0;
    in.get(p);
    in.get(kind);
    if (p != 'P' || (kind != '5' && kind != '6'))
        throw Error("image", "MalformedImage", "unsupported PNM magic in " + path.string());
    int channels = (kind == '6') ? 3 : 1;
    int w = read_pnm_int(in);
    int h = read_pnm_int(in);
    int maxval = read_pnm_int(in);
    if (w <= 0 || h <= 0 || maxval != 255)
        throw Error("image", "MalformedImage", "bad PNM dimensions/maxval in " + path.string());
    Image img(w, h, channels);
    in.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
    if (in.gcount() != static_cast<std::streamsize>(img.pixels.size()))
        throw Error("image", "MalformedImage", "truncated pixel data in " + path.string());
    return img;
}

void write_pnm(const Image& img, const std::filesystem::path& path) {
    if (img.channels != 1 && img.channels != 3)
        throw Error("image", "MalformedImage", "PNM writer needs 1 or 3 channels");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("image", "DiskWrite", "cannot open " + path.string() + " for writing");
    char header[64];
    int n = std::snprintf(header, sizeof(header), "P%c\n%d %d\n255\n", img.channels == 3 ? '6' : '5', img.width,
                          img.height);
    out.write(header, n);
    out.write(reinterpret_cast<const char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
    if (!out) throw Error("image", "DiskWrite", "short write to " + path.string());
}

Image to_grayscale(const Image& img) {
    if (img.channels == 1) return img;
    if (img.channels != 3) throw Error("image", "MalformedImage", "grayscale conversion needs 1 or 3 channels");
    Image gray(img.width, img.height, 1);
    const std::uint8_t* src = img.pixels.data();
    std::uint8_t* dst = gray.pixels.data();
    std::size_t n = static_cast<std::size_t>(img.width) * img.height;
    for (std::size_t i = 0; i < n; ++i) {
        double luma = 0.299 * src[3 * i] + 0.587 * src[3 * i + 1] + 0.114 * src[3 * i + 2];
        dst[i] = static_cast<std::uint8_t>(std::lround(luma));
    }
    return gray;
}

Image crop_image(const Image& img, int x, int y, int w, int h) {
    if (x < 0 || y < 0 || w <= 0 || h <= 0 || x + w > img.width || y + h > img.height)
        throw Error("image", "BadCrop", "crop rectangle outside image bounds");
    Image out(w, h, img.channels);
    for (int row = 0; row < h; ++row) {
        const std::uint8_t* src = &img.pixels[((static_cast<std::size_t>(y) + row) * img.width + x) * img.channels];
        std::uint8_t* dst = &out.pixels[static_cast<std::size_t>(row) * w * img.channels];
        std::copy(src, src + static_cast<std::size_t>(w) * img.channels, dst);
    }
    return out;
}

Image resize_bilinear(const Image& img, int out_w, int out_h) {
    if (out_w <= 0 || out_h <= 0) throw Error("image", "BadResize", "non-positive output size");
    Image out(out_w, out_h, img.channels);
    double sx = static_cast<double>(img.width) / out_w;
    double sy = static_cast<double>(img.height) / out_h;
    for (int oy = 0; oy < out_h; ++oy) {
        double fy = (oy + 0.5) * sy - 0.5;
        int y0 = static_cast<int>(std::floor(fy));
        double wy = fy - y0;
        int y1 = std::min(y0 + 1, img.height - 1);
        y0 = std::clamp(y0, 0, img.height - 1);
        y1 = std::clamp(y1, 0, img.height - 1);
        for (int ox = 0; ox < out_w; ++ox) {
            double fx = (ox + 0.5) * sx - 0.5;
            int x0 = static_cast<int>(std::floor(fx));
            double wx = fx - x0;
            int x1 = std::min(x0 + 1, img.width - 1);
            x0 = std::clamp(x0, 0, img.width - 1);
            x1 = std::clamp(x1, 0, img.width - 1);
            for (int c = 0; c < img.channels; ++c) {
                double top = (1.0 - wx) * img.at(x0, y0, c) + wx * img.at(x1, y0, c);
                double bot = (1.0 - wx) * img.at(x0, y1, c) + wx * img.at(x1, y1, c);
                double v = (1.0 - wy) * top + wy * bot;
                out.set(ox, oy, c, static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0))));
            }
        }
    }
    return out;
}

void rgb_to_hsv(std::uint8_t r8, std::uint8_t g8, std::uint8_t b8, double& h, double& s, double& v) {
    double r = r8 / 255.0, g = g8 / 255.0, b = b8 / 255.0;
    double mx = std::max({r, g, b});
    double mn = std::min({r, g, b});
    double d = mx - mn;
    v = mx;
    s = (mx > 0.0) ? d / mx : 0.0;
    if (d <= 0.0) {
        h = 0.0;
        return;
    }
    double hue;
    if (mx == r)
        hue = (g - b) / d;
    else if (mx == g)
        hue = 2.0 + (b - r) / d;
    else
        hue = 4.0 + (r - g) / d;
    hue /= 6.0;
    if (hue < 0.0) hue += 1.0;
    if (hue >= 1.0) hue -= 1.0;
    h = hue;
}

} // namespace weakvid
