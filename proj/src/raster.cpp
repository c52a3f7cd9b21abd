#include "audit/raster.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "audit/error.hpp"
#include "audit/rng.hpp"

namespace audit {

Raster::Raster(int width, int height, int channels, double fill)
    : width_(width), height_(height), channels_(channels) {
    if (width < 1 || height < 1) throw DimensionError("raster dimensions must be positive");
    if (channels != 1 && channels != 3) throw DimensionError("raster must have 1 or 3 channels");
    if (!(fill >= 0.0 && fill <= 1.0)) throw DataError("raster fill value outside [0,1]");
    pixels_.assign(static_cast<std::size_t>(width) * height * channels, fill);
}

Raster::Raster(int width, int height, int channels, std::vector<double> pixels)
    : width_(width), height_(height), channels_(channels), pixels_(std::move(pixels)) {
    if (width < 1 || height < 1) throw DimensionError("raster dimensions must be positive");
    if (channels != 1 && channels != 3) throw DimensionError("raster must have 1 or 3 channels");
    if (pixels_.size() != static_cast<std::size_t>(width) * height * channels) {
        throw DimensionError("pixel count does not match raster dimensions");
    }
    for (double v : pixels_) {
        if (!(v >= 0.0 && v <= 1.0)) throw DataError("pixel value outside [0,1]");
    }
}

PaddingFactor::PaddingFactor(double value) : value_(value) {
    if (!(value >= 0.0) || !std::isfinite(value)) throw ConfigError("padding factor must be >= 0");
}

Quality::Quality(int q) : q_(q) {
    if (q < 1 || q > 100) throw ConfigError("quality must be in [1,100]");
}

std::string describe(const Pipeline& pipe) {
    if (const auto* crop = std::get_if<CentralCrop>(&pipe)) return "crop:" + std::to_string(crop->size);
    const auto& r = std::get<Resize>(pipe);
    return "resize:" + std::to_string(r.width) + "x" + std::to_string(r.height);
}

Pipeline parse_pipeline(const std::string& text) {
    int a = 0;
    int b = 0;
    char tail = 0;
    if (std::sscanf(text.c_str(), "crop:%d%c", &a, &tail) == 1) {
        Pipeline p = CentralCrop{a};
        validate(p);
        return p;
    }
    if (std::sscanf(text.c_str(), "resize:%dx%d%c", &a, &b, &tail) == 2) {
        Pipeline p = Resize{a, b};
        validate(p);
        return p;
    }
    throw ConfigError("malformed pipeline descriptor '" + text + "'");
}

void validate(const Pipeline& pipe) {
    if (const auto* crop = std::get_if<CentralCrop>(&pipe)) {
        if (crop->size < 1) throw ConfigError("crop size must be >= 1");
        return;
    }
    const auto& r = std::get<Resize>(pipe);
    if (r.width < 1 || r.height < 1) throw ConfigError("resize dimensions must be >= 1");
}

Raster to_grayscale(const Raster& img) {
    if (img.channels() == 1) return img;
    if (img.channels() != 3) throw DimensionError("to_grayscale expects 1 or 3 channels");
    std::vector<double> out(static_cast<std::size_t>(img.width()) * img.height());
    const auto src = img.pixels();
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double y = 0.299 * src[3 * i] + 0.587 * src[3 * i + 1] + 0.114 * src[3 * i + 2];
        out[i] = std::clamp(y, 0.0, 1.0);
    }
    return Raster(img.width(), img.height(), 1, std::move(out));
}

namespace {

// round-half-up; the epsilon absorbs representation error in products such as
// 0.15 * 10 that are meant to land exactly on .5
int round_half_up(double v) { return static_cast<int>(std::floor(v + 0.5 + 1e-9)); }

}  // namespace

BBox pad_bbox(const BBox& box, PaddingFactor padding, int image_width, int image_height) {
    if (!box.valid() || box.x1 > image_width || box.y1 > image_height) {
        throw DimensionError("bounding box outside image bounds");
    }
    const int dx = round_half_up(padding.value() * box.width());
    const int dy = round_half_up(padding.value() * box.height());
    return BBox{std::max(0, box.x0 - dx), std::max(0, box.y0 - dy), std::min(image_width, box.x1 + dx),
                std::min(image_height, box.y1 + dy)};
}

Raster extract(const Raster& img, const BBox& box) {
    if (!box.valid() || box.x1 > img.width() || box.y1 > img.height()) {
        throw DimensionError("extraction box outside image bounds");
    }
    const int c = img.channels();
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(box.width()) * box.height() * c);
    const auto src = img.pixels();
    for (int y = box.y0; y < box.y1; ++y) {
        const auto row = static_cast<std::size_t>(y) * img.width() * c;
        out.insert(out.end(), src.begin() + row + static_cast<std::size_t>(box.x0) * c,
                   src.begin() + row + static_cast<std::size_t>(box.x1) * c);
    }
    return Raster(box.width(), box.height(), c, std::move(out));
}

Raster central_crop(const Raster& img, int size) {
    if (size < 1 || size > std::min(img.width(), img.height())) {
        throw DimensionError("crop size " + std::to_string(size) + " exceeds " + std::to_string(img.width()) +
                             "x" + std::to_string(img.height()) + " input");
    }
    const int x0 = (img.width() - size) / 2;
    const int y0 = (img.height() - size) / 2;
    return extract(img, BBox{x0, y0, x0 + size, y0 + size});
}

namespace {

struct Tap {
    int lo;
    int hi;
    double t;
};

std::vector<Tap> bilinear_taps(int in, int out) {
    std::vector<Tap> taps(out);
    const double scale = static_cast<double>(in) / out;
    for (int d = 0; d < out; ++d) {
        double s = (d + 0.5) * scale - 0.5;
        s = std::clamp(s, 0.0, static_cast<double>(in - 1));
        const int lo = static_cast<int>(std::floor(s));
        taps[d] = Tap{lo, std::min(lo + 1, in - 1), s - lo};
    }
    return taps;
}

}  // namespace

Raster resize_bilinear(const Raster& img, int out_width, int out_height) {
    if (out_width < 1 || out_height < 1) throw DimensionError("resize target must be at least 1x1");
    if (out_width == img.width() && out_height == img.height()) return img;

    const auto xs = bilinear_taps(img.width(), out_width);
    const auto ys = bilinear_taps(img.height(), out_height);
    const int c = img.channels();
    std::vector<double> out(static_cast<std::size_t>(out_width) * out_height * c);
    std::size_t k = 0;
    for (int y = 0; y < out_height; ++y) {
        const Tap& ty = ys[y];
        for (int x = 0; x < out_width; ++x) {
            const Tap& tx = xs[x];
            for (int ch = 0; ch < c; ++ch) {
                const double top = img.at(tx.lo, ty.lo, ch) * (1.0 - tx.t) + img.at(tx.hi, ty.lo, ch) * tx.t;
                const double bottom = img.at(tx.lo, ty.hi, ch) * (1.0 - tx.t) + img.at(tx.hi, ty.hi, ch) * tx.t;
                out[k++] = std::clamp(top * (1.0 - ty.t) + bottom * ty.t, 0.0, 1.0);
            }
        }
    }
    return Raster(out_width, out_height, c, std::move(out));
}

Raster apply_pipeline(const Raster& img, const BBox& box, PaddingFactor padding, const Pipeline& pipe) {
    validate(pipe);
    const BBox padded = pad_bbox(box, padding, img.width(), img.height());
    const Raster face = extract(img, padded);
    if (const auto* crop = std::get_if<CentralCrop>(&pipe)) return central_crop(face, crop->size);
    const auto& r = std::get<Resize>(pipe);
    return resize_bilinear(face, r.width, r.height);
}

Raster gaussian_noise(const Raster& img, double sigma, std::uint64_t seed) {
    if (!(sigma >= 0.0)) throw ConfigError("noise sigma must be >= 0");
    if (sigma == 0.0) return img;
    Rng rng(seed);
    std::vector<double> out(img.pixels().begin(), img.pixels().end());
    for (double& v : out) v = std::clamp(v + sigma * rng.normal(), 0.0, 1.0);
    return Raster(img.width(), img.height(), img.channels(), std::move(out));
}

}  // namespace audit
