#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace audit {

/// Row-major image with interleaved channels and real-valued pixels in [0, 1].
class Raster {
public:
    Raster() = default;
    Raster(int width, int height, int channels, double fill = 0.0);
    /// Takes ownership of `pixels`; throws DimensionError on a size mismatch and
    /// DataError when a value is outside [0, 1] or not finite.
    Raster(int width, int height, int channels, std::vector<double> pixels);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    int channels() const noexcept { return channels_; }
    bool empty() const noexcept { return pixels_.empty(); }

    double at(int x, int y, int c = 0) const { return pixels_[index(x, y, c)]; }
    double& at(int x, int y, int c = 0) { return pixels_[index(x, y, c)]; }

    std::span<const double> pixels() const noexcept { return pixels_; }
    std::span<double> pixels() noexcept { return pixels_; }

    bool operator==(const Raster&) const = default;

private:
    std::size_t index(int x, int y, int c) const {
        return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
    }

    int width_ = 0;
    int height_ = 0;
    int channels_ = 1;
    std::vector<double> pixels_;
};

/// Half-open pixel box: [x0, x1) x [y0, y1).
struct BBox {
    int x0 = 0;
    int y0 = 0;
    int x1 = 0;
    int y1 = 0;

    int width() const noexcept { return x1 - x0; }
    int height() const noexcept { return y1 - y0; }
    bool valid() const noexcept { return 0 <= x0 && x0 < x1 && 0 <= y0 && y0 < y1; }
    bool contains(const BBox& other) const noexcept {
        return x0 <= other.x0 && y0 <= other.y0 && other.x1 <= x1 && other.y1 <= y1;
    }
    bool operator==(const BBox&) const = default;
};

/// Fractional outward expansion of a box, relative to the box side on each axis.
class PaddingFactor {
public:
    PaddingFactor() = default;
    explicit PaddingFactor(double value);
    double value() const noexcept { return value_; }

private:
    double value_ = 0.0;
};

struct CentralCrop {
    int size = 0;
    bool operator==(const CentralCrop&) const = default;
};

struct Resize {
    int width = 0;
    int height = 0;
    bool operator==(const Resize&) const = default;
};

/// Preprocessing applied to the padded face box: keep native scale and cut a
/// centered patch, or stretch the whole box to a fixed size.
using Pipeline = std::variant<CentralCrop, Resize>;

/// Short, stable descriptor such as "crop:224" or "resize:224x224".
std::string describe(const Pipeline& pipe);
/// Inverse of describe(); throws ConfigError on malformed text.
Pipeline parse_pipeline(const std::string& text);
/// Validates sizes >= 1; throws ConfigError otherwise.
void validate(const Pipeline& pipe);

/// JPEG quality factor in [1, 100].
class Quality {
public:
    explicit Quality(int q);
    int value() const noexcept { return q_; }

private:
    int q_;
};

/// BT.601 luma. One-channel input is returned unchanged.
Raster to_grayscale(const Raster& img);

/// Moves every side outward by round-half-up(p * side length on that axis) and
/// clamps to the image. Throws DimensionError when `box` is invalid or not
/// inside the image.
BBox pad_bbox(const BBox& box, PaddingFactor padding, int image_width, int image_height);

/// Sub-image covered by `box` (all channels).
Raster extract(const Raster& img, const BBox& box);

/// size x size patch with top-left corner at the floored centered offset.
Raster central_crop(const Raster& img, int size);

/// Bilinear resampling, half-pixel centers, clamp-to-edge.
Raster resize_bilinear(const Raster& img, int out_width, int out_height);

/// Pads `box`, extracts it and applies the pipeline.
Raster apply_pipeline(const Raster& img, const BBox& box, PaddingFactor padding, const Pipeline& pipe);

/// 8x8 block-DCT quantization with the scaled baseline luminance table.
/// One-channel input only.
Raster jpeg_like_compress(const Raster& img, Quality quality);

/// The 64-entry quantizer used by jpeg_like_compress, row-major by
/// (vertical frequency, horizontal frequency).
std::vector<int> scaled_quant_table(Quality quality);

/// Adds seeded N(0, sigma^2) noise and clamps to [0, 1].
Raster gaussian_noise(const Raster& img, double sigma, std::uint64_t seed);

}  // namespace audit
