#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "audit/raster.hpp"

namespace audit {

struct ManifestEntry {
    std::filesystem::path path;
    int label = 0;  // 0 real, 1 fake
    std::string dataset;
    BBox bbox;

    bool operator==(const ManifestEntry&) const = default;
};

/// Texture with power spectrum proportional to 1/f^(2 slope).
struct Real1F {};
/// 1/f texture synthesized at size/factor and nearest-neighbour upsampled.
struct FakeUpsample {
    int factor = 2;
};
/// 1/f texture blurred by a Gaussian kernel.
struct FakeSmoothed {
    double kernel_sigma = 1.0;
};
/// 1/f texture plus a fixed additive pattern
/// amplitude * cos(2 pi x / period) * cos(2 pi y / period), the periodic
/// fingerprint left by strided transposed-convolution upsamplers.
struct FakePeriodic {
    int period = 2;
    double amplitude = 0.02;
};

using SynthKind = std::variant<Real1F, FakeUpsample, FakeSmoothed, FakePeriodic>;

struct SynthSpec {
    std::string dataset;
    SynthKind kind = Real1F{};
    int size = 64;
    int count = 1;
    std::uint64_t seed = 0;
    double spectral_slope = 1.0;
};

/// Throws ConfigError if the SynthSpec violates its invariants.
void validate(const SynthSpec& spec);
int label_of(const SynthKind& kind);
std::string describe(const SynthKind& kind);

/// The index-th image of the SynthSpec, before 8-bit quantization. Depends only on
/// (spec, index).
Raster synthesize_image(const SynthSpec& spec, int index);

/// Zero-mean, min-max normalized 1/f^slope texture (size x size) drawn from `seed`.
std::vector<double> spectral_texture(int size, double slope, std::uint64_t seed);

/// Writes every image as <dataset>_<index:05>.pgm plus one combined
/// "manifest.csv" with full-image boxes. Returns the manifest path.
std::filesystem::path generate_corpora(std::span<const SynthSpec> specs, const std::filesystem::path& out_dir);
std::filesystem::path generate_corpus(const SynthSpec& spec, const std::filesystem::path& out_dir);

/// Six datasets: five sharing one generator family (spectral slope near 1)
/// and one outlier family with a steeper, smoothed spectrum. Dataset seeds are
/// derived from `seed`.
std::vector<SynthSpec> family_preset(int size, int count, std::uint64_t seed);

/// Real1F against FakePeriodic: the corpus used to train the pixel detector.
std::vector<SynthSpec> detection_preset(int size, int count, std::uint64_t seed);

/// Header "path,label,dataset,x0,y0,x1,y1" (any column order). Relative paths
/// are resolved against the manifest's directory. Throws IoError or
/// ParseError (with the offending line number).
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);

/// Paths inside the manifest's directory are written relative to it.
void write_manifest(const std::filesystem::path& path, std::span<const ManifestEntry> entries);

}  // namespace audit
