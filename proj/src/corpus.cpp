#include "audit/corpus.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <sstream>

#include "audit/error.hpp"
#include "audit/image_io.hpp"
#include "audit/rng.hpp"
#include "audit/spectrum.hpp"
#include "audit/text.hpp"

namespace audit {

namespace fs = std::filesystem;

void validate(const SynthSpec& spec) {
    if (spec.dataset.empty()) throw ConfigError("synthetic dataset needs a name");
    if (spec.dataset.find_first_of(",/\\") != std::string::npos) {
        throw ConfigError("dataset name may not contain ',', '/' or '\\'");
    }
    if (spec.count < 1) throw ConfigError("synthetic count must be >= 1");
    if (spec.size < 16) throw ConfigError("synthetic size must be >= 16");
    if (!std::isfinite(spec.spectral_slope)) throw ConfigError("spectral slope must be finite");
    std::visit(
        [](const auto& k) {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, FakeUpsample>) {
                if (k.factor < 2) throw ConfigError("upsample factor must be >= 2");
            } else if constexpr (std::is_same_v<K, FakeSmoothed>) {
                if (!(k.kernel_sigma > 0.0)) throw ConfigError("smoothing sigma must be > 0");
            } else if constexpr (std::is_same_v<K, FakePeriodic>) {
                if (k.period < 2) throw ConfigError("pattern period must be >= 2");
                if (!(k.amplitude > 0.0 && k.amplitude < 0.5)) throw ConfigError("pattern amplitude must be in (0,0.5)");
            }
        },
        spec.kind);
}

int label_of(const SynthKind& kind) { return std::holds_alternative<Real1F>(kind) ? 0 : 1; }

std::string describe(const SynthKind& kind) {
    return std::visit(
        [](const auto& k) -> std::string {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, Real1F>) {
                return "real";
            } else if constexpr (std::is_same_v<K, FakeUpsample>) {
                return "upsample:" + std::to_string(k.factor);
            } else if constexpr (std::is_same_v<K, FakeSmoothed>) {
                return "smoothed:" + format_sig9(k.kernel_sigma);
            } else {
                return "periodic:" + std::to_string(k.period) + ":" + format_sig9(k.amplitude);
            }
        },
        kind);
}

std::vector<double> spectral_texture(int size, double slope, std::uint64_t seed) {
    Rng rng(seed);
    RealGrid noise{size, size, std::vector<double>(static_cast<std::size_t>(size) * size)};
    for (double& v : noise.values) v = rng.normal();

    ComplexGrid spectrum = dft2(noise);
    for (int v = 0; v < size; ++v) {
        const double fy = v <= size / 2 ? v : v - size;
        for (int u = 0; u < size; ++u) {
            const double fx = u <= size / 2 ? u : u - size;
            const double f = std::sqrt(fx * fx + fy * fy);
            Complex& c = spectrum.values[static_cast<std::size_t>(v) * size + u];
            // keep only the phase of the noise so the amplitude is exactly f^-slope
            const double mag = std::abs(c);
            c = f == 0.0 || mag == 0.0 ? Complex{} : c * (std::pow(f, -slope) / mag);
        }
    }
    const ComplexGrid field = idft2(spectrum);

    std::vector<double> out(field.values.size());
    std::transform(field.values.begin(), field.values.end(), out.begin(), [](const Complex& c) { return c.real(); });
    const auto [lo, hi] = std::minmax_element(out.begin(), out.end());
    const double min = *lo;
    const double range = *hi - *lo;
    for (double& v : out) v = range > 0.0 ? (v - min) / range : 0.5;
    return out;
}

namespace {

std::vector<double> nearest_upsample(const std::vector<double>& small, int small_size, int factor, int size) {
    std::vector<double> out(static_cast<std::size_t>(size) * size);
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            out[static_cast<std::size_t>(y) * size + x] =
                small[static_cast<std::size_t>(y / factor) * small_size + x / factor];
        }
    }
    return out;
}

std::vector<double> gaussian_blur(const std::vector<double>& img, int size, double sigma) {
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> kernel(2 * radius + 1);
    double total = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        kernel[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
        total += kernel[i + radius];
    }
    for (double& k : kernel) k /= total;

    auto pass = [&](const std::vector<double>& src, bool horizontal) {
        std::vector<double> dst(src.size());
        for (int y = 0; y < size; ++y) {
            for (int x = 0; x < size; ++x) {
                double acc = 0.0;
                for (int i = -radius; i <= radius; ++i) {
                    const int sx = horizontal ? std::clamp(x + i, 0, size - 1) : x;
                    const int sy = horizontal ? y : std::clamp(y + i, 0, size - 1);
                    acc += kernel[i + radius] * src[static_cast<std::size_t>(sy) * size + sx];
                }
                dst[static_cast<std::size_t>(y) * size + x] = std::clamp(acc, 0.0, 1.0);
            }
        }
        return dst;
    };
    return pass(pass(img, true), false);
}

}  // namespace

Raster synthesize_image(const SynthSpec& spec, int index) {
    validate(spec);
    const std::uint64_t seed = derive_seed(spec.seed, static_cast<std::uint64_t>(index));
    const int size = spec.size;
    std::vector<double> px = std::visit(
        [&](const auto& k) {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, Real1F>) {
                return spectral_texture(size, spec.spectral_slope, seed);
            } else if constexpr (std::is_same_v<K, FakeUpsample>) {
                const int small = (size + k.factor - 1) / k.factor;
                return nearest_upsample(spectral_texture(small, spec.spectral_slope, seed), small, k.factor, size);
            } else if constexpr (std::is_same_v<K, FakeSmoothed>) {
                return gaussian_blur(spectral_texture(size, spec.spectral_slope, seed), size, k.kernel_sigma);
            } else {
                auto base = spectral_texture(size, spec.spectral_slope, seed);
                for (int y = 0; y < size; ++y) {
                    const double cy = std::cos(2.0 * std::numbers::pi * y / k.period);
                    for (int x = 0; x < size; ++x) {
                        const double cx = std::cos(2.0 * std::numbers::pi * x / k.period);
                        double& v = base[static_cast<std::size_t>(y) * size + x];
                        v = std::clamp(v + k.amplitude * cx * cy, 0.0, 1.0);
                    }
                }
                return base;
            }
        },
        spec.kind);
    return Raster(size, size, 1, std::move(px));
}

fs::path generate_corpora(std::span<const SynthSpec> specs, const fs::path& out_dir) {
    for (const auto& spec : specs) validate(spec);
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create directory '" + out_dir.string() + "': " + ec.message());

    std::vector<ManifestEntry> entries;
    for (const auto& spec : specs) {
        for (int i = 0; i < spec.count; ++i) {
            char name[64];
            std::snprintf(name, sizeof name, "_%05d.pgm", i);
            const fs::path file = out_dir / (spec.dataset + name);
            save_image(file, synthesize_image(spec, i));
            entries.push_back({file, label_of(spec.kind), spec.dataset, BBox{0, 0, spec.size, spec.size}});
        }
    }
    const fs::path manifest = out_dir / "manifest.csv";
    write_manifest(manifest, entries);
    return manifest;
}

fs::path generate_corpus(const SynthSpec& spec, const fs::path& out_dir) {
    return generate_corpora(std::span<const SynthSpec>(&spec, 1), out_dir);
}

namespace {

std::uint64_t dataset_seed(std::uint64_t seed, std::uint64_t k) {
    std::uint64_t state = seed * 0x100000001b3ULL + k;
    return splitmix64(state);
}

}  // namespace

std::vector<SynthSpec> family_preset(int size, int count, std::uint64_t seed) {
    std::vector<SynthSpec> specs = {
        {"a_real", Real1F{}, size, count, 0, 1.0},
        {"a_real_alt", Real1F{}, size, count, 0, 1.15},
        {"a_upsample", FakeUpsample{2}, size, count, 0, 1.0},
        {"a_smoothed", FakeSmoothed{0.6}, size, count, 0, 1.0},
        {"a_periodic", FakePeriodic{2, 0.02}, size, count, 0, 1.0},
        {"b_smoothed", FakeSmoothed{1.0}, size, count, 0, 1.8},
    };
    for (std::size_t k = 0; k < specs.size(); ++k) specs[k].seed = dataset_seed(seed, k);
    return specs;
}

std::vector<SynthSpec> detection_preset(int size, int count, std::uint64_t seed) {
    std::vector<SynthSpec> specs = {
        {"real", Real1F{}, size, count, 0, 1.0},
        {"fake", FakePeriodic{2, 0.02}, size, count, 0, 1.0},
    };
    for (std::size_t k = 0; k < specs.size(); ++k) specs[k].seed = dataset_seed(seed, k);
    return specs;
}

namespace {

int parse_int(const std::string& field, const char* column, std::size_t line) {
    int v = 0;
    const auto* end = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(field.data(), end, v);
    if (field.empty() || ec != std::errc{} || ptr != end) {
        throw ParseError(std::string("column '") + column + "' is not an integer: '" + field + "'", line);
    }
    return v;
}

}  // namespace

std::vector<ManifestEntry> read_manifest(const fs::path& path) {
    const std::string text = read_text_file(path);
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty manifest", 1);

    static constexpr std::array<const char*, 7> kColumns = {"path", "label", "dataset", "x0", "y0", "x1", "y1"};
    const auto header = split_csv_line(line);
    std::array<std::size_t, 7> column{};
    for (std::size_t c = 0; c < kColumns.size(); ++c) {
        const auto it = std::find(header.begin(), header.end(), kColumns[c]);
        if (it == header.end()) throw ParseError(std::string("missing column '") + kColumns[c] + "'", 1);
        column[c] = static_cast<std::size_t>(it - header.begin());
    }

    const fs::path base = path.parent_path();
    std::vector<ManifestEntry> entries;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto f = split_csv_line(line);
        if (f.size() != header.size()) {
            throw ParseError("expected " + std::to_string(header.size()) + " fields, found " + std::to_string(f.size()),
                             line_no);
        }
        ManifestEntry e;
        const std::string& p = f[column[0]];
        if (p.empty()) throw ParseError("empty path", line_no);
        e.path = fs::path(p).is_absolute() ? fs::path(p) : base / p;
        e.label = parse_int(f[column[1]], "label", line_no);
        if (e.label != 0 && e.label != 1) throw ParseError("label must be 0 or 1, got " + f[column[1]], line_no);
        e.dataset = f[column[2]];
        if (e.dataset.empty()) throw ParseError("empty dataset label", line_no);
        e.bbox = BBox{parse_int(f[column[3]], "x0", line_no), parse_int(f[column[4]], "y0", line_no),
                      parse_int(f[column[5]], "x1", line_no), parse_int(f[column[6]], "y1", line_no)};
        if (!e.bbox.valid()) throw ParseError("invalid bbox (need 0 <= x0 < x1 and 0 <= y0 < y1)", line_no);
        entries.push_back(std::move(e));
    }
    return entries;
}

void write_manifest(const fs::path& path, std::span<const ManifestEntry> entries) {
    const fs::path base = path.parent_path();
    std::ostringstream out;
    out << "path,label,dataset,x0,y0,x1,y1\n";
    for (const auto& e : entries) {
        fs::path p = e.path;
        const auto rel = p.lexically_relative(base);
        if (!rel.empty() && *rel.begin() != "..") p = rel;
        out << p.generic_string() << ',' << e.label << ',' << e.dataset << ',' << e.bbox.x0 << ',' << e.bbox.y0 << ','
            << e.bbox.x1 << ',' << e.bbox.y1 << '\n';
    }
    write_text_file(path, out.str());
}

}  // namespace audit
