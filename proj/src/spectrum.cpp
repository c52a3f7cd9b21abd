#include "audit/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "audit/error.hpp"
#include "audit/text.hpp"

namespace audit {

namespace {

void transform_rows_and_columns(std::vector<Complex>& values, int width, int height, bool inverse) {
    const FftPlan row_plan(static_cast<std::size_t>(width));
    for (int y = 0; y < height; ++y) {
        std::span<Complex> row(values.data() + static_cast<std::size_t>(y) * width, static_cast<std::size_t>(width));
        inverse ? row_plan.inverse(row) : row_plan.forward(row);
    }
    const FftPlan col_plan(static_cast<std::size_t>(height));
    std::vector<Complex> column(static_cast<std::size_t>(height));
    for (int x = 0; x < width; ++x) {
        for (int y = 0; y < height; ++y) column[y] = values[static_cast<std::size_t>(y) * width + x];
        inverse ? col_plan.inverse(column) : col_plan.forward(column);
        for (int y = 0; y < height; ++y) values[static_cast<std::size_t>(y) * width + x] = column[y];
    }
}

}  // namespace

ComplexGrid dft2(const RealGrid& grid) {
    if (grid.width < 1 || grid.height < 1) throw DimensionError("dft2 needs a non-empty grid");
    ComplexGrid out{grid.width, grid.height, std::vector<Complex>(grid.values.begin(), grid.values.end())};
    transform_rows_and_columns(out.values, out.width, out.height, false);
    return out;
}

ComplexGrid dft2(const Raster& img) {
    if (img.channels() != 1) throw DimensionError("dft2 expects a single-channel raster");
    return dft2(RealGrid{img.width(), img.height(), {img.pixels().begin(), img.pixels().end()}});
}

ComplexGrid idft2(const ComplexGrid& spectrum) {
    ComplexGrid out = spectrum;
    transform_rows_and_columns(out.values, out.width, out.height, true);
    const double scale = 1.0 / (static_cast<double>(out.width) * out.height);
    for (auto& v : out.values) v *= scale;
    return out;
}

RealGrid log_power_centered(const ComplexGrid& spectrum) {
    const int w = spectrum.width;
    const int h = spectrum.height;
    RealGrid out{w, h, std::vector<double>(spectrum.values.size())};
    for (int v = 0; v < h; ++v) {
        const int y = (v + h / 2) % h;
        for (int u = 0; u < w; ++u) {
            const int x = (u + w / 2) % w;
            out.values[static_cast<std::size_t>(y) * w + x] = std::log(std::abs(spectrum.at(u, v)) + kLogEpsilon);
        }
    }
    return out;
}

SpectralProfile azimuthal_average(const RealGrid& power) {
    if (power.width < 1 || power.height < 1) throw DimensionError("azimuthal_average needs a non-empty grid");
    const int cx = power.width / 2;
    const int cy = power.height / 2;
    const std::size_t n_bins = static_cast<std::size_t>(std::min(power.width, power.height) / 2) + 1;
    std::vector<double> sum(n_bins, 0.0);
    std::vector<std::size_t> count(n_bins, 0);
    for (int y = 0; y < power.height; ++y) {
        for (int x = 0; x < power.width; ++x) {
            const double dx = x - cx;
            const double dy = y - cy;
            const auto r = static_cast<std::size_t>(std::lround(std::sqrt(dx * dx + dy * dy)));
            if (r >= n_bins) continue;
            sum[r] += power.at(x, y);
            ++count[r];
        }
    }
    SpectralProfile profile;
    profile.bins.resize(n_bins);
    for (std::size_t r = 0; r < n_bins; ++r) profile.bins[r] = sum[r] / static_cast<double>(count[r]);
    return profile;
}

SpectralProfile profile_of(const Raster& img, bool normalize) {
    SpectralProfile profile = azimuthal_average(log_power_centered(dft2(to_grayscale(img))));
    if (normalize) {
        const double dc = profile.bins[0];
        if (dc == 0.0) throw NumericError("cannot normalize a profile whose DC bin is zero");
        for (double& b : profile.bins) b /= dc;
        profile.normalized = true;
    }
    return profile;
}

double top_quartile_mean(const SpectralProfile& profile) {
    if (profile.bins.empty()) throw DimensionError("empty profile");
    const std::size_t last = profile.bins.size() - 1;
    const std::size_t first = (3 * last) / 4;
    double acc = 0.0;
    for (std::size_t i = first; i <= last; ++i) acc += profile.bins[i];
    return acc / static_cast<double>(last - first + 1);
}

void write_profile_csv(const std::filesystem::path& path, const SpectralProfile& profile) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot create '" + path.string() + "'");
    out << "bin,value\n";
    for (std::size_t i = 0; i < profile.bins.size(); ++i) out << i << ',' << format_sig9(profile.bins[i]) << '\n';
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace audit
