#pragma once

#include <filesystem>
#include <vector>

#include "audit/fft.hpp"
#include "audit/raster.hpp"

namespace audit {

/// Row-major grid of complex Fourier coefficients; (u, v) is stored at v * width + u.
struct ComplexGrid {
    int width = 0;
    int height = 0;
    std::vector<Complex> values;

    const Complex& at(int u, int v) const { return values[static_cast<std::size_t>(v) * width + u]; }
};

/// Row-major grid of reals, same layout as ComplexGrid.
struct RealGrid {
    int width = 0;
    int height = 0;
    std::vector<double> values;

    double at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
};

/// Mean log power per integer radius.
struct SpectralProfile {
    std::vector<double> bins;
    bool normalized = false;

    std::size_t size() const noexcept { return bins.size(); }
};

/// Additive floor inside the logarithm of log_power_centered.
inline constexpr double kLogEpsilon = 1e-8;

/// Unnormalized 2-D DFT by row-column decomposition. Single-channel input only.
ComplexGrid dft2(const Raster& img);
/// Same transform on an arbitrary real grid (values need not lie in [0, 1]).
ComplexGrid dft2(const RealGrid& grid);
/// Inverse of dft2, including the 1/(W*H) factor.
ComplexGrid idft2(const ComplexGrid& spectrum);

/// ln(|F| + kLogEpsilon) with the DC bin moved to (W/2, H/2).
RealGrid log_power_centered(const ComplexGrid& spectrum);

/// Mean of the grid over rings of integer radius round(distance to (W/2, H/2)),
/// for radii 0 .. min(W, H)/2. Cells further out are ignored.
SpectralProfile azimuthal_average(const RealGrid& power);

/// azimuthal_average(log_power_centered(dft2(to_grayscale(img)))), optionally
/// divided by the DC bin. Throws NumericError if normalizing by a zero DC bin.
SpectralProfile profile_of(const Raster& img, bool normalize);

/// Mean of the bins in the top quartile of radii, [3(n-1)/4, n-1].
double top_quartile_mean(const SpectralProfile& profile);

/// CSV with header "bin,value" and 9 significant digits.
void write_profile_csv(const std::filesystem::path& path, const SpectralProfile& profile);

}  // namespace audit
