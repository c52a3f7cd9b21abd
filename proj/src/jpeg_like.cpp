#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "audit/error.hpp"
#include "audit/raster.hpp"

namespace audit {

namespace {

constexpr int kBlock = 8;

// Baseline luminance quantization table (ITU-T T.81 Annex K, table K.1).
constexpr std::array<int, 64> kLuminanceTable = {
    16, 11, 10, 16, 24,  40,  51,  61,   //
    12, 12, 14, 19, 26,  58,  60,  55,   //
    14, 13, 16, 24, 40,  57,  69,  56,   //
    14, 17, 22, 29, 51,  87,  80,  62,   //
    18, 22, 37, 56, 68,  109, 103, 77,   //
    24, 35, 55, 64, 81,  104, 113, 92,   //
    49, 64, 78, 87, 103, 121, 120, 101,  //
    72, 92, 95, 98, 112, 100, 103, 99,
};

// basis[k][n] = c(k) * cos((2n + 1) k pi / 16), orthonormal DCT-II rows
std::array<std::array<double, kBlock>, kBlock> make_basis() {
    std::array<std::array<double, kBlock>, kBlock> basis{};
    for (int k = 0; k < kBlock; ++k) {
        const double scale = k == 0 ? std::sqrt(1.0 / kBlock) : std::sqrt(2.0 / kBlock);
        for (int n = 0; n < kBlock; ++n) {
            basis[k][n] = scale * std::cos((2 * n + 1) * k * std::numbers::pi / (2 * kBlock));
        }
    }
    return basis;
}

using Block = std::array<std::array<double, kBlock>, kBlock>;  // [row][col]

// out = B * in * B^T (forward) or B^T * in * B (inverse)
Block transform(const Block& in, const Block& basis, bool inverse) {
    Block tmp{};
    Block out{};
    for (int r = 0; r < kBlock; ++r) {
        for (int c = 0; c < kBlock; ++c) {
            double acc = 0.0;
            for (int k = 0; k < kBlock; ++k) acc += (inverse ? basis[k][r] : basis[r][k]) * in[k][c];
            tmp[r][c] = acc;
        }
    }
    for (int r = 0; r < kBlock; ++r) {
        for (int c = 0; c < kBlock; ++c) {
            double acc = 0.0;
            for (int k = 0; k < kBlock; ++k) acc += tmp[r][k] * (inverse ? basis[k][c] : basis[c][k]);
            out[r][c] = acc;
        }
    }
    return out;
}

}  // namespace

std::vector<int> scaled_quant_table(Quality quality) {
    const int q = quality.value();
    const int scale = q < 50 ? 5000 / q : 200 - 2 * q;
    std::vector<int> table(64);
    for (std::size_t i = 0; i < table.size(); ++i) {
        const int t = (kLuminanceTable[i] * scale + 50) / 100;
        table[i] = std::clamp(t, 1, 255);
    }
    return table;
}

Raster jpeg_like_compress(const Raster& img, Quality quality) {
    if (img.channels() != 1) throw DimensionError("jpeg_like_compress expects a single-channel raster");
    static const Block basis = make_basis();
    const auto table = scaled_quant_table(quality);
    const int w = img.width();
    const int h = img.height();
    std::vector<double> out(static_cast<std::size_t>(w) * h);

    for (int by = 0; by < h; by += kBlock) {
        for (int bx = 0; bx < w; bx += kBlock) {
            Block block{};
            for (int r = 0; r < kBlock; ++r) {
                const int y = std::min(by + r, h - 1);
                for (int c = 0; c < kBlock; ++c) {
                    const int x = std::min(bx + c, w - 1);
                    block[r][c] = img.at(x, y) * 255.0 - 128.0;
                }
            }
            Block coeffs = transform(block, basis, false);
            for (int r = 0; r < kBlock; ++r) {
                for (int c = 0; c < kBlock; ++c) {
                    const double t = table[static_cast<std::size_t>(r) * kBlock + c];
                    coeffs[r][c] = std::round(coeffs[r][c] / t) * t;
                }
            }
            const Block recon = transform(coeffs, basis, true);
            for (int r = 0; r < kBlock && by + r < h; ++r) {
                for (int c = 0; c < kBlock && bx + c < w; ++c) {
                    out[static_cast<std::size_t>(by + r) * w + bx + c] =
                        std::clamp((recon[r][c] + 128.0) / 255.0, 0.0, 1.0);
                }
            }
        }
    }
    return Raster(w, h, 1, std::move(out));
}

}  // namespace audit
