#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "audit/spectrum.hpp"

namespace testutil {

// Quadratic-time 2-D DFT. Angles are reduced modulo the length in integer
// arithmetic before the trigonometric call.
inline std::vector<std::complex<double>> naive_dft2(const std::vector<double>& f, int w, int h) {
    std::vector<std::complex<double>> out(static_cast<std::size_t>(w) * h);
    for (int v = 0; v < h; ++v) {
        for (int u = 0; u < w; ++u) {
            std::complex<double> acc = 0.0;
            for (int y = 0; y < h; ++y) {
                for (int x = 0; x < w; ++x) {
                    const long ax = (static_cast<long>(u) * x) % w;
                    const long ay = (static_cast<long>(v) * y) % h;
                    const double angle = -2.0 * std::numbers::pi *
                                         (static_cast<double>(ax) / w + static_cast<double>(ay) / h);
                    acc += f[static_cast<std::size_t>(y) * w + x] * std::polar(1.0, angle);
                }
            }
            out[static_cast<std::size_t>(v) * w + u] = acc;
        }
    }
    return out;
}

// max |a - b| / max |b|
inline double relative_error(const std::vector<std::complex<double>>& a, const std::vector<std::complex<double>>& b) {
    double diff = 0.0;
    double scale = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        diff = std::max(diff, std::abs(a[i] - b[i]));
        scale = std::max(scale, std::abs(b[i]));
    }
    return scale > 0.0 ? diff / scale : diff;
}

}  // namespace testutil
