#include "audit/fft.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include "audit/error.hpp"

namespace audit {

namespace {

std::vector<std::size_t> factorize(std::size_t n) {
    std::vector<std::size_t> f;
    while (n % 4 == 0) {
        f.push_back(4);
        n /= 4;
    }
    for (std::size_t p = 2; p * p <= n; ++p) {
        while (n % p == 0) {
            f.push_back(p);
            n /= p;
        }
    }
    if (n > 1) f.push_back(n);
    return f;
}

Complex unit_root(std::size_t k, std::size_t n) {
    const double angle = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
    return {std::cos(angle), std::sin(angle)};
}

}  // namespace

FftPlan::FftPlan(std::size_t n) : n_(n) {
    if (n == 0) throw DimensionError("FFT length must be >= 1");
    factors_ = factorize(n);
    bool small_factors = true;
    for (auto p : factors_) small_factors = small_factors && p < kMaxRadix;

    if (small_factors) {
        roots_.resize(n);
        for (std::size_t k = 0; k < n; ++k) roots_[k] = unit_root(k, n);
        return;
    }

    std::size_t m = 1;
    while (m < 2 * n - 1) m <<= 1;
    inner_ = std::make_unique<FftPlan>(m);
    chirp_.resize(n);
    const std::size_t period = 2 * n;
    for (std::size_t k = 0; k < n; ++k) {
        // exp(-i pi k^2 / n), reduced modulo 2n before the trig call
        const auto k2 = static_cast<std::size_t>((static_cast<unsigned __int128>(k) * k) % period);
        chirp_[k] = unit_root(k2, period);
    }
    kernel_spectrum_.assign(m, Complex{});
    kernel_spectrum_[0] = std::conj(chirp_[0]);
    for (std::size_t k = 1; k < n; ++k) {
        kernel_spectrum_[k] = std::conj(chirp_[k]);
        kernel_spectrum_[m - k] = std::conj(chirp_[k]);
    }
    inner_->forward(kernel_spectrum_);
}

FftPlan::~FftPlan() = default;
FftPlan::FftPlan(FftPlan&&) noexcept = default;
FftPlan& FftPlan::operator=(FftPlan&&) noexcept = default;

void FftPlan::forward(std::span<Complex> data) const { transform(data, false); }

void FftPlan::inverse(std::span<Complex> data) const { transform(data, true); }

void FftPlan::transform(std::span<Complex> data, bool inverse) const {
    if (data.size() != n_) throw DimensionError("FFT input length does not match plan");
    if (n_ == 1) return;
    if (inner_) {
        // inverse(x) = conj(forward(conj(x)))
        if (inverse) {
            for (auto& v : data) v = std::conj(v);
        }
        bluestein(data);
        if (inverse) {
            for (auto& v : data) v = std::conj(v);
        }
        return;
    }
    std::vector<Complex> out(n_);
    recurse(data.data(), 1, out.data(), n_, 0, inverse);
    std::copy(out.begin(), out.end(), data.begin());
}

void FftPlan::recurse(const Complex* in, std::size_t stride, Complex* out, std::size_t n, std::size_t level,
                      bool inverse) const {
    if (n == 1) {
        out[0] = in[0];
        return;
    }
    const std::size_t p = factors_[level];
    const std::size_t m = n / p;
    for (std::size_t r = 0; r < p; ++r) recurse(in + r * stride, stride * p, out + r * m, m, level + 1, inverse);

    const std::size_t twiddle_step = n_ / n;
    const std::size_t radix_step = n_ / p;
    auto root = [&](std::size_t k) { return inverse ? std::conj(roots_[k]) : roots_[k]; };

    std::array<Complex, kMaxRadix> t;
    for (std::size_t k = 0; k < m; ++k) {
        t[0] = out[k];
        for (std::size_t r = 1; r < p; ++r) t[r] = out[r * m + k] * root(r * k * twiddle_step);
        if (p == 2) {
            out[k] = t[0] + t[1];
            out[m + k] = t[0] - t[1];
            continue;
        }
        for (std::size_t q = 0; q < p; ++q) {
            Complex acc = t[0];
            for (std::size_t r = 1; r < p; ++r) acc += t[r] * root(((r * q) % p) * radix_step);
            out[q * m + k] = acc;
        }
    }
}

void FftPlan::bluestein(std::span<Complex> data) const {
    const std::size_t m = inner_->size();
    std::vector<Complex> work(m, Complex{});
    for (std::size_t k = 0; k < n_; ++k) work[k] = data[k] * chirp_[k];
    inner_->forward(work);
    for (std::size_t k = 0; k < m; ++k) work[k] *= kernel_spectrum_[k];
    inner_->inverse(work);
    const double scale = 1.0 / static_cast<double>(m);
    for (std::size_t k = 0; k < n_; ++k) data[k] = work[k] * chirp_[k] * scale;
}

}  // namespace audit
