#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace audit {

using Complex = std::complex<double>;

/// Exact 1-D DFT of any length >= 1.
///
/// Lengths whose prime factors are all below kMaxRadix use a recursive
/// mixed-radix Cooley-Tukey decomposition with a generic radix-p butterfly.
/// Any other length goes through Bluestein's chirp-z identity on a
/// power-of-two convolution. Twiddles are tabulated once per plan from exact
/// integer angle indices, so accuracy stays near machine precision.
///
/// A plan is immutable after construction and may be shared between threads.
class FftPlan {
public:
    static constexpr std::size_t kMaxRadix = 32;

    explicit FftPlan(std::size_t n);
    ~FftPlan();
    FftPlan(FftPlan&&) noexcept;
    FftPlan& operator=(FftPlan&&) noexcept;

    std::size_t size() const noexcept { return n_; }
    bool uses_bluestein() const noexcept { return inner_ != nullptr; }

    /// X[k] = sum_j x[j] exp(-2 pi i jk / n), in place.
    void forward(std::span<Complex> data) const;
    /// x[j] = sum_k X[k] exp(+2 pi i jk / n), in place, without the 1/n factor.
    void inverse(std::span<Complex> data) const;

private:
    void transform(std::span<Complex> data, bool inverse) const;
    void recurse(const Complex* in, std::size_t stride, Complex* out, std::size_t n, std::size_t level,
                 bool inverse) const;
    void bluestein(std::span<Complex> data) const;

    std::size_t n_;
    std::vector<std::size_t> factors_;
    std::vector<Complex> roots_;  // exp(-2 pi i k / n_)

    // Bluestein state
    std::unique_ptr<FftPlan> inner_;
    std::vector<Complex> chirp_;
    std::vector<Complex> kernel_spectrum_;
};

}  // namespace audit
