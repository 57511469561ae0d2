#pragma once

#include <complex>
#include <vector>

#include <fftw3.h>

namespace nematic::detail {

/// Cached 2D complex FFTW plans for one square size. Plans are created once
/// under a lock; execution uses the new-array interface and is thread-safe.
class Fft2d {
public:
    static const Fft2d& of_size(int m);

    ~Fft2d();
    Fft2d(const Fft2d&) = delete;
    Fft2d& operator=(const Fft2d&) = delete;

    int size() const { return m_; }
    // Unnormalized e^{-ik.x} transform.
    void forward(const std::complex<double>* in, std::complex<double>* out) const;
    // Unnormalized e^{+ik.x} transform.
    void backward(const std::complex<double>* in, std::complex<double>* out) const;

private:
    explicit Fft2d(int m);
    int m_;
    fftw_plan forward_{};
    fftw_plan backward_{};
};

/// Per-thread scratch buffers reused across transforms.
struct Scratch {
    std::vector<std::complex<double>> a;
    std::vector<std::complex<double>> b;
};
Scratch& thread_scratch(std::size_t n);

}  // namespace nematic::detail
