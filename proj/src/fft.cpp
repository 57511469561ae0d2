#include "fft.hpp"

#include <map>
#include <memory>
#include <mutex>

namespace nematic::detail {
namespace {

std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

fftw_complex* as_fftw(const std::complex<double>* p) {
    return reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(p));
}

}  // namespace

Fft2d::Fft2d(int m) : m_(m) {
    std::vector<std::complex<double>> in(static_cast<std::size_t>(m) * m);
    std::vector<std::complex<double>> out(in.size());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    forward_ = fftw_plan_dft_2d(m, m, as_fftw(in.data()), as_fftw(out.data()), FFTW_FORWARD, flags);
    backward_ = fftw_plan_dft_2d(m, m, as_fftw(in.data()), as_fftw(out.data()), FFTW_BACKWARD, flags);
}

Fft2d::~Fft2d() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
}

const Fft2d& Fft2d::of_size(int m) {
    static std::map<int, std::unique_ptr<Fft2d>> cache;
    std::lock_guard lock(planner_mutex());
    auto& slot = cache[m];
    if (!slot) slot.reset(new Fft2d(m));
    return *slot;
}

void Fft2d::forward(const std::complex<double>* in, std::complex<double>* out) const {
    fftw_execute_dft(forward_, as_fftw(in), as_fftw(out));
}

void Fft2d::backward(const std::complex<double>* in, std::complex<double>* out) const {
    fftw_execute_dft(backward_, as_fftw(in), as_fftw(out));
}

Scratch& thread_scratch(std::size_t n) {
    thread_local Scratch s;
    if (s.a.size() < n) {
        s.a.resize(n);
        s.b.resize(n);
    }
    return s;
}

}  // namespace nematic::detail
