#include "nematic/kernels.hpp"

#include "kernels_internal.hpp"

namespace nematic::simd {
namespace {

void scale_real(cplx* c, const double* m, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) c[i] *= m[i];
}

void mul_ik(cplx* out, const cplx* in, const double* k, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = cplx(-k[i] * in[i].imag(), k[i] * in[i].real());
}

void leray(cplx* w1, cplx* w2, const double* k1, const double* k2, const double* inv_k2,
           std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const cplx p = (k1[i] * w1[i] + k2[i] * w2[i]) * inv_k2[i];
        w1[i] -= k1[i] * p;
        w2[i] -= k2[i] * p;
    }
}

void dot2(double* out, const double* a1, const double* b1, const double* a2, const double* b2,
          std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a1[i] * b1[i] + a2[i] * b2[i];
}

void multiply(double* out, const double* a, const double* b, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void poly_field(double* out1, double* out2, const double* t1, const double* t2,
                const double* coeffs, std::size_t ncoeffs, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const double r = t1[i] * t1[i] + t2[i] * t2[i];
        double s = 0.0;
        for (std::size_t j = ncoeffs; j-- > 0;) s = s * r + coeffs[j];
        out1[i] = s * t1[i];
        out2[i] = s * t2[i];
    }
}

double weighted_norm2(const cplx* c, const double* w, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += w[i] * std::norm(c[i]);
    return acc;
}

double weighted_inner(const cplx* a, const cplx* b, const double* w, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        acc += w[i] * (a[i].real() * b[i].real() + a[i].imag() * b[i].imag());
    return acc;
}

}  // namespace

const KernelTable& scalar_kernels() {
    static const KernelTable table{
        "scalar", scale_real, mul_ik, leray, dot2, multiply, poly_field, weighted_norm2,
        weighted_inner,
    };
    return table;
}

}  // namespace nematic::simd
