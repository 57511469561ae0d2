#pragma once

#include <complex>
#include <cstddef>
#include <string_view>

namespace nematic::simd {

using cplx = std::complex<double>;

/// Table of the data-parallel inner loops used by the spectral layer.
///
/// Every entry has a portable scalar reference implementation; wider
/// variants are selected once at startup when the CPU supports them.
/// All pointers address `n` contiguous elements and may not alias unless
/// stated otherwise.
struct KernelTable {
    std::string_view name;

    // c[i] *= m[i]            (in place)
    void (*scale_real)(cplx* c, const double* m, std::size_t n);

    // out[i] = i * k[i] * in[i]
    void (*mul_ik)(cplx* out, const cplx* in, const double* k, std::size_t n);

    // Per-mode projection w <- (I - k k^T |k|^-2) w, inv_k2 = 0 on the mean mode.
    void (*leray)(cplx* w1, cplx* w2, const double* k1, const double* k2,
                  const double* inv_k2, std::size_t n);

    // out[i] = a1[i]*b1[i] + a2[i]*b2[i]
    void (*dot2)(double* out, const double* a1, const double* b1,
                 const double* a2, const double* b2, std::size_t n);

    // out[i] = a[i]*b[i]
    void (*multiply)(double* out, const double* a, const double* b, std::size_t n);

    // r = t1^2 + t2^2, s = sum_j coeffs[j] r^j, out_c = s * t_c
    void (*poly_field)(double* out1, double* out2, const double* t1, const double* t2,
                       const double* coeffs, std::size_t ncoeffs, std::size_t n);

    // sum_i w[i] * |c[i]|^2
    double (*weighted_norm2)(const cplx* c, const double* w, std::size_t n);

    // sum_i w[i] * Re(a[i] * conj(b[i]))
    double (*weighted_inner)(const cplx* a, const cplx* b, const double* w, std::size_t n);
};

const KernelTable& scalar_kernels();

/// AVX2+FMA variant, or nullptr when not compiled in or not supported by the CPU.
const KernelTable* avx2_kernels();

/// The table used by the library. Honours NEMATIC_KERNELS=scalar|avx2.
const KernelTable& active_kernels();

}  // namespace nematic::simd
