// Compiled with -mavx2 -mfma. Nothing here may run before the dispatcher has
// confirmed CPU support.
#include <immintrin.h>

#include "kernels_internal.hpp"

namespace nematic::simd::detail {
namespace {

// [m0, m1] -> [m0, m0, m1, m1]
inline __m256d dup2(const double* m) {
    return _mm256_permute4x64_pd(_mm256_castpd128_pd256(_mm_loadu_pd(m)), 0x50);
}

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

inline double* raw(cplx* c) { return reinterpret_cast<double*>(c); }
inline const double* raw(const cplx* c) { return reinterpret_cast<const double*>(c); }

void scale_real(cplx* c, const double* m, std::size_t n) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        double* p = raw(c + i);
        _mm256_storeu_pd(p, _mm256_mul_pd(_mm256_loadu_pd(p), dup2(m + i)));
    }
    for (; i < n; ++i) c[i] *= m[i];
}

void mul_ik(cplx* out, const cplx* in, const double* k, std::size_t n) {
    const __m256d sign = _mm256_setr_pd(-1.0, 1.0, -1.0, 1.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const __m256d v = _mm256_loadu_pd(raw(in + i));
        const __m256d swapped = _mm256_permute_pd(v, 0b0101);
        _mm256_storeu_pd(raw(out + i), _mm256_mul_pd(swapped, _mm256_mul_pd(dup2(k + i), sign)));
    }
    for (; i < n; ++i) out[i] = cplx(-k[i] * in[i].imag(), k[i] * in[i].real());
}

void leray(cplx* w1, cplx* w2, const double* k1, const double* k2, const double* inv_k2,
           std::size_t n) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const __m256d a = _mm256_loadu_pd(raw(w1 + i));
        const __m256d b = _mm256_loadu_pd(raw(w2 + i));
        const __m256d ka = dup2(k1 + i);
        const __m256d kb = dup2(k2 + i);
        const __m256d p = _mm256_mul_pd(_mm256_fmadd_pd(ka, a, _mm256_mul_pd(kb, b)), dup2(inv_k2 + i));
        _mm256_storeu_pd(raw(w1 + i), _mm256_fnmadd_pd(ka, p, a));
        _mm256_storeu_pd(raw(w2 + i), _mm256_fnmadd_pd(kb, p, b));
    }
    for (; i < n; ++i) {
        const cplx p = (k1[i] * w1[i] + k2[i] * w2[i]) * inv_k2[i];
        w1[i] -= k1[i] * p;
        w2[i] -= k2[i] * p;
    }
}

void dot2(double* out, const double* a1, const double* b1, const double* a2, const double* b2,
          std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d q = _mm256_mul_pd(_mm256_loadu_pd(a2 + i), _mm256_loadu_pd(b2 + i));
        _mm256_storeu_pd(out + i, _mm256_fmadd_pd(_mm256_loadu_pd(a1 + i), _mm256_loadu_pd(b1 + i), q));
    }
    for (; i < n; ++i) out[i] = a1[i] * b1[i] + a2[i] * b2[i];
}

void multiply(double* out, const double* a, const double* b, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    for (; i < n; ++i) out[i] = a[i] * b[i];
}

void poly_field(double* out1, double* out2, const double* t1, const double* t2,
                const double* coeffs, std::size_t ncoeffs, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d x = _mm256_loadu_pd(t1 + i);
        const __m256d y = _mm256_loadu_pd(t2 + i);
        const __m256d r = _mm256_fmadd_pd(x, x, _mm256_mul_pd(y, y));
        __m256d s = _mm256_setzero_pd();
        for (std::size_t j = ncoeffs; j-- > 0;) s = _mm256_fmadd_pd(s, r, _mm256_set1_pd(coeffs[j]));
        _mm256_storeu_pd(out1 + i, _mm256_mul_pd(s, x));
        _mm256_storeu_pd(out2 + i, _mm256_mul_pd(s, y));
    }
    for (; i < n; ++i) {
        const double r = t1[i] * t1[i] + t2[i] * t2[i];
        double s = 0.0;
        for (std::size_t j = ncoeffs; j-- > 0;) s = s * r + coeffs[j];
        out1[i] = s * t1[i];
        out2[i] = s * t2[i];
    }
}

double weighted_norm2(const cplx* c, const double* w, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const __m256d v = _mm256_loadu_pd(raw(c + i));
        acc = _mm256_fmadd_pd(dup2(w + i), _mm256_mul_pd(v, v), acc);
    }
    double total = hsum(acc);
    for (; i < n; ++i) total += w[i] * std::norm(c[i]);
    return total;
}

double weighted_inner(const cplx* a, const cplx* b, const double* w, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const __m256d prod = _mm256_mul_pd(_mm256_loadu_pd(raw(a + i)), _mm256_loadu_pd(raw(b + i)));
        acc = _mm256_fmadd_pd(dup2(w + i), prod, acc);
    }
    double total = hsum(acc);
    for (; i < n; ++i) total += w[i] * (a[i].real() * b[i].real() + a[i].imag() * b[i].imag());
    return total;
}

}  // namespace

const KernelTable& avx2_table() {
    static const KernelTable table{
        "avx2", scale_real, mul_ik, leray, dot2, multiply, poly_field, weighted_norm2,
        weighted_inner,
    };
    return table;
}

}  // namespace nematic::simd::detail
