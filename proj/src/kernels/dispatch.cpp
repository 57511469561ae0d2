#include <cstdlib>
#include <string_view>

#include "kernels_internal.hpp"

namespace nematic::simd {

namespace detail {

bool cpu_has_avx2_fma() {
#if defined(__GNUC__) && (defined(__x86_64__) || defined(__i386__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

}  // namespace detail

const KernelTable* avx2_kernels() {
#ifdef NEMATIC_HAVE_AVX2_TU
    static const bool supported = detail::cpu_has_avx2_fma();
    return supported ? &detail::avx2_table() : nullptr;
#else
    return nullptr;
#endif
}

const KernelTable& active_kernels() {
    static const KernelTable& table = [&]() -> const KernelTable& {
        const char* env = std::getenv("NEMATIC_KERNELS");
        const std::string_view want = env ? env : "";
        if (want == "scalar") return scalar_kernels();
        if (const KernelTable* wide = avx2_kernels()) return *wide;
        return scalar_kernels();
    }();
    return table;
}

}  // namespace nematic::simd
