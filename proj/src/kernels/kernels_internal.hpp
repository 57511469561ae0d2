#pragma once

#include "nematic/kernels.hpp"

namespace nematic::simd::detail {

// Defined in kernels_avx2.cpp when NEMATIC_HAVE_AVX2_TU is set.
const KernelTable& avx2_table();

bool cpu_has_avx2_fma();

}  // namespace nematic::simd::detail
