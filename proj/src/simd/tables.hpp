#pragma once

#include "kmp/simd.hpp"

namespace kmp::simd::detail {

extern const KernelTable scalar_table;
#if defined(KMP_HAVE_AVX2)
extern const KernelTable avx2_table;
#endif
#if defined(KMP_HAVE_NEON)
extern const KernelTable neon_table;
#endif

}  // namespace kmp::simd::detail
