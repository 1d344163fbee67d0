#include <cstdlib>
#include <cstring>

#include "tables.hpp"

namespace kmp::simd {
namespace {

bool cpu_has_avx2_fma() {
#if defined(KMP_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Backend select_backend() {
  if (const char* forced = std::getenv("KMP_SIMD"); forced && std::strcmp(forced, "scalar") == 0) {
    return Backend::scalar;
  }
#if defined(KMP_HAVE_NEON)
  return Backend::neon;
#else
  return cpu_has_avx2_fma() ? Backend::avx2 : Backend::scalar;
#endif
}

}  // namespace

const KernelTable* table_for(Backend backend) {
  switch (backend) {
    case Backend::scalar:
      return &detail::scalar_table;
    case Backend::avx2:
#if defined(KMP_HAVE_AVX2)
      return cpu_has_avx2_fma() ? &detail::avx2_table : nullptr;
#else
      return nullptr;
#endif
    case Backend::neon:
#if defined(KMP_HAVE_NEON)
      return &detail::neon_table;
#else
      return nullptr;
#endif
  }
  return nullptr;
}

Backend active_backend() {
  static const Backend backend = select_backend();
  return backend;
}

const KernelTable& active() {
  static const KernelTable* table = table_for(active_backend());
  return *table;
}

std::string_view backend_name(Backend backend) {
  switch (backend) {
    case Backend::scalar:
      return "scalar";
    case Backend::avx2:
      return "avx2";
    case Backend::neon:
      return "neon";
  }
  return "unknown";
}

}  // namespace kmp::simd
