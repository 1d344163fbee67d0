#pragma once

#include <cstddef>
#include <span>
#include <string_view>

// Data-parallel inner loops shared by the kernel, graph and eval modules.
//
// Every kernel has a portable scalar reference implementation plus optional
// AVX2+FMA (x86-64) and NEON (aarch64) variants. The variant is chosen once at
// first use from the CPU's capabilities; setting KMP_SIMD=scalar in the
// environment pins the reference path. Variants agree to within a few ulps of
// the accumulated magnitude, not bitwise, because the lane-wise accumulation
// order differs.
namespace kmp::simd {

enum class Backend { scalar, avx2, neon };

struct KernelTable {
  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*squared_distance)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
};

// Table for the backend selected at startup.
const KernelTable& active();
Backend active_backend();
std::string_view backend_name(Backend backend);

// Direct access to a specific variant; nullptr when it was not compiled in or
// the CPU lacks the instructions.
const KernelTable* table_for(Backend backend);

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  return active().squared_distance(a.data(), b.data(), a.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), x.size());
}

}  // namespace kmp::simd
