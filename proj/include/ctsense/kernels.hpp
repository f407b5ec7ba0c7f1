#pragma once

#include <cstddef>
#include <string_view>

namespace ctsense::kern {

/// Data-parallel primitives behind the DSP hot loops. The scalar table is the
/// reference; SIMD variants are selected once at startup and must agree with
/// it to floating-point reassociation tolerance (see the equivalence tests).
struct Ops {
  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*sum)(const double* a, std::size_t n);
  double (*sumsq)(const double* a, std::size_t n);
  void (*mul)(const double* a, const double* b, double* out, std::size_t n);
  void (*complex_mag)(const double* re, const double* im, double* out,
                      std::size_t n);
};

const Ops& scalar_ops();

/// Best table for this CPU (AVX2 on x86 when available, NEON on aarch64).
const Ops& active_ops();

std::string_view active_backend();

#if defined(__x86_64__) || defined(_M_X64)
const Ops& avx2_ops();  // defined only in the AVX2 translation unit
bool avx2_supported();
#endif

}  // namespace ctsense::kern
