#include "ctsense/kernels.hpp"

#include <cmath>

#if defined(__aarch64__) || defined(__ARM_NEON)
#include <arm_neon.h>
#define CTSENSE_HAVE_NEON 1
#else
#define CTSENSE_HAVE_NEON 0
#endif

namespace ctsense::kern {

namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double sum_scalar(const double* a, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i];
  return acc;
}

double sumsq_scalar(const double* a, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * a[i];
  return acc;
}

void mul_scalar(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void complex_mag_scalar(const double* re, const double* im, double* out,
                        std::size_t n) {
  for (std::size_t i = 0; i < n; ++i)
    out[i] = std::sqrt(re[i] * re[i] + im[i] * im[i]);
}

#if CTSENSE_HAVE_NEON

double dot_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    acc = vfmaq_f64(acc, vld1q_f64(a + i), vld1q_f64(b + i));
  double total = vaddvq_f64(acc);
  for (; i < n; ++i) total += a[i] * b[i];
  return total;
}

double sum_neon(const double* a, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) acc = vaddq_f64(acc, vld1q_f64(a + i));
  double total = vaddvq_f64(acc);
  for (; i < n; ++i) total += a[i];
  return total;
}

double sumsq_neon(const double* a, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t v = vld1q_f64(a + i);
    acc = vfmaq_f64(acc, v, v);
  }
  double total = vaddvq_f64(acc);
  for (; i < n; ++i) total += a[i] * a[i];
  return total;
}

void mul_neon(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(out + i, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

void complex_mag_neon(const double* re, const double* im, double* out,
                      std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t r = vld1q_f64(re + i);
    float64x2_t m = vld1q_f64(im + i);
    vst1q_f64(out + i, vsqrtq_f64(vfmaq_f64(vmulq_f64(r, r), m, m)));
  }
  for (; i < n; ++i) out[i] = std::sqrt(re[i] * re[i] + im[i] * im[i]);
}

#endif  // CTSENSE_HAVE_NEON

const Ops kScalar{dot_scalar, sum_scalar, sumsq_scalar, mul_scalar,
                  complex_mag_scalar};

#if CTSENSE_HAVE_NEON
const Ops kNeon{dot_neon, sum_neon, sumsq_neon, mul_neon, complex_mag_neon};
#endif

struct Selected {
  const Ops* ops;
  std::string_view name;
};

Selected select() {
#if defined(__x86_64__) || defined(_M_X64)
  if (avx2_supported()) return {&avx2_ops(), "avx2"};
#elif CTSENSE_HAVE_NEON
  return {&kNeon, "neon"};
#endif
  return {&kScalar, "scalar"};
}

const Selected& selected() {
  static const Selected s = select();
  return s;
}

}  // namespace

const Ops& scalar_ops() { return kScalar; }

const Ops& active_ops() { return *selected().ops; }

std::string_view active_backend() { return selected().name; }

}  // namespace ctsense::kern
