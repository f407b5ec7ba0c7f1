#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include "ctsense/kernels.hpp"

using namespace ctsense;

namespace {

std::vector<double> random_vec(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> v(n);
  for (auto& x : v) x = ((rng() >> 11) * 0x1.0p-53) * 2.0 - 1.0;
  return v;
}

}  // namespace

TEST_CASE("active backend agrees with the scalar reference") {
  const auto& scalar = kern::scalar_ops();
  const auto& simd = kern::active_ops();
  INFO("backend: ", kern::active_backend());

  // Odd lengths exercise the remainder loops.
  for (std::size_t n : {0, 1, 2, 3, 7, 8, 64, 513, 1024, 1031}) {
    const auto a = random_vec(n, 100 + n);
    const auto b = random_vec(n, 200 + n);

    CHECK(simd.dot(a.data(), b.data(), n) ==
          doctest::Approx(scalar.dot(a.data(), b.data(), n)).epsilon(1e-12));
    CHECK(simd.sum(a.data(), n) ==
          doctest::Approx(scalar.sum(a.data(), n)).epsilon(1e-12));
    CHECK(simd.sumsq(a.data(), n) ==
          doctest::Approx(scalar.sumsq(a.data(), n)).epsilon(1e-12));

    std::vector<double> out_s(n), out_v(n);
    scalar.mul(a.data(), b.data(), out_s.data(), n);
    simd.mul(a.data(), b.data(), out_v.data(), n);
    for (std::size_t i = 0; i < n; ++i)
      CHECK(out_v[i] == doctest::Approx(out_s[i]).epsilon(1e-15));

    scalar.complex_mag(a.data(), b.data(), out_s.data(), n);
    simd.complex_mag(a.data(), b.data(), out_v.data(), n);
    for (std::size_t i = 0; i < n; ++i)
      CHECK(out_v[i] == doctest::Approx(out_s[i]).epsilon(1e-14));
  }
}

TEST_CASE("scalar kernels compute the expected closed forms") {
  const auto& ops = kern::scalar_ops();
  const std::vector<double> a{1.0, 2.0, 3.0};
  const std::vector<double> b{4.0, 5.0, 6.0};
  CHECK(ops.dot(a.data(), b.data(), 3) == doctest::Approx(32.0));
  CHECK(ops.sum(a.data(), 3) == doctest::Approx(6.0));
  CHECK(ops.sumsq(a.data(), 3) == doctest::Approx(14.0));
  std::vector<double> out(3);
  ops.complex_mag(a.data(), b.data(), out.data(), 3);
  CHECK(out[0] == doctest::Approx(std::sqrt(17.0)));
}

#if defined(__x86_64__) || defined(_M_X64)
TEST_CASE("avx2 selected when the CPU supports it") {
  if (kern::avx2_supported())
    CHECK(kern::active_backend() == "avx2");
  else
    CHECK(kern::active_backend() == "scalar");
}
#endif
