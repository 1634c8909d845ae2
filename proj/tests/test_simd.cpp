#include <bit>
#include <cmath>
#include <cstring>
#include <vector>

#include "doctest.h"
#include "dyadlab/random.hpp"
#include "dyadlab/simd/kernels.hpp"

using namespace dyadlab;
namespace simd = dyadlab::simd;

namespace {

std::vector<double> random_vec(std::size_t n, std::uint64_t stream) {
  CounterRng rng(7, stream);
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(-3.0, 3.0) * std::ldexp(1.0, static_cast<int>(rng.integer(-20, 20)));
  return v;
}

bool same_bits(double a, double b) { return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b); }

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

const std::size_t kSizes[] = {0, 1, 3, 4, 5, 7, 8, 15, 16, 63, 64, 65, 127, 128, 129, 257, 1000, 4099};

}  // namespace

TEST_CASE("leaf kernels agree bit-for-bit across backends") {
  const simd::KernelTable* v = simd::avx2_kernels();
  if (!v) {
    MESSAGE("AVX2 variant unavailable on this host; only the scalar path is exercised");
    return;
  }
  const simd::KernelTable& s = simd::scalar_kernels();
  std::uint64_t stream = 0;
  for (std::size_t n : {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 31, 32, 33, 63, 64}) {
    auto x = random_vec(n, ++stream), y = random_vec(n, ++stream);
    CHECK(same_bits(s.leaf_sum(x.data(), n), v->leaf_sum(x.data(), n)));
    CHECK(same_bits(s.leaf_sum_abs(x.data(), n), v->leaf_sum_abs(x.data(), n)));
    CHECK(same_bits(s.leaf_sum_sq(x.data(), n), v->leaf_sum_sq(x.data(), n)));
    CHECK(same_bits(s.leaf_sum_abs_dev(x.data(), n, 0.37), v->leaf_sum_abs_dev(x.data(), n, 0.37)));
    CHECK(same_bits(s.leaf_sum_sq_dev(x.data(), n, -1.5), v->leaf_sum_sq_dev(x.data(), n, -1.5)));
    CHECK(same_bits(s.leaf_dot(x.data(), y.data(), n), v->leaf_dot(x.data(), y.data(), n)));
    CHECK(same_bits(s.leaf_max(x.data(), n), v->leaf_max(x.data(), n)));
    CHECK(same_bits(s.leaf_min(x.data(), n), v->leaf_min(x.data(), n)));
  }
}

TEST_CASE("elementwise kernels agree bit-for-bit across backends") {
  const simd::KernelTable* v = simd::avx2_kernels();
  if (!v) return;
  const simd::KernelTable& s = simd::scalar_kernels();
  std::uint64_t stream = 100;
  for (std::size_t n : kSizes) {
    auto a = random_vec(n, ++stream), b = random_vec(n, ++stream);
    auto run2 = [&](auto fn_s, auto fn_v) {
      std::vector<double> o1(n), o2(n);
      fn_s(a.data(), b.data(), o1.data(), n);
      fn_v(a.data(), b.data(), o2.data(), n);
      return same_bits(o1, o2);
    };
    CHECK(run2(s.add, v->add));
    CHECK(run2(s.sub, v->sub));
    CHECK(run2(s.mul, v->mul));
    {
      std::vector<double> o1(n), o2(n);
      s.scale(0.3, a.data(), o1.data(), n);
      v->scale(0.3, a.data(), o2.data(), n);
      CHECK(same_bits(o1, o2));
    }
    {
      std::vector<double> y1 = b, y2 = b;
      s.axpy(-1.25, a.data(), y1.data(), n);
      v->axpy(-1.25, a.data(), y2.data(), n);
      CHECK(same_bits(y1, y2));
    }
    {
      std::vector<double> d1 = b, d2 = b;
      s.max_inplace(a.data(), d1.data(), n);
      v->max_inplace(a.data(), d2.data(), n);
      CHECK(same_bits(d1, d2));
    }
    auto in = random_vec(2 * n, ++stream);
    std::vector<double> s1(n), s2(n), d1(n), d2(n);
    s.haar_analysis(in.data(), s1.data(), d1.data(), n);
    v->haar_analysis(in.data(), s2.data(), d2.data(), n);
    CHECK(same_bits(s1, s2));
    CHECK(same_bits(d1, d2));
    std::vector<double> o1(2 * n), o2(2 * n);
    s.haar_synthesis(a.data(), b.data(), o1.data(), n);
    v->haar_synthesis(a.data(), b.data(), o2.data(), n);
    CHECK(same_bits(o1, o2));
    s.duplicate(a.data(), o1.data(), n);
    v->duplicate(a.data(), o2.data(), n);
    CHECK(same_bits(o1, o2));
  }
}

TEST_CASE("haar analysis keeps the sign of zero differences") {
  // right - left of equal entries must be +0 on both backends
  std::vector<double> in(16, 2.0), sums(8), diffs(8);
  for (auto backend : {simd::Backend::scalar, simd::Backend::avx2}) {
    simd::force_backend(backend);
    simd::haar_analysis(in, sums, diffs);
    for (double d : diffs) CHECK(!std::signbit(d));
  }
  simd::reset_backend();
}

TEST_CASE("pairwise wrappers are backend independent") {
  std::uint64_t stream = 500;
  for (std::size_t n : kSizes) {
    auto x = random_vec(n, ++stream), y = random_vec(n, ++stream);
    simd::force_backend(simd::Backend::scalar);
    const double r[] = {simd::sum(x), simd::sum_abs(x), simd::sum_sq(x), simd::sum_abs_pow(x, 1.5),
                        simd::sum_abs_dev(x, 0.1), simd::dot(x, y), simd::max(x), simd::min(x)};
    simd::force_backend(simd::Backend::avx2);
    const double q[] = {simd::sum(x), simd::sum_abs(x), simd::sum_sq(x), simd::sum_abs_pow(x, 1.5),
                        simd::sum_abs_dev(x, 0.1), simd::dot(x, y), simd::max(x), simd::min(x)};
    for (int i = 0; i < 8; ++i) CHECK(same_bits(r[i], q[i]));
  }
  simd::reset_backend();
}

TEST_CASE("reductions match a long-double reference") {
  auto x = random_vec(4099, 9001);
  long double ref = 0;
  for (double v : x) ref += v;
  CHECK(std::fabs(static_cast<double>(ref) - simd::sum(x)) <= 1e-12 * simd::sum_abs(x));
  std::vector<double> ints(1000);
  for (std::size_t i = 0; i < ints.size(); ++i) ints[i] = static_cast<double>(i);
  CHECK(simd::sum(ints) == 499500.0);
  CHECK(simd::max(ints) == 999.0);
  CHECK(simd::min(ints) == 0.0);
  CHECK(simd::sum(std::span<const double>{}) == 0.0);
}

TEST_CASE("counter rng is a pure function of seed, stream and draw index") {
  CounterRng a(42, 3), b(42, 3), c(42, 4);
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    CHECK(x != c.next_u64());
  }
  CounterRng u(1, 1);
  for (int i = 0; i < 1000; ++i) {
    const double v = u.uniform();
    CHECK((v >= 0.0 && v < 1.0));
    const auto k = u.integer(-3, 5);
    CHECK((k >= -3 && k <= 5));
  }
}
