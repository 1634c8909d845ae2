// Compiled with -mavx2; only reached after a runtime CPU check.
#include "kernels_impl.hpp"

#include <immintrin.h>

#include <cmath>
#include <limits>

namespace dyadlab::simd::detail {
namespace {

inline double combine_sum(__m256d acc) {
  alignas(32) double l[4];
  _mm256_store_pd(l, acc);
  return (l[0] + l[1]) + (l[2] + l[3]);
}

inline __m256d abs_pd(__m256d v) {
  const __m256d sign = _mm256_set1_pd(-0.0);
  return _mm256_andnot_pd(sign, v);
}

double v_sum(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  const std::size_t n4 = n & ~std::size_t{3};
  for (std::size_t i = 0; i < n4; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  double r = combine_sum(acc);
  for (std::size_t i = n4; i < n; ++i) r += x[i];
  return r;
}

double v_sum_abs(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  const std::size_t n4 = n & ~std::size_t{3};
  for (std::size_t i = 0; i < n4; i += 4)
    acc = _mm256_add_pd(acc, abs_pd(_mm256_loadu_pd(x + i)));
  double r = combine_sum(acc);
  for (std::size_t i = n4; i < n; ++i) r += std::fabs(x[i]);
  return r;
}

double v_sum_sq(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  const std::size_t n4 = n & ~std::size_t{3};
  for (std::size_t i = 0; i < n4; i += 4) {
    const __m256d v = _mm256_loadu_pd(x + i);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(v, v));
  }
  double r = combine_sum(acc);
  for (std::size_t i = n4; i < n; ++i) r += x[i] * x[i];
  return r;
}

double v_sum_abs_dev(const double* x, std::size_t n, double c) {
  const __m256d cv = _mm256_set1_pd(c);
  __m256d acc = _mm256_setzero_pd();
  const std::size_t n4 = n & ~std::size_t{3};
  for (std::size_t i = 0; i < n4; i += 4)
    acc = _mm256_add_pd(acc, abs_pd(_mm256_sub_pd(_mm256_loadu_pd(x + i), cv)));
  double r = combine_sum(acc);
  for (std::size_t i = n4; i < n; ++i) r += std::fabs(x[i] - c);
  return r;
}

double v_sum_sq_dev(const double* x, std::size_t n, double c) {
  const __m256d cv = _mm256_set1_pd(c);
  __m256d acc = _mm256_setzero_pd();
  const std::size_t n4 = n & ~std::size_t{3};
  for (std::size_t i = 0; i < n4; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i), cv);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
  }
  double r = combine_sum(acc);
  for (std::size_t i = n4; i < n; ++i) {
    const double d = x[i] - c;
    r += d * d;
  }
  return r;
}

double v_dot(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  const std::size_t n4 = n & ~std::size_t{3};
  for (std::size_t i = 0; i < n4; i += 4)
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  double r = combine_sum(acc);
  for (std::size_t i = n4; i < n; ++i) r += a[i] * b[i];
  return r;
}

double v_max(const double* x, std::size_t n) {
  __m256d acc = _mm256_set1_pd(-std::numeric_limits<double>::infinity());
  const std::size_t n4 = n & ~std::size_t{3};
  for (std::size_t i = 0; i < n4; i += 4) acc = _mm256_max_pd(acc, _mm256_loadu_pd(x + i));
  alignas(32) double l[4];
  _mm256_store_pd(l, acc);
  auto pick = [](double a, double b) { return a > b ? a : b; };
  double r = pick(pick(l[0], l[1]), pick(l[2], l[3]));
  for (std::size_t i = n4; i < n; ++i) r = pick(r, x[i]);
  return r;
}

double v_min(const double* x, std::size_t n) {
  __m256d acc = _mm256_set1_pd(std::numeric_limits<double>::infinity());
  const std::size_t n4 = n & ~std::size_t{3};
  for (std::size_t i = 0; i < n4; i += 4) acc = _mm256_min_pd(acc, _mm256_loadu_pd(x + i));
  alignas(32) double l[4];
  _mm256_store_pd(l, acc);
  auto pick = [](double a, double b) { return a < b ? a : b; };
  double r = pick(pick(l[0], l[1]), pick(l[2], l[3]));
  for (std::size_t i = n4; i < n; ++i) r = pick(r, x[i]);
  return r;
}

void v_haar_analysis(const double* in, double* sums, double* diffs, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d a = _mm256_loadu_pd(in + 2 * i);      // x0 x1 x2 x3
    const __m256d b = _mm256_loadu_pd(in + 2 * i + 4);  // x4 x5 x6 x7
    // hadd: [x0+x1, x4+x5, x2+x3, x6+x7]
    const __m256d s = _mm256_hadd_pd(a, b);
    // swap within pairs so hsub yields right - left without a sign flip
    const __m256d as = _mm256_permute_pd(a, 0b0101);
    const __m256d bs = _mm256_permute_pd(b, 0b0101);
    const __m256d d = _mm256_hsub_pd(as, bs);
    _mm256_storeu_pd(sums + i, _mm256_permute4x64_pd(s, 0b11011000));
    _mm256_storeu_pd(diffs + i, _mm256_permute4x64_pd(d, 0b11011000));
  }
  for (; i < n; ++i) {
    sums[i] = in[2 * i] + in[2 * i + 1];
    diffs[i] = in[2 * i + 1] - in[2 * i];
  }
}

void v_haar_synthesis(const double* parent, const double* detail, double* out,
                      std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(parent + i);
    const __m256d h = _mm256_loadu_pd(detail + i);
    const __m256d lo = _mm256_sub_pd(v, h);
    const __m256d hi = _mm256_add_pd(v, h);
    const __m256d u0 = _mm256_unpacklo_pd(lo, hi);  // lo0 hi0 lo2 hi2
    const __m256d u1 = _mm256_unpackhi_pd(lo, hi);  // lo1 hi1 lo3 hi3
    _mm256_storeu_pd(out + 2 * i, _mm256_permute2f128_pd(u0, u1, 0x20));
    _mm256_storeu_pd(out + 2 * i + 4, _mm256_permute2f128_pd(u0, u1, 0x31));
  }
  for (; i < n; ++i) {
    out[2 * i] = parent[i] - detail[i];
    out[2 * i + 1] = parent[i] + detail[i];
  }
}

void v_duplicate(const double* parent, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(parent + i);
    const __m256d u0 = _mm256_unpacklo_pd(v, v);
    const __m256d u1 = _mm256_unpackhi_pd(v, v);
    _mm256_storeu_pd(out + 2 * i, _mm256_permute2f128_pd(u0, u1, 0x20));
    _mm256_storeu_pd(out + 2 * i + 4, _mm256_permute2f128_pd(u0, u1, 0x31));
  }
  for (; i < n; ++i) {
    out[2 * i] = parent[i];
    out[2 * i + 1] = parent[i];
  }
}

template <class VecOp, class ScalarOp>
void binary(const double* a, const double* b, double* out, std::size_t n, VecOp vop,
            ScalarOp sop) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, vop(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) out[i] = sop(a[i], b[i]);
}

void v_axpy(double a, const double* x, double* y, std::size_t n) {
  const __m256d av = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d prod = _mm256_mul_pd(av, _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void v_add(const double* a, const double* b, double* out, std::size_t n) {
  binary(
      a, b, out, n, [](__m256d x, __m256d y) { return _mm256_add_pd(x, y); },
      [](double x, double y) { return x + y; });
}
void v_sub(const double* a, const double* b, double* out, std::size_t n) {
  binary(
      a, b, out, n, [](__m256d x, __m256d y) { return _mm256_sub_pd(x, y); },
      [](double x, double y) { return x - y; });
}
void v_mul(const double* a, const double* b, double* out, std::size_t n) {
  binary(
      a, b, out, n, [](__m256d x, __m256d y) { return _mm256_mul_pd(x, y); },
      [](double x, double y) { return x * y; });
}
void v_scale(double a, const double* x, double* out, std::size_t n) {
  const __m256d av = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(out + i, _mm256_mul_pd(av, _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) out[i] = a * x[i];
}
void v_max_inplace(const double* src, double* dst, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(dst + i, _mm256_max_pd(_mm256_loadu_pd(src + i), _mm256_loadu_pd(dst + i)));
  for (; i < n; ++i) dst[i] = src[i] > dst[i] ? src[i] : dst[i];
}

}  // namespace

const KernelTable kAvx2Table{
    Backend::avx2,    v_sum,       v_sum_abs, v_sum_sq, v_sum_abs_dev,
    v_sum_sq_dev,     v_dot,       v_max,     v_min,    v_haar_analysis,
    v_haar_synthesis, v_duplicate, v_axpy,    v_add,    v_sub,
    v_mul,            v_scale,     v_max_inplace,
};

}  // namespace dyadlab::simd::detail
