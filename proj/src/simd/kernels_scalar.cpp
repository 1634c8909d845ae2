#include "kernels_impl.hpp"

#include <cmath>
#include <limits>

namespace dyadlab::simd::detail {
namespace {

// Four strided lanes over the largest multiple of four, combined as
// (l0 + l1) + (l2 + l3); remaining elements are added in order.
template <class Term>
double lane_reduce(std::size_t n, Term term) {
  double l0 = 0.0, l1 = 0.0, l2 = 0.0, l3 = 0.0;
  const std::size_t n4 = n & ~std::size_t{3};
  for (std::size_t i = 0; i < n4; i += 4) {
    l0 += term(i);
    l1 += term(i + 1);
    l2 += term(i + 2);
    l3 += term(i + 3);
  }
  double r = (l0 + l1) + (l2 + l3);
  for (std::size_t i = n4; i < n; ++i) r += term(i);
  return r;
}

inline double pick_max(double a, double b) { return a > b ? a : b; }
inline double pick_min(double a, double b) { return a < b ? a : b; }

template <class Pick>
double lane_extreme(const double* x, std::size_t n, double identity, Pick pick) {
  double l0 = identity, l1 = identity, l2 = identity, l3 = identity;
  const std::size_t n4 = n & ~std::size_t{3};
  for (std::size_t i = 0; i < n4; i += 4) {
    l0 = pick(l0, x[i]);
    l1 = pick(l1, x[i + 1]);
    l2 = pick(l2, x[i + 2]);
    l3 = pick(l3, x[i + 3]);
  }
  double r = pick(pick(l0, l1), pick(l2, l3));
  for (std::size_t i = n4; i < n; ++i) r = pick(r, x[i]);
  return r;
}

double s_sum(const double* x, std::size_t n) {
  return lane_reduce(n, [x](std::size_t i) { return x[i]; });
}
double s_sum_abs(const double* x, std::size_t n) {
  return lane_reduce(n, [x](std::size_t i) { return std::fabs(x[i]); });
}
double s_sum_sq(const double* x, std::size_t n) {
  return lane_reduce(n, [x](std::size_t i) { return x[i] * x[i]; });
}
double s_sum_abs_dev(const double* x, std::size_t n, double c) {
  return lane_reduce(n, [x, c](std::size_t i) { return std::fabs(x[i] - c); });
}
double s_sum_sq_dev(const double* x, std::size_t n, double c) {
  return lane_reduce(n, [x, c](std::size_t i) {
    const double d = x[i] - c;
    return d * d;
  });
}
double s_dot(const double* a, const double* b, std::size_t n) {
  return lane_reduce(n, [a, b](std::size_t i) { return a[i] * b[i]; });
}
double s_max(const double* x, std::size_t n) {
  return lane_extreme(x, n, -std::numeric_limits<double>::infinity(), pick_max);
}
double s_min(const double* x, std::size_t n) {
  return lane_extreme(x, n, std::numeric_limits<double>::infinity(), pick_min);
}

void s_haar_analysis(const double* in, double* sums, double* diffs, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    sums[i] = in[2 * i] + in[2 * i + 1];
    diffs[i] = in[2 * i + 1] - in[2 * i];
  }
}
void s_haar_synthesis(const double* parent, const double* detail, double* out,
                      std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    out[2 * i] = parent[i] - detail[i];
    out[2 * i + 1] = parent[i] + detail[i];
  }
}
void s_duplicate(const double* parent, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    out[2 * i] = parent[i];
    out[2 * i + 1] = parent[i];
  }
}
void s_axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}
void s_add(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}
void s_sub(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] - b[i];
}
void s_mul(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}
void s_scale(double a, const double* x, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a * x[i];
}
void s_max_inplace(const double* src, double* dst, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] = pick_max(src[i], dst[i]);
}

}  // namespace

const KernelTable kScalarTable{
    Backend::scalar,  s_sum,        s_sum_abs, s_sum_sq, s_sum_abs_dev,
    s_sum_sq_dev,     s_dot,        s_max,     s_min,    s_haar_analysis,
    s_haar_synthesis, s_duplicate,  s_axpy,    s_add,    s_sub,
    s_mul,            s_scale,      s_max_inplace,
};

}  // namespace dyadlab::simd::detail
