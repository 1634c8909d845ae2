#include <algorithm>
#include <atomic>
#include <cassert>
#include <cmath>
#include <cstdlib>
#include <string_view>

#include "kernels_impl.hpp"

namespace dyadlab::simd {
namespace {

bool cpu_has_avx2() {
#if defined(DYADLAB_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

const KernelTable* select_default() {
  if (const char* env = std::getenv("DYADLAB_SIMD"); env && std::string_view(env) == "scalar")
    return &detail::kScalarTable;
  if (const KernelTable* t = avx2_kernels()) return t;
  return &detail::kScalarTable;
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> table{select_default()};
  return table;
}

// Pairwise split down to leaves; split points are multiples of four so every
// leaf starts lane-aligned with the canonical order.
template <class Leaf>
double reduce(std::size_t n, Leaf leaf) {
  if (n <= kLeafSize) return leaf(0, n);
  struct Rec {
    Leaf& leaf;
    double operator()(std::size_t lo, std::size_t n) const {
      if (n <= kLeafSize) return leaf(lo, n);
      std::size_t half = (n / 2) & ~std::size_t{3};
      return (*this)(lo, half) + (*this)(lo + half, n - half);
    }
  };
  return Rec{leaf}(0, n);
}

}  // namespace

const KernelTable& scalar_kernels() { return detail::kScalarTable; }

const KernelTable* avx2_kernels() {
#if defined(DYADLAB_HAVE_AVX2)
  static const bool ok = cpu_has_avx2();
  return ok ? &detail::kAvx2Table : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& active() { return *current().load(std::memory_order_relaxed); }

void force_backend(Backend b) {
  if (b == Backend::avx2 && avx2_kernels())
    current().store(avx2_kernels());
  else
    current().store(&detail::kScalarTable);
}

void reset_backend() { current().store(select_default()); }

std::string_view backend_name(Backend b) { return b == Backend::avx2 ? "avx2" : "scalar"; }

double sum(std::span<const double> x) {
  const auto& k = active();
  return reduce(x.size(), [&](std::size_t lo, std::size_t n) { return k.leaf_sum(x.data() + lo, n); });
}

double sum_abs(std::span<const double> x) {
  const auto& k = active();
  return reduce(x.size(),
                [&](std::size_t lo, std::size_t n) { return k.leaf_sum_abs(x.data() + lo, n); });
}

double sum_sq(std::span<const double> x) {
  const auto& k = active();
  return reduce(x.size(),
                [&](std::size_t lo, std::size_t n) { return k.leaf_sum_sq(x.data() + lo, n); });
}

double sum_abs_pow(std::span<const double> x, double p) {
  if (p == 1.0) return sum_abs(x);
  if (p == 2.0) return sum_sq(x);
  const auto& k = active();
  return reduce(x.size(), [&](std::size_t lo, std::size_t n) {
    double buf[kLeafSize];
    for (std::size_t i = 0; i < n; ++i) buf[i] = std::pow(std::fabs(x[lo + i]), p);
    return k.leaf_sum(buf, n);
  });
}

double sum_abs_dev(std::span<const double> x, double center) {
  const auto& k = active();
  return reduce(x.size(), [&](std::size_t lo, std::size_t n) {
    return k.leaf_sum_abs_dev(x.data() + lo, n, center);
  });
}

double sum_sq_dev(std::span<const double> x, double center) {
  const auto& k = active();
  return reduce(x.size(), [&](std::size_t lo, std::size_t n) {
    return k.leaf_sum_sq_dev(x.data() + lo, n, center);
  });
}

double sum_abs_dev_pow(std::span<const double> x, double center, double p) {
  if (p == 1.0) return sum_abs_dev(x, center);
  if (p == 2.0) return sum_sq_dev(x, center);
  const auto& k = active();
  return reduce(x.size(), [&](std::size_t lo, std::size_t n) {
    double buf[kLeafSize];
    for (std::size_t i = 0; i < n; ++i) buf[i] = std::pow(std::fabs(x[lo + i] - center), p);
    return k.leaf_sum(buf, n);
  });
}

double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  const auto& k = active();
  return reduce(a.size(), [&](std::size_t lo, std::size_t n) {
    return k.leaf_dot(a.data() + lo, b.data() + lo, n);
  });
}

double max(std::span<const double> x) {
  const auto& k = active();
  double r = -HUGE_VAL;
  for (std::size_t lo = 0; lo < x.size(); lo += kLeafSize) {
    const double m = k.leaf_max(x.data() + lo, std::min(kLeafSize, x.size() - lo));
    r = m > r ? m : r;
  }
  return r;
}

double min(std::span<const double> x) {
  const auto& k = active();
  double r = HUGE_VAL;
  for (std::size_t lo = 0; lo < x.size(); lo += kLeafSize) {
    const double m = k.leaf_min(x.data() + lo, std::min(kLeafSize, x.size() - lo));
    r = m < r ? m : r;
  }
  return r;
}

void haar_analysis(std::span<const double> in, std::span<double> sums, std::span<double> diffs) {
  assert(in.size() == 2 * sums.size() && sums.size() == diffs.size());
  active().haar_analysis(in.data(), sums.data(), diffs.data(), sums.size());
}

void haar_synthesis(std::span<const double> parent, std::span<const double> detail,
                    std::span<double> out) {
  assert(parent.size() == detail.size() && out.size() == 2 * parent.size());
  active().haar_synthesis(parent.data(), detail.data(), out.data(), parent.size());
}

void duplicate(std::span<const double> parent, std::span<double> out) {
  assert(out.size() == 2 * parent.size());
  active().duplicate(parent.data(), out.data(), parent.size());
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
  assert(x.size() == y.size());
  active().axpy(a, x.data(), y.data(), x.size());
}

void add(std::span<const double> a, std::span<const double> b, std::span<double> out) {
  assert(a.size() == b.size() && a.size() == out.size());
  active().add(a.data(), b.data(), out.data(), a.size());
}

void sub(std::span<const double> a, std::span<const double> b, std::span<double> out) {
  assert(a.size() == b.size() && a.size() == out.size());
  active().sub(a.data(), b.data(), out.data(), a.size());
}

void mul(std::span<const double> a, std::span<const double> b, std::span<double> out) {
  assert(a.size() == b.size() && a.size() == out.size());
  active().mul(a.data(), b.data(), out.data(), a.size());
}

void scale(double a, std::span<const double> x, std::span<double> out) {
  assert(x.size() == out.size());
  active().scale(a, x.data(), out.data(), x.size());
}

void max_inplace(std::span<const double> src, std::span<double> dst) {
  assert(src.size() == dst.size());
  active().max_inplace(src.data(), dst.data(), src.size());
}

}  // namespace dyadlab::simd
