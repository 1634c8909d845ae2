#pragma once

#include <cstddef>
#include <span>
#include <string_view>

// Dense inner loops over cell arrays. Every kernel exists as a scalar
// reference and, where the build and CPU allow, an AVX2 variant selected at
// runtime. Variants produce bit-identical results: reductions follow one
// canonical order (pairwise split down to 64-element leaves, each leaf summed
// in four strided lanes combined as (l0 + l1) + (l2 + l3), then the tail).

namespace dyadlab::simd {

enum class Backend { scalar, avx2 };

struct KernelTable {
  Backend backend;
  // Leaf reductions over at most kLeafSize elements.
  double (*leaf_sum)(const double*, std::size_t);
  double (*leaf_sum_abs)(const double*, std::size_t);
  double (*leaf_sum_sq)(const double*, std::size_t);
  double (*leaf_sum_abs_dev)(const double*, std::size_t, double);
  double (*leaf_sum_sq_dev)(const double*, std::size_t, double);
  double (*leaf_dot)(const double*, const double*, std::size_t);
  double (*leaf_max)(const double*, std::size_t);
  double (*leaf_min)(const double*, std::size_t);

  // out[i] = in[2i] + in[2i+1], diff[i] = in[2i+1] - in[2i]
  void (*haar_analysis)(const double*, double*, double*, std::size_t);
  // out[2i] = parent[i] - detail[i], out[2i+1] = parent[i] + detail[i]
  void (*haar_synthesis)(const double*, const double*, double*, std::size_t);
  // out[2i] = out[2i+1] = parent[i]
  void (*duplicate)(const double*, double*, std::size_t);
  // y += a * x
  void (*axpy)(double, const double*, double*, std::size_t);
  void (*add)(const double*, const double*, double*, std::size_t);
  void (*sub)(const double*, const double*, double*, std::size_t);
  void (*mul)(const double*, const double*, double*, std::size_t);
  void (*scale)(double, const double*, double*, std::size_t);
  // dst[i] = max(dst[i], src[i])
  void (*max_inplace)(const double*, double*, std::size_t);
};

inline constexpr std::size_t kLeafSize = 64;

const KernelTable& scalar_kernels();
// Null when the AVX2 variant was not compiled in.
const KernelTable* avx2_kernels();

// Active backend: AVX2 when compiled and supported by the CPU, unless
// DYADLAB_SIMD=scalar is set in the environment.
const KernelTable& active();
void force_backend(Backend b);
void reset_backend();
std::string_view backend_name(Backend b);

double sum(std::span<const double> x);
double sum_abs(std::span<const double> x);
double sum_sq(std::span<const double> x);
// sum |x_i|^p with fast paths for p = 1 and p = 2
double sum_abs_pow(std::span<const double> x, double p);
double sum_abs_dev(std::span<const double> x, double center);
double sum_sq_dev(std::span<const double> x, double center);
double sum_abs_dev_pow(std::span<const double> x, double center, double p);
double dot(std::span<const double> a, std::span<const double> b);
double max(std::span<const double> x);
double min(std::span<const double> x);

void haar_analysis(std::span<const double> in, std::span<double> sums,
                   std::span<double> diffs);
void haar_synthesis(std::span<const double> parent, std::span<const double> detail,
                    std::span<double> out);
void duplicate(std::span<const double> parent, std::span<double> out);
void axpy(double a, std::span<const double> x, std::span<double> y);
void add(std::span<const double> a, std::span<const double> b, std::span<double> out);
void sub(std::span<const double> a, std::span<const double> b, std::span<double> out);
void mul(std::span<const double> a, std::span<const double> b, std::span<double> out);
void scale(double a, std::span<const double> x, std::span<double> out);
void max_inplace(std::span<const double> src, std::span<double> dst);

}  // namespace dyadlab::simd
