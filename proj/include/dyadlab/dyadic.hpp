#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dyadlab/errors.hpp"

namespace dyadlab {

// Exact rational coordinate num/den with den > 0. Dyadic rationals have a
// power-of-two denominator; other denominators are used for sample points that
// must avoid every dyadic boundary.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  static Rational dyadic(std::int64_t mantissa, int exponent);  // mantissa * 2^exponent
  static Rational from_double(double x);                        // exact; x must be dyadic
  double to_double() const;
  bool is_dyadic() const;  // den is a power of two
  Rational operator+(const Rational& o) const;
  Rational operator-() const { return {-num, den}; }
  Rational operator-(const Rational& o) const { return *this + (-o); }
  std::strong_ordering operator<=>(const Rational& o) const;
  bool operator==(const Rational& o) const { return (*this <=> o) == 0; }
};

using Point = std::array<Rational, 2>;  // only the first dim entries are used

inline Point point1(Rational x) { return {x, Rational{}}; }

// Cube 2^k([0,1)^d + m).
struct DyadicInterval {
  int scale = 0;
  int dim = 1;
  std::array<std::int64_t, 2> index{0, 0};

  static DyadicInterval make1(int k, std::int64_t m) { return {k, 1, {m, 0}}; }
  static DyadicInterval make2(int k, std::int64_t mx, std::int64_t my) { return {k, 2, {mx, my}}; }

  double length() const;   // l(I) = 2^k
  double measure() const;  // |I| = 2^{kd}
  double lo(int axis) const;
  double hi(int axis) const;
  double center(int axis) const;

  bool contains(const Point& x) const;
  bool contains(const DyadicInterval& J) const;  // J ⊆ I
  bool disjoint(const DyadicInterval& J) const;

  // Lexicographic on (scale, dim, index); used as the maximizer tie-break.
  auto operator<=>(const DyadicInterval&) const = default;

  std::string to_string() const;
};

struct DyadicIntervalHash {
  std::size_t operator()(const DyadicInterval& I) const noexcept;
};

// Child with bit pattern eta: bit a selects the upper half along axis a.
DyadicInterval child(const DyadicInterval& I, int eta);
std::vector<DyadicInterval> children(const DyadicInterval& I);
DyadicInterval parent(const DyadicInterval& I);
DyadicInterval ancestor(const DyadicInterval& I, int j);
// Descendant at depth j whose index is smallest (eta = 0 at every step) or
// largest (eta = all ones).
DyadicInterval first_descendant(const DyadicInterval& I, int j);
DyadicInterval last_descendant(const DyadicInterval& I, int j);

// Haar function on I: constant alpha_J on each child J. In one dimension the
// default is -1 on the left half and +1 on the right half.
struct HaarFunction {
  DyadicInterval interval;
  std::array<double, 4> child_coeffs{0, 0, 0, 0};  // indexed by child bit pattern

  static HaarFunction standard(const DyadicInterval& I);
  // Two-dimensional Haar function with the given child coefficients; they
  // must satisfy sum alpha_J |J| = 0.
  static HaarFunction with_coeffs(const DyadicInterval& I, std::array<double, 4> coeffs);

  double sup_norm() const;
  double cancellation() const;  // sum_J alpha_J |J|, zero for valid functions
};

double haar_eval(const HaarFunction& h, const Point& x);
// h_I^q with h^0 = chi_I; one-dimensional, sup norm 1.
double haar_power_eval(const HaarFunction& h, const Point& x, int q);

// Finite truncation of the dyadic system: scales -L..K, top cells of scale K
// tiling the window [top_lo * 2^K, (top_hi + 1) * 2^K) along each axis.
class TruncatedLattice {
 public:
  static constexpr std::int64_t kDefaultBudget = std::int64_t{1} << 24;

  // Window [-2^K, 2^K)^d.
  static TruncatedLattice symmetric(int dim, int K, int L);
  // Window tiled by top cells with indices top_lo..top_hi on every axis.
  static TruncatedLattice boxed(int dim, int K, int L, std::int64_t top_lo, std::int64_t top_hi);

  int dim() const { return dim_; }
  int coarse_scale() const { return K_; }
  int depth() const { return L_; }  // finest scale is -depth()
  int finest_scale() const { return -L_; }
  std::int64_t top_lo() const { return top_lo_; }
  std::int64_t top_hi() const { return top_hi_; }
  double window_lo() const;
  double window_hi() const;

  // Index range of cells of scale k covering the window along one axis.
  std::int64_t first_index(int k) const;
  std::int64_t cells_per_axis(int k) const;
  std::int64_t cells_at_scale(int k) const;
  std::int64_t interval_count() const;

  bool in_window(const DyadicInterval& I) const;

  // Scale-descending, lexicographic (x fastest, then y) within a scale.
  std::vector<DyadicInterval> enumerate(std::int64_t budget = kDefaultBudget) const;
  void for_each(const std::function<void(const DyadicInterval&)>& fn) const;
  std::vector<DyadicInterval> top_cells() const;

 private:
  TruncatedLattice(int dim, int K, int L, std::int64_t top_lo, std::int64_t top_hi);
  int dim_;
  int K_;
  int L_;
  std::int64_t top_lo_;
  std::int64_t top_hi_;
};

}  // namespace dyadlab
