#include "dyadlab/dyadic.hpp"

#include <bit>
#include <cmath>
#include <numeric>

namespace dyadlab {
namespace {

using i128 = __int128;

std::int64_t narrow(i128 v) {
  require(v <= INT64_MAX && v >= INT64_MIN, "rational arithmetic overflow");
  return static_cast<std::int64_t>(v);
}

Rational reduced(i128 num, i128 den) {
  if (den < 0) {
    num = -num;
    den = -den;
  }
  i128 a = num < 0 ? -num : num, b = den;
  while (b != 0) {
    i128 t = a % b;
    a = b;
    b = t;
  }
  if (a > 1) {
    num /= a;
    den /= a;
  }
  return {narrow(num), narrow(den)};
}

// Compare num/den with c * 2^k without rounding.
int compare_with_dyadic(const Rational& x, std::int64_t c, int k) {
  i128 lhs = x.num, rhs = c;
  if (k >= 0) {
    require(k < 62, "dyadic scale out of range");
    rhs = i128{c} * (i128{1} << k) * x.den;
  } else {
    require(-k < 62, "dyadic scale out of range");
    lhs = i128{x.num} << (-k);
    rhs = i128{c} * x.den;
  }
  return lhs < rhs ? -1 : (lhs > rhs ? 1 : 0);
}

}  // namespace

Rational Rational::dyadic(std::int64_t mantissa, int exponent) {
  if (exponent >= 0) {
    require(exponent < 62, "dyadic exponent out of range");
    return reduced(i128{mantissa} << exponent, 1);
  }
  require(-exponent < 62, "dyadic exponent out of range");
  return reduced(mantissa, i128{1} << (-exponent));
}

Rational Rational::from_double(double x) {
  require(std::isfinite(x), "non-finite coordinate");
  int e = 0;
  double frac = std::frexp(x, &e);
  // frac * 2^53 is an integer for every double
  auto mant = static_cast<std::int64_t>(std::ldexp(frac, 53));
  return dyadic(mant, e - 53);
}

double Rational::to_double() const { return static_cast<double>(num) / static_cast<double>(den); }

bool Rational::is_dyadic() const { return std::has_single_bit(static_cast<std::uint64_t>(den)); }

Rational Rational::operator+(const Rational& o) const {
  return reduced(i128{num} * o.den + i128{o.num} * den, i128{den} * o.den);
}

std::strong_ordering Rational::operator<=>(const Rational& o) const {
  i128 a = i128{num} * o.den, b = i128{o.num} * den;
  return a <=> b;
}

double DyadicInterval::length() const { return std::ldexp(1.0, scale); }
double DyadicInterval::measure() const { return std::ldexp(1.0, scale * dim); }
double DyadicInterval::lo(int axis) const {
  return std::ldexp(static_cast<double>(index[axis]), scale);
}
double DyadicInterval::hi(int axis) const {
  return std::ldexp(static_cast<double>(index[axis] + 1), scale);
}
double DyadicInterval::center(int axis) const {
  return std::ldexp(static_cast<double>(2 * index[axis] + 1), scale - 1);
}

bool DyadicInterval::contains(const Point& x) const {
  for (int a = 0; a < dim; ++a) {
    if (compare_with_dyadic(x[a], index[a], scale) < 0) return false;
    if (compare_with_dyadic(x[a], index[a] + 1, scale) >= 0) return false;
  }
  return true;
}

bool DyadicInterval::contains(const DyadicInterval& J) const {
  if (J.dim != dim || J.scale > scale) return false;
  const int j = scale - J.scale;
  for (int a = 0; a < dim; ++a)
    if ((J.index[a] >> j) != index[a]) return false;
  return true;
}

bool DyadicInterval::disjoint(const DyadicInterval& J) const {
  return !contains(J) && !J.contains(*this);
}

std::string DyadicInterval::to_string() const {
  std::string s = "[k=" + std::to_string(scale) + ", m=" + std::to_string(index[0]);
  if (dim == 2) s += "," + std::to_string(index[1]);
  return s + "]";
}

std::size_t DyadicIntervalHash::operator()(const DyadicInterval& I) const noexcept {
  std::uint64_t h = static_cast<std::uint64_t>(I.scale) * 0x9E3779B97F4A7C15ull;
  h ^= static_cast<std::uint64_t>(I.index[0]) + 0x632BE59BD9B4E019ull + (h << 6) + (h >> 2);
  h ^= static_cast<std::uint64_t>(I.index[1]) + 0x85EBCA77C2B2AE63ull + (h << 6) + (h >> 2);
  return static_cast<std::size_t>(h);
}

DyadicInterval child(const DyadicInterval& I, int eta) {
  DyadicInterval c = I;
  c.scale = I.scale - 1;
  for (int a = 0; a < I.dim; ++a) c.index[a] = 2 * I.index[a] + ((eta >> a) & 1);
  return c;
}

std::vector<DyadicInterval> children(const DyadicInterval& I) {
  std::vector<DyadicInterval> out;
  for (int eta = 0; eta < (1 << I.dim); ++eta) out.push_back(child(I, eta));
  return out;
}

DyadicInterval parent(const DyadicInterval& I) { return ancestor(I, 1); }

DyadicInterval ancestor(const DyadicInterval& I, int j) {
  require(j >= 0, "ancestor depth must be nonnegative");
  DyadicInterval a = I;
  a.scale = I.scale + j;
  // arithmetic shift floors toward -inf, which is the dyadic parent index
  for (int ax = 0; ax < I.dim; ++ax) a.index[ax] = I.index[ax] >> j;
  return a;
}

DyadicInterval first_descendant(const DyadicInterval& I, int j) {
  DyadicInterval d = I;
  d.scale = I.scale - j;
  for (int a = 0; a < I.dim; ++a) d.index[a] = I.index[a] << j;
  return d;
}

DyadicInterval last_descendant(const DyadicInterval& I, int j) {
  DyadicInterval d = I;
  d.scale = I.scale - j;
  for (int a = 0; a < I.dim; ++a) d.index[a] = ((I.index[a] + 1) << j) - 1;
  return d;
}

HaarFunction HaarFunction::standard(const DyadicInterval& I) {
  require(I.dim == 1, "standard Haar function is one-dimensional");
  return {I, {-1.0, 1.0, 0.0, 0.0}};
}

HaarFunction HaarFunction::with_coeffs(const DyadicInterval& I, std::array<double, 4> coeffs) {
  HaarFunction h{I, coeffs};
  if (I.dim == 1) h.child_coeffs[2] = h.child_coeffs[3] = 0.0;
  require(h.cancellation() == 0.0, "Haar coefficients must cancel");
  require(h.sup_norm() > 0.0, "Haar coefficients must not all vanish");
  return h;
}

double HaarFunction::sup_norm() const {
  double s = 0.0;
  for (int c = 0; c < (1 << interval.dim); ++c) s = std::max(s, std::fabs(child_coeffs[c]));
  return s;
}

double HaarFunction::cancellation() const {
  double s = 0.0;
  for (int c = 0; c < (1 << interval.dim); ++c) s += child_coeffs[c];
  return s * std::ldexp(1.0, (interval.scale - 1) * interval.dim);
}

double haar_eval(const HaarFunction& h, const Point& x) {
  for (int eta = 0; eta < (1 << h.interval.dim); ++eta)
    if (child(h.interval, eta).contains(x)) return h.child_coeffs[eta];
  return 0.0;
}

double haar_power_eval(const HaarFunction& h, const Point& x, int q) {
  require(h.interval.dim == 1, "Haar powers are defined in one dimension only");
  require(q >= 0, "Haar power must be nonnegative");
  require(h.sup_norm() == 1.0, "Haar powers need sup norm 1");
  if (!h.interval.contains(x)) return 0.0;
  const double v = haar_eval(h, x);
  return q % 2 == 1 ? v : 1.0;
}

TruncatedLattice::TruncatedLattice(int dim, int K, int L, std::int64_t top_lo,
                                   std::int64_t top_hi)
    : dim_(dim), K_(K), L_(L), top_lo_(top_lo), top_hi_(top_hi) {
  require(dim == 1 || dim == 2, "dimension must be 1 or 2");
  require(L + K >= 0, "empty lattice: finest scale above coarsest scale");
  require(top_hi >= top_lo, "empty window");
  require(K + L < 40 && K < 40 && L < 40, "lattice scales out of range");
}

TruncatedLattice TruncatedLattice::symmetric(int dim, int K, int L) {
  return TruncatedLattice(dim, K, L, -1, 0);
}

TruncatedLattice TruncatedLattice::boxed(int dim, int K, int L, std::int64_t top_lo,
                                         std::int64_t top_hi) {
  return TruncatedLattice(dim, K, L, top_lo, top_hi);
}

double TruncatedLattice::window_lo() const { return std::ldexp(static_cast<double>(top_lo_), K_); }
double TruncatedLattice::window_hi() const {
  return std::ldexp(static_cast<double>(top_hi_ + 1), K_);
}

std::int64_t TruncatedLattice::first_index(int k) const { return top_lo_ << (K_ - k); }
std::int64_t TruncatedLattice::cells_per_axis(int k) const {
  return (top_hi_ - top_lo_ + 1) << (K_ - k);
}
std::int64_t TruncatedLattice::cells_at_scale(int k) const {
  const std::int64_t n = cells_per_axis(k);
  return dim_ == 1 ? n : n * n;
}

std::int64_t TruncatedLattice::interval_count() const {
  std::int64_t total = 0;
  for (int k = K_; k >= -L_; --k) total += cells_at_scale(k);
  return total;
}

bool TruncatedLattice::in_window(const DyadicInterval& I) const {
  if (I.dim != dim_ || I.scale > K_ || I.scale < -L_) return false;
  for (int a = 0; a < dim_; ++a) {
    const std::int64_t rel = I.index[a] - first_index(I.scale);
    if (rel < 0 || rel >= cells_per_axis(I.scale)) return false;
  }
  return true;
}

void TruncatedLattice::for_each(const std::function<void(const DyadicInterval&)>& fn) const {
  for (int k = K_; k >= -L_; --k) {
    const std::int64_t first = first_index(k), n = cells_per_axis(k);
    if (dim_ == 1) {
      for (std::int64_t i = 0; i < n; ++i) fn(DyadicInterval::make1(k, first + i));
    } else {
      for (std::int64_t iy = 0; iy < n; ++iy)
        for (std::int64_t ix = 0; ix < n; ++ix)
          fn(DyadicInterval::make2(k, first + ix, first + iy));
    }
  }
}

std::vector<DyadicInterval> TruncatedLattice::enumerate(std::int64_t budget) const {
  const std::int64_t count = interval_count();
  require(count <= budget, "lattice enumeration exceeds budget (" + std::to_string(count) +
                               " intervals > " + std::to_string(budget) + ")");
  std::vector<DyadicInterval> out;
  out.reserve(static_cast<std::size_t>(count));
  for_each([&](const DyadicInterval& I) { out.push_back(I); });
  return out;
}

std::vector<DyadicInterval> TruncatedLattice::top_cells() const {
  std::vector<DyadicInterval> out;
  const std::int64_t n = cells_per_axis(K_);
  for (std::int64_t iy = 0; iy < (dim_ == 2 ? n : 1); ++iy)
    for (std::int64_t ix = 0; ix < n; ++ix)
      out.push_back(dim_ == 1 ? DyadicInterval::make1(K_, top_lo_ + ix)
                              : DyadicInterval::make2(K_, top_lo_ + ix, top_lo_ + iy));
  return out;
}

}  // namespace dyadlab
