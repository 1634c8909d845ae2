#include "dyadlab/step_function.hpp"

#include <algorithm>
#include <cmath>

#include "dyadlab/simd/kernels.hpp"

namespace dyadlab {
namespace {

using i128 = __int128;

i128 floor_div(i128 a, i128 b) {
  i128 q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

// Index of the cell of scale k containing x.
std::int64_t cell_index(const Rational& x, int k) {
  if (k <= 0) {
    require(-k < 62, "scale out of range");
    return static_cast<std::int64_t>(floor_div(i128{x.num} << (-k), x.den));
  }
  require(k < 62, "scale out of range");
  return static_cast<std::int64_t>(floor_div(x.num, i128{x.den} << k));
}

bool is_empty(const CellBox& b) { return b.n[0] == 0 || b.n[1] == 0; }

CellBox union_box(const CellBox& a, const CellBox& b, int dim) {
  if (is_empty(a)) return b;
  if (is_empty(b)) return a;
  CellBox u;
  for (int ax = 0; ax < dim; ++ax) {
    const std::int64_t lo = std::min(a.lo[ax], b.lo[ax]);
    const std::int64_t hi = std::max(a.lo[ax] + a.n[ax], b.lo[ax] + b.n[ax]);
    u.lo[ax] = lo;
    u.n[ax] = hi - lo;
  }
  return u;
}

CellBox empty_box(int dim) { return CellBox{{0, 0}, {0, dim == 1 ? 1 : 0}}; }

std::int64_t floor_half(std::int64_t v) { return v >> 1; }

}  // namespace

StepFunction::StepFunction(int dim, int k_min, CellBox box)
    : dim_(dim), k_min_(k_min), box_(box) {
  require(dim == 1 || dim == 2, "dimension must be 1 or 2");
  if (dim == 1) {
    box_.lo[1] = 0;
    box_.n[1] = 1;
  }
  require(box_.n[0] >= 0 && box_.n[1] >= 0, "negative box size");
  values_.assign(static_cast<std::size_t>(box_.n[0] * box_.n[1]), 0.0);
}

StepFunction::StepFunction(int dim, int k_min, CellBox box, std::vector<double> values)
    : StepFunction(dim, k_min, box) {
  require(values.size() == values_.size(), "value count does not match the box");
  values_ = std::move(values);
}

StepFunction StepFunction::zero(int dim, int k_min) { return StepFunction(dim, k_min, empty_box(dim)); }

StepFunction StepFunction::constant_on(const DyadicInterval& I, double c, int k_min) {
  require(k_min <= I.scale, "resolution coarser than the interval");
  const int j = I.scale - k_min;
  CellBox box;
  for (int a = 0; a < I.dim; ++a) {
    box.lo[a] = I.index[a] << j;
    box.n[a] = std::int64_t{1} << j;
  }
  StepFunction f(I.dim, k_min, box);
  std::fill(f.values_.begin(), f.values_.end(), c);
  return f;
}

StepFunction StepFunction::indicator(const DyadicInterval& I, int k_min) {
  return constant_on(I, 1.0, k_min);
}

StepFunction StepFunction::haar(const HaarFunction& h, int k_min) {
  const DyadicInterval& I = h.interval;
  require(k_min < I.scale, "resolution must resolve the Haar children");
  StepFunction f = constant_on(I, 0.0, k_min);
  const std::int64_t half = f.box_.n[0] / 2;
  for (std::int64_t iy = 0; iy < f.box_.n[1]; ++iy)
    for (std::int64_t ix = 0; ix < f.box_.n[0]; ++ix) {
      const int eta = (ix >= half ? 1 : 0) | (I.dim == 2 && iy >= half ? 2 : 0);
      f.at(ix, iy) = h.child_coeffs[eta];
    }
  return f;
}

StepFunction StepFunction::haar_power(const HaarFunction& h, int q, int k_min) {
  require(h.interval.dim == 1, "Haar powers are defined in one dimension only");
  require(q >= 0, "Haar power must be nonnegative");
  if (q % 2 == 1) return haar(h, k_min);
  return indicator(h.interval, std::min(k_min, h.interval.scale));
}

StepFunction StepFunction::on_lattice(const TruncatedLattice& lat, int k_min) {
  CellBox box;
  for (int a = 0; a < lat.dim(); ++a) {
    box.lo[a] = lat.first_index(k_min);
    box.n[a] = lat.cells_per_axis(k_min);
  }
  return StepFunction(lat.dim(), k_min, box);
}

double StepFunction::cell_width() const { return std::ldexp(1.0, k_min_); }
double StepFunction::cell_measure() const { return std::ldexp(1.0, k_min_ * dim_); }

double StepFunction::cell_value(std::int64_t cx, std::int64_t cy) const {
  const std::int64_t rx = cx - box_.lo[0];
  const std::int64_t ry = dim_ == 1 ? 0 : cy - box_.lo[1];
  if (rx < 0 || rx >= box_.n[0] || ry < 0 || ry >= box_.n[1]) return 0.0;
  return at(rx, ry);
}

double StepFunction::operator()(const Point& x) const {
  const std::int64_t cx = cell_index(x[0], k_min_);
  const std::int64_t cy = dim_ == 2 ? cell_index(x[1], k_min_) : 0;
  return cell_value(cx, cy);
}

CellBox StepFunction::box_at(int k) const {
  require(k <= k_min_, "box_at needs a finer scale");
  const int j = k_min_ - k;
  CellBox b = box_;
  for (int a = 0; a < dim_; ++a) {
    b.lo[a] = box_.lo[a] << j;
    b.n[a] = box_.n[a] << j;
  }
  return b;
}

StepFunction StepFunction::refined(int k) const {
  require(k <= k_min_, "refined needs a finer scale");
  require(k_min_ - k < 40, "refinement depth out of range");
  StepFunction cur = *this;
  while (cur.k_min_ > k) {
    CellBox nb = cur.box_;
    for (int a = 0; a < dim_; ++a) {
      nb.lo[a] *= 2;
      nb.n[a] *= 2;
    }
    StepFunction next(dim_, cur.k_min_ - 1, nb);
    const auto nx = static_cast<std::size_t>(cur.box_.n[0]);
    for (std::int64_t iy = 0; iy < cur.box_.n[1]; ++iy) {
      std::span<const double> row(cur.values_.data() + iy * cur.box_.n[0], nx);
      if (dim_ == 1) {
        simd::duplicate(row, next.values_);
      } else {
        std::span<double> r0(next.values_.data() + (2 * iy) * nb.n[0], 2 * nx);
        std::span<double> r1(next.values_.data() + (2 * iy + 1) * nb.n[0], 2 * nx);
        simd::duplicate(row, r0);
        std::copy(r0.begin(), r0.end(), r1.begin());
      }
    }
    cur = std::move(next);
  }
  return cur;
}

StepFunction StepFunction::extended(const CellBox& box) const {
  CellBox b = box;
  if (dim_ == 1) {
    b.lo[1] = 0;
    b.n[1] = 1;
  }
  StepFunction out(dim_, k_min_, b);
  if (is_empty(box_)) return out;
  for (int a = 0; a < dim_; ++a)
    require(b.lo[a] <= box_.lo[a] && box_.lo[a] + box_.n[a] <= b.lo[a] + b.n[a],
            "extended box must contain the current box");
  const std::int64_t ox = box_.lo[0] - b.lo[0], oy = box_.lo[1] - b.lo[1];
  for (std::int64_t iy = 0; iy < box_.n[1]; ++iy)
    std::copy_n(values_.begin() + iy * box_.n[0], box_.n[0],
                out.values_.begin() + (iy + oy) * b.n[0] + ox);
  return out;
}

StepFunction StepFunction::restricted(const CellBox& box) const {
  CellBox b = box;
  if (dim_ == 1) {
    b.lo[1] = 0;
    b.n[1] = 1;
  }
  StepFunction out(dim_, k_min_, b);
  for (std::int64_t iy = 0; iy < b.n[1]; ++iy)
    for (std::int64_t ix = 0; ix < b.n[0]; ++ix)
      out.at(ix, iy) = cell_value(b.lo[0] + ix, b.lo[1] + iy);
  return out;
}

StepFunction StepFunction::canonical() const {
  auto trimmed = [](const StepFunction& f) {
    std::array<std::int64_t, 2> lo{INT64_MAX, INT64_MAX}, hi{INT64_MIN, INT64_MIN};
    for (std::int64_t iy = 0; iy < f.box_.n[1]; ++iy)
      for (std::int64_t ix = 0; ix < f.box_.n[0]; ++ix)
        if (f.at(ix, iy) != 0.0) {
          lo[0] = std::min(lo[0], ix);
          hi[0] = std::max(hi[0], ix);
          lo[1] = std::min(lo[1], iy);
          hi[1] = std::max(hi[1], iy);
        }
    if (lo[0] == INT64_MAX) return StepFunction(f.dim_, 0, empty_box(f.dim_));
    CellBox b;
    for (int a = 0; a < f.dim_; ++a) {
      b.lo[a] = f.box_.lo[a] + lo[a];
      b.n[a] = hi[a] - lo[a] + 1;
    }
    return f.restricted(b);
  };
  StepFunction cur = trimmed(*this);
  if (cur.values_.empty()) return cur;
  for (;;) {
    // pad to even alignment, then check that every 2^d block is constant
    CellBox aligned;
    for (int a = 0; a < dim_; ++a) {
      const std::int64_t lo = cur.box_.lo[a] - (cur.box_.lo[a] & 1);
      std::int64_t hi = cur.box_.lo[a] + cur.box_.n[a];
      hi += hi & 1;
      aligned.lo[a] = lo;
      aligned.n[a] = hi - lo;
    }
    const StepFunction pad = cur.extended(aligned);
    CellBox coarse;
    for (int a = 0; a < dim_; ++a) {
      coarse.lo[a] = floor_half(aligned.lo[a]);
      coarse.n[a] = aligned.n[a] / 2;
    }
    StepFunction next(dim_, cur.k_min_ + 1, coarse);
    bool ok = true;
    for (std::int64_t iy = 0; ok && iy < next.box_.n[1]; ++iy)
      for (std::int64_t ix = 0; ok && ix < next.box_.n[0]; ++ix) {
        const std::int64_t sy = dim_ == 2 ? 2 * iy : 0;
        const double v = pad.at(2 * ix, sy);
        ok = pad.at(2 * ix + 1, sy) == v;
        if (dim_ == 2) ok = ok && pad.at(2 * ix, sy + 1) == v && pad.at(2 * ix + 1, sy + 1) == v;
        next.at(ix, iy) = v;
      }
    if (!ok) return cur;
    cur = trimmed(next);
  }
}

bool StepFunction::is_zero() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return v == 0.0; });
}

double StepFunction::sup_norm() const {
  if (values_.empty()) return 0.0;
  return std::max(simd::max(values_), -simd::min(values_));
}

double StepFunction::integral() const { return simd::sum(values_) * cell_measure(); }

StepFunction StepFunction::operator-() const {
  StepFunction g = *this;
  simd::scale(-1.0, values_, g.values_);
  return g;
}

StepFunction& StepFunction::operator*=(double c) {
  simd::scale(c, values_, values_);
  return *this;
}

std::pair<StepFunction, StepFunction> common_grid(const StepFunction& f, const StepFunction& g) {
  require(f.dim() == g.dim(), "dimension mismatch");
  const int k = std::min(f.k_min(), g.k_min());
  StepFunction a = f.refined(k), b = g.refined(k);
  const CellBox u = union_box(a.box(), b.box(), f.dim());
  if (is_empty(u)) return {StepFunction(f.dim(), k, u), StepFunction(f.dim(), k, u)};
  return {a.extended(u), b.extended(u)};
}

StepFunction to_lattice_grid(const StepFunction& f, const TruncatedLattice& lat, int k) {
  require(f.dim() == lat.dim(), "dimension mismatch between function and lattice");
  require(k <= f.k_min() || f.is_zero(), "function is finer than the requested grid");
  const StepFunction fine = f.is_zero() ? StepFunction::zero(f.dim(), k) : f.refined(k);
  CellBox w;
  for (int a = 0; a < lat.dim(); ++a) {
    w.lo[a] = lat.first_index(k);
    w.n[a] = lat.cells_per_axis(k);
  }
  const CellBox& fb = fine.box();
  for (std::int64_t iy = 0; iy < fb.n[1]; ++iy)
    for (std::int64_t ix = 0; ix < fb.n[0]; ++ix) {
      const std::int64_t cx = fb.lo[0] + ix - w.lo[0], cy = fb.lo[1] + iy - w.lo[1];
      const bool inside = cx >= 0 && cx < w.n[0] && (lat.dim() == 1 || (cy >= 0 && cy < w.n[1]));
      require(inside || fine.at(ix, iy) == 0.0, "function does not vanish outside the lattice window");
    }
  return fine.restricted(w);
}

namespace {

template <class Op>
StepFunction binary_op(const StepFunction& f, const StepFunction& g, Op op) {
  auto [a, b] = common_grid(f, g);
  StepFunction out(a.dim(), a.k_min(), a.box());
  op(a.values(), b.values(), out.values());
  return out;
}

}  // namespace

StepFunction operator+(const StepFunction& f, const StepFunction& g) {
  return binary_op(f, g, [](auto a, auto b, auto o) { simd::add(a, b, o); });
}
StepFunction operator-(const StepFunction& f, const StepFunction& g) {
  return binary_op(f, g, [](auto a, auto b, auto o) { simd::sub(a, b, o); });
}
StepFunction operator*(const StepFunction& f, const StepFunction& g) {
  return binary_op(f, g, [](auto a, auto b, auto o) { simd::mul(a, b, o); });
}
StepFunction operator*(double c, const StepFunction& f) {
  StepFunction g = f;
  g *= c;
  return g;
}

StepFunction axpy(double a, const StepFunction& f, const StepFunction& g) {
  auto [x, y] = common_grid(f, g);
  simd::axpy(a, x.values(), y.values());
  return y;
}

StepFunction pointwise_abs_pow(const StepFunction& f, double q) {
  StepFunction g = f;
  for (double& v : g.values()) v = std::pow(std::fabs(v), q);
  return g;
}

bool equal_functions(const StepFunction& f, const StepFunction& g) {
  auto [a, b] = common_grid(f, g);
  return std::equal(a.values().begin(), a.values().end(), b.values().begin());
}

double max_abs_difference(const StepFunction& f, const StepFunction& g) {
  return (f - g).sup_norm();
}

double lp_norm(const StepFunction& f, double p) {
  require(p > 0.0, "L^p norm needs p > 0");
  if (f.size() == 0) return 0.0;
  const double s = simd::sum_abs_pow(f.values(), p) * f.cell_measure();
  return p == 1.0 ? s : std::pow(s, 1.0 / p);
}

double inner(const StepFunction& f, const StepFunction& g) {
  auto [a, b] = common_grid(f, g);
  if (a.size() == 0) return 0.0;
  return simd::dot(a.values(), b.values()) * a.cell_measure();
}

StepFunction translate(const StepFunction& f, const Point& t, int max_refine) {
  int k = f.k_min();
  auto aligned = [&](int scale) {
    for (int a = 0; a < f.dim(); ++a) {
      const Rational& c = t[a];
      if (!c.is_dyadic()) return false;
      // c / 2^scale must be an integer
      const i128 scaled = scale <= 0 ? i128{c.num} << (-scale) : i128{c.num};
      const i128 den = scale <= 0 ? i128{c.den} : i128{c.den} << scale;
      if (scaled % den != 0) return false;
    }
    return true;
  };
  int steps = 0;
  while (!aligned(k)) {
    require(steps < max_refine, "translation is not a dyadic multiple within the refinement budget");
    --k;
    ++steps;
  }
  StepFunction g = f.refined(k);
  CellBox b = g.box();
  for (int a = 0; a < f.dim(); ++a) {
    const Rational& c = t[a];
    const i128 shift = k <= 0 ? (i128{c.num} << (-k)) / c.den : i128{c.num} / (i128{c.den} << k);
    b.lo[a] -= static_cast<std::int64_t>(shift);
  }
  return StepFunction(g.dim(), g.k_min(), b, std::vector<double>(g.values().begin(), g.values().end()));
}

double tail_mass(const StepFunction& f, double A, double p) {
  require(A >= 0.0, "tail radius must be nonnegative");
  require(p > 0.0, "tail exponent must be positive");
  if (f.size() == 0) return 0.0;
  const double w = f.cell_width();
  auto outside_len = [&](std::int64_t c) {
    // length of [c w, (c+1) w) outside [-A, A]
    const double a = static_cast<double>(c) * w, b = a + w;
    const double overlap = std::max(0.0, std::min(b, A) - std::max(a, -A));
    return w - overlap;
  };
  const auto& box = f.box();
  if (f.dim() == 1) {
    // full cells via the vector kernel, boundary cells individually
    const std::int64_t left_end = static_cast<std::int64_t>(std::floor(-A / w));  // cells < left_end fully left
    const std::int64_t right_begin = static_cast<std::int64_t>(std::ceil(A / w));
    const std::int64_t lo = box.lo[0], hi = box.lo[0] + box.n[0];
    double total = 0.0;
    const std::int64_t l1 = std::clamp(left_end, lo, hi);
    if (l1 > lo) total += simd::sum_abs_pow(f.values().subspan(0, static_cast<std::size_t>(l1 - lo)), p) * w;
    const std::int64_t r0 = std::clamp(right_begin, lo, hi);
    if (hi > r0)
      total += simd::sum_abs_pow(f.values().subspan(static_cast<std::size_t>(r0 - lo)), p) * w;
    for (std::int64_t c = l1; c < r0; ++c) {
      const double v = f.cell_value(c);
      if (v != 0.0) total += std::pow(std::fabs(v), p) * outside_len(c);
    }
    return total;
  }
  auto inside_len = [&](std::int64_t c) { return w - outside_len(c); };
  double total = 0.0;
  for (std::int64_t iy = 0; iy < box.n[1]; ++iy) {
    const double wy_in = inside_len(box.lo[1] + iy);
    for (std::int64_t ix = 0; ix < box.n[0]; ++ix) {
      const double v = f.at(ix, iy);
      if (v == 0.0) continue;
      const double measure = w * w - inside_len(box.lo[0] + ix) * wy_in;
      total += std::pow(std::fabs(v), p) * measure;
    }
  }
  return total;
}

double oscillation(const StepFunction& f, const Point& x, double delta) {
  require(delta > 0.0, "oscillation radius must be positive");
  const double w = f.cell_width();
  const auto& box = f.box();
  std::array<std::int64_t, 2> c0{0, 0}, c1{0, 0};
  for (int a = 0; a < f.dim(); ++a) {
    const double xa = x[a].to_double();
    // cells [c w, (c+1) w) meeting (x - delta, x + delta)
    std::int64_t lo = static_cast<std::int64_t>(std::floor((xa - delta) / w));
    if (static_cast<double>(lo + 1) * w <= xa - delta) ++lo;
    std::int64_t hi = static_cast<std::int64_t>(std::ceil((xa + delta) / w)) - 1;
    c0[a] = std::max(lo, box.lo[a]);
    c1[a] = std::min(hi, box.lo[a] + box.n[a] - 1);
    if (c0[a] > c1[a]) return 0.0;
  }
  double mx = -HUGE_VAL, mn = HUGE_VAL;
  for (std::int64_t cy = c0[1]; cy <= c1[1]; ++cy) {
    const std::size_t row = static_cast<std::size_t>((cy - box.lo[1]) * box.n[0]);
    std::span<const double> seg =
        f.values().subspan(row + static_cast<std::size_t>(c0[0] - box.lo[0]),
                           static_cast<std::size_t>(c1[0] - c0[0] + 1));
    mx = std::max(mx, simd::max(seg));
    mn = std::min(mn, simd::min(seg));
  }
  return mx - mn;
}

}  // namespace dyadlab
