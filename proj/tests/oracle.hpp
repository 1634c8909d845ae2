#pragma once

// Brute-force reference computations used only by the tests. They evaluate
// functions pointwise at cell midpoints and scan candidate intervals
// directly, sharing no code path with the pyramids in the library.

#include <cmath>
#include <algorithm>
#include <functional>
#include <stdexcept>
#include <vector>

#include "dyadlab/dyadic.hpp"
#include "dyadlab/random.hpp"
#include "dyadlab/step_function.hpp"

namespace oracle {

using namespace dyadlab;

// Midpoint of cell c at scale k as an exact point.
inline Rational midpoint(std::int64_t c, int k) { return Rational::dyadic(2 * c + 1, k - 1); }

// int_a^b F over [lo, hi) sampled on cells of scale k (F constant on them).
inline double integrate1(const std::function<double(const Point&)>& F, double lo, double hi, int k) {
  const double w = std::ldexp(1.0, k);
  double s = 0.0;
  for (auto c = static_cast<std::int64_t>(std::floor(lo / w)); static_cast<double>(c) * w < hi; ++c)
    s += F(point1(midpoint(c, k))) * w;
  return s;
}

inline double integrate2(const std::function<double(const Point&)>& F, double lo, double hi, int k) {
  const double w = std::ldexp(1.0, k);
  const auto c0 = static_cast<std::int64_t>(std::floor(lo / w));
  double s = 0.0;
  for (auto cy = c0; static_cast<double>(cy) * w < hi; ++cy)
    for (auto cx = c0; static_cast<double>(cx) * w < hi; ++cx)
      s += F(Point{midpoint(cx, k), midpoint(cy, k)}) * w * w;
  return s;
}

// <f, h_I> by pointwise products on cells fine enough for both.
inline double haar_coefficient(const StepFunction& f, const HaarFunction& h) {
  const int k = std::min(f.k_min(), h.interval.scale - 1);
  auto F = [&](const Point& x) { return f(x) * haar_eval(h, x); };
  if (h.interval.dim == 1) return integrate1(F, h.interval.lo(0), h.interval.hi(0), k);
  double s = 0.0;
  const double w = std::ldexp(1.0, k);
  const std::int64_t n = std::int64_t{1} << (h.interval.scale - k);
  for (std::int64_t iy = 0; iy < n; ++iy)
    for (std::int64_t ix = 0; ix < n; ++ix) {
      Point x{midpoint((h.interval.index[0] << (h.interval.scale - k)) + ix, k),
              midpoint((h.interval.index[1] << (h.interval.scale - k)) + iy, k)};
      s += F(x) * w * w;
    }
  return s;
}

inline double interval_integral(const StepFunction& f, const DyadicInterval& I) {
  const int k = std::min(f.k_min(), I.scale);
  auto F = [&](const Point& x) { return I.contains(x) ? f(x) : 0.0; };
  if (I.dim == 1) return integrate1(F, I.lo(0), I.hi(0), k);
  return integrate2(F, std::min(I.lo(0), I.lo(1)), std::max(I.hi(0), I.hi(1)), k);
}

// Intervals of scales K..-L meeting [lo, hi)^d, found by scanning a wide
// index range and testing corner coordinates.
inline std::vector<DyadicInterval> scan_intervals(int dim, double lo, double hi, int K, int L) {
  std::vector<DyadicInterval> out;
  for (int k = K; k >= -L; --k) {
    const double w = std::ldexp(1.0, k);
    const auto range = static_cast<std::int64_t>(std::ceil(std::max(std::fabs(lo), std::fabs(hi)) / w)) + 2;
    auto meets = [&](std::int64_t m) { return static_cast<double>(m) * w < hi && static_cast<double>(m + 1) * w > lo; };
    for (std::int64_t my = -range; my <= (dim == 2 ? range : -range); ++my)
      for (std::int64_t mx = -range; mx <= range; ++mx) {
        if (!meets(mx) || (dim == 2 && !meets(my))) continue;
        out.push_back(dim == 1 ? DyadicInterval::make1(k, mx) : DyadicInterval::make2(k, mx, my));
      }
  }
  return out;
}

// Ancestor by scanning intervals of the target scale for one containing I's
// left corner.
inline DyadicInterval scan_ancestor(const DyadicInterval& I, int j) {
  const int k = I.scale + j;
  Point corner{Rational::dyadic(I.index[0], I.scale), Rational::dyadic(I.index[1], I.scale)};
  const double w = std::ldexp(1.0, k);
  const auto c = static_cast<std::int64_t>(std::floor(I.lo(0) / w));
  for (std::int64_t m = c - 2; m <= c + 2; ++m) {
    DyadicInterval J = I.dim == 1 ? DyadicInterval::make1(k, m) : DyadicInterval::make2(k, m, 0);
    if (I.dim == 2) {
      const auto cy = static_cast<std::int64_t>(std::floor(I.lo(1) / w));
      for (std::int64_t my = cy - 2; my <= cy + 2; ++my) {
        J.index[1] = my;
        if (J.contains(corner)) return J;
      }
    } else if (J.contains(corner)) {
      return J;
    }
  }
  return I;
}

// Random integer-valued step function with cells of scale k on [lo, hi).
inline StepFunction random_step(CounterRng& rng, int k, std::int64_t lo_cell, std::int64_t n_cells,
                                std::int64_t amplitude = 8) {
  std::vector<double> v(static_cast<std::size_t>(n_cells));
  for (auto& x : v) x = static_cast<double>(rng.integer(-amplitude, amplitude));
  return StepFunction(1, k, CellBox{{lo_cell, 0}, {n_cells, 1}}, std::move(v));
}

inline bool close(double a, double b, double rel = 1e-12, double abs = 1e-14) {
  return std::fabs(a - b) <= abs + rel * std::max(std::fabs(a), std::fabs(b));
}

}  // namespace oracle

#include "dyadlab/operators.hpp"

namespace oracle {

// Evaluates sum_I c(I) * g_I(x) at every cell midpoint of scale -L-1 on the
// lattice window, scanning all intervals containing the point.
inline StepFunction direct_sum(const TruncatedLattice& lat,
                               const std::function<double(const DyadicInterval&)>& coeff,
                               const std::function<double(const DyadicInterval&, const Point&)>& shape) {
  const int kf = lat.finest_scale() - 1;
  StepFunction out = StepFunction::on_lattice(lat, kf);
  std::vector<std::pair<DyadicInterval, double>> nz;
  for (const auto& I : scan_intervals(1, lat.window_lo(), lat.window_hi(), lat.coarse_scale(), lat.depth())) {
    const double c = coeff(I);
    if (c != 0.0) nz.emplace_back(I, c);
  }
  for (std::int64_t i = 0; i < out.nx(); ++i) {
    const Point x = point1(midpoint(out.box().lo[0] + i, kf));
    double s = 0.0;
    for (const auto& [I, c] : nz)
      if (I.contains(x)) s += c * shape(I, x);
    out.at(i) = s;
  }
  return out;
}

// <f, h_I^q>
inline double haar_power_coefficient(const StepFunction& f, const DyadicInterval& I, int q) {
  const HaarFunction h = HaarFunction::standard(I);
  if (q % 2 == 1) return haar_coefficient(f, h);
  return interval_integral(f, I);
}

inline StepFunction direct_T(const EpsilonSeq& eps, const AlphaVector& alpha, const std::vector<StepFunction>& f,
                             const TruncatedLattice& lat) {
  return direct_sum(
      lat,
      [&](const DyadicInterval& I) {
        double c = eps(I);
        for (int j = 0; j < alpha.size(); ++j)
          c *= haar_power_coefficient(f[static_cast<std::size_t>(j)], I, 1 + alpha.bits[static_cast<std::size_t>(j)]) /
               I.measure();
        return c;
      },
      [&](const DyadicInterval& I, const Point& x) {
        return haar_power_eval(HaarFunction::standard(I), x, alpha.sigma());
      });
}

inline StepFunction direct_pi(const StepFunction& b, const AlphaVector& alpha, const std::vector<StepFunction>& f,
                              const TruncatedLattice& lat) {
  return direct_sum(
      lat,
      [&](const DyadicInterval& I) {
        double c = haar_coefficient(b, HaarFunction::standard(I)) / I.measure();
        for (int j = 0; j < alpha.size(); ++j)
          c *= haar_power_coefficient(f[static_cast<std::size_t>(j)], I, 1 + alpha.bits[static_cast<std::size_t>(j)]) /
               I.measure();
        return c;
      },
      [&](const DyadicInterval& I, const Point& x) {
        return haar_power_eval(HaarFunction::standard(I), x, 1 + alpha.sigma());
      });
}

// sum over terms of lambda <f, h'> h''(x) / |I|, evaluated at midpoints.
inline StepFunction direct_shift(const ShiftSpec& spec, const StepFunction& f, const TruncatedLattice& lat) {
  const int kf = lat.finest_scale() - 1;
  StepFunction out = StepFunction::on_lattice(lat, kf);
  std::vector<std::pair<const ShiftTerm*, double>> c;
  for (const auto& t : spec.terms) c.emplace_back(&t, t.lambda * haar_coefficient(f, t.source) / t.I.measure());
  for (std::int64_t iy = 0; iy < out.ny(); ++iy)
    for (std::int64_t ix = 0; ix < out.nx(); ++ix) {
      const Point x{midpoint(out.box().lo[0] + ix, kf), midpoint(out.box().lo[1] + iy, kf)};
      double s = 0.0;
      for (const auto& [t, v] : c)
        if (v != 0.0) s += v * haar_eval(t->target, x);
      out.at(ix, iy) = s;
    }
  return out;
}

inline StepFunction random_step2(CounterRng& rng, int k, std::int64_t lo, std::int64_t n, std::int64_t amplitude = 4) {
  std::vector<double> v(static_cast<std::size_t>(n * n));
  for (auto& x : v) x = static_cast<double>(rng.integer(-amplitude, amplitude));
  return StepFunction(2, k, CellBox{{lo, lo}, {n, n}}, std::move(v));
}

}  // namespace oracle

namespace oracle {

// Samples of f at the midpoints of the cells of scale k inside I.
inline std::vector<double> samples_in(const StepFunction& f, const DyadicInterval& I, int k) {
  std::vector<double> out;
  const std::int64_t n = std::int64_t{1} << (I.scale - k);
  for (std::int64_t iy = 0; iy < (I.dim == 2 ? n : 1); ++iy)
    for (std::int64_t ix = 0; ix < n; ++ix) {
      Point x = point1(midpoint((I.index[0] << (I.scale - k)) + ix, k));
      if (I.dim == 2) x[1] = midpoint((I.index[1] << (I.scale - k)) + iy, k);
      if (!I.contains(x)) throw std::logic_error("sample outside interval");
      out.push_back(f(x));
    }
  return out;
}

inline double mean_osc_r(const std::vector<double>& s, double r) {
  long double mean = 0;
  for (double x : s) mean += x;
  mean /= static_cast<long double>(s.size());
  long double acc = 0;
  for (double x : s) acc += std::pow(std::fabs(static_cast<long double>(x) - mean), static_cast<long double>(r));
  return static_cast<double>(std::pow(acc / static_cast<long double>(s.size()), 1.0L / r));
}

inline std::vector<DyadicInterval> window_intervals(const TruncatedLattice& lat) {
  std::vector<DyadicInterval> out;
  for (const auto& I : scan_intervals(lat.dim(), lat.window_lo(), lat.window_hi(), lat.coarse_scale(), lat.depth()))
    if (lat.in_window(I)) out.push_back(I);
  return out;
}

// sup over window intervals of ((1/|I|) int_I |f - <f>_I|^r)^{1/r}, sampled at scale k.
inline double bmo_scan(const StepFunction& f, const TruncatedLattice& lat, double r, int k) {
  double best = 0.0;
  for (const auto& I : window_intervals(lat)) best = std::max(best, mean_osc_r(samples_in(f, I, k), r));
  return best;
}

// M f(x) at the midpoint of every cell of scale k in the window, by testing
// containment against every window interval.
inline std::vector<double> maximal_scan(const StepFunction& f, const TruncatedLattice& lat, int k,
                                        const std::function<double(const std::vector<double>&)>& stat) {
  const auto intervals = window_intervals(lat);
  std::vector<double> vals;
  for (const auto& I : intervals) vals.push_back(stat(samples_in(f, I, k)));
  const std::int64_t first = lat.first_index(k), n = lat.cells_per_axis(k);
  std::vector<double> out;
  for (std::int64_t iy = 0; iy < (lat.dim() == 2 ? n : 1); ++iy)
    for (std::int64_t ix = 0; ix < n; ++ix) {
      Point x = point1(midpoint(first + ix, k));
      if (lat.dim() == 2) x[1] = midpoint(first + iy, k);
      double m = 0.0;
      for (std::size_t i = 0; i < intervals.size(); ++i)
        if (intervals[i].contains(x)) m = std::max(m, vals[i]);
      out.push_back(m);
    }
  return out;
}

}  // namespace oracle
