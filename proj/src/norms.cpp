#include "dyadlab/norms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dyadlab/errors.hpp"
#include "dyadlab/haar.hpp"
#include "dyadlab/parallel.hpp"
#include "dyadlab/simd/kernels.hpp"

namespace dyadlab {
namespace {

constexpr std::int64_t kGridBudget = std::int64_t{1} << 26;

// Values on the cells of scale `scale` covering the lattice window.
struct WindowGrid {
  int dim = 1;
  int scale = 0;
  std::int64_t lo = 0;  // first cell index along each axis
  std::int64_t n = 0;   // cells per axis
  std::vector<double> v;

  std::size_t size() const { return v.size(); }
};

int grid_scale(const TruncatedLattice& lat, std::initializer_list<const StepFunction*> fs) {
  int g = -lat.depth();
  for (const StepFunction* f : fs)
    if (!f->is_zero()) g = std::min(g, f->k_min());
  return g;
}

WindowGrid window_grid(const StepFunction& f, const TruncatedLattice& lat, int scale) {
  require(f.dim() == lat.dim(), "dimension mismatch between function and lattice");
  require(scale <= lat.coarse_scale(), "grid scale above the lattice top");
  WindowGrid g;
  g.dim = lat.dim();
  g.scale = scale;
  g.lo = lat.first_index(scale);
  g.n = lat.cells_per_axis(scale);
  const std::int64_t total = g.dim == 1 ? g.n : g.n * g.n;
  require(g.n <= kGridBudget && total <= kGridBudget, "window grid exceeds the cell budget");
  g.v.assign(static_cast<std::size_t>(total), 0.0);
  if (f.is_zero()) return g;
  const std::int64_t ny = g.dim == 1 ? 1 : g.n;
  if (f.k_min() >= scale) {
    const int shift = f.k_min() - scale;
    for (std::int64_t iy = 0; iy < ny; ++iy)
      for (std::int64_t ix = 0; ix < g.n; ++ix)
        g.v[static_cast<std::size_t>(iy * g.n + ix)] =
            f.cell_value((g.lo + ix) >> shift, g.dim == 1 ? 0 : (g.lo + iy) >> shift);
  } else {
    // f is finer than the grid: cell averages.
    const StepFunction c = f.canonical();
    require(c.is_zero() || c.k_min() >= scale, "function is finer than the requested grid");
    return c.is_zero() ? g : window_grid(c, lat, scale);
  }
  return g;
}

DyadicInterval interval_at(const TruncatedLattice& lat, int k, std::size_t i) {
  const std::int64_t c = lat.cells_per_axis(k);
  const std::int64_t f = lat.first_index(k);
  const auto ii = static_cast<std::int64_t>(i);
  return lat.dim() == 1 ? DyadicInterval::make1(k, f + ii)
                        : DyadicInterval::make2(k, f + ii % c, f + ii / c);
}

// Cells of the grid inside I, gathered row by row into buf when d = 2.
std::span<const double> cells_of(const WindowGrid& g, const DyadicInterval& I,
                                 std::vector<double>& buf) {
  const std::int64_t s = std::int64_t{1} << (I.scale - g.scale);
  const std::int64_t x0 = I.index[0] * s - g.lo;
  if (g.dim == 1) return {g.v.data() + x0, static_cast<std::size_t>(s)};
  const std::int64_t y0 = I.index[1] * s - g.lo;
  buf.resize(static_cast<std::size_t>(s * s));
  for (std::int64_t r = 0; r < s; ++r)
    std::copy_n(g.v.begin() + (y0 + r) * g.n + x0, s, buf.begin() + r * s);
  return buf;
}

// Per-interval values at scale k, in enumeration order.
std::vector<double> scale_values(const WindowGrid& g, const TruncatedLattice& lat, int k,
                                 const IntervalStatistic& stat) {
  std::vector<double> out(static_cast<std::size_t>(lat.cells_at_scale(k)));
  parallel_for(out.size(), [&](std::size_t i) {
    thread_local std::vector<double> buf;
    out[i] = stat(cells_of(g, interval_at(lat, k, i), buf));
  });
  return out;
}

void take_max(double v, const DyadicInterval& I, double& best, DyadicInterval& arg, bool& have) {
  if (!have || v > best || (v == best && I < arg)) {
    best = v;
    arg = I;
    have = true;
  }
}

BmoReport supremum_on_grid(const WindowGrid& g, const TruncatedLattice& lat,
                           const IntervalStatistic& stat) {
  BmoReport rep;
  bool have = false;
  for (int k = lat.coarse_scale(); k >= -lat.depth(); --k) {
    const std::vector<double> vals = scale_values(g, lat, k, stat);
    ScaleProfileEntry e;
    e.scale = k;
    bool have_k = false;
    for (std::size_t i = 0; i < vals.size(); ++i)
      take_max(vals[i], interval_at(lat, k, i), e.value, e.maximizer, have_k);
    take_max(e.value, e.maximizer, rep.value, rep.maximizer, have);
    rep.profile.push_back(e);
  }
  return rep;
}

double mean_oscillation(std::span<const double> c) {
  const double n = static_cast<double>(c.size());
  const double mean = simd::sum(c) / n;
  return simd::sum_abs_dev(c, mean) / n;
}

// Maximum over lattice intervals containing each cell of the per-interval values.
StepFunction push_maximum(const WindowGrid& g, const TruncatedLattice& lat,
                          const IntervalStatistic& stat) {
  std::vector<double> out(g.size(), 0.0);
  const std::int64_t ny = g.dim == 1 ? 1 : g.n;
  for (int k = lat.coarse_scale(); k >= -lat.depth(); --k) {
    const std::vector<double> vals = scale_values(g, lat, k, stat);
    const int shift = k - g.scale;
    const std::int64_t c = lat.cells_per_axis(k);
    for (std::int64_t iy = 0; iy < ny; ++iy) {
      const std::int64_t row = g.dim == 1 ? 0 : (iy >> shift) * c;
      for (std::int64_t ix = 0; ix < g.n; ++ix) {
        double& o = out[static_cast<std::size_t>(iy * g.n + ix)];
        o = std::max(o, vals[static_cast<std::size_t>(row + (ix >> shift))]);
      }
    }
  }
  CellBox box;
  for (int a = 0; a < g.dim; ++a) {
    box.lo[a] = g.lo;
    box.n[a] = g.n;
  }
  return StepFunction(g.dim, g.scale, box, std::move(out));
}

void require_positive(const WindowGrid& g, const char* what) {
  for (double x : g.v) require(x > 0.0 && std::isfinite(x), what);
}

}  // namespace

BmoReport interval_supremum(const StepFunction& b, const TruncatedLattice& lat,
                            const IntervalStatistic& stat) {
  return supremum_on_grid(window_grid(b, lat, grid_scale(lat, {&b})), lat, stat);
}

BmoReport bmo_dyadic(const StepFunction& b, const TruncatedLattice& lat) {
  return interval_supremum(b, lat, mean_oscillation);
}

BmoReport bmo_r(const StepFunction& b, double r, const TruncatedLattice& lat) {
  require(r > 1.0 && std::isfinite(r), "bmo_r needs 1 < r < infinity");
  return interval_supremum(b, lat, [r](std::span<const double> c) {
    const double n = static_cast<double>(c.size());
    const double mean = simd::sum(c) / n;
    return std::pow(simd::sum_abs_dev_pow(c, mean, r) / n, 1.0 / r);
  });
}

Bmo2Report bmo2_dyadic(const StepFunction& b, const TruncatedLattice& lat) {
  require(lat.dim() == 1, "bmo2_dyadic is one-dimensional");
  // Haar coefficients at scales >= -L only see averages at scale -L-1.
  const int fine = -lat.depth() - 1;
  const WindowGrid g = window_grid(b, lat, std::min(fine, grid_scale(lat, {&b})));
  const int up = fine - g.scale;  // <= 0
  const std::int64_t group = std::int64_t{1} << (-up);
  CellBox box;
  box.lo[0] = lat.first_index(fine);
  box.n[0] = lat.cells_per_axis(fine);
  std::vector<double> avg(static_cast<std::size_t>(box.n[0]));
  for (std::size_t i = 0; i < avg.size(); ++i)
    avg[i] = simd::sum({g.v.data() + i * group, static_cast<std::size_t>(group)}) /
             static_cast<double>(group);
  const SumPyramid pyr(StepFunction(1, fine, box, std::move(avg)), lat);

  Bmo2Report rep;
  const int K = lat.coarse_scale(), L = lat.depth();
  std::vector<double> acc_v, acc_s;  // sums over J inside I at the previous (finer) scale
  std::vector<std::vector<double>> val_v(K + L + 1), val_s(K + L + 1);
  for (int k = -L; k <= K; ++k) {
    const auto d = pyr.details(k);
    std::vector<double> nv(d.size()), ns(d.size());
    const double w = std::ldexp(1.0, k);
    for (std::size_t i = 0; i < d.size(); ++i) {
      const double sq = d[i] * d[i];
      nv[i] = sq / (w * w) + (acc_v.empty() ? 0.0 : acc_v[2 * i] + acc_v[2 * i + 1]);
      ns[i] = sq / w + (acc_s.empty() ? 0.0 : acc_s[2 * i] + acc_s[2 * i + 1]);
    }
    acc_v = nv;
    acc_s = ns;
    auto& vv = val_v[static_cast<std::size_t>(K - k)];
    auto& vs = val_s[static_cast<std::size_t>(K - k)];
    vv.resize(d.size());
    vs.resize(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
      vv[i] = std::sqrt(nv[i] / w);
      vs[i] = std::sqrt(ns[i] / w);
    }
  }
  auto fold = [&](const std::vector<std::vector<double>>& vals) {
    BmoReport r;
    bool have = false;
    for (int k = K; k >= -L; --k) {
      const auto& v = vals[static_cast<std::size_t>(K - k)];
      ScaleProfileEntry e;
      e.scale = k;
      bool have_k = false;
      for (std::size_t i = 0; i < v.size(); ++i)
        take_max(v[i], interval_at(lat, k, i), e.value, e.maximizer, have_k);
      take_max(e.value, e.maximizer, r.value, r.maximizer, have);
      r.profile.push_back(e);
    }
    return r;
  };
  rep.verbatim = fold(val_v);
  rep.standard = fold(val_s);
  rep.oscillation = bmo_r(b, 2.0, lat);
  return rep;
}

ShiftedBmoReport bmo_shifted_lower_bound(const StepFunction& b, const TruncatedLattice& lat) {
  require(lat.dim() == 1, "bmo_shifted_lower_bound is one-dimensional");
  const WindowGrid g = window_grid(b, lat, grid_scale(lat, {&b}));
  const BmoReport dy = supremum_on_grid(g, lat, mean_oscillation);
  ShiftedBmoReport rep;
  rep.value = dy.value;
  rep.scale = dy.maximizer.scale;
  rep.offset_thirds = 0;
  rep.lo = dy.maximizer.lo(0);
  rep.hi = dy.maximizer.hi(0);
  // Positions in thirds of a grid cell: cell c covers [3c, 3c + 3).
  for (int k = lat.coarse_scale(); k >= -lat.depth(); --k) {
    const std::int64_t S = std::int64_t{1} << (k - g.scale);
    for (int t = 1; t <= 2; ++t) {
      // Interval j covers [(3j + t) S, (3j + t) S + 3S) in thirds, relative to the window start.
      const std::int64_t count = (g.n - S) / S;  // j with (j + t/3 + 1) S <= n
      std::vector<double> vals(static_cast<std::size_t>(std::max<std::int64_t>(count, 0)));
      parallel_for(vals.size(), [&](std::size_t jj) {
        const auto j = static_cast<std::int64_t>(jj);
        const std::int64_t a = (3 * j + t) * S, e = a + 3 * S;
        const std::int64_t c0 = a / 3, c1 = (e - 1) / 3;
        auto weight = [&](std::int64_t c) {
          return static_cast<double>(std::min(e, 3 * c + 3) - std::max(a, 3 * c)) / 3.0;
        };
        double m = 0.0;
        for (std::int64_t c = c0; c <= c1; ++c) m += weight(c) * g.v[static_cast<std::size_t>(c)];
        m /= static_cast<double>(S);
        double o = 0.0;
        for (std::int64_t c = c0; c <= c1; ++c)
          o += weight(c) * std::abs(g.v[static_cast<std::size_t>(c)] - m);
        vals[jj] = o / static_cast<double>(S);
      });
      for (std::size_t jj = 0; jj < vals.size(); ++jj)
        if (vals[jj] > rep.value) {
          rep.value = vals[jj];
          rep.scale = k;
          rep.offset_thirds = t;
          const double w = std::ldexp(1.0, k);
          rep.lo = lat.window_lo() + (static_cast<double>(jj) + t / 3.0) * w;
          rep.hi = rep.lo + w;
        }
    }
  }
  return rep;
}

namespace {

// Piecewise-linear interpolation through cell centres u = 0..n-1 (in units of
// the averaging width, relative to the first centre), with zero at the window
// edges u = -1/2 and u = n - 1/2.
void hat_weights(double u, std::int64_t n, std::int64_t idx[2], double w[2]) {
  idx[0] = idx[1] = 0;
  w[0] = w[1] = 0.0;
  if (u < 0.0) {
    w[0] = (u + 0.5) * 2.0;
    return;
  }
  if (u >= static_cast<double>(n - 1)) {
    idx[0] = n - 1;
    w[0] = (static_cast<double>(n) - 0.5 - u) * 2.0;
    return;
  }
  const double fl = std::floor(u);
  idx[0] = static_cast<std::int64_t>(fl);
  idx[1] = idx[0] + 1;
  w[1] = u - fl;
  w[0] = 1.0 - w[1];
}

}  // namespace

CmoReport cmo_distance(const StepFunction& b, const TruncatedLattice& lat, int refine_levels) {
  require(refine_levels >= 1, "cmo_distance needs at least one refinement level");
  const int ge = grid_scale(lat, {&b}) - refine_levels;
  const WindowGrid g = window_grid(b, lat, ge);
  CmoReport rep;
  rep.distance = supremum_on_grid(g, lat, mean_oscillation).value;
  rep.best_is_zero = true;
  const std::int64_t ny = g.dim == 1 ? 1 : g.n;
  for (int j = -lat.depth(); j <= lat.coarse_scale(); ++j) {
    const std::int64_t c = lat.cells_per_axis(j);
    const std::int64_t s = std::int64_t{1} << (j - ge);
    // Cell averages at width 2^j.
    std::vector<double> avg(static_cast<std::size_t>(g.dim == 1 ? c : c * c));
    std::vector<double> buf;
    for (std::size_t i = 0; i < avg.size(); ++i) {
      const auto cells = cells_of(g, interval_at(lat, j, i), buf);
      avg[i] = simd::sum(cells) / static_cast<double>(cells.size());
    }
    WindowGrid diff = g;
    auto coord = [&](std::int64_t i) {
      // cell midpoint in units of 2^j from the first centre
      return (static_cast<double>(i) + 0.5) / static_cast<double>(s) - 0.5;
    };
    for (std::int64_t iy = 0; iy < ny; ++iy) {
      std::int64_t yi[2] = {0, 0};
      double yw[2] = {1.0, 0.0};
      if (g.dim == 2) hat_weights(coord(iy), c, yi, yw);
      for (std::int64_t ix = 0; ix < g.n; ++ix) {
        std::int64_t xi[2];
        double xw[2];
        hat_weights(coord(ix), c, xi, xw);
        double val = 0.0;
        for (int a = 0; a < 2; ++a)
          for (int bb = 0; bb < (g.dim == 2 ? 2 : 1); ++bb)
            if (xw[a] != 0.0 && yw[bb] != 0.0)
              val += xw[a] * yw[bb] * avg[static_cast<std::size_t>(yi[bb] * c + xi[a])];
        diff.v[static_cast<std::size_t>(iy * g.n + ix)] -= val;
      }
    }
    const double d = supremum_on_grid(diff, lat, mean_oscillation).value;
    rep.by_width.emplace_back(j, d);
    if (d < rep.distance) {
      rep.distance = d;
      rep.best_width_scale = j;
      rep.best_is_zero = false;
    }
  }
  return rep;
}

StepFunction WeightVector::nu(const Exponents& exps) const {
  require(!w.empty() && static_cast<int>(w.size()) == exps.size(),
          "weight count must match the exponents");
  const double p = exps.total();
  StepFunction out = pointwise_abs_pow(w[0], p / exps.p[0]);
  for (std::size_t j = 1; j < w.size(); ++j) out = out * pointwise_abs_pow(w[j], p / exps.p[j]);
  return out;
}

ApReport ap_constant(const WeightVector& wv, const Exponents& exps, const TruncatedLattice& lat) {
  const std::size_t m = wv.w.size();
  require(m > 0 && static_cast<int>(m) == exps.size(), "weight count must match the exponents");
  int g = -lat.depth();
  for (const auto& w : wv.w) g = std::min(g, grid_scale(lat, {&w}));
  std::vector<WindowGrid> grids;
  for (const auto& w : wv.w) {
    grids.push_back(window_grid(w, lat, g));
    require_positive(grids.back(), "weights must be positive on the lattice window");
  }
  const double p = exps.total();
  WindowGrid nu = grids[0];
  std::vector<WindowGrid> dual = grids;  // w^{1 - p_j'}, or w^{-1} for p_j = 1
  for (std::size_t c = 0; c < nu.size(); ++c) {
    double prod = 1.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double x = grids[j].v[c];
      prod *= std::pow(x, p / exps.p[j]);
      dual[j].v[c] = exps.p[j] == 1.0 ? 1.0 / x : std::pow(x, 1.0 - exps.conjugate(static_cast<int>(j)));
    }
    nu.v[c] = prod;
  }
  ApReport rep;
  bool have_v = false, have_s = false;
  std::vector<double> buf;
  for (int k = lat.coarse_scale(); k >= -lat.depth(); --k) {
    const auto count = static_cast<std::size_t>(lat.cells_at_scale(k));
    std::vector<double> vv(count), vs(count);
    parallel_for(count, [&](std::size_t i) {
      thread_local std::vector<double> tb;
      const DyadicInterval I = interval_at(lat, k, i);
      const auto cn = cells_of(nu, I, tb);
      const double n = static_cast<double>(cn.size());
      const double base = std::pow(simd::sum(cn) / n, 1.0 / p);
      double fv = base, fs = base;
      for (std::size_t j = 0; j < m; ++j) {
        const auto cd = cells_of(dual[j], I, tb);
        if (exps.p[j] == 1.0) {
          const double mx = simd::max(cd);
          fv *= mx;
          fs *= mx;
        } else {
          const double a = simd::sum(cd) / n;
          fv *= std::pow(a, 1.0 / exps.p[j]);
          fs *= std::pow(a, 1.0 / exps.conjugate(static_cast<int>(j)));
        }
      }
      vv[i] = fv;
      vs[i] = fs;
    });
    for (std::size_t i = 0; i < count; ++i) {
      const DyadicInterval I = interval_at(lat, k, i);
      take_max(vv[i], I, rep.verbatim, rep.verbatim_maximizer, have_v);
      take_max(vs[i], I, rep.standard, rep.standard_maximizer, have_s);
    }
  }
  return rep;
}

StepFunction dyadic_maximal(const StepFunction& f, const TruncatedLattice& lat, double s) {
  require(s >= 1.0 && std::isfinite(s), "dyadic_maximal needs 1 <= s < infinity");
  const WindowGrid g = window_grid(f, lat, grid_scale(lat, {&f}));
  return push_maximum(g, lat, [s](std::span<const double> c) {
    const double n = static_cast<double>(c.size());
    return s == 1.0 ? simd::sum_abs(c) / n : std::pow(simd::sum_abs_pow(c, s) / n, 1.0 / s);
  });
}

StepFunction sharp_maximal(const StepFunction& f, const TruncatedLattice& lat) {
  const WindowGrid g = window_grid(f, lat, grid_scale(lat, {&f}));
  return push_maximum(g, lat, mean_oscillation);
}

double phi(double t, int iterations) {
  require(t >= 0.0, "phi needs t >= 0");
  require(iterations >= 1, "phi needs at least one iteration");
  for (int i = 0; i < iterations; ++i) t = t * (1.0 + (t > 1.0 ? std::log(t) : 0.0));
  return t;
}

double weighted_lp_norm(const StepFunction& f, double p, const StepFunction& w) {
  require(p >= 1.0 && std::isfinite(p), "weighted_lp_norm needs 1 <= p < infinity");
  for (double x : w.values()) require(x > 0.0, "weight must be positive");
  if (f.is_zero()) return 0.0;
  const auto [ff, ww] = common_grid(f, w);
  double acc = 0.0;
  const auto fv = ff.values();
  const auto wvals = ww.values();
  for (std::size_t i = 0; i < fv.size(); ++i) {
    if (fv[i] == 0.0) continue;
    require(wvals[i] > 0.0, "weight must be positive on the support of f");
    acc += std::pow(std::abs(fv[i]), p) * wvals[i];
  }
  return std::pow(acc * ff.cell_measure(), 1.0 / p);
}

}  // namespace dyadlab
