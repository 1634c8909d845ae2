#include "dyadlab/probes.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "dyadlab/errors.hpp"
#include "dyadlab/haar.hpp"
#include "dyadlab/parallel.hpp"
#include "dyadlab/random.hpp"

namespace dyadlab {
namespace {

Point pt(double x, double y = 0.0) { return {Rational::from_double(x), Rational::from_double(y)}; }

Point along_first(double t) { return pt(t, 0.0); }

double translation_modulus(const StepFunction& F, const Point& t, double p) {
  if (F.is_zero()) return 0.0;
  return lp_norm(translate(F, t) - F, p);
}

void normalize(StepFunction& f, double p) {
  const double n = lp_norm(f, p);
  require(n > 0.0, "cannot normalize the zero function");
  f *= 1.0 / n;
}

StepFunction normalized_indicator(const DyadicInterval& I, double p) {
  StepFunction f = StepFunction::indicator(I, I.scale);
  normalize(f, p);
  return f;
}

HaarFunction standard_haar(const DyadicInterval& I) {
  return I.dim == 1 ? HaarFunction::standard(I) : HaarFunction::with_coeffs(I, {-1.0, 1.0, -1.0, 1.0});
}

StepFunction normalized_haar(const DyadicInterval& I, double p) {
  StepFunction f = StepFunction::haar(standard_haar(I), I.scale - 1);
  normalize(f, p);
  return f;
}

// Random step on a random sub-box of the window, unit L^p norm.
StepFunction random_unit_step(CounterRng& rng, const TruncatedLattice& lat, double p) {
  const int K = lat.coarse_scale(), L = lat.depth();
  const int s = static_cast<int>(rng.integer(-L - 1, std::max(-L - 1, K - 1)));
  const std::int64_t n = lat.cells_per_axis(s);
  const std::int64_t len = rng.integer(1, std::min<std::int64_t>(n, 8));
  CellBox box;
  box.lo[0] = lat.first_index(s) + rng.integer(0, n - len);
  box.n[0] = len;
  if (lat.dim() == 2) {
    box.lo[1] = lat.first_index(s) + rng.integer(0, n - len);
    box.n[1] = len;
  }
  std::vector<double> v(static_cast<std::size_t>(box.n[0] * box.n[1]));
  for (auto& x : v) x = rng.uniform(-1.0, 1.0);
  if (std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; })) v[0] = 1.0;
  StepFunction f(lat.dim(), s, box, std::move(v));
  normalize(f, p);
  return f;
}

std::vector<DyadicInterval> origin_intervals(const TruncatedLattice& lat) {
  std::vector<DyadicInterval> out;
  for (int k = lat.coarse_scale(); k >= -lat.depth(); --k) {
    if (lat.dim() == 1) {
      for (std::int64_t m : {std::int64_t{0}, std::int64_t{-1}}) {
        const auto I = DyadicInterval::make1(k, m);
        if (lat.in_window(I)) out.push_back(I);
      }
    } else {
      for (std::int64_t my : {std::int64_t{0}, std::int64_t{-1}})
        for (std::int64_t mx : {std::int64_t{0}, std::int64_t{-1}}) {
          const auto I = DyadicInterval::make2(k, mx, my);
          if (lat.in_window(I)) out.push_back(I);
        }
    }
  }
  return out;
}

DyadicInterval unit_cube(int dim, int k, std::int64_t m) {
  return dim == 1 ? DyadicInterval::make1(k, m) : DyadicInterval::make2(k, m, m);
}

// [-1, 1)^d as a step function of unit L^p norm.
StepFunction localized_bump(const TruncatedLattice& lat, double p) {
  require(lat.coarse_scale() >= 0, "localized inputs need the window to contain [-1, 1)");
  StepFunction f = StepFunction::on_lattice(lat, 0).restricted(
      lat.dim() == 1 ? CellBox{{-1, 0}, {2, 1}} : CellBox{{-1, -1}, {2, 2}});
  for (auto& x : f.values()) x = 1.0;
  normalize(f, p);
  return f;
}

// Sup over the batch of a per-element profile, computed in parallel and
// reduced in index order.
std::vector<double> batch_sup(std::size_t n, std::size_t width,
                              const std::function<std::vector<double>(std::size_t)>& element) {
  std::vector<std::vector<double>> rows(n);
  parallel_for(n, [&](std::size_t i) { rows[i] = element(i); });
  std::vector<double> out(width, 0.0);
  for (const auto& r : rows)
    for (std::size_t j = 0; j < width; ++j) out[j] = std::max(out[j], r[j]);
  return out;
}

double orthant_tail(const StepFunction& f, int k, double p) {
  if (f.size() == 0) return 0.0;
  const double edge = std::ldexp(1.0, k);
  const double w = f.cell_width();
  double acc = 0.0;
  const auto& box = f.box();
  for (std::int64_t iy = 0; iy < box.n[1]; ++iy)
    for (std::int64_t ix = 0; ix < box.n[0]; ++ix) {
      const double v = f.at(ix, iy);
      if (v == 0.0) continue;
      const double x = static_cast<double>(box.lo[0] + ix) * w;
      const double y = static_cast<double>(box.lo[1] + iy) * w;
      const bool in = f.dim() == 1 ? x >= edge : (x >= 0.0 && y >= 0.0 && (x >= edge || y >= edge));
      if (in) acc += std::pow(std::fabs(v), p);
    }
  return acc * f.cell_measure();
}

std::vector<double> to_doubles(const std::vector<int>& v) { return {v.begin(), v.end()}; }

double finest_width(const TruncatedLattice& lat) { return std::ldexp(1.0, -lat.depth() - 1); }

}  // namespace

bool DecayFit::passed() const {
  if (identically_zero) return true;
  return !degenerate && slope >= lower && slope <= upper;
}

DecayFit fit_log2(std::vector<double> x, std::vector<double> values, double target, double lower,
                  double upper) {
  require(x.size() == values.size(), "fit needs matching abscissae and values");
  DecayFit fit;
  fit.x = std::move(x);
  fit.value = std::move(values);
  fit.target = target;
  fit.lower = lower;
  fit.upper = upper;
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < fit.x.size(); ++i)
    if (fit.value[i] >= kFitFloor) {
      xs.push_back(fit.x[i]);
      ys.push_back(std::log2(fit.value[i]));
    }
  fit.points_used = static_cast<int>(xs.size());
  fit.identically_zero = xs.empty();
  fit.degenerate = xs.size() < 4;
  if (xs.size() < 2) return fit;
  const double n = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (sxx == 0.0) {
    fit.degenerate = true;
    return fit;
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / n);
  return fit;
}

std::vector<std::vector<StepFunction>> unit_ball_batch(const AlphaVector& alpha, const Exponents& exps,
                                                       const TruncatedLattice& lat, const BatchOptions& opt,
                                                       int localized_slot) {
  require(lat.dim() == 1, "multilinear batches are one-dimensional");
  require(alpha.size() == exps.size(), "alpha and exponents must have the same length");
  require(localized_slot >= 0 && localized_slot <= alpha.size(), "localized slot out of range");
  std::vector<std::vector<StepFunction>> out;
  for (const auto& I : origin_intervals(lat)) {
    auto tuple = noncompact_family(I, alpha, exps);
    if (localized_slot > 0) {
      const auto j = static_cast<std::size_t>(localized_slot - 1);
      tuple[j] = localized_bump(lat, exps.p[j]);
    }
    out.push_back(std::move(tuple));
  }
  for (std::size_t e = 0; e < opt.batch; ++e) {
    CounterRng rng(opt.seed, e + 1);
    std::vector<StepFunction> tuple;
    for (int j = 0; j < alpha.size(); ++j) tuple.push_back(random_unit_step(rng, lat, exps.p[static_cast<std::size_t>(j)]));
    if (localized_slot > 0 && rng.coin()) {
      const auto j = static_cast<std::size_t>(localized_slot - 1);
      tuple[j] = localized_bump(lat, exps.p[j]);
    }
    out.push_back(std::move(tuple));
  }
  return out;
}

std::vector<StepFunction> unit_ball_batch(double p, const TruncatedLattice& lat, const BatchOptions& opt,
                                          bool localized) {
  std::vector<StepFunction> out;
  for (const auto& I : origin_intervals(lat)) out.push_back(normalized_haar(I, p));
  if (localized) {
    out.push_back(localized_bump(lat, p));
    out.push_back(normalized_indicator(unit_cube(lat.dim(), 0, 0), p));
    out.push_back(normalized_indicator(unit_cube(lat.dim(), 0, -1), p));
  }
  for (std::size_t e = 0; e < opt.batch; ++e) {
    CounterRng rng(opt.seed, e + 1);
    out.push_back(random_unit_step(rng, lat, p));
  }
  return out;
}

std::vector<double> default_A_grid(const TruncatedLattice& lat) {
  std::vector<double> g;
  for (int j = 0; j < lat.coarse_scale(); ++j) g.push_back(std::ldexp(1.0, j));
  if (g.empty()) g.push_back(0.5 * std::ldexp(1.0, lat.coarse_scale()));
  return g;
}

std::vector<double> default_t_grid(const TruncatedLattice& lat) {
  std::vector<double> g;
  for (int j = 1; j <= lat.depth(); ++j) g.push_back(std::ldexp(1.0, -j));
  return g;
}

FkrtReport fkrt_probe(std::span<const StepFunction> family, double p, std::vector<double> A_grid,
                      std::vector<double> t_grid, const FkrtOptions& opt) {
  require(!family.empty(), "FKRT probe needs a nonempty family");
  require(!A_grid.empty() && !t_grid.empty(), "FKRT probe needs nonempty grids");
  require(p > 0.0, "FKRT probe needs p > 0");
  std::sort(A_grid.begin(), A_grid.end());
  std::sort(t_grid.begin(), t_grid.end());
  FkrtReport rep;
  rep.family_size = family.size();
  rep.p = p;
  rep.threshold_b = opt.threshold_b;
  rep.threshold_c = opt.threshold_c;
  const std::size_t na = A_grid.size(), nt = t_grid.size();
  const auto sup = batch_sup(family.size(), 1 + na + nt, [&](std::size_t i) {
    const StepFunction& F = family[i];
    std::vector<double> r;
    r.push_back(lp_norm(F, p));
    for (double A : A_grid) r.push_back(std::pow(tail_mass(F, A, p), 1.0 / p));
    for (double t : t_grid) r.push_back(translation_modulus(F, along_first(t), p));
    return r;
  });
  rep.sup_norm = sup[0];
  for (std::size_t i = 0; i < na; ++i) rep.tail_profile.push_back({A_grid[i], sup[1 + i]});
  for (std::size_t i = 0; i < nt; ++i) rep.shift_profile.push_back({t_grid[i], sup[1 + na + i]});
  rep.tail_floor = std::numeric_limits<double>::infinity();
  for (std::size_t i = na / 2; i < na; ++i) rep.tail_floor = std::min(rep.tail_floor, rep.tail_profile[i].value);
  rep.shift_floor = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < (nt + 1) / 2; ++i)
    rep.shift_floor = std::min(rep.shift_floor, rep.shift_profile[i].value);
  rep.fails_b = rep.sup_norm > 0.0 && rep.tail_floor >= opt.threshold_b * rep.sup_norm;
  rep.fails_c = rep.sup_norm > 0.0 && rep.shift_floor >= opt.threshold_c * rep.sup_norm;
  return rep;
}

namespace {

// Per scale, the candidates nearest to and farthest from the origin.
std::vector<DyadicInterval> near_and_far(std::vector<DyadicInterval> cand) {
  std::sort(cand.begin(), cand.end());
  std::vector<DyadicInterval> out;
  std::size_t i = 0;
  while (i < cand.size()) {
    std::size_t j = i;
    while (j < cand.size() && cand[j].scale == cand[i].scale) ++j;
    auto dist = [](const DyadicInterval& I) {
      double d = 0;
      for (int a = 0; a < I.dim; ++a) d = std::max(d, std::fabs(I.center(a)));
      return d;
    };
    std::size_t near = i, far = i;
    for (std::size_t q = i; q < j; ++q) {
      if (dist(cand[q]) < dist(cand[near])) near = q;
      if (dist(cand[q]) > dist(cand[far])) far = q;
    }
    out.push_back(cand[near]);
    if (far != near) out.push_back(cand[far]);
    i = j;
  }
  return out;
}

}  // namespace

NoncompactReport noncompact_T_probe(const EpsilonSeq& eps, const AlphaVector& alpha, const Exponents& exps,
                                    const TruncatedLattice& lat, double A, const FkrtOptions& opt) {
  require(lat.dim() == 1, "Haar multipliers are one-dimensional");
  require(A > 0.0, "qualifying threshold must be positive");
  require(!alpha.all_ones(), "alpha must not be all ones");
  NoncompactReport rep;
  std::vector<DyadicInterval> cand;
  const double outer = 0.5 * std::ldexp(1.0, lat.coarse_scale());
  lat.for_each([&](const DyadicInterval& I) {
    const double e = std::fabs(eps(I));
    if (I.lo(0) >= outer || I.hi(0) <= -outer) rep.outer_sup = std::max(rep.outer_sup, e);
    if (e >= A) cand.push_back(I);
  });
  rep.qualifying = cand.size();
  require(!cand.empty(), "no qualifying interval: |eps_I| < A everywhere on the lattice");
  rep.family = near_and_far(std::move(cand));
  std::vector<StepFunction> outputs(rep.family.size());
  parallel_for(outputs.size(), [&](std::size_t i) {
    const auto f = noncompact_family(rep.family[i], alpha, exps);
    outputs[i] = apply_T(eps, alpha, f, lat);
  });
  const double p = exps.total();
  rep.fkrt = fkrt_probe(outputs, p, default_A_grid(lat), default_t_grid(lat), opt);
  rep.b_bound = rep.fkrt.tail_floor;
  rep.c_bound = rep.fkrt.shift_floor;
  double emin = std::numeric_limits<double>::infinity();
  for (const auto& I : rep.family) emin = std::min(emin, std::fabs(eps(I)));
  rep.c_bound_computed = std::pow(2.0, 1.0 / p) * emin;
  rep.c_bound_paper = 2.0 * emin;
  return rep;
}

NoncompactReport noncompact_shift_probe(const ShiftSpec& spec, double p, const TruncatedLattice& lat,
                                        const FkrtOptions& opt) {
  require(spec.dim == lat.dim(), "shift and lattice dimensions differ");
  require(p >= 1.0, "shift probe needs p >= 1");
  NoncompactReport rep;
  std::vector<DyadicInterval> sources;
  for (const auto& t : spec.terms) sources.push_back(t.source.interval);
  std::sort(sources.begin(), sources.end());
  sources.erase(std::unique(sources.begin(), sources.end()), sources.end());
  rep.qualifying = sources.size();
  require(!sources.empty(), "no qualifying term: the shift spec is empty");
  rep.family = near_and_far(std::move(sources));
  std::unordered_map<DyadicInterval, HaarFunction, DyadicIntervalHash> by_source;
  for (const auto& t : spec.terms) by_source.emplace(t.source.interval, t.source);
  std::vector<StepFunction> outputs(rep.family.size());
  parallel_for(outputs.size(), [&](std::size_t i) {
    const HaarFunction& h = by_source.at(rep.family[i]);
    StepFunction f = StepFunction::haar(h, h.interval.scale - 1);
    normalize(f, p);
    outputs[i] = apply_shift(spec, f, lat);
  });
  rep.fkrt = fkrt_probe(outputs, p, default_A_grid(lat), default_t_grid(lat), opt);
  rep.b_bound = rep.fkrt.tail_floor;
  rep.c_bound = rep.fkrt.shift_floor;
  return rep;
}

PiProbeReport pi_compactness_probe(const StepFunction& b, const AlphaVector& alpha, const Exponents& exps,
                                   const TruncatedLattice& lat, const DecayOptions& opt) {
  require(lat.dim() == 1, "paraproduct probe is one-dimensional");
  const StepFunction bc = b.canonical();
  if (!bc.is_zero()) {
    const double w = bc.cell_width();
    require(static_cast<double>(bc.box().lo[0]) * w >= -1.0 &&
                static_cast<double>(bc.box().lo[0] + bc.nx()) * w <= 1.0,
            "symbol must vanish outside [-1, 1]");
  }
  const double p = exps.total();
  const auto batch = unit_ball_batch(alpha, exps, lat, opt.batch);
  const std::size_t nk = opt.k_grid.size(), nh = opt.h_grid.size();
  const auto sup = batch_sup(batch.size(), nk + nh, [&](std::size_t i) {
    const StepFunction out = apply_pi(b, alpha, batch[i], lat);
    std::vector<double> r;
    for (int k : opt.k_grid) r.push_back(tail_mass(out, std::ldexp(1.0, k), p));
    for (int j : opt.h_grid) r.push_back(translation_modulus(out, along_first(std::ldexp(1.0, -j)), p));
    return r;
  });
  PiProbeReport rep;
  rep.batch_size = batch.size();
  rep.tail = fit_log2(to_doubles(opt.k_grid), {sup.begin(), sup.begin() + static_cast<std::ptrdiff_t>(nk)}, -p,
                      -p - opt.tail_tolerance, -p + opt.tail_tolerance);
  std::vector<double> hx;
  for (int j : opt.h_grid) hx.push_back(-static_cast<double>(j));
  const double target = std::min(1.0, 1.0 / p);
  rep.modulus = fit_log2(hx, {sup.begin() + static_cast<std::ptrdiff_t>(nk), sup.end()}, target,
                         opt.modulus_fraction * target, std::numeric_limits<double>::infinity());
  return rep;
}

SplitCheck commutator_split_check(const StepFunction& b, const EpsilonSeq& eps, const AlphaVector& alpha,
                                  int slot, std::span<const StepFunction> f, const TruncatedLattice& lat,
                                  double h) {
  require(lat.dim() == 1, "multiplier split is one-dimensional");
  const int m = alpha.size();
  require(static_cast<int>(f.size()) == m, "input count must match alpha");
  require(slot >= 1 && slot <= m, "commutator slot out of range");
  const auto i = static_cast<std::size_t>(slot - 1);
  std::vector<SumPyramid> pyr;
  for (const auto& fj : f) pyr.emplace_back(fj, lat);
  const SumPyramid pyr_bf(b * f[i], lat);
  const int K = lat.coarse_scale(), L = lat.depth();
  const int sigma = alpha.sigma();

  struct Coef {
    double eps, all, other, ci, cbi, bx;
  };
  auto coef_of = [&](const SumPyramid& P, const DyadicInterval& I, int a) {
    return a == 0 ? P.detail(I) / I.measure() : P.average(I);
  };
  std::vector<std::vector<Coef>> coef(static_cast<std::size_t>(K + L + 1));
  for (int k = K; k >= -L; --k) {
    auto& row = coef[static_cast<std::size_t>(K - k)];
    const std::int64_t first = lat.first_index(k);
    for (std::int64_t c = 0; c < lat.cells_per_axis(k); ++c) {
      const auto I = DyadicInterval::make1(k, first + c);
      Coef q{};
      q.eps = eps(I);
      q.all = 1.0;
      q.other = 1.0;
      for (int j = 0; j < m; ++j) {
        const double v = coef_of(pyr[static_cast<std::size_t>(j)], I, alpha.bits[static_cast<std::size_t>(j)]);
        q.all *= v;
        if (j != slot - 1) q.other *= v;
        if (j == slot - 1) q.ci = v;
      }
      q.cbi = coef_of(pyr_bf, I, alpha.bits[i]);
      q.bx = b(pt(I.center(0)));
      row.push_back(q);
    }
  }
  // sum over I containing y of eps * weight(I) * h_I^sigma(y)
  auto sum_at = [&](double y, const auto& weight) {
    double s = 0.0;
    for (int k = K; k >= -L; --k) {
      const auto idx = static_cast<std::int64_t>(std::floor(std::ldexp(y, -k)));
      const std::int64_t c = idx - lat.first_index(k);
      if (c < 0 || c >= lat.cells_per_axis(k)) continue;
      const Coef& q = coef[static_cast<std::size_t>(K - k)][static_cast<std::size_t>(c)];
      // h_I^sigma(y): 1 for even sigma, -1 / +1 on the left / right half for odd
      double hp = 1.0;
      if (sigma % 2 == 1) hp = std::ldexp(y, -k) - static_cast<double>(idx) < 0.5 ? -1.0 : 1.0;
      s += q.eps * weight(q) * hp;
    }
    return s;
  };
  const StepFunction C = commutator(b, make_T(eps, alpha), slot, f, lat);
  SplitCheck chk;
  const double w = finest_width(lat);
  const std::int64_t first = lat.first_index(-L - 1);
  for (std::int64_t c = 0; c < lat.cells_per_axis(-L - 1); ++c) {
    const double y = (static_cast<double>(first + c) + 0.5) * w;
    const double yh = y + h;
    const double by = b(pt(y)), byh = b(pt(yh));
    const double T_yh = sum_at(yh, [](const Coef& q) { return q.all; });
    const double i1 = (byh - by) * T_yh;
    const double i2 = sum_at(yh, [&](const Coef& q) { return (by - q.bx) * q.all; });
    const double i3 = sum_at(yh, [](const Coef& q) { return (q.bx * q.ci - q.cbi) * q.other; });
    const double i4 = sum_at(y, [&](const Coef& q) { return (by - q.bx) * q.all; });
    const double i5 = sum_at(y, [](const Coef& q) { return (q.bx * q.ci - q.cbi) * q.other; });
    const double direct = C(pt(yh)) - C(pt(y));
    chk.scale = std::max({chk.scale, std::fabs(direct), std::fabs(i1), std::fabs(i2), std::fabs(i3), std::fabs(i4),
                          std::fabs(i5), std::max(std::fabs(by), std::fabs(byh)) * std::fabs(T_yh)});
    chk.max_abs_error = std::max(chk.max_abs_error, std::fabs(i1 + i2 + i3 - i4 - i5 - direct));
  }
  return chk;
}

CommutatorProbeReport commutator_compactness_probe(const StepFunction& b, const EpsilonSeq& eps,
                                                   const AlphaVector& alpha, int slot, const Exponents& exps,
                                                   const TruncatedLattice& lat, const DecayOptions& opt) {
  require(lat.dim() == 1, "commutator probe is one-dimensional");
  require(slot >= 1 && slot <= alpha.size(), "commutator slot out of range");
  const double p = exps.total();
  const double pi_conj = exps.conjugate(slot - 1);
  require(std::isfinite(pi_conj), "commutator tail target needs p_i > 1");
  const auto batch = unit_ball_batch(alpha, exps, lat, opt.batch, slot);
  const auto T = make_T(eps, alpha);
  const std::size_t nk = opt.k_grid.size(), nh = opt.h_grid.size();
  const double h_split = 3.0 * finest_width(lat);
  const auto sup = batch_sup(batch.size(), nk + nh + 1, [&](std::size_t i) {
    const StepFunction out = commutator(b, T, slot, batch[i], lat);
    std::vector<double> r;
    for (int k : opt.k_grid) r.push_back(tail_mass(out, std::ldexp(1.0, k), p));
    for (int j : opt.h_grid) r.push_back(translation_modulus(out, along_first(std::ldexp(1.0, -j)), p));
    r.push_back(commutator_split_check(b, eps, alpha, slot, batch[i], lat, h_split).relative());
    return r;
  });
  CommutatorProbeReport rep;
  rep.batch_size = batch.size();
  const double target = -p / pi_conj;
  rep.tail = fit_log2(to_doubles(opt.k_grid), {sup.begin(), sup.begin() + static_cast<std::ptrdiff_t>(nk)}, target,
                      target - opt.tail_tolerance, target + opt.tail_tolerance);
  std::vector<double> hx;
  for (int j : opt.h_grid) hx.push_back(-static_cast<double>(j));
  rep.modulus = fit_log2(hx, {sup.begin() + static_cast<std::ptrdiff_t>(nk), sup.end() - 1}, 0.0, 1e-6,
                         std::numeric_limits<double>::infinity());
  rep.split_error = sup.back();
  return rep;
}

SplitCheck shift_split_check(const StepFunction& b, const ShiftSpec& spec, const StepFunction& f,
                             const TruncatedLattice& lat, double h) {
  require(spec.dim == lat.dim(), "shift and lattice dimensions differ");
  const int d = lat.dim();
  const SumPyramid pf(f, lat), pbf(b * f, lat);
  struct Term {
    HaarFunction target;
    double cf, cbf, bx;
  };
  std::vector<Term> terms;
  std::unordered_map<DyadicInterval, std::vector<std::size_t>, DyadicIntervalHash> by_target;
  std::vector<int> target_scales;
  for (const auto& t : spec.terms) {
    const double inv = t.lambda / t.I.measure();
    const auto& J = t.source.interval;
    const Point cj = d == 1 ? pt(J.center(0)) : pt(J.center(0), J.center(1));
    by_target[t.target.interval].push_back(terms.size());
    terms.push_back({t.target, inv * pf.haar_coefficient(t.source), inv * pbf.haar_coefficient(t.source), b(cj)});
    target_scales.push_back(t.target.interval.scale);
  }
  std::sort(target_scales.begin(), target_scales.end());
  target_scales.erase(std::unique(target_scales.begin(), target_scales.end()), target_scales.end());

  // sum over terms with y in the target of weight(term) * h''(y)
  auto sum_at = [&](const std::array<double, 2>& y, const auto& weight) {
    double s = 0.0;
    const Point py = pt(y[0], y[1]);
    for (int k : target_scales) {
      const auto ix = static_cast<std::int64_t>(std::floor(std::ldexp(y[0], -k)));
      const auto iy = static_cast<std::int64_t>(std::floor(std::ldexp(y[1], -k)));
      const auto I = d == 1 ? DyadicInterval::make1(k, ix) : DyadicInterval::make2(k, ix, iy);
      const auto it = by_target.find(I);
      if (it == by_target.end()) continue;
      for (std::size_t q : it->second) s += weight(terms[q]) * haar_eval(terms[q].target, py);
    }
    return s;
  };
  const StepFunction C = commutator(b, make_shift(spec), 1, std::span<const StepFunction>(&f, 1), lat);
  SplitCheck chk;
  const double w = finest_width(lat);
  const std::int64_t first = lat.first_index(-lat.depth() - 1), n = lat.cells_per_axis(-lat.depth() - 1);
  for (std::int64_t cy = 0; cy < (d == 2 ? n : 1); ++cy)
    for (std::int64_t cx = 0; cx < n; ++cx) {
      const std::array<double, 2> y{(static_cast<double>(first + cx) + 0.5) * w,
                                    d == 2 ? (static_cast<double>(first + cy) + 0.5) * w : 0.0};
      const std::array<double, 2> yh{y[0] + h, d == 2 ? y[1] + h : 0.0};
      const Point py = pt(y[0], y[1]), pyh = pt(yh[0], yh[1]);
      const double by = b(py), byh = b(pyh);
      const double S_yh = sum_at(yh, [](const Term& t) { return t.cf; });
      const double ii1 = (byh - by) * S_yh;
      const double ii2 = sum_at(yh, [&](const Term& t) { return (by - t.bx) * t.cf; }) -
                         sum_at(y, [&](const Term& t) { return (by - t.bx) * t.cf; });
      const double ii3 = -(sum_at(yh, [](const Term& t) { return t.cbf - t.bx * t.cf; }) -
                           sum_at(y, [](const Term& t) { return t.cbf - t.bx * t.cf; }));
      const double direct = C(pyh) - C(py);
      chk.scale = std::max({chk.scale, std::fabs(direct), std::fabs(ii1), std::fabs(ii2), std::fabs(ii3),
                            std::max(std::fabs(by), std::fabs(byh)) * std::fabs(S_yh)});
      chk.max_abs_error = std::max(chk.max_abs_error, std::fabs(ii1 + ii2 + ii3 - direct));
    }
  return chk;
}

double sharp_maximal_ratio(const StepFunction& b, const ShiftSpec& spec, const StepFunction& f,
                           const TruncatedLattice& lat, double s) {
  const double bb = bmo_dyadic(b, lat).value;
  if (bb == 0.0) return 0.0;
  const StepFunction Sf = apply_shift(spec, f, lat);
  const StepFunction C = commutator(b, make_shift(spec), 1, std::span<const StepFunction>(&f, 1), lat);
  const StepFunction num = sharp_maximal(C, lat);
  const StepFunction m1 = dyadic_maximal(Sf, lat, s), m2 = dyadic_maximal(f, lat, s);
  const int g = std::min({num.k_min(), m1.k_min(), m2.k_min()});
  const StepFunction a = to_lattice_grid(num, lat, g), c1 = to_lattice_grid(m1, lat, g),
                     c2 = to_lattice_grid(m2, lat, g);
  double best = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double den = bb * (c1.values()[i] + c2.values()[i]);
    if (den > 0.0) best = std::max(best, a.values()[i] / den);
  }
  return best;
}

ShiftCommutatorReport shift_commutator_probe(const StepFunction& b, const ShiftSpec& spec, double p,
                                             const TruncatedLattice& lat, const DecayOptions& opt) {
  require(spec.dim == lat.dim(), "shift and lattice dimensions differ");
  require(p > 1.0, "shift commutator probe needs p > 1");
  const StepFunction bc = b.canonical();
  if (!bc.is_zero()) {
    const double w = bc.cell_width();
    for (int a = 0; a < lat.dim(); ++a)
      require(static_cast<double>(bc.box().lo[a]) * w >= -1.0 &&
                  static_cast<double>(bc.box().lo[a] + bc.box().n[a]) * w <= 1.0,
              "symbol must vanish outside [-1, 1]^d");
  }
  const auto batch = unit_ball_batch(p, lat, opt.batch, true);
  const auto S = make_shift(spec);
  const std::size_t nk = opt.k_grid.size();
  const double h_split = 3.0 * finest_width(lat);
  const auto sup = batch_sup(batch.size(), nk + 2, [&](std::size_t i) {
    const StepFunction out = commutator(b, S, 1, std::span<const StepFunction>(&batch[i], 1), lat);
    std::vector<double> r;
    for (int k : opt.k_grid) r.push_back(orthant_tail(out, k, p));
    r.push_back(sharp_maximal_ratio(b, spec, batch[i], lat));
    r.push_back(shift_split_check(b, spec, batch[i], lat, h_split).relative());
    return r;
  });
  ShiftCommutatorReport rep;
  rep.batch_size = batch.size();
  const double target = -(p - 1.0) * lat.dim();
  rep.tail = fit_log2(to_doubles(opt.k_grid), {sup.begin(), sup.begin() + static_cast<std::ptrdiff_t>(nk)}, target,
                      target - opt.tail_tolerance, target + opt.tail_tolerance);
  rep.mds_ratio = sup[nk];
  rep.split_error = sup[nk + 1];
  return rep;
}

StepFunction remark31_symbol(const TruncatedLattice& lat) {
  require(lat.dim() == 1, "the symbol is one-dimensional");
  require(lat.coarse_scale() >= 0 && lat.window_hi() >= 1.0 && lat.window_lo() <= 0.0,
          "window must contain [0, 1)");
  const int L = lat.depth();
  StepFunction b = StepFunction::on_lattice(lat, -L - 1);
  const double w = b.cell_width();
  for (int k = 1; k <= L; ++k) {
    const double lo = 1.0 - std::ldexp(2.0, -k) + std::ldexp(1.0, -k - 1), hi = 1.0 - std::ldexp(1.0, -k);
    const double v = (k % 2 == 0) ? 1.0 : -1.0;
    for (auto c = static_cast<std::int64_t>(lo / w); static_cast<double>(c) * w < hi; ++c)
      b.at(c - b.box().lo[0]) = v;
  }
  return b;
}

StepFunction remark31_input(int k0) {
  require(k0 >= 1 && k0 < 40, "k0 out of range");
  const std::int64_t m = (std::int64_t{1} << k0) - 2;
  return -std::ldexp(1.0, k0) * StepFunction::indicator(DyadicInterval::make1(-k0, m), -k0);
}

Remark31Report remark31_probe(const std::vector<int>& k0_grid, const AlphaVector& alpha, const Exponents& exps,
                              const TruncatedLattice& lat, std::vector<double> t_multipliers, double c) {
  require(lat.dim() == 1, "the example is one-dimensional");
  require(!k0_grid.empty(), "k0 grid is empty");
  require(alpha.size() == exps.size(), "alpha and exponents must have the same length");
  if (t_multipliers.empty())
    for (int j = 0; j < 10; ++j) t_multipliers.push_back(1.0 + 0.5 * j);
  for (double mu : t_multipliers)
    require(mu >= 1.0 && mu < 6.0, "t must lie in [2^-k0, 3 * 2^(1-k0))");
  const StepFunction b = remark31_symbol(lat);
  const double p = exps.total();
  Remark31Report rep;
  rep.c = c;
  rep.rows.resize(k0_grid.size());
  parallel_for(k0_grid.size(), [&](std::size_t r) {
    const int k0 = k0_grid[r];
    require(k0 >= 1 && k0 <= lat.depth() - 1, "lattice depth insufficient for k0");
    const StepFunction f = remark31_input(k0);
    const StepFunction support = StepFunction::indicator(DyadicInterval::make1(-k0, (std::int64_t{1} << k0) - 2), -k0);
    std::vector<StepFunction> raw, unit;
    for (int j = 0; j < alpha.size(); ++j) {
      StepFunction fj = alpha.bits[static_cast<std::size_t>(j)] == 0 ? f : support;  // f^0 = chi_supp, 0^0 = 0
      raw.push_back(fj);
      normalize(fj, exps.p[static_cast<std::size_t>(j)]);
      unit.push_back(fj);
    }
    const StepFunction out_raw = apply_pi(b, alpha, raw, lat), out_unit = apply_pi(b, alpha, unit, lat);
    Remark31Row row;
    row.k0 = k0;
    for (double mu : t_multipliers) {
      const double t = mu * std::ldexp(1.0, -k0);
      const double vr = translation_modulus(out_raw, along_first(t), p);
      const double vu = translation_modulus(out_unit, along_first(t), p);
      if (vr > row.raw) {
        row.raw = vr;
        row.raw_t = t;
      }
      if (vu > row.normalized) {
        row.normalized = vu;
        row.normalized_t = t;
      }
    }
    rep.rows[r] = row;
  });
  rep.raw_stays_above = std::all_of(rep.rows.begin(), rep.rows.end(), [&](const Remark31Row& r) { return r.raw >= c; });
  rep.normalized_stays_above =
      std::all_of(rep.rows.begin(), rep.rows.end(), [&](const Remark31Row& r) { return r.normalized >= c; });
  return rep;
}

ContinuityReport continuity_probe(const ShiftSpec& spec, const StepFunction& f, double lipschitz,
                                  const TruncatedLattice& lat, const std::vector<int>& k0_grid,
                                  const std::vector<Point>& points, std::vector<double> delta_grid) {
  require(spec.dim == lat.dim(), "shift and lattice dimensions differ");
  require(lipschitz >= 0.0, "Lipschitz constant must be nonnegative");
  const int d = lat.dim();
  for (const auto& x : points)
    for (int a = 0; a < d; ++a)
      require(!x[static_cast<std::size_t>(a)].is_dyadic(), "sample point lies on a dyadic boundary");
  std::sort(delta_grid.begin(), delta_grid.end(), std::greater<>());
  const SumPyramid pf(f, lat);
  std::vector<double> coef;
  for (const auto& t : spec.terms) coef.push_back(t.lambda * pf.haar_coefficient(t.source) / t.I.measure());
  // Offset that keeps points off dyadic boundaries: a dyadic shift of a non-dyadic point.
  const Rational t_off = Rational::dyadic(1, -lat.depth() - 3);
  ContinuityReport rep;
  rep.min_margin = std::numeric_limits<double>::infinity();
  const StepFunction Sf = apply_shift(spec, f, lat);
  for (std::size_t pi = 0; pi < points.size(); ++pi) {
    const Point& x = points[pi];
    Point xt = x;
    for (int a = 0; a < d; ++a) xt[static_cast<std::size_t>(a)] = x[static_cast<std::size_t>(a)] + t_off;
    for (int k0 : k0_grid) {
      double fx = 0.0, fxt = 0.0;
      std::vector<int> scales;
      for (std::size_t q = 0; q < spec.terms.size(); ++q) {
        const auto& t = spec.terms[q];
        if (t.I.scale > -k0) continue;
        scales.push_back(t.I.scale);
        if (t.target.interval.contains(x)) fx += coef[q] * haar_eval(t.target, x);
        if (t.target.interval.contains(xt)) fxt += coef[q] * haar_eval(t.target, xt);
      }
      std::sort(scales.begin(), scales.end());
      scales.erase(std::unique(scales.begin(), scales.end()), scales.end());
      double lengths = 0.0;
      for (int s : scales) lengths += std::ldexp(1.0, s);
      ContinuityRow row;
      row.point = pi;
      row.k0 = k0;
      row.measured = std::fabs(fx) + std::fabs(fxt);
      row.bound = std::ldexp(1.0, 1 - spec.m) * std::sqrt(static_cast<double>(d)) * lipschitz * lengths;
      row.margin = row.bound - row.measured;
      rep.min_margin = std::min(rep.min_margin, row.margin);
      rep.rows.push_back(row);
    }
    std::vector<double> osc;
    for (double delta : delta_grid) osc.push_back(oscillation(Sf, x, delta));
    for (std::size_t i = 1; i < osc.size(); ++i)
      if (osc[i] > osc[i - 1]) rep.oscillation_nonincreasing = false;
    rep.oscillation.push_back(std::move(osc));
  }
  if (rep.rows.empty()) rep.min_margin = 0.0;
  return rep;
}

double opnorm_lower_bound(const OperatorHandle& op, const Exponents& exps, const TruncatedLattice& lat,
                          std::size_t budget, std::uint64_t seed) {
  require(budget > 0, "operator norm search needs a positive budget");
  require(op->arity() == exps.size(), "exponent count must match the operator arity");
  require(op->dim() == lat.dim(), "operator and lattice dimensions differ");
  const int m = op->arity();
  const double p = exps.total();
  std::size_t used = 0;
  double best = 0.0;
  std::vector<StepFunction> best_f;
  auto evaluate = [&](std::vector<StepFunction> f) {
    ++used;
    const double v = lp_norm(op->apply(f, lat), p);
    if (v > best || best_f.empty()) {
      best = std::max(best, v);
      best_f = std::move(f);
    }
  };
  auto atom = [&](const DyadicInterval& I, int kind, int j) {
    const double pj = exps.p[static_cast<std::size_t>(j)];
    return kind == 0 ? normalized_haar(I, pj) : normalized_indicator(I, pj);
  };
  // Atoms: every lattice interval when the budget allows, else round-robin
  // over the scales, nearest to the origin first.
  std::vector<DyadicInterval> cells = lat.enumerate();
  const std::size_t patterns = std::size_t{1} << m;
  const std::size_t atom_cells = std::max<std::size_t>(1, (budget / 2) / patterns);
  if (cells.size() > atom_cells) {
    auto dist = [](const DyadicInterval& I) {
      double d = 0;
      for (int a = 0; a < I.dim; ++a) d = std::max(d, std::fabs(I.center(a)));
      return d;
    };
    std::vector<std::vector<DyadicInterval>> per_scale;
    for (int k = lat.coarse_scale(); k >= -lat.depth(); --k) {
      std::vector<DyadicInterval> row;
      for (const auto& I : cells)
        if (I.scale == k) row.push_back(I);
      std::stable_sort(row.begin(), row.end(),
                       [&](const DyadicInterval& a, const DyadicInterval& b) { return dist(a) < dist(b); });
      per_scale.push_back(std::move(row));
    }
    cells.clear();
    for (std::size_t r = 0; cells.size() < atom_cells; ++r)
      for (const auto& row : per_scale)
        if (r < row.size() && cells.size() < atom_cells) cells.push_back(row[r]);
  }
  for (const auto& I : cells)
    for (std::size_t pat = 0; pat < patterns && used < budget; ++pat) {
      std::vector<StepFunction> f;
      for (int j = 0; j < m; ++j) f.push_back(atom(I, static_cast<int>((pat >> j) & 1u), j));
      evaluate(std::move(f));
    }
  // Random unit-ball steps.
  std::uint64_t stream = 1;
  while (used < budget - budget / 4 || (used < budget && best_f.empty())) {
    CounterRng r(seed, stream++);
    std::vector<StepFunction> f;
    for (int j = 0; j < m; ++j) f.push_back(random_unit_step(r, lat, exps.p[static_cast<std::size_t>(j)]));
    evaluate(std::move(f));
  }
  // Coordinate ascent: add a scaled atom to one slot and renormalize.
  while (used < budget) {
    CounterRng r(seed, stream++);
    std::vector<StepFunction> f = best_f;
    const int j = static_cast<int>(r.integer(0, m - 1));
    const int k = static_cast<int>(r.integer(-lat.depth(), lat.coarse_scale()));
    const std::int64_t n = lat.cells_per_axis(k), first = lat.first_index(k);
    const std::int64_t ix = first + r.integer(0, n - 1);
    const auto I = lat.dim() == 1 ? DyadicInterval::make1(k, ix)
                                  : DyadicInterval::make2(k, ix, first + r.integer(0, n - 1));
    const double step = (r.coin() ? 0.5 : 0.25) * (r.coin() ? 1.0 : -1.0);
    StepFunction g = axpy(step, atom(I, static_cast<int>(r.integer(0, 1)), j), f[static_cast<std::size_t>(j)]);
    if (lp_norm(g, exps.p[static_cast<std::size_t>(j)]) == 0.0) {
      ++used;
      continue;
    }
    normalize(g, exps.p[static_cast<std::size_t>(j)]);
    f[static_cast<std::size_t>(j)] = std::move(g);
    evaluate(std::move(f));
  }
  return best;
}

WeightedRatioReport weighted_ratio_probe(const std::vector<StepFunction>& b, const EpsilonSeq& eps,
                                         const AlphaVector& alpha, const WeightVector& w, const Exponents& exps,
                                         const TruncatedLattice& lat, const BatchOptions& opt,
                                         std::vector<double> t_grid) {
  const int m = alpha.size();
  require(static_cast<int>(b.size()) == m && exps.size() == m && static_cast<int>(w.w.size()) == m,
          "symbols, weights and exponents must match alpha");
  for (double t : t_grid) require(t > 0.0, "weak-type levels must be positive");
  const double p = exps.total();
  const StepFunction nu = w.nu(exps);
  double bprod = 1.0;
  for (const auto& bj : b) bprod *= bmo_dyadic(bj, lat).value;
  const auto batch = unit_ball_batch(alpha, exps, lat, opt);

  struct Row {
    double ratio = 0.0;
    bool skipped = false;
    double weak = 0.0, weak_iter = 0.0;
  };
  std::vector<Row> rows(batch.size());
  parallel_for(batch.size(), [&](std::size_t e) {
    const auto& f = batch[e];
    const StepFunction out = iterated_commutator(b, eps, alpha, f, lat);
    Row row;
    const double num = out.is_zero() ? 0.0 : weighted_lp_norm(out, p, nu);
    double den = bprod;
    for (int j = 0; j < m; ++j)
      den *= weighted_lp_norm(f[static_cast<std::size_t>(j)], exps.p[static_cast<std::size_t>(j)],
                              w.w[static_cast<std::size_t>(j)]);
    if (num == 0.0) {
      row.ratio = 0.0;
    } else if (den == 0.0) {
      row.skipped = true;
    } else {
      row.ratio = num / den;
    }
    if (!out.is_zero()) {
      const auto [o, v] = common_grid(out, nu);
      for (double t : t_grid) {
        const double level = std::pow(t, m);
        double lhs = 0.0;
        for (std::size_t c = 0; c < o.size(); ++c)
          if (std::fabs(o.values()[c]) > level) lhs += v.values()[c];
        lhs *= o.cell_measure();
        double rhs = 1.0, rhs_iter = 1.0;
        for (int j = 0; j < m; ++j) {
          const auto [fj, wj] = common_grid(f[static_cast<std::size_t>(j)], w.w[static_cast<std::size_t>(j)]);
          double s = 0.0, si = 0.0;
          for (std::size_t c = 0; c < fj.size(); ++c) {
            const double a = std::fabs(fj.values()[c]) / t;
            s += phi(a) * wj.values()[c];
            si += phi(a, m) * wj.values()[c];
          }
          rhs *= s * fj.cell_measure();
          rhs_iter *= si * fj.cell_measure();
        }
        rhs = std::pow(rhs, 1.0 / m);
        rhs_iter = std::pow(rhs_iter, 1.0 / m);
        if (rhs > 0.0) row.weak = std::max(row.weak, lhs / rhs);
        if (rhs_iter > 0.0) row.weak_iter = std::max(row.weak_iter, lhs / rhs_iter);
      }
    }
    rows[e] = row;
  });
  WeightedRatioReport rep;
  for (const auto& r : rows) {
    if (r.skipped) {
      ++rep.skipped;
    } else {
      rep.ratios.push_back(r.ratio);
    }
    rep.weak_max_ratio = std::max(rep.weak_max_ratio, r.weak);
    rep.weak_max_ratio_iterated = std::max(rep.weak_max_ratio_iterated, r.weak_iter);
  }
  if (!rep.ratios.empty()) {
    std::vector<double> s = rep.ratios;
    std::sort(s.begin(), s.end());
    rep.max_ratio = s.back();
    const std::size_t n = s.size();
    rep.median_ratio = n % 2 ? s[n / 2] : 0.5 * (s[n / 2 - 1] + s[n / 2]);
  }
  return rep;
}

}  // namespace dyadlab
