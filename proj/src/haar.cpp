#include "dyadlab/haar.hpp"

#include <algorithm>
#include <cmath>

#include "dyadlab/simd/kernels.hpp"

namespace dyadlab {
namespace {

std::size_t lattice_slot(const TruncatedLattice& lat, const DyadicInterval& I) {
  require(I.dim == lat.dim(), "interval dimension does not match the lattice");
  const std::int64_t first = lat.first_index(I.scale), n = lat.cells_per_axis(I.scale);
  const std::int64_t rx = I.index[0] - first;
  const std::int64_t ry = lat.dim() == 2 ? I.index[1] - first : 0;
  require(rx >= 0 && rx < n && ry >= 0 && ry < n, "interval outside the lattice window");
  return static_cast<std::size_t>(ry * n + rx);
}

std::size_t level_of(const TruncatedLattice& lat, int k, int finest) {
  require(k <= lat.coarse_scale() && k >= finest, "scale outside the lattice");
  return static_cast<std::size_t>(lat.coarse_scale() - k);
}

}  // namespace

SumPyramid::SumPyramid(const StepFunction& f, const TruncatedLattice& lat) : lat_(lat) {
  const int K = lat.coarse_scale(), kf = finest_cell_scale();
  StepFunction g;
  if (f.is_zero()) {
    g = to_lattice_grid(StepFunction::zero(f.dim(), kf), lat, kf);
  } else {
    const StepFunction c = f.k_min() >= kf ? f : f.canonical();
    require(c.k_min() >= kf, "function resolution is finer than the lattice can resolve (k_min < -L-1)");
    g = to_lattice_grid(c, lat, kf);
  }
  sums_.resize(static_cast<std::size_t>(K - kf + 1));
  details_.resize(static_cast<std::size_t>(K - kf));
  std::vector<double>& finest = sums_.back();
  finest.resize(g.size());
  simd::scale(g.cell_measure(), g.values(), finest);

  for (int k = kf + 1; k <= K; ++k) {
    const std::vector<double>& below = sums_[static_cast<std::size_t>(K - k + 1)];
    std::vector<double>& here = sums_[static_cast<std::size_t>(K - k)];
    const auto n = static_cast<std::size_t>(lat.cells_per_axis(k));
    if (lat.dim() == 1) {
      here.resize(n);
      std::vector<double>& d = details_[static_cast<std::size_t>(K - k)];
      d.resize(n);
      simd::haar_analysis(below, here, d);
    } else {
      here.resize(n * n);
      std::vector<double> pair(2 * n), scratch(n);
      for (std::size_t iy = 0; iy < n; ++iy) {
        std::span<const double> r0(below.data() + (2 * iy) * 2 * n, 2 * n);
        std::span<const double> r1(below.data() + (2 * iy + 1) * 2 * n, 2 * n);
        simd::add(r0, r1, pair);
        simd::haar_analysis(pair, std::span<double>(here.data() + iy * n, n), scratch);
      }
    }
  }
}

std::span<const double> SumPyramid::integrals(int k) const {
  return sums_[level_of(lat_, k, finest_cell_scale())];
}

double SumPyramid::integral(const DyadicInterval& I) const {
  return integrals(I.scale)[slot(I)];
}

std::span<const double> SumPyramid::details(int k) const {
  require(lat_.dim() == 1, "Haar details are one-dimensional");
  return details_[level_of(lat_, k, lat_.finest_scale())];
}

double SumPyramid::detail(const DyadicInterval& I) const { return details(I.scale)[slot(I)]; }

double SumPyramid::haar_coefficient(const HaarFunction& h) const {
  double s = 0.0;
  for (int eta = 0; eta < (1 << h.interval.dim); ++eta)
    s += h.child_coeffs[eta] * integral(child(h.interval, eta));
  return s;
}

std::size_t SumPyramid::slot(const DyadicInterval& I) const { return lattice_slot(lat_, I); }

HaarExpansion HaarExpansion::empty(const TruncatedLattice& lat) {
  require(lat.dim() == 1, "Haar expansions are one-dimensional");
  HaarExpansion e{lat, {}, {}};
  for (int k = lat.coarse_scale(); k >= lat.finest_scale(); --k)
    e.details.emplace_back(static_cast<std::size_t>(lat.cells_per_axis(k)), 0.0);
  e.tops.assign(static_cast<std::size_t>(lat.cells_per_axis(lat.coarse_scale())), 0.0);
  return e;
}

double HaarExpansion::detail(const DyadicInterval& I) const {
  return details[level_of(lattice, I.scale, lattice.finest_scale())][lattice_slot(lattice, I)];
}

void HaarExpansion::set_detail(const DyadicInterval& I, double v) {
  details[level_of(lattice, I.scale, lattice.finest_scale())][lattice_slot(lattice, I)] = v;
}

double HaarExpansion::top(const DyadicInterval& Q) const {
  require(Q.scale == lattice.coarse_scale(), "top cells have the coarse scale");
  return tops[lattice_slot(lattice, Q)];
}

void HaarExpansion::set_top(const DyadicInterval& Q, double v) {
  require(Q.scale == lattice.coarse_scale(), "top cells have the coarse scale");
  tops[lattice_slot(lattice, Q)] = v;
}

std::size_t HaarExpansion::nonzero_details() const {
  std::size_t n = 0;
  for (const auto& level : details)
    n += static_cast<std::size_t>(std::count_if(level.begin(), level.end(), [](double v) { return v != 0.0; }));
  return n;
}

HaarExpansion analyze(const StepFunction& f, const TruncatedLattice& lat) {
  require(lat.dim() == 1 && f.dim() == 1, "analyze is implemented for d = 1");
  const SumPyramid pyr(f, lat);
  HaarExpansion e = HaarExpansion::empty(lat);
  for (int k = lat.coarse_scale(); k >= lat.finest_scale(); --k) {
    auto d = pyr.details(k);
    std::copy(d.begin(), d.end(), e.details[static_cast<std::size_t>(lat.coarse_scale() - k)].begin());
  }
  auto top = pyr.integrals(lat.coarse_scale());
  const double inv = 1.0 / std::ldexp(1.0, lat.coarse_scale());
  simd::scale(inv, top, e.tops);
  return e;
}

StepFunction synthesize(const HaarExpansion& e) {
  const TruncatedLattice& lat = e.lattice;
  ChiAccumulator acc(lat);
  acc.add_chi_level(lat.coarse_scale(), e.tops);
  for (int k = lat.coarse_scale(); k >= lat.finest_scale(); --k) {
    const auto& d = e.details[static_cast<std::size_t>(lat.coarse_scale() - k)];
    std::vector<double> scaled(d.size());
    simd::scale(1.0 / std::ldexp(1.0, k), d, scaled);
    acc.add_haar_level(k, scaled);
  }
  return acc.resolve();
}

ChiAccumulator::ChiAccumulator(const TruncatedLattice& lat) : lat_(lat) {
  for (int k = lat.coarse_scale(); k >= lat.finest_scale() - 1; --k)
    levels_.emplace_back(static_cast<std::size_t>(lat.cells_at_scale(k)), 0.0);
}

std::size_t ChiAccumulator::slot(const DyadicInterval& I) const { return lattice_slot(lat_, I); }

void ChiAccumulator::add_chi(const DyadicInterval& I, double c) {
  levels_[level_of(lat_, I.scale, lat_.finest_scale() - 1)][slot(I)] += c;
}

void ChiAccumulator::add_haar(const HaarFunction& h, double c) {
  for (int eta = 0; eta < (1 << h.interval.dim); ++eta)
    if (h.child_coeffs[eta] != 0.0) add_chi(child(h.interval, eta), c * h.child_coeffs[eta]);
}

void ChiAccumulator::add_haar_level(int k, std::span<const double> c) {
  require(lat_.dim() == 1, "level-wise Haar accumulation is one-dimensional");
  auto& below = levels_[level_of(lat_, k - 1, lat_.finest_scale() - 1)];
  require(c.size() * 2 == below.size(), "level size mismatch");
  std::vector<double> tmp(below.size());
  const std::vector<double> zeros(c.size(), 0.0);
  simd::haar_synthesis(zeros, c, tmp);  // -c on the left child, +c on the right
  simd::add(below, tmp, below);
}

void ChiAccumulator::add_chi_level(int k, std::span<const double> c) {
  auto& level = levels_[level_of(lat_, k, lat_.finest_scale() - 1)];
  require(c.size() == level.size(), "level size mismatch");
  simd::add(level, c, level);
}

StepFunction ChiAccumulator::resolve() const {
  const int K = lat_.coarse_scale(), kf = lat_.finest_scale() - 1;
  std::vector<double> cur = levels_.front();
  for (int k = K; k > kf; --k) {
    const auto& below = levels_[static_cast<std::size_t>(K - k + 1)];
    std::vector<double> next(below.size());
    const auto n = static_cast<std::size_t>(lat_.cells_per_axis(k));
    if (lat_.dim() == 1) {
      simd::duplicate(cur, next);
    } else {
      for (std::size_t iy = 0; iy < n; ++iy) {
        std::span<const double> row(cur.data() + iy * n, n);
        std::span<double> r0(next.data() + (2 * iy) * 2 * n, 2 * n);
        std::span<double> r1(next.data() + (2 * iy + 1) * 2 * n, 2 * n);
        simd::duplicate(row, r0);
        std::copy(r0.begin(), r0.end(), r1.begin());
      }
    }
    simd::add(next, below, next);
    cur = std::move(next);
  }
  StepFunction out = StepFunction::on_lattice(lat_, kf);
  std::copy(cur.begin(), cur.end(), out.values().begin());
  return out;
}

}  // namespace dyadlab
