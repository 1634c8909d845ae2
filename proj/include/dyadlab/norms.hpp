#pragma once

#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "dyadlab/dyadic.hpp"
#include "dyadlab/operators.hpp"
#include "dyadlab/step_function.hpp"

namespace dyadlab {

struct ScaleProfileEntry {
  int scale = 0;
  double value = 0.0;
  DyadicInterval maximizer;
};

// Supremum over the lattice with the interval attaining it (smallest in
// DyadicInterval order on ties) and the per-scale maxima.
struct BmoReport {
  double value = 0.0;
  DyadicInterval maximizer;
  std::vector<ScaleProfileEntry> profile;  // coarse to fine
};

// Per-interval statistic over the cells of b inside I: values of b on the
// lattice grid, contiguous in one dimension, gathered row by row in two.
using IntervalStatistic = std::function<double(std::span<const double> cells)>;
BmoReport interval_supremum(const StepFunction& b, const TruncatedLattice& lat, const IntervalStatistic& stat);

// sup_I (1/|I|) int_I |b - <b>_I|
BmoReport bmo_dyadic(const StepFunction& b, const TruncatedLattice& lat);
// sup_I ((1/|I|) int_I |b - <b>_I|^r)^{1/r}
BmoReport bmo_r(const StepFunction& b, double r, const TruncatedLattice& lat);

struct Bmo2Report {
  BmoReport verbatim;     // (sup_I (1/|I|) sum_{J in I} <b,h_J>^2 / |J|^2)^{1/2}
  BmoReport standard;     // same with <b,h_J>^2 / |J|
  BmoReport oscillation;  // bmo_r with r = 2
};
// One-dimensional; b must be resolved by the lattice (k_min >= -L-1).
Bmo2Report bmo2_dyadic(const StepFunction& b, const TruncatedLattice& lat);

struct ShiftedBmoReport {
  double value = 0.0;
  int scale = 0;           // length 2^scale of the maximizing interval
  int offset_thirds = 0;   // maximizer starts at (index + offset_thirds / 3) * 2^scale
  double lo = 0.0, hi = 0.0;
};
// Lower bound for the mean oscillation over all intervals: maximum over the
// standard lattice and the lattices shifted by 1/3 and 2/3 of each scale,
// using intervals inside the window (one-dimensional).
ShiftedBmoReport bmo_shifted_lower_bound(const StepFunction& b, const TruncatedLattice& lat);

struct CmoReport {
  double distance = 0.0;   // min over surrogates of bmo_dyadic(b - g)
  int best_width_scale = 0;  // log2 of the averaging width; unused when best_is_zero
  bool best_is_zero = false;
  std::vector<std::pair<int, double>> by_width;
};
// Surrogates g: piecewise-linear interpolants of the cell averages of b at
// width 2^j for j in [finest, coarse], vanishing beyond the window, plus g = 0.
CmoReport cmo_distance(const StepFunction& b, const TruncatedLattice& lat, int refine_levels = 3);

struct WeightVector {
  std::vector<StepFunction> w;
  // nu = prod w_j^{p / p_j}
  StepFunction nu(const Exponents& exps) const;
};

struct ApReport {
  double verbatim = 0.0;  // j-th factor raised to 1/p_j
  double standard = 0.0;  // j-th factor raised to 1/p_j'
  DyadicInterval verbatim_maximizer;
  DyadicInterval standard_maximizer;
};
// Weights must be strictly positive on the lattice window; p_j = 1 uses the
// maximum of w_j^{-1} on I.
ApReport ap_constant(const WeightVector& w, const Exponents& exps, const TruncatedLattice& lat);

// sup over lattice intervals I containing x of ((1/|I|) int_I |f|^s)^{1/s}
StepFunction dyadic_maximal(const StepFunction& f, const TruncatedLattice& lat, double s = 1.0);
// sup over lattice intervals I containing x of (1/|I|) int_I |f - <f>_I|
StepFunction sharp_maximal(const StepFunction& f, const TruncatedLattice& lat);

// Phi(t) = t (1 + log+ t), iterated.
double phi(double t, int iterations = 1);
// (int |f|^p w)^{1/p}
double weighted_lp_norm(const StepFunction& f, double p, const StepFunction& w);

}  // namespace dyadlab
