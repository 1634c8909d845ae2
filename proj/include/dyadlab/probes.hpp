#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "dyadlab/norms.hpp"
#include "dyadlab/operators.hpp"
#include "dyadlab/step_function.hpp"

namespace dyadlab {

// Values below this are treated as exact zeros by the slope fits.
inline constexpr double kFitFloor = 1e-13;

// Least-squares line through (x, log2 value) over the values above kFitFloor.
struct DecayFit {
  std::vector<double> x;
  std::vector<double> value;  // measured, before taking logs
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // root mean square of the log2 residuals
  int points_used = 0;
  double target = 0.0;
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
  bool identically_zero = false;  // every value below the floor
  bool degenerate = false;        // fewer than 4 usable points

  // Identically zero data meets any decay target; otherwise the slope must
  // lie in [lower, upper] with at least 4 points.
  bool passed() const;
};

DecayFit fit_log2(std::vector<double> x, std::vector<double> values, double target, double lower,
                  double upper);

struct BatchOptions {
  std::size_t batch = 64;  // random elements, on top of the structured atoms
  std::uint64_t seed = 0;
};

// Inputs with ||f_j||_{p_j} = 1: atom tuples |I|^{-1/p_j} h_I^{1+alpha_j} on
// the intervals with an endpoint at the origin (one per scale and side), then
// random step tuples. With localized_slot = i (1-based), slot i of every atom
// tuple is replaced by the normalized indicator of [-1, 1).
std::vector<std::vector<StepFunction>> unit_ball_batch(const AlphaVector& alpha, const Exponents& exps,
                                                       const TruncatedLattice& lat,
                                                       const BatchOptions& opt, int localized_slot = 0);
// Single-input version for one- or two-dimensional operators.
std::vector<StepFunction> unit_ball_batch(double p, const TruncatedLattice& lat, const BatchOptions& opt,
                                          bool localized = false);

// --- Frechet-Kolmogorov-Riesz-Tsuji measurements -----------------------------

struct ProfilePoint {
  double at = 0.0;
  double value = 0.0;
};

struct FkrtOptions {
  double threshold_b = 0.25;  // fraction of sup_norm
  double threshold_c = 0.25;
};

struct FkrtReport {
  std::size_t family_size = 0;
  double p = 1.0;
  double sup_norm = 0.0;                    // (a): sup ||F||_p
  std::vector<ProfilePoint> tail_profile;   // (b): A -> sup (int_{|x|>A} |F|^p)^{1/p}
  std::vector<ProfilePoint> shift_profile;  // (c): t -> sup ||F(. + t) - F||_p
  double tail_floor = 0.0;   // min of the tail profile over the larger half of the A grid
  double shift_floor = 0.0;  // min of the shift profile over the smaller half of the t grid
  double threshold_b = 0.25;
  double threshold_c = 0.25;
  bool fails_b = false;
  bool fails_c = false;
};

// Translations act along the first axis.
FkrtReport fkrt_probe(std::span<const StepFunction> family, double p, std::vector<double> A_grid,
                      std::vector<double> t_grid, const FkrtOptions& opt = {});

std::vector<double> default_A_grid(const TruncatedLattice& lat);  // 2^0 .. 2^{K-1}
std::vector<double> default_t_grid(const TruncatedLattice& lat);  // 2^-1 .. 2^-L

struct NoncompactReport {
  FkrtReport fkrt;
  std::size_t qualifying = 0;  // enumerated intervals (or shift sources) that qualify
  std::vector<DyadicInterval> family;
  double b_bound = 0.0;             // measured: fkrt.tail_floor
  double c_bound = 0.0;             // measured: fkrt.shift_floor
  double c_bound_computed = 0.0;    // 2^{1/p} min |eps_I| over the family
  double c_bound_paper = 0.0;       // 2 min |eps_I|, the constant printed with the estimate
  double outer_sup = 0.0;           // sup |eps_I| over intervals in the outer half of the window
};

// Families T(f_I) for the intervals with |eps_I| >= A: per scale the
// qualifying interval nearest to the origin and the one farthest from it.
NoncompactReport noncompact_T_probe(const EpsilonSeq& eps, const AlphaVector& alpha, const Exponents& exps,
                                    const TruncatedLattice& lat, double A = 1.0,
                                    const FkrtOptions& opt = {});
// Family S(h_{I'} / ||h_{I'}||_p) for the distinct sources of the shift terms.
NoncompactReport noncompact_shift_probe(const ShiftSpec& spec, double p, const TruncatedLattice& lat,
                                        const FkrtOptions& opt = {});

// --- compactness surrogates ------------------------------------------------------

struct DecayOptions {
  std::vector<int> k_grid{1, 2, 3, 4, 5, 6};           // tails beyond 2^k
  std::vector<int> h_grid{1, 2, 3, 4, 5, 6, 7, 8};     // translations by 2^-j
  BatchOptions batch;
  double tail_tolerance = 0.3;
  double modulus_fraction = 0.9;
};

struct PiProbeReport {
  DecayFit tail;     // sup int_{|x|>=2^k} |pi(f)|^p against k, target -p
  DecayFit modulus;  // sup ||pi(f)(. + h) - pi(f)||_p against log2 h, target min(1, 1/p)
  std::size_t batch_size = 0;
};
// b must vanish outside [-1, 1].
PiProbeReport pi_compactness_probe(const StepFunction& b, const AlphaVector& alpha, const Exponents& exps,
                                   const TruncatedLattice& lat, const DecayOptions& opt = {});

struct CommutatorProbeReport {
  DecayFit tail;     // target -p / p_i'
  DecayFit modulus;  // target: positive exponent
  double split_error = 0.0;  // max over the batch of the relative five-term split error
  std::size_t batch_size = 0;
};
CommutatorProbeReport commutator_compactness_probe(const StepFunction& b, const EpsilonSeq& eps,
                                                   const AlphaVector& alpha, int slot, const Exponents& exps,
                                                   const TruncatedLattice& lat, const DecayOptions& opt = {});

// Terms of [b, T]_i(f)(x + h) - [b, T]_i(f)(x) at the midpoints x of the
// finest cells: I1 + I2 + I3 - I4 - I5 against the direct difference.
struct SplitCheck {
  double max_abs_error = 0.0;
  double scale = 0.0;  // max of |direct difference|, the term magnitudes and |b| |T f(x + h)|
  double relative() const { return scale > 0.0 ? max_abs_error / scale : max_abs_error; }
};
SplitCheck commutator_split_check(const StepFunction& b, const EpsilonSeq& eps, const AlphaVector& alpha,
                                  int slot, std::span<const StepFunction> f, const TruncatedLattice& lat,
                                  double h);
// II1 + II2 + II3 against [b, S](f)(x + h) - [b, S](f)(x); h is applied on every axis.
SplitCheck shift_split_check(const StepFunction& b, const ShiftSpec& spec, const StepFunction& f,
                             const TruncatedLattice& lat, double h);

// max_x M^#([b,S]f)(x) / (||b||_{BMO^d} (M_s^d(Sf)(x) + M_s^d(f)(x))) over cells
// where the denominator is positive; 0 when there are none.
double sharp_maximal_ratio(const StepFunction& b, const ShiftSpec& spec, const StepFunction& f,
                           const TruncatedLattice& lat, double s = 2.0);

struct ShiftCommutatorReport {
  DecayFit tail;  // sup int_{E_k} |[b,S]f|^p, E_k = [0,inf)^d \ [0,2^k)^d, target -(p-1)d
  double mds_ratio = 0.0;    // sup over the batch of sharp_maximal_ratio
  double split_error = 0.0;  // max relative II-split error over the batch
  std::size_t batch_size = 0;
};
ShiftCommutatorReport shift_commutator_probe(const StepFunction& b, const ShiftSpec& spec, double p,
                                             const TruncatedLattice& lat, const DecayOptions& opt = {});

// --- explicit symbol with a non-vanishing translation modulus -------------------

// sum_{k>=1} (-1)^k chi_[1 - 2^{1-k} + 2^{-k-1}, 1 - 2^{-k}), truncated to k <= L.
StepFunction remark31_symbol(const TruncatedLattice& lat);
// -2^{k0} on [1 - 2^{1-k0}, 1 - 2^{-k0}).
StepFunction remark31_input(int k0);

struct Remark31Row {
  int k0 = 0;
  double raw = 0.0;         // max over t of ||pi(f)(. + t) - pi(f)||_p
  double normalized = 0.0;  // same with every f_j scaled to unit L^{p_j} norm
  double raw_t = 0.0;
  double normalized_t = 0.0;
};
struct Remark31Report {
  std::vector<Remark31Row> rows;
  double c = 0.0;
  bool raw_stays_above = false;
  bool normalized_stays_above = false;
};
// t = mu 2^{-k0} for mu in t_multipliers, each in [1, 6).
Remark31Report remark31_probe(const std::vector<int>& k0_grid, const AlphaVector& alpha, const Exponents& exps,
                              const TruncatedLattice& lat, std::vector<double> t_multipliers = {},
                              double c = 0.1);

// --- continuity ------------------------------------------------------------------

struct ContinuityRow {
  std::size_t point = 0;
  int k0 = 0;
  double measured = 0.0;  // |F(x + t)| + |F(x)|, F = scales <= -k0 part of Sf
  double bound = 0.0;     // 2^{1-m} sqrt(d) Lip sum l(I)
  double margin = 0.0;
};
struct ContinuityReport {
  std::vector<ContinuityRow> rows;
  std::vector<std::vector<double>> oscillation;  // per point, along the delta grid
  double min_margin = 0.0;
  bool oscillation_nonincreasing = true;
};
// Points must avoid dyadic boundaries (no dyadic rational coordinate). The
// delta grid is sorted decreasing; t is a small non-dyadic-preserving offset.
ContinuityReport continuity_probe(const ShiftSpec& spec, const StepFunction& f, double lipschitz,
                                  const TruncatedLattice& lat, const std::vector<int>& k0_grid,
                                  const std::vector<Point>& points, std::vector<double> delta_grid);

// --- norms of operators ----------------------------------------------------------

// max of ||op(f)||_p over unit-ball inputs: atoms, random steps, then
// coordinate ascent from the best. Deterministic given the seed.
double opnorm_lower_bound(const OperatorHandle& op, const Exponents& exps, const TruncatedLattice& lat,
                          std::size_t budget = 256, std::uint64_t seed = 0);

struct WeightedRatioReport {
  std::vector<double> ratios;
  double max_ratio = 0.0;
  double median_ratio = 0.0;
  std::size_t skipped = 0;  // nonzero output with a zero denominator
  // nu{|T| > t^m} / (prod_j int Phi(|f_j| / t) w_j)^{1/m}, max over batch and t grid
  double weak_max_ratio = 0.0;
  double weak_max_ratio_iterated = 0.0;  // with Phi composed m times
};
WeightedRatioReport weighted_ratio_probe(const std::vector<StepFunction>& b, const EpsilonSeq& eps,
                                         const AlphaVector& alpha, const WeightVector& w, const Exponents& exps,
                                         const TruncatedLattice& lat, const BatchOptions& opt = {},
                                         std::vector<double> t_grid = {0.25, 0.5, 1.0, 2.0, 4.0});

}  // namespace dyadlab
