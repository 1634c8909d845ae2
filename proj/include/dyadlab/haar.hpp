#pragma once

#include <span>
#include <vector>

#include "dyadlab/dyadic.hpp"
#include "dyadlab/step_function.hpp"

namespace dyadlab {

// Integrals of a step function over every cell of scales -L-1 .. K of a
// lattice window, built bottom-up. In one dimension the Haar details
// <f, h_I> = S(I+) - S(I-) come out of the same pass.
class SumPyramid {
 public:
  // f must vanish outside the window and have k_min >= -L-1.
  SumPyramid(const StepFunction& f, const TruncatedLattice& lat);

  const TruncatedLattice& lattice() const { return lat_; }
  int finest_cell_scale() const { return -lat_.depth() - 1; }

  std::span<const double> integrals(int k) const;  // row-major over the window at scale k
  double integral(const DyadicInterval& I) const;
  double average(const DyadicInterval& I) const { return integral(I) / I.measure(); }
  // <f, h_I> for the standard one-dimensional Haar function, scales -L..K.
  std::span<const double> details(int k) const;
  double detail(const DyadicInterval& I) const;
  // <f, h> = sum_J alpha_J int_J f
  double haar_coefficient(const HaarFunction& h) const;

 private:
  std::size_t slot(const DyadicInterval& I) const;
  TruncatedLattice lat_;
  std::vector<std::vector<double>> sums_;     // [K - k], k = K .. -L-1
  std::vector<std::vector<double>> details_;  // [K - k], k = K .. -L (d = 1 only)
};

// Haar expansion of a one-dimensional step function on a lattice: details
// <f, h_I> for every enumerated I and averages on the top cells.
struct HaarExpansion {
  TruncatedLattice lattice;
  std::vector<std::vector<double>> details;  // [K - k], dense over the window
  std::vector<double> tops;                  // averages on top cells, left to right

  static HaarExpansion empty(const TruncatedLattice& lat);
  double detail(const DyadicInterval& I) const;
  void set_detail(const DyadicInterval& I, double v);
  double top(const DyadicInterval& Q) const;
  void set_top(const DyadicInterval& Q, double v);
  std::size_t nonzero_details() const;
};

// Requires d = 1; f's resolution must be at least the lattice child scale -L-1.
HaarExpansion analyze(const StepFunction& f, const TruncatedLattice& lat);
// f = sum_Q <f>_Q chi_Q + sum_I <f, h_I> h_I / |I|
StepFunction synthesize(const HaarExpansion& e);

// Accumulates sum c_I chi_I over lattice cells of scales K .. -L-1 and
// resolves the sum top-down into a step function at scale -L-1.
class ChiAccumulator {
 public:
  explicit ChiAccumulator(const TruncatedLattice& lat);

  void add_chi(const DyadicInterval& I, double c);
  // c * h, i.e. c * alpha_J on every child J
  void add_haar(const HaarFunction& h, double c);
  // adds c * h_I (standard 1-D Haar) for every interval of scale k at once
  void add_haar_level(int k, std::span<const double> c);
  void add_chi_level(int k, std::span<const double> c);

  StepFunction resolve() const;

 private:
  std::size_t slot(const DyadicInterval& I) const;
  TruncatedLattice lat_;
  std::vector<std::vector<double>> levels_;  // [K - k], k = K .. -L-1
};

}  // namespace dyadlab
