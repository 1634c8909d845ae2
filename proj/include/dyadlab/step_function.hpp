#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dyadlab/dyadic.hpp"

namespace dyadlab {

// Axis-aligned box of cells at one scale, in cell-index units: cells
// lo[a] .. lo[a] + n[a] - 1 along axis a.
struct CellBox {
  std::array<std::int64_t, 2> lo{0, 0};
  std::array<std::int64_t, 2> n{0, 1};
  bool operator==(const CellBox&) const = default;
};

// Compactly supported function, constant on the dyadic cells of scale k_min
// inside its box and zero outside. Values are stored row-major, x fastest.
class StepFunction {
 public:
  StepFunction() = default;
  StepFunction(int dim, int k_min, CellBox box);                      // zero
  StepFunction(int dim, int k_min, CellBox box, std::vector<double> values);

  static StepFunction zero(int dim, int k_min = 0);
  static StepFunction constant_on(const DyadicInterval& I, double c, int k_min);
  static StepFunction indicator(const DyadicInterval& I, int k_min);
  // h on its interval, resolved at scale k_min (at most the child scale).
  static StepFunction haar(const HaarFunction& h, int k_min);
  static StepFunction haar_power(const HaarFunction& h, int q, int k_min);
  // Box covering the lattice window at scale k_min.
  static StepFunction on_lattice(const TruncatedLattice& lat, int k_min);

  int dim() const { return dim_; }
  int k_min() const { return k_min_; }
  double cell_width() const;
  double cell_measure() const;
  const CellBox& box() const { return box_; }
  std::int64_t nx() const { return box_.n[0]; }
  std::int64_t ny() const { return box_.n[1]; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  std::size_t size() const { return values_.size(); }
  double& at(std::int64_t ix, std::int64_t iy = 0) {
    return values_[static_cast<std::size_t>(iy * box_.n[0] + ix)];
  }
  double at(std::int64_t ix, std::int64_t iy = 0) const {
    return values_[static_cast<std::size_t>(iy * box_.n[0] + ix)];
  }
  // Value of the cell with absolute index (cx, cy) at scale k_min; 0 outside.
  double cell_value(std::int64_t cx, std::int64_t cy = 0) const;

  double operator()(const Point& x) const;  // exact point evaluation

  // Same function on finer cells (k <= k_min).
  StepFunction refined(int k) const;
  // Same function on a larger box (must contain the current box) at the same scale.
  StepFunction extended(const CellBox& box) const;
  // Restriction to the box (values outside become zero).
  StepFunction restricted(const CellBox& box) const;
  // Coarsest exact representation with zero margins trimmed; used to compare
  // functions independently of their representation.
  StepFunction canonical() const;
  // Cell box for this function's window expressed at scale k (k <= k_min).
  CellBox box_at(int k) const;

  bool is_zero() const;
  double sup_norm() const;
  double integral() const;

  StepFunction operator-() const;
  StepFunction& operator*=(double c);

 private:
  int dim_ = 1;
  int k_min_ = 0;
  CellBox box_{};
  std::vector<double> values_;
};

// Both functions on the finer of the two scales and the union bounding box.
std::pair<StepFunction, StepFunction> common_grid(const StepFunction& f, const StepFunction& g);
// Extends f to the box of the lattice window at scale k (k <= f.k_min()).
// Values outside the window must be zero.
StepFunction to_lattice_grid(const StepFunction& f, const TruncatedLattice& lat, int k);

StepFunction operator+(const StepFunction& f, const StepFunction& g);
StepFunction operator-(const StepFunction& f, const StepFunction& g);
StepFunction operator*(const StepFunction& f, const StepFunction& g);  // pointwise
StepFunction operator*(double c, const StepFunction& f);
// a * f + g
StepFunction axpy(double a, const StepFunction& f, const StepFunction& g);
StepFunction pointwise_abs_pow(const StepFunction& f, double q);

bool equal_functions(const StepFunction& f, const StepFunction& g);
double max_abs_difference(const StepFunction& f, const StepFunction& g);

double lp_norm(const StepFunction& f, double p);
double inner(const StepFunction& f, const StepFunction& g);
// g(x) = f(x + t); t must become a multiple of the cell width after at most
// max_refine halvings of the cell.
StepFunction translate(const StepFunction& f, const Point& t, int max_refine = 8);
// Integral of |f|^p over |x| > A (max-norm in two dimensions).
double tail_mass(const StepFunction& f, double A, double p);
// sup - inf of f over the open cube of radius delta around x, within f's box.
double oscillation(const StepFunction& f, const Point& x, double delta);

}  // namespace dyadlab
