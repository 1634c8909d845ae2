#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "dyadlab/dyadic.hpp"
#include "dyadlab/haar.hpp"
#include "dyadlab/step_function.hpp"

namespace dyadlab {

// alpha in {0,1}^m; sigma = number of zero components.
struct AlphaVector {
  std::vector<int> bits;

  AlphaVector() = default;
  explicit AlphaVector(std::vector<int> b);
  static AlphaVector zeros(int m) { return AlphaVector(std::vector<int>(static_cast<std::size_t>(m), 0)); }
  int size() const { return static_cast<int>(bits.size()); }
  int sigma() const;
  bool all_ones() const;
  std::string to_string() const;
};

// All alpha of length m except (1,...,1), in binary counting order.
std::vector<AlphaVector> non_trivial_alphas(int m);

// p_1..p_m with 1/p = sum 1/p_j.
struct Exponents {
  std::vector<double> p;

  Exponents() = default;
  explicit Exponents(std::vector<double> pj);
  int size() const { return static_cast<int>(p.size()); }
  double total() const;              // p
  double conjugate(int j) const;     // p_j', +inf for p_j = 1
};

// Bounded sequence eps_I: explicit assignments, then an optional rule, then
// a default value.
class EpsilonSeq {
 public:
  using Rule = std::function<double(const DyadicInterval&)>;

  static EpsilonSeq constant(double v);
  EpsilonSeq& assign(const DyadicInterval& I, double v);
  // rule_bound must bound |rule(I)|; name and parameter are kept for reports.
  EpsilonSeq& with_rule(Rule rule, double rule_bound, std::string name, std::vector<double> parameters = {});
  // eps_I = v on intervals contained in [x0, +inf), default elsewhere.
  static EpsilonSeq supported_right_of(double x0, double v, double default_value = 0.0);

  double operator()(const DyadicInterval& I) const;
  double default_value() const { return default_; }
  double sup_bound() const;
  bool is_constant() const { return values_.empty() && !rule_; }
  const std::unordered_map<DyadicInterval, double, DyadicIntervalHash>& assignments() const { return values_; }
  const std::string& rule_name() const { return rule_name_; }
  const std::vector<double>& rule_parameters() const { return rule_params_; }

 private:
  double default_ = 1.0;
  std::unordered_map<DyadicInterval, double, DyadicIntervalHash> values_;
  Rule rule_;
  double rule_bound_ = 0.0;
  std::string rule_name_;
  std::vector<double> rule_params_;
};

// One term lambda <f, h_{I'}> h_{I''} / |I| of an elementary dyadic shift.
struct ShiftTerm {
  DyadicInterval I;
  HaarFunction source;  // h_{I'}, l(I') = 2^-m l(I)
  HaarFunction target;  // h_{I''}, l(I'') = 2^-n l(I)
  double lambda = 1.0;
};

struct ShiftSpec {
  int dim = 1;
  int m = 0;
  int n = 0;
  std::vector<ShiftTerm> terms;

  int complexity() const { return std::max(m, n); }
  // Geometry and |lambda| ||h'|| ||h''|| <= 1 for every term.
  void validate() const;
};

// Canonical (m,n) spec on every lattice interval deep enough for both
// subcubes: I' = lowest-index descendant at depth m, I'' = highest-index
// descendant at depth n, lambda = 1. In two dimensions both Haar functions
// are -1 on the left column of children and +1 on the right column.
ShiftSpec canonical_shift(int m, int n, const TruncatedLattice& lat);
// Full (I', I'') tensor with coefficients lambda(I, I', I''); zero
// coefficients are dropped.
ShiftSpec full_shift(int m, int n, const TruncatedLattice& lat,
                     const std::function<double(const DyadicInterval&, const DyadicInterval&,
                                                const DyadicInterval&)>& lambda);

StepFunction apply_shift(const ShiftSpec& spec, const StepFunction& f, const TruncatedLattice& lat);

// T_eps^alpha. With use_tops (m = 1, alpha = (0) only) the top-cell averages
// are added, making eps = 1 the identity on the window.
StepFunction apply_T(const EpsilonSeq& eps, const AlphaVector& alpha, std::span<const StepFunction> f,
                     const TruncatedLattice& lat, bool use_tops = false);
StepFunction apply_P(const AlphaVector& alpha, std::span<const StepFunction> f, const TruncatedLattice& lat);
StepFunction apply_pi(const StepFunction& b, const AlphaVector& alpha, std::span<const StepFunction> f,
                      const TruncatedLattice& lat);

struct Reconstruction {
  StepFunction sum;      // sum over alpha != (1,...,1) of P^alpha(f)
  StepFunction product;  // f_1 ... f_m on the window
  double residual = 0.0; // ||sum - product||_p
};
Reconstruction reconstruct_product(std::span<const StepFunction> f, const TruncatedLattice& lat, double p = 1.0);

// |I|^{-1/p_j} h_I^{1 + alpha_j}, each of unit L^{p_j} norm.
std::vector<StepFunction> noncompact_family(const DyadicInterval& I, const AlphaVector& alpha,
                                            const Exponents& exps);

// Operators as first-class values so commutators and probes can wrap any of them.
class Operator {
 public:
  virtual ~Operator() = default;
  virtual int arity() const = 0;
  virtual int dim() const { return 1; }
  virtual std::string kind() const = 0;  // shift | T | P | pi | commutator | iterated
  virtual StepFunction apply(std::span<const StepFunction> f, const TruncatedLattice& lat) const = 0;
  StepFunction operator()(std::span<const StepFunction> f, const TruncatedLattice& lat) const {
    return apply(f, lat);
  }
};
using OperatorHandle = std::shared_ptr<const Operator>;

class ShiftOperator final : public Operator {
 public:
  explicit ShiftOperator(ShiftSpec spec);
  int arity() const override { return 1; }
  int dim() const override { return spec_.dim; }
  std::string kind() const override { return "shift"; }
  StepFunction apply(std::span<const StepFunction> f, const TruncatedLattice& lat) const override;
  const ShiftSpec& spec() const { return spec_; }

 private:
  ShiftSpec spec_;
};

// Canonical-spec shift whose terms are generated for the lattice at hand.
class CanonicalShiftOperator final : public Operator {
 public:
  CanonicalShiftOperator(int dim, int m, int n) : dim_(dim), m_(m), n_(n) {}
  int arity() const override { return 1; }
  int dim() const override { return dim_; }
  std::string kind() const override { return "shift"; }
  StepFunction apply(std::span<const StepFunction> f, const TruncatedLattice& lat) const override;
  int m() const { return m_; }
  int n() const { return n_; }

 private:
  int dim_, m_, n_;
};

class MultiplierOperator final : public Operator {
 public:
  MultiplierOperator(EpsilonSeq eps, AlphaVector alpha, bool use_tops, bool is_P);
  int arity() const override { return alpha_.size(); }
  std::string kind() const override { return is_P_ ? "P" : "T"; }
  StepFunction apply(std::span<const StepFunction> f, const TruncatedLattice& lat) const override;
  const EpsilonSeq& eps() const { return eps_; }
  const AlphaVector& alpha() const { return alpha_; }
  bool use_tops() const { return use_tops_; }

 private:
  EpsilonSeq eps_;
  AlphaVector alpha_;
  bool use_tops_;
  bool is_P_;
};

class ParaproductOperator final : public Operator {
 public:
  ParaproductOperator(StepFunction b, AlphaVector alpha);
  int arity() const override { return alpha_.size(); }
  std::string kind() const override { return "pi"; }
  StepFunction apply(std::span<const StepFunction> f, const TruncatedLattice& lat) const override;
  const StepFunction& symbol() const { return b_; }
  const AlphaVector& alpha() const { return alpha_; }

 private:
  StepFunction b_;
  AlphaVector alpha_;
};

// [b, op]_i (slot i is 1-based): b op(f) - op(f_1, ..., b f_i, ..., f_m).
class CommutatorOperator final : public Operator {
 public:
  CommutatorOperator(StepFunction b, OperatorHandle inner, int slot, std::string kind = "commutator");
  int arity() const override { return inner_->arity(); }
  int dim() const override { return inner_->dim(); }
  std::string kind() const override { return kind_; }
  StepFunction apply(std::span<const StepFunction> f, const TruncatedLattice& lat) const override;
  const StepFunction& symbol() const { return b_; }
  const OperatorHandle& inner() const { return inner_; }
  int slot() const { return slot_; }

 private:
  StepFunction b_;
  OperatorHandle inner_;
  int slot_;
  std::string kind_;
};

OperatorHandle make_shift(ShiftSpec spec);
OperatorHandle make_canonical_shift(int dim, int m, int n);
OperatorHandle make_T(EpsilonSeq eps, AlphaVector alpha, bool use_tops = false);
OperatorHandle make_P(AlphaVector alpha);
OperatorHandle make_pi(StepFunction b, AlphaVector alpha);
OperatorHandle make_identity();  // T with eps = 1, alpha = (0), tops
OperatorHandle make_commutator(StepFunction b, OperatorHandle op, int slot);
// [b_1, [b_2, ... [b_m, T]_m ... ]_2]_1
OperatorHandle make_iterated(std::vector<StepFunction> b, EpsilonSeq eps, AlphaVector alpha);

StepFunction commutator(const StepFunction& b, const OperatorHandle& op, int slot,
                        std::span<const StepFunction> f, const TruncatedLattice& lat);
StepFunction iterated_commutator(const std::vector<StepFunction>& b, const EpsilonSeq& eps,
                                 const AlphaVector& alpha, std::span<const StepFunction> f,
                                 const TruncatedLattice& lat);

}  // namespace dyadlab
