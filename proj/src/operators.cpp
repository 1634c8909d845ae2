#include "dyadlab/operators.hpp"

#include <algorithm>
#include <cmath>

#include "dyadlab/simd/kernels.hpp"

namespace dyadlab {

AlphaVector::AlphaVector(std::vector<int> b) : bits(std::move(b)) {
  require(!bits.empty(), "alpha must have at least one component");
  for (int v : bits) require(v == 0 || v == 1, "alpha components must be 0 or 1");
}

int AlphaVector::sigma() const {
  return static_cast<int>(std::count(bits.begin(), bits.end(), 0));
}

bool AlphaVector::all_ones() const { return sigma() == 0; }

std::string AlphaVector::to_string() const {
  std::string s = "(";
  for (std::size_t i = 0; i < bits.size(); ++i) s += (i ? "," : "") + std::to_string(bits[i]);
  return s + ")";
}

std::vector<AlphaVector> non_trivial_alphas(int m) {
  require(m >= 1 && m <= 16, "arity out of range");
  std::vector<AlphaVector> out;
  for (int mask = 0; mask < (1 << m) - 1; ++mask) {
    std::vector<int> b(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j) b[static_cast<std::size_t>(j)] = (mask >> j) & 1;
    out.emplace_back(std::move(b));
  }
  return out;
}

Exponents::Exponents(std::vector<double> pj) : p(std::move(pj)) {
  require(!p.empty(), "at least one exponent is needed");
  for (double v : p) require(v >= 1.0 && std::isfinite(v), "exponents must lie in [1, inf)");
}

double Exponents::total() const {
  double s = 0.0;
  for (double v : p) s += 1.0 / v;
  return 1.0 / s;
}

double Exponents::conjugate(int j) const {
  const double v = p.at(static_cast<std::size_t>(j));
  return v == 1.0 ? HUGE_VAL : v / (v - 1.0);
}

EpsilonSeq EpsilonSeq::constant(double v) {
  EpsilonSeq e;
  e.default_ = v;
  return e;
}

EpsilonSeq& EpsilonSeq::assign(const DyadicInterval& I, double v) {
  values_[I] = v;
  return *this;
}

EpsilonSeq& EpsilonSeq::with_rule(Rule rule, double rule_bound, std::string name, std::vector<double> parameters) {
  rule_ = std::move(rule);
  rule_bound_ = rule_bound;
  rule_name_ = std::move(name);
  rule_params_ = std::move(parameters);
  return *this;
}

EpsilonSeq EpsilonSeq::supported_right_of(double x0, double v, double default_value) {
  EpsilonSeq e = constant(default_value);
  e.with_rule(
      [x0, v, default_value](const DyadicInterval& I) { return I.lo(0) >= x0 ? v : default_value; },
      std::fabs(v), "supported_right_of", {x0, v});
  return e;
}

double EpsilonSeq::operator()(const DyadicInterval& I) const {
  if (!values_.empty()) {
    if (auto it = values_.find(I); it != values_.end()) return it->second;
  }
  if (rule_) return rule_(I);
  return default_;
}

double EpsilonSeq::sup_bound() const {
  double s = std::fabs(default_);
  for (const auto& [I, v] : values_) s = std::max(s, std::fabs(v));
  if (rule_) s = std::max(s, rule_bound_);
  return s;
}

void ShiftSpec::validate() const {
  require(dim == 1 || dim == 2, "shift dimension must be 1 or 2");
  require(m >= 0 && n >= 0, "shift parameters must be nonnegative");
  for (const auto& t : terms) {
    require(t.I.dim == dim && t.source.interval.dim == dim && t.target.interval.dim == dim,
            "shift term dimension mismatch");
    require(t.source.interval.scale == t.I.scale - m && t.I.contains(t.source.interval),
            "I' must be a subcube of I with l(I') = 2^-m l(I)");
    require(t.target.interval.scale == t.I.scale - n && t.I.contains(t.target.interval),
            "I'' must be a subcube of I with l(I'') = 2^-n l(I)");
    require(t.source.cancellation() == 0.0 && t.target.cancellation() == 0.0,
            "shift Haar functions must cancel");
    require(std::fabs(t.lambda) * t.source.sup_norm() * t.target.sup_norm() <= 1.0 + 1e-12,
            "shift term violates |lambda| ||h'|| ||h''|| <= 1");
  }
}

namespace {

HaarFunction canonical_haar(const DyadicInterval& I) {
  if (I.dim == 1) return HaarFunction::standard(I);
  return HaarFunction::with_coeffs(I, {-1.0, 1.0, -1.0, 1.0});
}

}  // namespace

ShiftSpec canonical_shift(int m, int n, const TruncatedLattice& lat) {
  ShiftSpec spec{lat.dim(), m, n, {}};
  require(m >= 0 && n >= 0, "shift parameters must be nonnegative");
  const int r = std::max(m, n);
  for (int k = lat.coarse_scale(); k - r >= lat.finest_scale(); --k) {
    const std::int64_t first = lat.first_index(k), cnt = lat.cells_per_axis(k);
    for (std::int64_t iy = 0; iy < (lat.dim() == 2 ? cnt : 1); ++iy)
      for (std::int64_t ix = 0; ix < cnt; ++ix) {
        const DyadicInterval I = lat.dim() == 1 ? DyadicInterval::make1(k, first + ix)
                                                : DyadicInterval::make2(k, first + ix, first + iy);
        spec.terms.push_back({I, canonical_haar(first_descendant(I, m)),
                              canonical_haar(last_descendant(I, n)), 1.0});
      }
  }
  return spec;
}

ShiftSpec full_shift(int m, int n, const TruncatedLattice& lat,
                     const std::function<double(const DyadicInterval&, const DyadicInterval&,
                                                const DyadicInterval&)>& lambda) {
  ShiftSpec spec{lat.dim(), m, n, {}};
  const int r = std::max(m, n);
  auto descendants = [](const DyadicInterval& I, int j) {
    std::vector<DyadicInterval> v{I};
    for (int s = 0; s < j; ++s) {
      std::vector<DyadicInterval> next;
      for (const auto& J : v)
        for (const auto& c : children(J)) next.push_back(c);
      v = std::move(next);
    }
    std::sort(v.begin(), v.end());
    return v;
  };
  lat.for_each([&](const DyadicInterval& I) {
    if (I.scale - r < lat.finest_scale()) return;
    for (const auto& a : descendants(I, m))
      for (const auto& b : descendants(I, n)) {
        const double l = lambda(I, a, b);
        if (l != 0.0) spec.terms.push_back({I, canonical_haar(a), canonical_haar(b), l});
      }
  });
  spec.validate();
  return spec;
}

StepFunction apply_shift(const ShiftSpec& spec, const StepFunction& f, const TruncatedLattice& lat) {
  require(spec.dim == lat.dim() && f.dim() == lat.dim(), "shift dimension mismatch");
  for (const auto& t : spec.terms) {
    require(lat.in_window(t.I), "shift term interval outside the lattice window");
    require(t.source.interval.scale >= lat.finest_scale() && t.target.interval.scale >= lat.finest_scale(),
            "lattice too shallow for the shift: need scale(I) - max(m,n) >= -L");
  }
  const SumPyramid pyr(f, lat);
  ChiAccumulator acc(lat);
  for (const auto& t : spec.terms) {
    const double c = pyr.haar_coefficient(t.source);
    if (c != 0.0) acc.add_haar(t.target, t.lambda * c / t.I.measure());
  }
  return acc.resolve();
}

namespace {

void check_inputs(std::span<const StepFunction> f, int m, const TruncatedLattice& lat) {
  require(lat.dim() == 1, "multilinear operators are one-dimensional");
  require(static_cast<int>(f.size()) == m, "number of inputs does not match alpha");
  for (const auto& g : f) require(g.dim() == 1, "multilinear operators are one-dimensional");
}

// Shared engine for T, P and pi: per interval coefficient
//   symbol(I) * prod_j <f_j, h_I^{1+alpha_j}> / |I|
// placed on h_I (odd output power) or chi_I (even output power).
StepFunction multilinear_sum(const AlphaVector& alpha, std::span<const StepFunction> f,
                             const TruncatedLattice& lat, const SumPyramid* symbol,
                             const EpsilonSeq* eps, bool output_is_haar) {
  check_inputs(f, alpha.size(), lat);
  std::vector<SumPyramid> pyr;
  pyr.reserve(f.size());
  for (const auto& g : f) pyr.emplace_back(g, lat);
  ChiAccumulator acc(lat);
  const bool eps_constant = eps && eps->is_constant();
  for (int k = lat.coarse_scale(); k >= lat.finest_scale(); --k) {
    const auto n = static_cast<std::size_t>(lat.cells_per_axis(k));
    const double inv = 1.0 / std::ldexp(1.0, k);
    std::vector<double> c(n, eps_constant ? eps->default_value() : 1.0);
    if (symbol) {
      auto d = symbol->details(k);
      for (std::size_t i = 0; i < n; ++i) c[i] *= d[i] * inv;
    }
    if (eps && !eps_constant) {
      const std::int64_t first = lat.first_index(k);
      for (std::size_t i = 0; i < n; ++i) c[i] *= (*eps)(DyadicInterval::make1(k, first + static_cast<std::int64_t>(i)));
    }
    for (std::size_t j = 0; j < pyr.size(); ++j) {
      auto v = alpha.bits[j] == 0 ? pyr[j].details(k) : pyr[j].integrals(k);
      for (std::size_t i = 0; i < n; ++i) c[i] *= v[i] * inv;
    }
    if (output_is_haar)
      acc.add_haar_level(k, c);
    else
      acc.add_chi_level(k, c);
  }
  return acc.resolve();
}

}  // namespace

StepFunction apply_T(const EpsilonSeq& eps, const AlphaVector& alpha, std::span<const StepFunction> f,
                     const TruncatedLattice& lat, bool use_tops) {
  require(!alpha.all_ones(), "T and P are undefined for alpha = (1,...,1)");
  StepFunction out = multilinear_sum(alpha, f, lat, nullptr, &eps, alpha.sigma() % 2 == 1);
  if (use_tops) {
    require(alpha.size() == 1 && alpha.bits[0] == 0, "top averages are only defined for m = 1, alpha = (0)");
    ChiAccumulator tops(lat);
    const SumPyramid pyr(f[0], lat);
    auto s = pyr.integrals(lat.coarse_scale());
    std::vector<double> avg(s.size());
    simd::scale(1.0 / std::ldexp(1.0, lat.coarse_scale()), s, avg);
    tops.add_chi_level(lat.coarse_scale(), avg);
    out = out + tops.resolve();
  }
  return out;
}

StepFunction apply_P(const AlphaVector& alpha, std::span<const StepFunction> f, const TruncatedLattice& lat) {
  return apply_T(EpsilonSeq::constant(1.0), alpha, f, lat, false);
}

StepFunction apply_pi(const StepFunction& b, const AlphaVector& alpha, std::span<const StepFunction> f,
                      const TruncatedLattice& lat) {
  const SumPyramid bp(b, lat);
  // h^{1+sigma}: odd power (Haar) when sigma is even
  return multilinear_sum(alpha, f, lat, &bp, nullptr, alpha.sigma() % 2 == 0);
}

Reconstruction reconstruct_product(std::span<const StepFunction> f, const TruncatedLattice& lat, double p) {
  require(f.size() >= 2, "reconstruction needs m >= 2");
  Reconstruction r;
  const int m = static_cast<int>(f.size());
  r.sum = StepFunction::on_lattice(lat, lat.finest_scale() - 1);
  for (const auto& a : non_trivial_alphas(m)) r.sum = r.sum + apply_P(a, f, lat);
  r.product = to_lattice_grid(f[0], lat, std::min(f[0].k_min(), lat.finest_scale() - 1));
  for (int j = 1; j < m; ++j) r.product = r.product * f[static_cast<std::size_t>(j)];
  r.residual = lp_norm(r.sum - r.product, p);
  return r;
}

std::vector<StepFunction> noncompact_family(const DyadicInterval& I, const AlphaVector& alpha,
                                            const Exponents& exps) {
  require(I.dim == 1, "the noncompactness family is one-dimensional");
  require(alpha.size() == exps.size(), "alpha and exponents differ in length");
  std::vector<StepFunction> out;
  const HaarFunction h = HaarFunction::standard(I);
  for (int j = 0; j < alpha.size(); ++j) {
    StepFunction g = StepFunction::haar_power(h, 1 + alpha.bits[static_cast<std::size_t>(j)], I.scale - 1);
    g *= std::pow(I.measure(), -1.0 / exps.p[static_cast<std::size_t>(j)]);
    out.push_back(std::move(g));
  }
  return out;
}

ShiftOperator::ShiftOperator(ShiftSpec spec) : spec_(std::move(spec)) { spec_.validate(); }

StepFunction ShiftOperator::apply(std::span<const StepFunction> f, const TruncatedLattice& lat) const {
  require(f.size() == 1, "a shift takes one input");
  return apply_shift(spec_, f[0], lat);
}

StepFunction CanonicalShiftOperator::apply(std::span<const StepFunction> f, const TruncatedLattice& lat) const {
  require(f.size() == 1, "a shift takes one input");
  require(lat.dim() == dim_, "shift dimension mismatch");
  return apply_shift(canonical_shift(m_, n_, lat), f[0], lat);
}

MultiplierOperator::MultiplierOperator(EpsilonSeq eps, AlphaVector alpha, bool use_tops, bool is_P)
    : eps_(std::move(eps)), alpha_(std::move(alpha)), use_tops_(use_tops), is_P_(is_P) {
  require(!alpha_.all_ones(), "T and P are undefined for alpha = (1,...,1)");
  if (use_tops_)
    require(alpha_.size() == 1 && alpha_.bits[0] == 0, "top averages are only defined for m = 1, alpha = (0)");
}

StepFunction MultiplierOperator::apply(std::span<const StepFunction> f, const TruncatedLattice& lat) const {
  return apply_T(eps_, alpha_, f, lat, use_tops_);
}

ParaproductOperator::ParaproductOperator(StepFunction b, AlphaVector alpha)
    : b_(std::move(b)), alpha_(std::move(alpha)) {}

StepFunction ParaproductOperator::apply(std::span<const StepFunction> f, const TruncatedLattice& lat) const {
  return apply_pi(b_, alpha_, f, lat);
}

CommutatorOperator::CommutatorOperator(StepFunction b, OperatorHandle inner, int slot, std::string kind)
    : b_(std::move(b)), inner_(std::move(inner)), slot_(slot), kind_(std::move(kind)) {
  require(inner_ != nullptr, "commutator needs an operator");
  require(slot_ >= 1 && slot_ <= inner_->arity(), "commutator slot out of range");
}

StepFunction CommutatorOperator::apply(std::span<const StepFunction> f, const TruncatedLattice& lat) const {
  require(static_cast<int>(f.size()) == inner_->arity(), "commutator arity mismatch");
  std::vector<StepFunction> g(f.begin(), f.end());
  const auto i = static_cast<std::size_t>(slot_ - 1);
  g[i] = b_ * g[i];
  const StepFunction first = b_ * inner_->apply(f, lat);
  StepFunction second = inner_->apply(g, lat);
  return first - second;
}

OperatorHandle make_shift(ShiftSpec spec) { return std::make_shared<ShiftOperator>(std::move(spec)); }
OperatorHandle make_canonical_shift(int dim, int m, int n) {
  return std::make_shared<CanonicalShiftOperator>(dim, m, n);
}
OperatorHandle make_T(EpsilonSeq eps, AlphaVector alpha, bool use_tops) {
  return std::make_shared<MultiplierOperator>(std::move(eps), std::move(alpha), use_tops, false);
}
OperatorHandle make_P(AlphaVector alpha) {
  return std::make_shared<MultiplierOperator>(EpsilonSeq::constant(1.0), std::move(alpha), false, true);
}
OperatorHandle make_pi(StepFunction b, AlphaVector alpha) {
  return std::make_shared<ParaproductOperator>(std::move(b), std::move(alpha));
}
OperatorHandle make_identity() { return make_T(EpsilonSeq::constant(1.0), AlphaVector({0}), true); }
OperatorHandle make_commutator(StepFunction b, OperatorHandle op, int slot) {
  return std::make_shared<CommutatorOperator>(std::move(b), std::move(op), slot);
}

OperatorHandle make_iterated(std::vector<StepFunction> b, EpsilonSeq eps, AlphaVector alpha) {
  require(static_cast<int>(b.size()) == alpha.size(), "iterated commutator needs one symbol per slot");
  OperatorHandle op = make_T(std::move(eps), alpha);
  for (int j = alpha.size(); j >= 1; --j)
    op = std::make_shared<CommutatorOperator>(b[static_cast<std::size_t>(j - 1)], op, j,
                                              j == 1 ? "iterated" : "commutator");
  return op;
}

StepFunction commutator(const StepFunction& b, const OperatorHandle& op, int slot,
                        std::span<const StepFunction> f, const TruncatedLattice& lat) {
  return CommutatorOperator(b, op, slot).apply(f, lat);
}

StepFunction iterated_commutator(const std::vector<StepFunction>& b, const EpsilonSeq& eps,
                                 const AlphaVector& alpha, std::span<const StepFunction> f,
                                 const TruncatedLattice& lat) {
  return make_iterated(b, eps, alpha)->apply(f, lat);
}

}  // namespace dyadlab
