#include <bit>
#include <cmath>

#include "doctest.h"
#include "dyadlab/haar.hpp"
#include "dyadlab/simd/kernels.hpp"
#include "oracle.hpp"

using namespace dyadlab;

namespace {

DyadicInterval I1(int k, std::int64_t m) { return DyadicInterval::make1(k, m); }
Point at(std::int64_t num, std::int64_t den) { return point1(Rational{num, den}); }
StepFunction chi(int k, std::int64_t m, int k_min) { return StepFunction::indicator(I1(k, m), k_min); }
StepFunction haar1(int k, std::int64_t m, int k_min) {
  return StepFunction::haar(HaarFunction::standard(I1(k, m)), k_min);
}

double plancherel_rhs(const HaarExpansion& e) {
  const auto& lat = e.lattice;
  double s = 0.0;
  for (const auto& Q : lat.top_cells()) s += e.top(Q) * e.top(Q) * Q.measure();
  lat.for_each([&](const DyadicInterval& I) { s += e.detail(I) * e.detail(I) / I.measure(); });
  return s;
}

}  // namespace

TEST_CASE("lp norms") {
  CHECK(lp_norm(2.0 * chi(-1, 0, -1), 2.0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  for (double p : {0.5, 1.0, 1.5, 2.0, 3.0}) CHECK(lp_norm(chi(0, 0, -3), p) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(lp_norm(haar1(0, 0, -1), 3.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(lp_norm(chi(0, 0, 0), 0.0), PreconditionError);
  CHECK(lp_norm(StepFunction::zero(1), 2.0) == 0.0);
}

TEST_CASE("inner products") {
  CHECK(inner(haar1(0, 0, -1), haar1(0, 0, -2)) == 1.0);
  CHECK(inner(haar1(0, 0, -1), chi(0, 0, 0)) == 0.0);
  CHECK(inner(chi(-1, 0, -1), chi(0, 0, 0)) == 0.5);
}

TEST_CASE("point evaluation and representation changes") {
  const StepFunction h = haar1(0, 0, -1);
  CHECK(h(at(1, 4)) == -1.0);
  CHECK(h(at(3, 4)) == 1.0);
  CHECK(h(at(-1, 4)) == 0.0);
  CHECK(h(at(1, 1)) == 0.0);
  const StepFunction r = h.refined(-4);
  CHECK(r.size() == 16);
  CHECK(equal_functions(h, r));
  CHECK(r.canonical().k_min() == -1);
  CHECK(r.canonical().box() == h.box());
  CHECK(chi(2, -1, -3).canonical().k_min() == 2);
  CHECK(StepFunction::zero(1).canonical().size() == 0);
  const StepFunction two = StepFunction::indicator(DyadicInterval::make2(0, 0, 0), -2);
  CHECK(two.canonical().k_min() == 0);
  CHECK(two(Point{Rational{1, 2}, Rational{1, 3}}) == 1.0);
  CHECK(two(Point{Rational{1, 2}, Rational{4, 3}}) == 0.0);
}

TEST_CASE("translation") {
  const StepFunction f = chi(0, 0, 0);
  const StepFunction g = translate(f, point1(Rational{1, 2}));
  CHECK(g.k_min() == -1);
  CHECK(equal_functions(g, StepFunction(1, -1, CellBox{{-1, 0}, {2, 1}}, {1.0, 1.0})));
  CHECK(lp_norm(g - f, 1.0) == 1.0);
  // cellwise symmetric-difference oracle
  const double sym = oracle::integrate1([&](const Point& x) { return std::fabs(g(x) - f(x)); }, -2, 2, -3);
  CHECK(sym == 1.0);
  CHECK_THROWS_AS(translate(f, point1(Rational{1, 3})), PreconditionError);
  CHECK_THROWS_AS(translate(f, point1(Rational::dyadic(1, -9))), PreconditionError);
  CHECK_NOTHROW(translate(f, point1(Rational::dyadic(1, -8))));

  CounterRng rng(11, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const StepFunction r = oracle::random_step(rng, -3, rng.integer(-20, 20), rng.integer(1, 40));
    const Rational t = Rational::dyadic(rng.integer(-64, 64), -5);
    const StepFunction s = translate(r, point1(t));
    for (double p : {1.0, 1.5, 2.0, 3.0}) CHECK(oracle::close(lp_norm(s, p), lp_norm(r, p)));
    // pointwise definition g(x) = f(x + t)
    for (std::int64_t c = -200; c < 200; c += 7) {
      const Rational x = Rational::dyadic(2 * c + 1, -7);
      CHECK(s(point1(x)) == r(point1(x + t)));
    }
  }
}

TEST_CASE("tail mass") {
  CHECK(tail_mass(chi(1, 0, 0), 1.0, 1.0) == 1.0);
  CHECK(tail_mass(chi(1, 0, 0), 2.0, 1.0) == 0.0);
  CHECK(tail_mass(haar1(0, 0, -1), 0.0, 2.0) == 1.0);
  CHECK(tail_mass(chi(1, -1, 0), 0.5, 1.0) == 1.5);
  CHECK(tail_mass(3.0 * chi(0, 0, 0), 0.25, 2.0) == doctest::Approx(6.75).epsilon(1e-15));
  // two dimensions: max-norm tail of the unit square outside [-1/2,1/2]^2
  const StepFunction sq = StepFunction::indicator(DyadicInterval::make2(0, 0, 0), -2);
  CHECK(tail_mass(sq, 0.5, 1.0) == 0.75);
  CHECK(tail_mass(sq, 0.0, 1.0) == 1.0);
  CHECK(tail_mass(sq, 1.0, 1.0) == 0.0);

  CounterRng rng(12, 0);
  const StepFunction r = oracle::random_step(rng, -2, -30, 60);
  double prev = HUGE_VAL;
  for (double A = 0.0; A <= 9.0; A += 0.3) {
    const double t = tail_mass(r, A, 1.5);
    CHECK(t <= prev);
    const double ref = oracle::integrate1(
        [&](const Point& x) { return std::fabs(x[0].to_double()) > A ? std::pow(std::fabs(r(x)), 1.5) : 0.0; },
        -10, 10, -8);
    CHECK(std::fabs(t - ref) <= 0.05 * std::pow(8.0, 1.5));  // sampling oracle resolves A to 2^-8
    prev = t;
  }
}

TEST_CASE("oscillation") {
  CHECK(oscillation(chi(2, -1, 0), at(1, 3), 0.5) == 0.0);
  CHECK(oscillation(haar1(0, 0, -1), at(1, 2), 0.25) == 2.0);
  CHECK(oscillation(chi(0, 0, -1), at(1, 4), 0.125) == 0.0);
  CHECK(oscillation(chi(0, 0, -1), at(1, 1), 0.125) == 0.0);  // window is the box of f
  CHECK(oscillation(chi(0, 0, -1).extended(CellBox{{-4, 0}, {8, 1}}), at(1, 1), 0.125) == 1.0);
  // grid oracle
  CounterRng rng(13, 0);
  const StepFunction r = oracle::random_step(rng, -3, -16, 32);
  for (int i = 0; i < 30; ++i) {
    const Rational x{rng.integer(-5, 5) * 3 + 1, 3};
    const double delta = std::ldexp(1.0, static_cast<int>(rng.integer(-5, 0)));
    double mx = -HUGE_VAL, mn = HUGE_VAL;
    const double xd = x.to_double();
    for (std::int64_t c = -16 * 64; c < 16 * 64; ++c) {
      const double y = (static_cast<double>(c) + 0.5) / 512.0;
      if (y <= xd - delta || y >= xd + delta) continue;
      const double v = r(point1(Rational::dyadic(2 * c + 1, -10)));
      mx = std::max(mx, v);
      mn = std::min(mn, v);
    }
    CHECK(oscillation(r, point1(x), delta) == (mx < mn ? 0.0 : mx - mn));
  }
}

TEST_CASE("analyze examples") {
  const auto unit = TruncatedLattice::boxed(1, 0, 3, 0, 0);
  const HaarExpansion e = analyze(chi(-1, 0, -1), unit);
  CHECK(e.top(I1(0, 0)) == 0.5);
  CHECK(e.detail(I1(0, 0)) == -0.5);
  CHECK(e.nonzero_details() == 1);

  const auto wide = TruncatedLattice::symmetric(1, 1, 3);
  const HaarExpansion h = analyze(haar1(0, 0, -1), wide);
  CHECK(h.detail(I1(0, 0)) == 1.0);
  CHECK(h.nonzero_details() == 1);
  for (double t : h.tops) CHECK(t == 0.0);

  const HaarExpansion z = analyze(StepFunction::zero(1), wide);
  CHECK(z.nonzero_details() == 0);

  CHECK(analyze(chi(0, 0, -6), wide).detail(I1(1, 0)) == -1.0);  // fine storage, coarse function
  CHECK_THROWS_AS(analyze(haar1(-5, 0, -6), wide), PreconditionError);  // too fine
  CHECK_THROWS_AS(analyze(chi(2, 0, 0), wide), PreconditionError);        // outside window

  // direct integral oracle on a random function
  CounterRng rng(14, 0);
  const auto lat = TruncatedLattice::symmetric(1, 2, 3);
  const StepFunction r = oracle::random_step(rng, -4, -64, 128);
  const HaarExpansion er = analyze(r, lat);
  lat.for_each([&](const DyadicInterval& I) {
    CHECK(er.detail(I) == oracle::haar_coefficient(r, HaarFunction::standard(I)));
  });
  for (const auto& Q : lat.top_cells()) CHECK(er.top(Q) == oracle::interval_integral(r, Q) / Q.measure());
}

TEST_CASE("synthesize examples") {
  const auto unit = TruncatedLattice::boxed(1, 0, 3, 0, 0);
  HaarExpansion e = HaarExpansion::empty(unit);
  e.set_top(I1(0, 0), 0.5);
  e.set_detail(I1(0, 0), -0.5);
  CHECK(equal_functions(synthesize(e), chi(-1, 0, -1)));

  HaarExpansion d = HaarExpansion::empty(unit);
  d.set_detail(I1(0, 0), 1.0);
  CHECK(equal_functions(synthesize(d), haar1(0, 0, -1)));
  CHECK(synthesize(HaarExpansion::empty(unit)).is_zero());
}

TEST_CASE("round trip and Plancherel on random functions") {
  CounterRng rng(15, 0);
  const auto lat = TruncatedLattice::symmetric(1, 3, 5);
  for (int trial = 0; trial < 50; ++trial) {
    const int k = -static_cast<int>(rng.integer(0, 6));
    const std::int64_t span = std::int64_t{16} << -k;
    const std::int64_t n = rng.integer(1, span);
    const std::int64_t lo = rng.integer(-(span / 2), span / 2 - n);
    const StepFunction f = oracle::random_step(rng, k, lo, n);
    const HaarExpansion e = analyze(f, lat);
    CHECK(equal_functions(synthesize(e), f));
    CHECK(oracle::close(plancherel_rhs(e), std::pow(lp_norm(f, 2.0), 2.0)));
  }
}

TEST_CASE("Hoelder inequality on random instances") {
  CounterRng rng(16, 0);
  for (int trial = 0; trial < 40; ++trial) {
    const StepFunction f = oracle::random_step(rng, -2, rng.integer(-10, 10), rng.integer(1, 30));
    const StepFunction g = oracle::random_step(rng, -3, rng.integer(-10, 10), rng.integer(1, 30));
    for (double p : {1.25, 1.5, 2.0, 3.0, 6.0}) {
      const double q = p / (p - 1.0);
      CHECK(std::fabs(inner(f, g)) <= lp_norm(f, p) * lp_norm(g, q) * (1 + 1e-12));
    }
  }
}

TEST_CASE("step-function algebra is backend independent") {
  CounterRng rng(17, 0);
  const auto lat = TruncatedLattice::symmetric(1, 3, 6);
  const StepFunction f = oracle::random_step(rng, -7, -1000, 2000, 1000);
  StepFunction g = oracle::random_step(rng, -5, -200, 300, 1000);
  g *= 0.1;
  auto run = [&] {
    const HaarExpansion e = analyze(f, lat);
    return std::vector<double>{lp_norm(f * g, 1.5), inner(f, g), tail_mass(f - g, 3.3, 2.5),
                               plancherel_rhs(e), synthesize(e).values()[777]};
  };
  simd::force_backend(simd::Backend::scalar);
  const auto a = run();
  simd::force_backend(simd::Backend::avx2);
  const auto b = run();
  simd::reset_backend();
  for (std::size_t i = 0; i < a.size(); ++i)
    CHECK(std::bit_cast<std::uint64_t>(a[i]) == std::bit_cast<std::uint64_t>(b[i]));
}
