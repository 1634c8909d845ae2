#include <cmath>

#include "doctest.h"
#include "dyadlab/parallel.hpp"
#include "dyadlab/probes.hpp"
#include "oracle.hpp"

using namespace dyadlab;

namespace {

DyadicInterval I1(int k, std::int64_t m) { return DyadicInterval::make1(k, m); }
using Fs = std::vector<StepFunction>;

StepFunction hat(const TruncatedLattice& lat) {
  StepFunction b = StepFunction::on_lattice(lat, -lat.depth() - 1);
  const double w = b.cell_width();
  for (std::int64_t c = 0; c < b.nx(); ++c) {
    const double x = (static_cast<double>(b.box().lo[0] + c) + 0.5) * w;
    b.at(c) = std::max(0.0, 1.0 - std::fabs(x));
  }
  return b;
}

DecayOptions small_options(std::size_t batch) {
  DecayOptions o;
  o.batch.batch = batch;
  o.batch.seed = 7;
  return o;
}

Point p1(double x) { return {Rational::from_double(x), Rational{0}}; }

}  // namespace

TEST_CASE("log-log fit") {
  const auto fit = fit_log2({1, 2, 3, 4, 5}, {8, 2, 0.5, 0.125, 0.03125}, -2, -2.1, -1.9);
  CHECK(fit.slope == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(fit.intercept == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(fit.residual < 1e-12);
  CHECK(fit.points_used == 5);
  CHECK(fit.passed());
  CHECK_FALSE(fit_log2({1, 2, 3, 4, 5}, {8, 2, 0.5, 0.125, 0.03125}, -1, -1.1, -0.9).passed());

  const auto zero = fit_log2({1, 2, 3, 4}, {0, 1e-15, 0, 0}, -2, -2.3, -1.7);
  CHECK(zero.identically_zero);
  CHECK(zero.passed());

  const auto few = fit_log2({1, 2, 3, 4}, {1, 0.5, 0.25, 0}, -1, -2, 0);
  CHECK(few.degenerate);
  CHECK(few.points_used == 3);
  CHECK_FALSE(few.passed());
  CHECK_THROWS_AS(fit_log2({1, 2}, {1}, 0, 0, 0), PreconditionError);
}

TEST_CASE("unit-ball batches are normalized") {
  const auto lat = TruncatedLattice::symmetric(1, 3, 4);
  const AlphaVector alpha({0, 1});
  const Exponents exps({3.0, 1.5});
  BatchOptions opt{16, 3};
  const auto batch = unit_ball_batch(alpha, exps, lat, opt);
  CHECK(batch.size() == 2 * 8 + 16);
  for (const auto& t : batch)
    for (std::size_t j = 0; j < 2; ++j) CHECK(lp_norm(t[j], exps.p[j]) == doctest::Approx(1.0).epsilon(1e-12));
  const auto loc = unit_ball_batch(alpha, exps, lat, opt, 1);
  CHECK(equal_functions(loc[0][0], loc[3][0]));
  CHECK(lp_norm(loc[0][0], 3.0) == doctest::Approx(1.0));

  const auto lat2 = TruncatedLattice::symmetric(2, 2, 3);
  for (const auto& f : unit_ball_batch(1.5, lat2, opt, true))
    CHECK(lp_norm(f, 1.5) == doctest::Approx(1.0).epsilon(1e-12));
  // same seed, same batch
  const auto again = unit_ball_batch(alpha, exps, lat, opt);
  for (std::size_t e = 0; e < batch.size(); ++e) CHECK(equal_functions(batch[e][1], again[e][1]));
}

TEST_CASE("FKRT verdicts on explicit families") {
  const auto lat = TruncatedLattice::symmetric(1, 6, 8);
  const auto A = default_A_grid(lat), t = default_t_grid(lat);
  CHECK(A.size() == 6);
  CHECK(t.size() == 8);

  // translates running to infinity: no uniform tail decay
  Fs translates;
  for (int j = 0; j < 6; ++j) translates.push_back(StepFunction::indicator(I1(0, (1 << j)), 0));
  const auto r1 = fkrt_probe(translates, 2.0, A, t);
  CHECK(r1.sup_norm == doctest::Approx(1.0));
  CHECK(r1.fails_b);
  CHECK_FALSE(r1.fails_c);

  // normalized Haar functions at shrinking scales: no uniform modulus
  Fs haars;
  for (int k = 0; k >= -7; --k) {
    StepFunction h = StepFunction::haar(HaarFunction::standard(I1(k, 0)), k - 1);
    haars.push_back(std::pow(2.0, -k / 2.0) * h);
  }
  const auto r2 = fkrt_probe(haars, 2.0, A, t);
  CHECK(r2.fails_c);
  CHECK_FALSE(r2.fails_b);

  const Fs single{StepFunction::indicator(I1(0, 0), 0)};
  const auto r3 = fkrt_probe(single, 2.0, A, t);
  CHECK_FALSE(r3.fails_b);
  CHECK_FALSE(r3.fails_c);
  // ||chi(. + t) - chi||_2 = sqrt(2t) for t <= 1
  for (const auto& pnt : r3.shift_profile) CHECK(pnt.value == doctest::Approx(std::sqrt(2 * pnt.at)));
  CHECK(r3.tail_profile[0].value == 0.0);

  CHECK_THROWS_AS(fkrt_probe(Fs{}, 2.0, A, t), PreconditionError);
}

TEST_CASE("noncompact multiplier probe") {
  const auto lat = TruncatedLattice::symmetric(1, 4, 6);
  const AlphaVector alpha({0, 0});
  const Exponents exps({2.0, 2.0});
  const auto rep = noncompact_T_probe(EpsilonSeq::constant(1.0), alpha, exps, lat);
  CHECK(rep.qualifying == static_cast<std::size_t>(lat.interval_count()));
  CHECK(rep.c_bound_computed == doctest::Approx(2.0));
  CHECK(rep.c_bound_paper == doctest::Approx(2.0));
  CHECK(rep.outer_sup == 1.0);
  CHECK(rep.fkrt.fails_c);
  CHECK(rep.c_bound > 0.25);

  // eps supported right of 2^2: outputs live far from the origin
  const auto right = noncompact_T_probe(EpsilonSeq::supported_right_of(4.0, 1.0), alpha, exps, lat);
  CHECK(right.fkrt.fails_b);
  CHECK(right.b_bound >= 0.25 * right.fkrt.sup_norm);
  for (const auto& I : right.family) CHECK(I.lo(0) >= 4.0);

  CHECK_THROWS_AS(noncompact_T_probe(EpsilonSeq::constant(0.0), alpha, exps, lat), PreconditionError);
  CHECK_THROWS_AS(noncompact_T_probe(EpsilonSeq::constant(1.0), AlphaVector({1, 1}), exps, lat),
                  PreconditionError);
}

TEST_CASE("noncompact shift probe") {
  const auto lat = TruncatedLattice::symmetric(1, 4, 6);
  const auto spec = canonical_shift(1, 1, lat);
  const auto rep = noncompact_shift_probe(spec, 2.0, lat);
  CHECK(rep.qualifying == spec.terms.size());
  CHECK(rep.fkrt.fails_c);
  CHECK(rep.fkrt.sup_norm > 0.0);
  CHECK_THROWS_AS(noncompact_shift_probe(ShiftSpec{1, 1, 1, {}}, 2.0, lat), PreconditionError);
}

TEST_CASE("paraproduct decay with a compact symbol") {
  const auto lat = TruncatedLattice::symmetric(1, 6, 8);
  const auto rep = pi_compactness_probe(hat(lat), AlphaVector({0, 0}), Exponents({2.0, 2.0}), lat,
                                        small_options(16));
  CHECK(rep.tail.target == -1.0);
  CHECK(rep.tail.passed());
  CHECK(std::fabs(rep.tail.slope + 1.0) < 0.3);
  CHECK(rep.modulus.passed());
  CHECK(rep.batch_size == 2 * 15 + 16);

  StepFunction wide = StepFunction::indicator(I1(1, 0), 1);
  CHECK_THROWS_AS(pi_compactness_probe(wide, AlphaVector({0, 0}), Exponents({2.0, 2.0}), lat), PreconditionError);
}

TEST_CASE("five-term commutator split is exact") {
  const auto lat = TruncatedLattice::symmetric(1, 3, 4);
  const AlphaVector alpha({0, 1});
  for (std::uint64_t s = 0; s < 12; ++s) {
    CounterRng rng(11, s);
    EpsilonSeq eps = EpsilonSeq::constant(0.0);
    lat.for_each([&](const DyadicInterval& I) { eps.assign(I, rng.uniform(-1, 1)); });
    const StepFunction b = oracle::random_step(rng, -2, -8, 16, 3);
    const Fs f{oracle::random_step(rng, -3, -20, 40, 2), oracle::random_step(rng, -1, -6, 12, 2)};
    for (int slot = 1; slot <= 2; ++slot) {
      const auto chk = commutator_split_check(b, eps, alpha, slot, f, lat, (1 + s % 5) * 0.03125);
      CHECK(chk.scale > 0.0);
      CHECK(chk.relative() < 1e-10);
    }
  }
}

TEST_CASE("three-term shift split is exact") {
  for (int d = 1; d <= 2; ++d) {
    const auto lat = TruncatedLattice::symmetric(d, 1, 3);
    const auto spec = canonical_shift(1, 2, lat);
    for (std::uint64_t s = 0; s < 6; ++s) {
      CounterRng rng(5, s);
      StepFunction b = StepFunction::on_lattice(lat, -2), f = StepFunction::on_lattice(lat, -3);
      for (auto& v : b.values()) v = rng.uniform(-1, 1);
      for (auto& v : f.values()) v = rng.uniform(-1, 1);
      const auto chk = shift_split_check(b, spec, f, lat, 3 * 0.0625);
      CHECK(chk.scale > 0.0);
      CHECK(chk.relative() < 1e-10);
    }
  }
}

TEST_CASE("commutator probe with a constant symbol") {
  const auto lat = TruncatedLattice::symmetric(1, 4, 5);
  StepFunction one = StepFunction::on_lattice(lat, 0);
  for (auto& v : one.values()) v = 2.0;
  const auto rep = commutator_compactness_probe(one, EpsilonSeq::constant(1.0), AlphaVector({0, 0}), 1,
                                                Exponents({2.0, 2.0}), lat, small_options(8));
  CHECK(rep.tail.identically_zero);
  CHECK(rep.modulus.identically_zero);
  CHECK(rep.tail.passed());
  CHECK(rep.split_error < 1e-12);
}

TEST_CASE("commutator probe with a hat symbol decays") {
  const auto lat = TruncatedLattice::symmetric(1, 6, 7);
  const auto rep = commutator_compactness_probe(hat(lat), EpsilonSeq::constant(1.0), AlphaVector({0, 0}), 1,
                                                Exponents({2.0, 2.0}), lat, small_options(16));
  CHECK(rep.tail.target == doctest::Approx(-0.5));
  CHECK(rep.tail.passed());
  CHECK(rep.modulus.passed());
  CHECK(rep.split_error < 1e-10);
}

TEST_CASE("shift commutator probe") {
  const auto lat = TruncatedLattice::symmetric(1, 8, 4);
  DecayOptions opt = small_options(16);
  opt.k_grid = {1, 2, 3, 4, 5, 6};
  const auto rep = shift_commutator_probe(hat(lat), canonical_shift(1, 1, lat), 2.0, lat, opt);
  CHECK(rep.tail.target == -1.0);
  CHECK(rep.tail.passed());
  CHECK(rep.split_error < 1e-10);
  CHECK(std::isfinite(rep.mds_ratio));
  CHECK(rep.mds_ratio > 0.0);
}

TEST_CASE("explicit symbol keeps a translation modulus") {
  const auto lat = TruncatedLattice::symmetric(1, 1, 9);
  const StepFunction b = remark31_symbol(lat);
  CHECK(b(p1(0.25)) == -1.0);
  CHECK(b(p1(0.625)) == 1.0);
  CHECK(b(p1(0.75 + 0.0625 + 0.03125)) == -1.0);
  CHECK(b(p1(0.5)) == 0.0);
  CHECK(b(p1(0.125)) == 0.0);
  const StepFunction f = remark31_input(3);
  CHECK(f(p1(0.76)) == -8.0);
  CHECK(f(p1(0.74)) == 0.0);
  CHECK(lp_norm(f, 1.0) == doctest::Approx(1.0));

  const auto rep = remark31_probe({1, 2, 3, 4, 5, 6, 7, 8}, AlphaVector({0}), Exponents({2.0}), lat);
  REQUIRE(rep.rows.size() == 8);
  CHECK(rep.raw_stays_above);
  for (const auto& r : rep.rows) {
    CHECK(r.raw_t >= std::ldexp(1.0, -r.k0));
    CHECK(r.raw_t < 3 * std::ldexp(2.0, -r.k0));
  }
  CHECK_THROWS_AS(remark31_probe({9}, AlphaVector({0}), Exponents({2.0}), lat), PreconditionError);
  CHECK_THROWS_AS(remark31_probe({2}, AlphaVector({0}), Exponents({2.0}), lat, {7.0}), PreconditionError);
}

TEST_CASE("fine-scale part of a shift obeys the Lipschitz bound") {
  const auto lat = TruncatedLattice::symmetric(1, 1, 7);
  StepFunction f = StepFunction::on_lattice(lat, -8);
  const double w = f.cell_width();
  for (std::int64_t c = 0; c < f.nx(); ++c) {
    const double x = (static_cast<double>(f.box().lo[0] + c) + 0.5) * w;
    f.at(c) = std::sin(3.0 * x);
  }
  const std::vector<Point> pts{{Rational{1, 3}, Rational{0}}, {Rational{-5, 7}, Rational{0}},
                               {Rational{11, 13}, Rational{0}}};
  for (auto [m, n] : {std::pair{1, 0}, std::pair{1, 1}, std::pair{2, 1}}) {
    const auto spec = canonical_shift(m, n, lat);
    const auto rep = continuity_probe(spec, f, 3.0, lat, {1, 2, 3, 4}, pts, {0.5, 0.25, 0.125, 0.0625});
    CHECK(rep.rows.size() == 12);
    CHECK(rep.min_margin >= 0.0);
    CHECK(rep.oscillation_nonincreasing);
  }
  const std::vector<Point> dyadic{{Rational{1, 4}, Rational{0}}};
  CHECK_THROWS_AS(continuity_probe(canonical_shift(1, 0, lat), f, 3.0, lat, {1}, dyadic, {0.5}), PreconditionError);
}

TEST_CASE("operator norm lower bounds") {
  const auto lat = TruncatedLattice::symmetric(1, 2, 3);
  CHECK(opnorm_lower_bound(make_identity(), Exponents({2.0}), lat, 64) >= 1.0 - 1e-9);
  CHECK(opnorm_lower_bound(make_T(EpsilonSeq::constant(0.0), AlphaVector({0, 0})), Exponents({2.0, 2.0}), lat,
                           64) == 0.0);
  ShiftSpec spec{1, 1, 0, {}};
  spec.terms.push_back({I1(0, 0), HaarFunction::standard(I1(-1, 0)), HaarFunction::standard(I1(0, 0)), 1.0});
  const double s = opnorm_lower_bound(make_shift(spec), Exponents({2.0}), lat, 128, 3);
  CHECK(s >= 0.5 - 1e-12);
  CHECK(s <= 1.0 + 1e-12);
  CHECK(s == opnorm_lower_bound(make_shift(spec), Exponents({2.0}), lat, 128, 3));
  CHECK_THROWS_AS(opnorm_lower_bound(make_identity(), Exponents({2.0, 2.0}), lat), PreconditionError);
}

TEST_CASE("weighted commutator ratios") {
  const auto lat = TruncatedLattice::symmetric(1, 2, 4);
  StepFunction one = StepFunction::on_lattice(lat, 0);
  for (auto& v : one.values()) v = 1.0;
  const WeightVector w{{one, one}};
  const AlphaVector alpha({0, 0});
  const Exponents exps({2.0, 2.0});
  BatchOptions opt{8, 1};

  // constant symbols: zero commutator, every ratio is zero
  const auto zero = weighted_ratio_probe({one, one}, EpsilonSeq::constant(1.0), alpha, w, exps, lat, opt);
  CHECK(zero.max_ratio == 0.0);
  CHECK(zero.skipped == 0);

  const StepFunction b = hat(lat);
  const auto rep = weighted_ratio_probe({b, b}, EpsilonSeq::constant(1.0), alpha, w, exps, lat, opt);
  CHECK(rep.ratios.size() + rep.skipped == 2 * 7 + 8);
  CHECK(rep.max_ratio > 0.0);
  CHECK(rep.median_ratio <= rep.max_ratio);
  CHECK(rep.weak_max_ratio > 0.0);
  CHECK(rep.weak_max_ratio_iterated > 0.0);
}

TEST_CASE("probes do not depend on the thread count") {
  const auto lat = TruncatedLattice::symmetric(1, 5, 6);
  const DecayOptions opt = small_options(12);
  set_threads(1);
  const auto a = pi_compactness_probe(hat(lat), AlphaVector({0, 1}), Exponents({2.0, 3.0}), lat, opt);
  set_threads(4);
  const auto b = pi_compactness_probe(hat(lat), AlphaVector({0, 1}), Exponents({2.0, 3.0}), lat, opt);
  set_threads(0);
  CHECK(a.tail.value == b.tail.value);
  CHECK(a.modulus.value == b.modulus.value);
}
