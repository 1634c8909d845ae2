#include <algorithm>
#include <set>

#include "doctest.h"
#include "oracle.hpp"

using namespace dyadlab;

namespace {

DyadicInterval I1(int k, std::int64_t m) { return DyadicInterval::make1(k, m); }
Point at(std::int64_t num, std::int64_t den) { return point1(Rational{num, den}); }

}  // namespace

TEST_CASE("rationals compare and add exactly") {
  CHECK(Rational::dyadic(3, -2) == Rational{3, 4});
  CHECK(Rational{1, 3} + Rational{1, 6} == Rational{1, 2});
  CHECK(Rational{-1, 3} < Rational{0, 1});
  CHECK(Rational::from_double(0.375) == Rational{3, 8});
  CHECK(Rational::from_double(-6.0) == Rational{-6, 1});
  CHECK(Rational{1, 8}.is_dyadic());
  CHECK_FALSE(Rational{1, 3}.is_dyadic());
}

TEST_CASE("children halve the interval") {
  auto ch = children(I1(0, 0));
  REQUIRE(ch.size() == 2);
  CHECK(ch[0] == I1(-1, 0));
  CHECK(ch[1] == I1(-1, 1));
  CHECK(ch[0].lo(0) == 0.0);
  CHECK(ch[0].hi(0) == 0.5);
  CHECK(ch[1].lo(0) == 0.5);

  auto q = children(DyadicInterval::make2(0, 0, 0));
  REQUIRE(q.size() == 4);
  double total = 0.0;
  for (const auto& J : q) {
    CHECK(J.measure() == 0.25);
    CHECK(DyadicInterval::make2(0, 0, 0).contains(J));
    total += J.measure();
  }
  CHECK(total == 1.0);
}

TEST_CASE("parent and ancestor") {
  for (int eta = 0; eta < 4; ++eta) {
    const DyadicInterval I = DyadicInterval::make2(-2, 3, -5);
    CHECK(parent(child(I, eta)) == I);
  }
  CHECK(ancestor(I1(-1, 0), 1) == I1(0, 0));
  CHECK(ancestor(I1(-1, 1), 2) == I1(1, 0));   // [1/2,1) -> [0,2)
  CHECK(ancestor(I1(0, -1), 1) == I1(1, -1));  // [-1,0) -> [-2,0)
  CHECK(ancestor(I1(-3, 5), 0) == I1(-3, 5));
  CHECK_THROWS_AS(ancestor(I1(0, 0), -1), PreconditionError);

  // brute-force containment scan agrees on a sweep of intervals
  for (std::int64_t m = -20; m <= 20; ++m)
    for (int j = 0; j <= 5; ++j) {
      const DyadicInterval I = I1(-3, m);
      CHECK(ancestor(I, j) == oracle::scan_ancestor(I, j));
      CHECK(ancestor(I, j).contains(I));
    }
  const DyadicInterval I2 = DyadicInterval::make2(-2, -7, 9);
  for (int j = 0; j <= 4; ++j) CHECK(ancestor(I2, j) == oracle::scan_ancestor(I2, j));
}

TEST_CASE("membership is exact at dyadic boundaries") {
  const DyadicInterval I = I1(-1, 1);  // [1/2, 1)
  CHECK(I.contains(at(1, 2)));
  CHECK_FALSE(I.contains(at(1, 1)));
  CHECK(I.contains(at(3, 4)));
  CHECK_FALSE(I.contains(at(1, 3)));
  CHECK(I.contains(at(2, 3)));
  CHECK(I1(2, -1).contains(at(-4, 1)));
  CHECK_FALSE(I1(2, -1).contains(at(0, 1)));
}

TEST_CASE("haar evaluation") {
  const HaarFunction h = HaarFunction::standard(I1(0, 0));
  CHECK(haar_eval(h, at(3, 4)) == 1.0);
  CHECK(haar_eval(h, at(1, 4)) == -1.0);
  CHECK(haar_eval(h, at(2, 1)) == 0.0);
  CHECK(haar_eval(h, at(1, 2)) == 1.0);
  CHECK(h.cancellation() == 0.0);
  CHECK(h.sup_norm() == 1.0);
  const double integral = oracle::integrate1([&](const Point& x) { return haar_eval(h, x); }, -1, 2, -3);
  CHECK(integral == 0.0);

  CHECK(haar_power_eval(h, at(1, 4), 2) == 1.0);
  CHECK(haar_power_eval(h, at(1, 4), 3) == -1.0);
  CHECK(haar_power_eval(h, at(3, 4), 1) == 1.0);
  CHECK(haar_power_eval(h, at(5, 1), 0) == 0.0);
  CHECK(haar_power_eval(h, at(1, 4), 0) == 1.0);

  const HaarFunction h2 = HaarFunction::with_coeffs(DyadicInterval::make2(0, 0, 0), {-1, 1, -1, 1});
  CHECK(h2.cancellation() == 0.0);
  CHECK_THROWS_AS(haar_power_eval(h2, Point{Rational{1, 4}, Rational{1, 4}}, 2), PreconditionError);
  CHECK_THROWS_AS(HaarFunction::with_coeffs(DyadicInterval::make2(0, 0, 0), {1, 1, 1, -1}),
                  PreconditionError);
  CHECK(haar_eval(h2, Point{Rational{3, 4}, Rational{1, 4}}) == 1.0);
  CHECK(haar_eval(h2, Point{Rational{1, 4}, Rational{3, 4}}) == -1.0);
}

TEST_CASE("lattice enumeration") {
  auto small = TruncatedLattice::boxed(1, 0, 1, 0, 0).enumerate();
  CHECK(small == std::vector<DyadicInterval>{I1(0, 0), I1(-1, 0), I1(-1, 1)});

  auto lat = TruncatedLattice::symmetric(1, 1, 0).enumerate();
  CHECK(lat == std::vector<DyadicInterval>{I1(1, -1), I1(1, 0), I1(0, -2), I1(0, -1), I1(0, 0),
                                           I1(0, 1)});
  CHECK(lat == oracle::scan_intervals(1, -2, 2, 1, 0));

  for (int K = 0; K <= 3; ++K)
    for (int L = -K; L <= 3; ++L) {
      const auto T = TruncatedLattice::symmetric(1, K, L);
      const auto v = T.enumerate();
      CHECK(static_cast<std::int64_t>(v.size()) == T.interval_count());
      auto scanned = oracle::scan_intervals(1, T.window_lo(), T.window_hi(), K, L);
      CHECK(std::set<DyadicInterval>(v.begin(), v.end()) ==
            std::set<DyadicInterval>(scanned.begin(), scanned.end()));
      CHECK(std::set<DyadicInterval>(v.begin(), v.end()).size() == v.size());
      for (std::size_t i = 1; i < v.size(); ++i) CHECK(v[i - 1].scale >= v[i].scale);
    }

  const auto T2 = TruncatedLattice::symmetric(2, 1, 1);
  auto v2 = T2.enumerate();
  auto s2 = oracle::scan_intervals(2, -2, 2, 1, 1);
  CHECK(std::set<DyadicInterval>(v2.begin(), v2.end()) == std::set<DyadicInterval>(s2.begin(), s2.end()));

  CHECK_THROWS_AS(TruncatedLattice::symmetric(1, 2, -3), PreconditionError);
  CHECK_THROWS_AS(TruncatedLattice::symmetric(1, 6, 12).enumerate(1000), PreconditionError);
}

TEST_CASE("nestedness trichotomy and partition on the lattice") {
  for (int dim : {1, 2}) {
    const auto T = TruncatedLattice::symmetric(dim, 1, 2);
    const auto v = T.enumerate();
    for (const auto& I : v)
      for (const auto& J : v) {
        const int rel = int(I.contains(J)) + int(J.contains(I)) + int(I.disjoint(J));
        CHECK(rel >= 1);
        if (I != J) CHECK(rel == 1);
      }
    for (int k = 1; k >= -2; --k) {
      double total = 0.0;
      for (const auto& I : v)
        if (I.scale == k) total += I.measure();
      CHECK(total == std::pow(4.0, dim));
    }
  }
}
