#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "qtail/chain.hpp"
#include "qtail/error.hpp"

using namespace qtail;

namespace {

std::vector<PkSequence> families() {
  return {PkSequence::single_exp(0.1), PkSequence::polynomial(0.1, 2.0), PkSequence::double_exp(0.1),
          PkSequence::triple_exp(0.1), PkSequence::constant(0.2), PkSequence::constant(0.5)};
}

}  // namespace

TEST_SUITE("chain") {
  TEST_CASE("geometric chain") {
    const StationaryDistribution d = stationary(PkSequence::constant(0.2), 120);
    for (int k = 0; k <= 20; ++k) CHECK(d.pi(k) == doctest::Approx(0.75 * std::pow(0.25, k)).epsilon(1e-12));
    CHECK(d.tail_bounded);
    CHECK(d.tail_ratio == doctest::Approx(0.25));
  }

  TEST_CASE("ratio one is flagged unbounded") {
    const StationaryDistribution d = stationary(PkSequence::constant(0.5), 50);
    CHECK_FALSE(d.tail_bounded);
    CHECK(std::isinf(d.tail_mass_bound));
  }

  TEST_CASE("detailed balance holds termwise") {
    const PkSequence pk = PkSequence::single_exp(0.1);
    const StationaryDistribution d = stationary(pk, 50);
    double total = 0.0;
    for (int k = 0; k <= 50; ++k) total += d.pi(k);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
    for (int k = 0; k < 50; ++k) {
      // π_k·p_k = π_{k+1}·μ_{k+1}
      const double lhs = d.log_pi[k] + pk.log_p(k);
      const double rhs = d.log_pi[k + 1] + pk.log_mu(k + 1);
      CHECK(std::fabs(lhs - rhs) < 1e-14 * std::max(1.0, std::fabs(lhs)));
    }
  }

  TEST_CASE("violation probability against the oracle") {
    const StationaryDistribution d = stationary(PkSequence::single_exp(0.1), 50);
    CHECK(violation_probability(d, 0).value == doctest::Approx(oracle::kEpsSingle_0).epsilon(1e-13));
    CHECK(violation_probability(d, 10).value == doctest::Approx(oracle::kEpsSingle_10).epsilon(1e-12));
    CHECK(violation_probability(d, 20).value == doctest::Approx(oracle::kEpsSingle_20).epsilon(1e-12));
    CHECK(violation_probability(d, 49).lower == doctest::Approx(oracle::kEpsSingle_49).epsilon(1e-11));
    const StationaryDistribution dd = stationary(PkSequence::double_exp(0.1), 50);
    CHECK(violation_probability(dd, 2).log_lower == doctest::Approx(oracle::kLogEpsDouble_2).epsilon(1e-13));
    CHECK(violation_probability(dd, 5).log_lower == doctest::Approx(oracle::kLogEpsDouble_5).epsilon(1e-13));
  }

  TEST_CASE("geometric tail closed form") {
    const StationaryDistribution d = stationary(PkSequence::constant(0.2), 120);
    CHECK(violation_probability(d, 1).value == doctest::Approx(0.0625).epsilon(1e-12));
  }

  TEST_CASE("last threshold is the single top state plus the tail bound") {
    const StationaryDistribution d = stationary(PkSequence::constant(0.2), 30);
    const ViolationEstimate e = violation_probability(d, 29);
    CHECK(e.lower == doctest::Approx(d.pi(30)).epsilon(1e-15));
    CHECK(e.upper == doctest::Approx(d.pi(30) + d.tail_mass_bound).epsilon(1e-15));
    CHECK(e.lower <= e.value);
    CHECK(e.value <= e.upper);
    CHECK_THROWS_AS(violation_probability(d, 30), DomainError);
  }

  TEST_CASE("double exponential tail is dominated by the idle product") {
    const PkSequence pk = PkSequence::double_exp(0.1);
    const StationaryDistribution d = stationary(pk, 50);
    for (int q = 2; q <= 8; ++q) {
      double log_prod = 0.0;
      for (int m = 0; m <= q; ++m) log_prod += pk.log_p(m);
      double log_mu = 0.0;
      for (int m = 1; m <= q + 1; ++m) log_mu += pk.log_mu(m);
      const double le = violation_probability(d, q).log_lower;
      CAPTURE(q);
      CHECK(le >= log_prod + d.log_pi[0] - 1e-9);
      CHECK(le <= log_prod - log_mu + std::log(50.0 - q) + 1e-9);
    }
  }

  TEST_CASE("sandwich on the geometric chain") {
    const PkSequence pk = PkSequence::constant(0.2);
    const StationaryDistribution d = stationary(pk, 120);
    const SandwichBounds b = sandwich_bounds(pk, d, 1);
    CHECK(b.lower == doctest::Approx(0.0375).epsilon(1e-12));
    CHECK(b.lower <= violation_probability(d, 1).lower);
    CHECK(violation_probability(d, 1).lower <= b.upper);
  }

  TEST_CASE("sandwich holds for every family and threshold") {
    for (const PkSequence& pk : families()) {
      const StationaryDistribution d = stationary(pk, 50);
      for (int q = 0; q < 50; ++q) {
        const SandwichBounds b = sandwich_bounds(pk, d, q);
        const ViolationEstimate e = violation_probability(d, q);
        CAPTURE(pk.describe());
        CAPTURE(q);
        CHECK(b.log_lower <= e.log_lower);
        CHECK(e.log_lower <= b.log_upper);
        CHECK(b.lower <= e.lower);
        CHECK(e.lower <= b.upper);
      }
    }
  }

  TEST_CASE("sandwich lower bound is within pi_0 of the value for double exponential") {
    const PkSequence pk = PkSequence::double_exp(0.1);
    const StationaryDistribution d = stationary(pk, 50);
    for (int q = 2; q <= 8; ++q) {
      const double log_ratio = sandwich_bounds(pk, d, q).log_lower - violation_probability(d, q).log_lower;
      CHECK(log_ratio <= 0.0);
      CHECK(log_ratio >= d.log_pi[0]);
    }
  }

  TEST_CASE("log-sum-exp") {
    CHECK(log_sum_exp(std::vector<double>{}) == -INFINITY);
    CHECK(log_sum_exp(std::vector<double>{-INFINITY, -INFINITY}) == -INFINITY);
    CHECK(log_sum_exp(std::vector<double>{1000.0, 1000.0}) == doctest::Approx(1000.0 + std::log(2.0)));
    CHECK(log_sum_exp(std::vector<double>{-1000.0, -1001.0}) ==
          doctest::Approx(-1000.0 + std::log1p(std::exp(-1.0))));
  }

  TEST_CASE("decay class of synthetic curves") {
    std::vector<std::pair<int, double>> lin, dbl;
    for (int q = 0; q < 30; ++q) {
      lin.emplace_back(q, std::exp(-2.0 * q));
      dbl.emplace_back(q, -0.1 * std::exp(static_cast<double>(q)));
    }
    const DecayFit a = fit_decay_class(lin);
    CHECK(a.decay_class == 0);
    CHECK(a.rate == doctest::Approx(2.0).epsilon(1e-9));
    const DecayFit b = fit_decay_class_log(dbl);
    CHECK(b.decay_class == 1);
    CHECK(b.rate == doctest::Approx(0.1).epsilon(1e-9));
  }

  TEST_CASE("decay class of analytic tails") {
    for (const auto& [pk, lowest] : {std::pair{PkSequence::single_exp(0.1), 1}, std::pair{PkSequence::double_exp(0.1), 1}}) {
      const StationaryDistribution d = stationary(pk, 50);
      std::vector<std::pair<int, double>> curve;
      for (int q = 0; q < 50; ++q) curve.emplace_back(q, violation_probability(d, q).log_lower);
      CHECK(fit_decay_class_log(curve).decay_class >= lowest);
    }
    const std::vector<std::pair<int, double>> zeros{{0, 0.0}, {1, 0.0}};
    CHECK(fit_decay_class(zeros).decay_class == -1);
  }

  TEST_CASE("degenerate distribution and validation") {
    const StationaryDistribution d = StationaryDistribution::degenerate_at(0, 10);
    CHECK(d.pi(0) == 1.0);
    CHECK(d.pi(3) == 0.0);
    CHECK_THROWS_AS(stationary(PkSequence::single_exp(0.1), 0), DomainError);
    CHECK_THROWS_AS(stationary(PkSequence::explicit_values({0.5, 1.0}), 5), DomainError);
  }
}
