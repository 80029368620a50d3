#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "qtail/error.hpp"
#include "qtail/power.hpp"

using namespace qtail;

TEST_SUITE("power") {
  TEST_CASE("per-state power on a unit threshold") {
    const double lp = std::log1p(-std::exp(-1.0));
    const ChannelModel r = ChannelModel::rayleigh();
    CHECK(per_state_power(r, lp, 1) == doctest::Approx(oracle::kCkStateOne).epsilon(1e-12));
    CHECK(per_state_power(r, lp, 7) == doctest::Approx(oracle::kCkStateOne).epsilon(1e-12));
    CHECK(per_state_power(r, lp, 0) == doctest::Approx(oracle::kCkStateZero).epsilon(1e-12));
  }

  TEST_CASE("per-state power on Nakagami channels against the oracle") {
    const PkSequence pk = PkSequence::single_exp(0.1);
    const struct {
      double m;
      double c0, c5, c8, c50;
    } rows[] = {
        {1.0, oracle::kCqNakagami1Single_0, oracle::kCqNakagami1Single_5, oracle::kCqNakagami1Single_8,
         oracle::kCqNakagami1Single_50},
        {1.2, oracle::kCqNakagami1p2Single_0, oracle::kCqNakagami1p2Single_5, oracle::kCqNakagami1p2Single_8,
         oracle::kCqNakagami1p2Single_50},
        {1.5, oracle::kCqNakagami1p5Single_0, oracle::kCqNakagami1p5Single_5, oracle::kCqNakagami1p5Single_8,
         oracle::kCqNakagami1p5Single_50},
    };
    for (const auto& r : rows) {
      const ChannelModel ch = ChannelModel::nakagami(r.m);
      CAPTURE(r.m);
      CHECK(std::exp(log_per_state_power(ch, pk, 0)) == doctest::Approx(r.c0).epsilon(1e-9));
      CHECK(std::exp(log_per_state_power(ch, pk, 5)) == doctest::Approx(r.c5).epsilon(1e-9));
      CHECK(std::exp(log_per_state_power(ch, pk, 8)) == doctest::Approx(r.c8).epsilon(1e-9));
      CHECK(std::exp(log_per_state_power(ch, pk, 50)) == doctest::Approx(r.c50).epsilon(1e-9));
    }
  }

  TEST_CASE("shape parameter ordering of the per-state power crosses over at small k") {
    // With p_k = e^{-0.1(k+1)} the m = 1.5 channel costs more than Rayleigh
    // up to k = 5 and less from k = 6 on (see the oracle values above).
    for (int k = 0; k <= 50; ++k) {
      const double lp = -0.1 * (k + 1);
      const double c15 = per_state_power(ChannelModel::nakagami(1.5), lp, k);
      const double c1 = per_state_power(ChannelModel::rayleigh(), lp, k);
      CAPTURE(k);
      if (k <= 5) {
        CHECK(c15 > c1);
      } else {
        CHECK(c15 < c1);
      }
    }
  }

  TEST_CASE("average power of the threshold rule on Rayleigh") {
    const ChannelModel r = ChannelModel::rayleigh();
    const PowerReport s = threshold_policy_avg_power(r, PkSequence::single_exp(0.1), 50);
    CHECK(s.p_avg == doctest::Approx(oracle::kPavgRayleighSingle).epsilon(1e-11));
    CHECK_FALSE(s.divergent);
    CHECK(s.residual_bounded);
    CHECK(s.truncation_residual < 1e-40);
    CHECK(threshold_policy_avg_power(r, PkSequence::polynomial(0.1, 2.0), 50).p_avg ==
          doctest::Approx(oracle::kPavgRayleighPolynomial).epsilon(1e-11));
    CHECK(threshold_policy_avg_power(r, PkSequence::double_exp(0.1), 50).p_avg ==
          doctest::Approx(oracle::kPavgRayleighDouble).epsilon(1e-11));
    const PowerReport t = threshold_policy_avg_power(r, PkSequence::triple_exp(0.1), 50);
    CHECK(t.p_avg == doctest::Approx(oracle::kPavgRayleighTriple).epsilon(1e-10));
    CHECK_FALSE(t.divergent);
    CHECK(t.p_avg > s.p_avg);
  }

  TEST_CASE("average power on Nakagami channels against the oracle") {
    const PkSequence pk = PkSequence::single_exp(0.1);
    CHECK(threshold_policy_avg_power(ChannelModel::nakagami(1.2), pk, 50).p_avg ==
          doctest::Approx(oracle::kPavgNakagami1p2Single).epsilon(1e-9));
    CHECK(threshold_policy_avg_power(ChannelModel::nakagami(1.5), pk, 50).p_avg ==
          doctest::Approx(oracle::kPavgNakagami1p5Single).epsilon(1e-9));
  }

  TEST_CASE("an unbounded chain makes the average power divergent") {
    const PowerReport rep = threshold_policy_avg_power(ChannelModel::rayleigh(), PkSequence::constant(0.5), 50);
    CHECK(rep.divergent);
    CHECK_FALSE(rep.residual_bounded);
  }

  TEST_CASE("atoms and static channels") {
    const ChannelModel mix = ChannelModel::impulse_mixture(0.1, ChannelModel::rayleigh());
    // p_k below the atom mass forces transmission at zero gain.
    CHECK(std::isinf(per_state_power(mix, std::log(0.05), 1)));
    CHECK(std::isfinite(per_state_power(mix, std::log(0.5), 1)));
    CHECK_THROWS_AS(per_state_power(ChannelModel::static_gain(2.0), -1.0, 1), DomainError);
  }

  TEST_CASE("transmit-all closed forms") {
    const TransmitAllReport m2 = transmit_all_power(ChannelModel::nakagami(2.0));
    CHECK(std::fabs(m2.value - oracle::kTransmitAllM2) < 1e-9);
    CHECK(std::fabs(m2.value - 2.0 * (std::numbers::e - 1.0)) < 1e-6);
    const TransmitAllReport m15 = transmit_all_power(ChannelModel::nakagami(1.5));
    CHECK(std::fabs(m15.value - oracle::kTransmitAllM1p5) < 1e-9);
    const TransmitAllReport r = transmit_all_power(ChannelModel::rayleigh());
    CHECK(r.divergent);
    CHECK(std::isinf(r.value));
    // The cutoff integrals keep growing as the cutoff shrinks.
    REQUIRE(r.cutoff_probes.size() >= 3);
    for (std::size_t i = 1; i < r.cutoff_probes.size(); ++i) {
      CHECK(r.cutoff_probes[i].second > r.cutoff_probes[i - 1].second + 1.0);
    }
    CHECK(transmit_all_power(ChannelModel::impulse_mixture(0.1, ChannelModel::nakagami(3.0))).divergent);
    CHECK(transmit_all_power(ChannelModel::static_gain(2.0)).value == doctest::Approx((std::numbers::e - 1.0) / 2.0));
  }

  TEST_CASE("quadrature route reproduces the closed form") {
    const ChannelModel r = ChannelModel::rayleigh();
    const PkSequence pk = PkSequence::single_exp(0.1);
    const PowerReport closed = threshold_policy_avg_power(r, pk, 50);
    const GenericPowerReport generic = generic_avg_power(r, ThresholdPolicy(pk, r), closed.dist);
    CHECK(std::fabs(generic.value - closed.p_avg) < 1e-6);
    for (int k = 0; k <= 20; ++k) CHECK(generic.per_state[k] == doctest::Approx(closed.per_state[k]).epsilon(1e-7));

    const ChannelModel n2 = ChannelModel::nakagami(2.0);
    const GenericPowerReport all = generic_avg_power(n2, TransmitAllPolicy(), StationaryDistribution::degenerate_at(0, 50));
    CHECK(std::fabs(all.value - transmit_all_power(n2).value) < 1e-6);

    const GenericPowerReport div = generic_avg_power(r, TransmitAllPolicy(), StationaryDistribution::degenerate_at(0, 5));
    CHECK(div.divergent);
  }

  TEST_CASE("an idle-everywhere rule spends nothing") {
    const ChannelModel r = ChannelModel::rayleigh();
    const ThresholdPolicy idle(PkSequence::explicit_values({1.0}), r);
    const GenericPowerReport rep = generic_avg_power(r, idle, StationaryDistribution::degenerate_at(0, 10));
    CHECK(rep.value == 0.0);
    CHECK_FALSE(rep.divergent);
  }
}
