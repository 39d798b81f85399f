#include <gtest/gtest.h>

#include <vector>

#include "icroute/sync.hpp"

using namespace icroute;

namespace {

SyncScanState run_scan(WorkOffset o_s, WorkOffset o_r, const ChargingSpec& spec) {
  SyncScanState s = start_scan(o_s);
  while (!s.matched && !s.exhausted) s = scan_step(s, s.current_offset == o_r, spec);
  return s;
}

}  // namespace

TEST(Scan, Examples) {
  const ChargingSpec spec(5);
  EXPECT_EQ(run_scan(WorkOffset{0}, WorkOffset{0}, spec).attempts, 0u);
  const auto s = run_scan(WorkOffset{0}, WorkOffset{3}, spec);
  EXPECT_TRUE(s.matched);
  EXPECT_EQ(s.attempts, 3u);
}

TEST(Scan, SilentReceiverExhausts) {
  const ChargingSpec spec(5);
  SyncScanState s = start_scan(WorkOffset{2});
  int steps = 0;
  while (!s.exhausted) {
    s = scan_step(s, false, spec);
    ++steps;
  }
  EXPECT_EQ(steps, 6);
  EXPECT_EQ(s.attempts, 6u);
  EXPECT_EQ(s.current_offset, WorkOffset{2});
  SyncScanState m = start_scan(WorkOffset{0});
  m = scan_step(m, true, spec);
  EXPECT_THROW(scan_step(m, false, spec), std::logic_error);
}

TEST(Scan, ClosedFormExamples) {
  const ChargingSpec spec(5);
  EXPECT_EQ(closed_form_latency(WorkOffset{4}, WorkOffset{4}, spec), 4u);
  EXPECT_EQ(closed_form_latency(WorkOffset{0}, WorkOffset{3}, spec), 21u);
  Slot worst = 0;
  for (std::uint32_t a = 0; a <= 5; ++a) {
    for (std::uint32_t b = 0; b <= 5; ++b) {
      EXPECT_LE(scan_cycles(WorkOffset{a}, WorkOffset{b}, spec), 5u);
      worst = std::max(worst, closed_form_latency(WorkOffset{a}, WorkOffset{b}, spec));
    }
  }
  EXPECT_LE(worst, 30u + 5u);
}

TEST(Scan, ClosedFormMatchesBruteForce) {
  for (std::uint32_t t = 1; t <= 50; ++t) {
    const ChargingSpec spec(t);
    for (std::uint32_t a = 0; a <= t; ++a) {
      for (std::uint32_t b = 0; b <= t; ++b) {
        const WorkOffset os{a};
        const WorkOffset orr{b};
        const auto bf = brute_force_sync_latency(os, orr, spec, spec.cycle_len() * spec.cycle_len());
        ASSERT_TRUE(bf);
        ASSERT_EQ(*bf, closed_form_latency(os, orr, spec)) << "t=" << t << " " << a << "->" << b;
        const auto s = run_scan(os, orr, spec);
        ASSERT_TRUE(s.matched);
        ASSERT_LE(static_cast<Slot>(s.attempts) * spec.cycle_len(), static_cast<Slot>(t) * (t + 1));
      }
    }
  }
}

TEST(Scan, AnalyticMeanMatchesEnumeration) {
  for (std::uint32_t t : {1u, 5u, 50u, 120u}) {
    const ChargingSpec spec(t);
    double sum = 0.0;
    for (std::uint32_t a = 0; a <= t; ++a) {
      for (std::uint32_t b = 0; b <= t; ++b) {
        sum += static_cast<double>(closed_form_latency(WorkOffset{a}, WorkOffset{b}, spec));
      }
    }
    const double pairs = static_cast<double>(spec.cycle_len() * spec.cycle_len());
    EXPECT_NEAR(sum / pairs, analytic_mean_latency(spec), 1e-9);
  }
  EXPECT_DOUBLE_EQ(analytic_mean_latency(ChargingSpec(5)), 17.5);
}

TEST(Scan, MonteCarloNearAnalytic) {
  for (std::uint32_t t : {120u, 500u}) {
    RngStream rng = derive_rng_stream(11, 0, "sync-offsets");
    const double mean = mean_scan_latency(ChargingSpec(t), 10000, rng);
    EXPECT_NEAR(mean / analytic_mean_latency(ChargingSpec(t)), 1.0, 0.03);
  }
  RngStream rng = derive_rng_stream(11, 0, "sync-offsets");
  EXPECT_THROW(mean_scan_latency(ChargingSpec(5), 0, rng), std::invalid_argument);
}

TEST(Geometric, SeededRunReproducible) {
  const ChargingSpec spec(5);
  RngStream a = derive_rng_stream(9, 1, "sync-geometric");
  RngStream b = derive_rng_stream(9, 1, "sync-geometric");
  const auto la = geometric_latency(WorkOffset{0}, WorkOffset{3}, 0.5, a, spec, 10000);
  const auto lb = geometric_latency(WorkOffset{0}, WorkOffset{3}, 0.5, b, spec, 10000);
  ASSERT_TRUE(la);
  EXPECT_EQ(la, lb);
  EXPECT_EQ(*la % spec.cycle_len(), 3u);
  // at least three delays are needed
  EXPECT_GE(*la, 21u);
}

TEST(Geometric, NeverDelayingNeverMatches) {
  const ChargingSpec spec(5);
  RngStream r = derive_rng_stream(9, 1, "sync-geometric");
  EXPECT_FALSE(geometric_latency(WorkOffset{0}, WorkOffset{3}, 0.0, r, spec, 5000, true));
  EXPECT_THROW(geometric_latency(WorkOffset{0}, WorkOffset{3}, 0.0, r, spec, 5000), std::invalid_argument);
  EXPECT_THROW(check_probability(1.5, true), std::invalid_argument);
}

TEST(Geometric, ComparableMeanHigherVariance) {
  const ChargingSpec spec(120);
  const GeometricChoice g = best_geometric_p(spec, 10000, 3);
  RngStream offsets = derive_rng_stream(3, 0, "sync-offsets");
  const LatencyStats scan = summarize(scan_latency_samples(spec, 10000, offsets));
  EXPECT_GE(g.p, 0.1);
  EXPECT_LE(g.p, 0.9);
  EXPECT_GT(g.stats.mean, scan.mean / 10.0);
  EXPECT_LT(g.stats.mean, scan.mean * 10.0);
  EXPECT_GT(g.stats.variance, scan.variance);
}

TEST(Stats, Summarize) {
  const auto st = summarize({1.0, 2.0, 3.0, 4.0});
  EXPECT_DOUBLE_EQ(st.mean, 2.5);
  EXPECT_NEAR(st.variance, 5.0 / 3.0, 1e-12);
  EXPECT_EQ(summarize({}).samples, 0u);
}
