// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "musim/muscle_model.hpp"

using namespace musim;

namespace {

// Brute-force maximum of a function on a uniform grid over (0, hi].
template <typename F>
std::pair<double, double> scan_max(F f, double hi, double step) {
  double bt = 0.0, bv = -1.0;
  for (double t = step; t <= hi; t += step) {
    const double v = f(t);
    if (v > bv) {
      bv = v;
      bt = t;
    }
  }
  return {bt, bv};
}

StimulusTrain random_train(std::mt19937& rng, double isi, double horizon, int max_n) {
  std::uniform_int_distribution<int> count(0, max_n);
  std::uniform_real_distribution<double> gap(isi, 60.0);
  std::vector<double> t;
  double at = std::uniform_real_distribution<double>(0.0, 50.0)(rng);
  for (int i = count(rng); i > 0 && at < horizon; --i) {
    t.push_back(at);
    at += gap(rng);
  }
  return StimulusTrain(t);
}

}  // namespace

TEST(TwitchWinter, ZeroAtOnset) { EXPECT_EQ(twitch_force_winter({0.1, 20}, 0.0), 0.0); }

TEST(TwitchWinter, ValueAtContractionTime) {
  EXPECT_NEAR(twitch_force_winter({0.1, 100}, 100.0), 0.1 * std::exp(-1.0), 1e-15);
  EXPECT_NEAR(twitch_force_winter({0.1, 100}, 100.0), 0.03679, 1e-5);
}

TEST(TwitchWinter, PeakSitsAtContractionTime) {
  const auto [t, v] = scan_max([](double x) { return twitch_force_winter({0.1, 100}, x); }, 1000.0, 0.01);
  EXPECT_NEAR(t, 100.0, 0.011);
  EXPECT_NEAR(v, 0.1 * std::exp(-1.0), 1e-12);
}

TEST(TwitchWinter, LongResidualAt600ms) {
  EXPECT_NEAR(twitch_force_winter({0.1, 100}, 600.0), 0.6 * std::exp(-6.0), 1e-15);
  EXPECT_NEAR(twitch_force_winter({0.1, 100}, 600.0), 1.488e-3, 1e-6);
}

TEST(Twitch, ZeroAtAndBeforeOnset) {
  EXPECT_EQ(twitch_force({0.1, 20}, 0.0), 0.0);
  EXPECT_EQ(twitch_force({0.1, 20}, -5.0), 0.0);
}

TEST(Twitch, ValueAtContractionTime) {
  EXPECT_NEAR(twitch_force({0.1, 20}, 20.0), 0.005, 1e-15);
}

TEST(Twitch, TendsToZeroNearOnset) {
  EXPECT_LT(twitch_force({0.1, 20}, 1e-9), 1e-10);
  EXPECT_GT(twitch_force({0.1, 20}, 1e-3), 0.0);
}

TEST(Twitch, PeakMatchesGridScan) {
  const TwitchParams p{0.1, 20};
  const auto [t, v] = scan_max([&](double x) { return twitch_force(p, x); }, 200.0, 0.01);
  EXPECT_NEAR(t, 6.84, 0.01);
  EXPECT_NEAR(v, 0.0177, 5e-5);
  EXPECT_NEAR(twitch_peak_time(p), t, 0.01);
  EXPECT_NEAR(twitch_peak(p), v, 1e-8);
}

TEST(Twitch, PeakTimeSolvesStationarity) {
  for (double T : {5.0, 20.0, 50.0, 70.0, 100.0, 300.0}) {
    const double tp = twitch_peak_time({0.1, T});
    EXPECT_NEAR(tp * (std::log(tp) + 1.0), T, 1e-9 * T);
  }
}

TEST(Twitch, ShortResidualAt600ms) {
  const double v = twitch_force({0.1, 100}, 600.0);
  EXPECT_LT(v, 1e-12);
  EXPECT_NEAR(v / (0.6 * std::pow(600.0, -6.0)), 1.0, 1e-9);
}

TEST(TwitchProperty, NonnegativeWithSingleInteriorMaximum) {
  for (double T : {20.0, 50.0, 70.0, 100.0}) {
    const TwitchParams p{0.1, T};
    int maxima = 0;
    double prev2 = 0.0, prev = twitch_force(p, 0.01);
    for (double t = 0.02; t < 400.0; t += 0.01) {
      const double v = twitch_force(p, t);
      ASSERT_GE(v, 0.0);
      if (prev > prev2 && prev > v) ++maxima;
      prev2 = prev;
      prev = v;
    }
    EXPECT_EQ(maxima, 1) << "T=" << T;
  }
}

TEST(TwitchProperty, PeakDecreasesWithContractionTime) {
  const double a = twitch_peak({0.1, 20}), b = twitch_peak({0.1, 50});
  const double c = twitch_peak({0.1, 70}), d = twitch_peak({0.1, 100});
  EXPECT_GT(a - b, 1e-6);
  EXPECT_GT(b - c, 1e-6);
  EXPECT_GT(c - d, 1e-6);
}

TEST(TwitchParams, RejectsNonPositive) {
  EXPECT_THROW((TwitchParams{0.0, 20}.validate()), std::invalid_argument);
  EXPECT_THROW((TwitchParams{0.1, -1}.validate()), std::invalid_argument);
}

TEST(DefaultClasses, FourClassesFastToSlow) {
  const auto c = default_classes();
  ASSERT_EQ(c.size(), 4u);
  const double T[] = {20, 50, 70, 100};
  const char* L[] = {"A", "B", "C", "D"};
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(c[i].label, L[i]);
    EXPECT_EQ(c[i].twitch.t_peak, T[i]);
    EXPECT_EQ(c[i].twitch.f0, 0.1);
    EXPECT_EQ(c[i].min_isi, 5.0);
    EXPECT_NEAR(c[i].max_force, 5.0 * twitch_peak(c[i].twitch), 1e-15);
  }
}

TEST(StimulusTrain, RejectsUnsortedTimes) {
  EXPECT_THROW(StimulusTrain({5.0, 5.0}), std::invalid_argument);
  EXPECT_THROW(StimulusTrain({5.0, 1.0}), std::invalid_argument);
}

TEST(WaveSummation, EmptyTrainIsZero) {
  EXPECT_EQ(mu_force_pre_cap({}, {0.1, 20}, 123.0), 0.0);
}

TEST(WaveSummation, SingleStimulusEqualsTwitch) {
  EXPECT_NEAR(mu_force_pre_cap(StimulusTrain({0.0}), {0.1, 20}, 20.0), 0.005, 1e-15);
}

TEST(WaveSummation, TwoStimuliAdd) {
  const double expect = 0.005 + 0.1 * 0.5 * std::pow(10.0, -0.5);
  EXPECT_NEAR(mu_force_pre_cap(StimulusTrain({0.0, 10.0}), {0.1, 20}, 20.0), expect, 1e-15);
  EXPECT_NEAR(expect, 0.02081, 1e-5);
}

TEST(WaveSummation, IgnoresFutureStimuli) {
  EXPECT_NEAR(mu_force_pre_cap(StimulusTrain({0.0, 30.0}), {0.1, 20}, 20.0), 0.005, 1e-15);
}

TEST(Tetanus, BelowCapPassesThrough) {
  const auto c = MotorUnitClass::make("A", {0.1, 20});
  const StimulusTrain t({0.0});
  EXPECT_EQ(mu_force(t, c, 7.0), mu_force_pre_cap(t, c.twitch, 7.0));
}

TEST(Tetanus, DenseTrainSaturatesAtCap) {
  MotorUnitClass c{"A", {0.1, 20}, 0.05, 5.0};
  std::vector<double> times;
  double crossing = -1.0;
  for (double at = 0.0; at < 200.0 && crossing < 0.0; at += c.min_isi) {
    times.push_back(at);
    const StimulusTrain tr(times);
    for (double t = at; t < at + c.min_isi; t += 0.1) {
      double brute = 0.0;
      for (double s : times) brute += twitch_force(c.twitch, t - s);
      if (brute > c.max_force) {
        crossing = t;
        break;
      }
    }
  }
  ASSERT_GT(crossing, 0.0);
  EXPECT_EQ(mu_force(StimulusTrain(times), c, crossing), 0.05);
}

TEST(Tetanus, EmptyTrainIsZero) {
  EXPECT_EQ(mu_force({}, MotorUnitClass::make("A", {0.1, 20}), 10.0), 0.0);
}

TEST(Tetanus, RejectsIsiViolation) {
  const auto c = MotorUnitClass::make("A", {0.1, 20});
  EXPECT_THROW(mu_force(StimulusTrain({0.0, 2.0}), c, 10.0), IsiViolation);
  EXPECT_NO_THROW(mu_force(StimulusTrain({0.0, 5.0}), c, 10.0));
}

TEST(SummationProperty, RandomTrains) {
  std::mt19937 rng(7);
  const auto classes = default_classes();
  std::uniform_real_distribution<double> when(0.0, 400.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto& c = classes[static_cast<std::size_t>(trial) % classes.size()];
    const auto a = random_train(rng, c.min_isi, 300.0, 12);
    const auto b = random_train(rng, c.min_isi, 300.0, 12);
    std::vector<double> u = a.times;
    u.insert(u.end(), b.times.begin(), b.times.end());
    std::sort(u.begin(), u.end());
    if (std::adjacent_find(u.begin(), u.end()) != u.end()) continue;
    const StimulusTrain un(u);
    const double t = when(rng);
    const double sum = mu_force_pre_cap(a, c.twitch, t) + mu_force_pre_cap(b, c.twitch, t);
    const double both = mu_force_pre_cap(un, c.twitch, t);
    EXPECT_LE(std::fabs(both - sum), 1e-12 * std::max(std::fabs(sum), 1e-300) + 1e-300);
    EXPECT_GE(both, mu_force_pre_cap(a, c.twitch, t));
    if (a.respects_isi(c.min_isi)) {
      EXPECT_LE(mu_force(a, c, t), c.max_force);
    }
  }
}

TEST(LengthForce, DefaultTent) {
  const auto c = LengthForceCurve::tent();
  EXPECT_EQ(length_force_factor(c, 1.0), 1.0);
  EXPECT_EQ(length_force_factor(c, 0.4), 0.0);
  EXPECT_EQ(length_force_factor(c, 1.6), 0.0);
  EXPECT_NEAR(length_force_factor(c, 0.75), 0.5, 1e-15);
  EXPECT_NEAR(length_force_factor(c, 1.25), 0.5, 1e-15);
}

TEST(LengthForce, ExactKnotReturnsKnotValue) {
  const LengthForceCurve c{{{0.3, 0.1}, {0.8, 0.7}, {1.0, 1.0}, {1.7, 0.2}}};
  c.validate();
  for (const auto& [l, r] : c.knots) EXPECT_EQ(length_force_factor(c, l), r);
}

TEST(LengthForce, ValidationAndDomain) {
  EXPECT_THROW((LengthForceCurve{{{1.0, 1.0}, {0.5, 0.0}}}.validate()), std::invalid_argument);
  EXPECT_THROW((LengthForceCurve{{{0.5, 0.5}, {1.0, 0.9}}}.validate()), std::invalid_argument);
  EXPECT_THROW((LengthForceCurve{{{0.5, 1.0}, {1.0, 1.0}}}.validate()), std::invalid_argument);
  EXPECT_THROW(length_force_factor(LengthForceCurve::tent(), 0.0), std::invalid_argument);
}

namespace {
MuscleAgent agent_with(int units, double f_p0 = 0.0, double l = 1.0) {
  MuscleAgent m;
  m.name = "test";
  m.f_p0 = f_p0;
  m.length_ratio = l;
  for (int i = 0; i < units; ++i)
    m.units.push_back({MotorUnitClass::make("B", {0.1, 50}), 1, StimulusTrain({0.0, 20.0})});
  return m;
}
}  // namespace

TEST(ActiveForce, NoUnitsIsZero) { EXPECT_EQ(active_force(agent_with(0), 30.0), 0.0); }

TEST(ActiveForce, OneUnitAtRestLength) {
  const auto m = agent_with(1);
  EXPECT_EQ(active_force(m, 30.0), mu_force(m.units[0].train, m.units[0].cls, 30.0));
}

TEST(ActiveForce, TwoIdenticalUnitsDouble) {
  const auto one = agent_with(1), two = agent_with(2);
  for (double t : {5.0, 30.0, 80.0}) EXPECT_NEAR(active_force(two, t), 2.0 * active_force(one, t), 1e-15);
}

TEST(ActiveForce, CountMultipliesAndLengthScales) {
  auto m = agent_with(1);
  const double base = active_force(m, 30.0);
  m.units[0].count = 3;
  m.length_ratio = 0.75;
  EXPECT_NEAR(active_force(m, 30.0), 3.0 * 0.5 * base, 1e-15);
}

TEST(PassiveForce, Values) {
  EXPECT_EQ(passive_force(agent_with(0, 1.0, 1.0)), 1.0);
  EXPECT_NEAR(passive_force(agent_with(0, 1.0, 1.1)), std::exp(0.1), 1e-15);
  EXPECT_NEAR(passive_force(agent_with(0, 1.0, 1.1)), 1.1052, 1e-4);
  EXPECT_EQ(passive_force(agent_with(0, 0.0, 1.3)), 0.0);
}

TEST(PassiveForce, IncreasesWithLength) {
  double prev = -1.0;
  for (double l = 0.2; l < 2.0; l += 0.05) {
    const double v = passive_force(agent_with(0, 0.7, l));
    EXPECT_GE(v, 0.0);
    EXPECT_GT(v, prev);
    prev = v;
  }
}

TEST(TotalForce, Cases) {
  EXPECT_EQ(total_force(agent_with(0, 0.0), 10.0), 0.0);
  EXPECT_EQ(total_force(agent_with(0, 1.0, 1.0), 10.0), 1.0);
  const auto m = agent_with(1, 0.4, 1.1);
  const double active = length_force_factor(m.curve, 1.1) * mu_force(m.units[0].train, m.units[0].cls, 30.0);
  const double passive = 0.4 * std::exp(0.1);
  EXPECT_NEAR(total_force(m, 30.0), active + passive, 1e-15);
  EXPECT_EQ(total_force(m, 30.0), active_force(m, 30.0) + passive_force(m));
}

TEST(MuscleAgent, Validation) {
  auto m = agent_with(1);
  m.f_p0 = -1.0;
  EXPECT_THROW(m.validate(), std::invalid_argument);
  m = agent_with(1);
  m.length_ratio = 0.0;
  EXPECT_THROW(m.validate(), std::invalid_argument);
  m = agent_with(1);
  m.units[0].count = -2;
  EXPECT_THROW(m.validate(), std::invalid_argument);
}

TEST(Pruning, ZeroEpsilonMatchesExact) {
  MuscleAgent m;
  std::vector<double> t;
  for (double at = 0.0; at < 1000.0; at += 7.0) t.push_back(at);
  m.units.push_back({MotorUnitClass::make("C", {0.1, 70}), 1, StimulusTrain(t)});
  PrunedMuscle h(m, 0.0);
  for (double now = 0.0; now < 1200.0; now += 3.0) {
    h.advance(now);
    EXPECT_EQ(h.unit_pre_cap(0), mu_force_pre_cap(m.units[0].train, m.units[0].cls.twitch, now));
  }
  EXPECT_EQ(h.pruned_stimuli(), 0u);
}

TEST(Pruning, DecayedStimulusDropped) {
  MuscleAgent m;
  m.units.push_back({MotorUnitClass::make("A", {0.1, 20}), 1, StimulusTrain({0.0})});
  const auto h = advance_and_prune(m, 200.0, 1e-9);
  EXPECT_EQ(h.live_stimuli(), 0u);
  EXPECT_EQ(h.pruned_stimuli(), 1u);
  EXPECT_EQ(h.active_force(), 0.0);
  EXPECT_LT(twitch_force({0.1, 20}, 200.0), 1e-9);
}

TEST(Pruning, NotDroppedBeforePeak) {
  MuscleAgent m;
  m.units.push_back({MotorUnitClass::make("D", {0.1, 100}), 1, StimulusTrain({0.0})});
  const auto h = advance_and_prune(m, 0.001, 1.0);
  EXPECT_EQ(h.live_stimuli(), 1u);
}

TEST(Pruning, PairedRunWithinBound) {
  MuscleAgent m;
  std::vector<double> t;
  for (double at = 0.0; at < 1000.0; at += 5.0) t.push_back(at);
  m.units.push_back({MotorUnitClass::make("A", {0.1, 20}), 1, StimulusTrain(t)});
  m.units.push_back({MotorUnitClass::make("D", {0.1, 100}), 1, StimulusTrain(t)});
  const double eps = 1e-6;
  PrunedMuscle h(m, eps);
  double worst = 0.0;
  for (double now = 0.0; now <= 1000.0; now += 1.0) {
    h.advance(now);
    for (std::size_t u = 0; u < 2; ++u) {
      const double exact = mu_force_pre_cap(m.units[u].train, m.units[u].cls.twitch, now);
      worst = std::max(worst, std::fabs(exact - h.unit_pre_cap(u)));
    }
  }
  EXPECT_GT(h.pruned_stimuli(), 0u);
  EXPECT_LE(worst, eps * static_cast<double>(t.size()));
}

TEST(Pruning, LiveSetStaysBounded) {
  MuscleAgent m;
  std::vector<double> t;
  for (double at = 0.0; at < 20000.0; at += 5.0) t.push_back(at);
  m.units.push_back({MotorUnitClass::make("D", {0.1, 100}), 1, StimulusTrain(t)});
  PrunedMuscle h(m, 1e-12);
  std::size_t most = 0;
  for (double now = 0.0; now < 20000.0; now += 1.0) {
    h.advance(now);
    most = std::max(most, h.live_stimuli());
  }
  EXPECT_LT(most, 200u);
}

TEST(Pruning, RejectsTimeGoingBack) {
  MuscleAgent m;
  PrunedMuscle h(m, 1e-9);
  h.advance(10.0);
  EXPECT_NO_THROW(h.advance(10.0));
  EXPECT_THROW(h.advance(9.0), NonMonotonicTime);
  EXPECT_THROW(PrunedMuscle(m, -1.0), std::invalid_argument);
}
