// SPDX-License-Identifier: Apache-2.0
// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gait_checks.hpp"
#include "musim/musim.hpp"
#include "statics_oracle.hpp"

using namespace musim;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const char* name, const std::function<Outcome()>& f) {
  const auto t0 = Clock::now();
  Outcome o;
  try {
    o = f();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  std::printf("%s  %2d  %-28s %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(),
              seconds_since(t0));
  std::fflush(stdout);
  if (!o.pass) ++failures;
}

std::string num(double v, int prec = 4) {
  char b[64];
  std::snprintf(b, sizeof b, "%.*g", prec, v);
  return b;
}

LegTraces gait(const char* name) { return parse_angles(std::string(MUSIM_DATA_DIR) + "/" + name); }

/// Ms after the peak until the twitch first drops below 1% of its peak.
double fall_time(const TwitchParams& p) {
  const double tp = twitch_peak_time(p), pk = twitch_force(p, tp);
  for (double t = tp; t < tp + 10000.0; t += 0.01)
    if (twitch_force(p, t) < 0.01 * pk) return t - tp;
  return INFINITY;
}

double scan_peak(const TwitchParams& p) {
  double best = 0.0;
  for (double t = 1e-3; t < 500.0; t += 1e-3) best = std::max(best, twitch_force(p, t));
  return best;
}

// ---------------------------------------------------------------------------

Outcome twitch_contrast() {
  const double winter = twitch_force_winter({0.1, 100.0}, 600.0);
  const double fast = twitch_force({0.1, 100.0}, 600.0);
  std::ostringstream s;
  bool ok = winter >= 1.4e-3 && fast <= 1e-12;
  s << "slow-decay@600=" << num(winter) << " (>=1.4e-3) fast-decay@600=" << num(fast)
    << " (<=1e-12); fall below 1% within 100 ms of peak:";
  for (const auto& c : default_classes()) {
    const double f = fall_time(c.twitch);
    s << " " << c.label << "=" << num(f) << "ms";
    if (!(f <= 100.0)) {
      ok = false;
      s << "!";
    }
  }
  return {ok, s.str()};
}

Outcome peak_ordering() {
  std::vector<double> pk;
  for (double T : {20.0, 50.0, 70.0, 100.0}) pk.push_back(scan_peak({0.1, T}));
  double margin = INFINITY;
  for (std::size_t i = 1; i < pk.size(); ++i) margin = std::min(margin, pk[i - 1] - pk[i]);
  return {margin >= 1e-6, "peaks " + num(pk[0], 6) + " > " + num(pk[1], 6) + " > " + num(pk[2], 6) +
                              " > " + num(pk[3], 6) + ", min margin " + num(margin) + " (>=1e-6)"};
}

Outcome superposition() {
  const auto t0 = Clock::now();
  std::mt19937 rng(2024);
  const auto classes = default_classes();
  std::uniform_real_distribution<double> when(0.0, 600.0), gap(5.0, 40.0);
  std::uniform_int_distribution<int> n(1, 25);
  double worst_rel = 0.0;
  int mono_bad = 0, cap_bad = 0, trains = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    const auto& c = classes[static_cast<std::size_t>(trial) % 4];
    std::vector<double> t;
    double x = when(rng) * 0.2;
    for (int i = n(rng); i > 0; --i, x += gap(rng)) t.push_back(x);
    // split into two sub-trains by alternating stimuli
    std::vector<double> a, b;
    for (std::size_t i = 0; i < t.size(); ++i) (i % 2 ? b : a).push_back(t[i]);
    const StimulusTrain full(t), ta(a), tb(b);
    ++trains;
    for (int q = 0; q < 5; ++q) {
      const double at = when(rng);
      const double u = mu_force_pre_cap(full, c.twitch, at);
      const double sum = mu_force_pre_cap(ta, c.twitch, at) + mu_force_pre_cap(tb, c.twitch, at);
      if (sum > 0.0) worst_rel = std::max(worst_rel, std::fabs(u - sum) / sum);
      if (u + 1e-300 < mu_force_pre_cap(ta, c.twitch, at)) ++mono_bad;
      if (mu_force(full, c, at) > c.max_force) ++cap_bad;
    }
  }
  const double el = seconds_since(t0);
  return {trains >= 1000 && worst_rel <= 1e-12 && mono_bad == 0 && cap_bad == 0 && el < 10.0,
          std::to_string(trains) + " trains, additivity rel err " + num(worst_rel) +
              " (<=1e-12), monotonicity violations " + std::to_string(mono_bad) +
              ", cap violations " + std::to_string(cap_bad) + ", " + num(el, 3) + " s (<10 s)"};
}

Outcome statics_oracle() {
  const auto t0 = Clock::now();
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> hip(deg2rad(-20), deg2rad(40)), knee(0.0, deg2rad(60));
  std::uniform_real_distribution<double> ankle(deg2rad(-25), deg2rad(20));
  const BodyParams b;
  double worst = 0.0;
  int cases = 0;
  for (int trial = 0; trial < 50; ++trial) {
    LegTraces leg;
    leg.hip.samples.assign(20, hip(rng));
    leg.knee.samples.assign(20, knee(rng));
    leg.ankle.samples.assign(20, ankle(rng));
    for (auto prof : {GrfProfile::Static, GrfProfile::DoubleHump}) {
      BootsOptions opt;
      opt.profile = prof;
      const auto r = boots_all(leg, b, opt);
      for (std::size_t k = 0; k < 20; ++k) {
        const oracle::Contact c{r.grf.force[k], static_cast<bool>(r.grf.heel_on_ground[k]),
                                static_cast<bool>(r.grf.toes_on_ground[k]), cycle_fraction(k, 20),
                                r.grf.stance_fraction};
        const std::array<double, 3> a = {leg.hip.samples[k], leg.knee.samples[k], leg.ankle.samples[k]};
        const auto want = oracle::forces(b, a, a, c);
        for (std::size_t m = 0; m < 6; ++m) {
          const double got = r.forces[m].values[k];
          worst = std::max(worst, std::fabs(got - want[m]) / std::max({std::fabs(want[m]), std::fabs(got), 1.0}));
          ++cases;
        }
      }
    }
  }
  const double el = seconds_since(t0);
  return {worst <= 1e-9 && el < 1.0, std::to_string(cases) + " values, worst rel err " + num(worst) +
                                         " (<=1e-9), " + num(el, 3) + " s (<1 s)"};
}

Outcome mass_linearity() {
  double worst = 0.0;
  for (const char* f : {"healthy_gait.csv", "toe_slap_gait.csv"}) {
    const auto leg = gait(f);
    const BodyParams b;
    const auto one = boots_all(leg, b), two = boots_all(leg, b.scaled_mass(2.0));
    for (std::size_t m = 0; m < 6; ++m)
      for (std::size_t k = 0; k < leg.size(); ++k) {
        const double a = 2.0 * one.forces[m].values[k], c = two.forces[m].values[k];
        if (a != 0.0 || c != 0.0) worst = std::max(worst, std::fabs(a - c) / std::max(std::fabs(a), std::fabs(c)));
      }
  }
  return {worst <= 1e-9, "worst rel err " + num(worst) + " (<=1e-9)"};
}

Outcome gait_windows() {
  const auto r = boots_all(gait("healthy_gait.csv"), BodyParams{});
  const double tol = 10.0;
  std::vector<std::pair<Muscle, checks::Problems>> res = {
      {Muscle::TricepsSurae, checks::triceps_surae(r.force(Muscle::TricepsSurae).values, tol)},
      {Muscle::Dorsiflexor, checks::dorsiflexor(r.force(Muscle::Dorsiflexor).values, tol)},
      {Muscle::Quadriceps, checks::quadriceps(r.force(Muscle::Quadriceps).values, tol)},
      {Muscle::Hamstring, checks::hamstring(r.force(Muscle::Hamstring).values, tol)},
      {Muscle::GluteusMaximus, checks::gluteus_maximus(r.force(Muscle::GluteusMaximus).values, tol)},
      {Muscle::Iliopsoas, checks::iliopsoas(r.force(Muscle::Iliopsoas).values, tol)}};
  bool ok = true;
  std::string s = "shift tolerance 10%:";
  for (const auto& [m, p] : res) {
    s += std::string(" ") + muscle_name(m) + (p.empty() ? "=ok" : "=[" + checks::join(p) + "]");
    ok = ok && p.empty();
  }
  return {ok, s};
}

struct Analysis {
  BootsReport boots;
  std::map<Muscle, RecruitResult> rec;
};

Analysis analyze(const char* file) {
  const RunConfig c;
  Analysis a;
  a.boots = boots_all(gait(file), c.body, c.boots);
  for (const auto& f : a.boots.forces)
    a.rec[f.muscle] = recruit(f.values, c.recruit_muscle(f.muscle), c.cycle_ms, c.recruit);
  return a;
}

const Analysis& healthy_analysis() {
  static const Analysis a = analyze("healthy_gait.csv");
  return a;
}

/// Every placement skipped exactly the units ahead of the chosen one.
bool order_holds(const RecruitResult& r) {
  for (const auto& pl : r.log) {
    const auto pos = static_cast<std::size_t>(
        std::find(r.unit_order.begin(), r.unit_order.end(), pl.unit) - r.unit_order.begin());
    if (pos >= r.unit_order.size() || pl.skipped.size() != pos) return false;
    for (std::size_t i = 0; i < pos; ++i)
      if (pl.skipped[i].first != r.unit_order[i]) return false;
  }
  return true;
}

Outcome round_trip() {
  const auto t0 = Clock::now();
  const auto& a = healthy_analysis();
  bool ok = true;
  std::string s;
  for (const auto& [m, r] : a.rec) {
    const bool isi = r.plan.respects_isi(), order = order_holds(r);
    const bool good = r.error <= 0.10 && isi && order;
    s += std::string(muscle_name(m)) + "=" + num(r.error, 3) + (isi ? "" : " ISI!") + (order ? "" : " order!") + " ";
    ok = ok && good;
  }
  const double el = seconds_since(t0);
  return {ok && el < 60.0, "RMS/peak (<=0.10): " + s + "min_isi and order checked, " + num(el, 3) + " s (<60 s)"};
}

Outcome recruitment_pattern() {
  const auto& p = healthy_analysis().rec.at(Muscle::Dorsiflexor).plan;
  const auto na = count_stimuli(p, "A", 15.0, 25.0), nd = count_stimuli(p, "D", 15.0, 25.0);
  return {na > nd, "dorsiflexor 15-25%: A=" + std::to_string(na) + " D=" + std::to_string(nd) + " (A > D)"};
}

Outcome disorder_what_if() {
  const auto& h = healthy_analysis();
  const auto t = analyze("toe_slap_gait.csv");
  const auto eh = count_stimuli(h.rec.at(Muscle::Dorsiflexor).plan, "", 0.0, 25.0);
  const auto et = count_stimuli(t.rec.at(Muscle::Dorsiflexor).plan, "", 0.0, 25.0);
  const double drop = eh > 0 ? 1.0 - static_cast<double>(et) / static_cast<double>(eh) : 0.0;
  bool ok = drop >= 0.30;
  std::string s = "dorsiflexor 0-25% " + std::to_string(eh) + " -> " + std::to_string(et) + " (drop " +
                  num(100 * drop, 3) + "%, >=30%); others |change| <=15%:";
  for (Muscle m : kAllMuscles) {
    if (m == Muscle::Dorsiflexor) continue;
    const double a = static_cast<double>(h.rec.at(m).plan.total_stimuli());
    const double b = static_cast<double>(t.rec.at(m).plan.total_stimuli());
    const double ch = a > 0 ? (b - a) / a : (b > 0 ? INFINITY : 0.0);
    s += std::string(" ") + muscle_name(m) + "=" + num(100 * ch, 3) + "%";
    ok = ok && std::fabs(ch) <= 0.15;
  }
  return {ok, s};
}

Outcome performance() {
  const auto& a = healthy_analysis();
  std::map<Muscle, StimulationPlan> plans;
  for (const auto& [m, r] : a.rec) plans[m] = r.plan;
  const auto model = default_leg_model(BodyParams{});
  SimOptions opt;
  opt.prune_epsilon = 1e-12;
  auto timed = [&](double duration) {
    double best = INFINITY;
    for (int rep = 0; rep < 3; ++rep) {
      const auto t0 = Clock::now();
      const auto r = simulate(model, plans, duration, {}, opt);
      best = std::min(best, seconds_since(t0));
      if (r.steps == 0) best = INFINITY;
    }
    return best;
  };
  const double s2 = timed(2000.0), s20 = timed(20000.0);
  const double ratio = s20 / s2;
  return {ratio <= 12.0, "2 s sim " + num(s2, 3) + " s, 20 s sim " + num(s20, 3) + " s, ratio " +
                             num(ratio, 3) + " (<=12)"};
}

}  // namespace

int main() {
  report(1, "twitch model contrast", twitch_contrast);
  report(2, "twitch peak ordering", peak_ordering);
  report(3, "superposition/saturation", superposition);
  report(4, "statics oracle", statics_oracle);
  report(5, "mass linearity", mass_linearity);
  report(6, "gait activation windows", gait_windows);
  report(7, "recruit round trip", round_trip);
  report(8, "fast units early dorsiflex", recruitment_pattern);
  report(9, "toe-slap what-if", disorder_what_if);
  report(10, "pruned simulation scaling", performance);
  std::printf("%d of 10 criteria failed\n", failures);
  return failures;
}
