// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "musim/errors.hpp"
#include "musim/muscle_model.hpp"

namespace musim {

enum class OvershootPolicy { SingleTwitch, None };

struct RecruitConfig {
  double tolerance = 0.02;  ///< fraction of the target peak
  std::size_t max_iterations = 100000;  ///< placements per sample
  std::vector<std::string> order = {"D", "C", "B", "A"};
  OvershootPolicy overshoot = OvershootPolicy::SingleTwitch;
  double eval_step_ms = 1.0;  ///< quadrature step of the per-sample force average

  void validate() const {
    if (!(tolerance > 0.0)) throw ConfigError("recruitment tolerance must be positive");
    if (max_iterations == 0) throw ConfigError("max_iterations must be positive");
    if (!(eval_step_ms > 0.0)) throw ConfigError("eval_step_ms must be positive");
  }
};

/// What the solver may stimulate: a set of motor-unit classes, each present as
/// units_per_class units of unit_count identical fibres-groups, and the
/// newtons produced per relative force unit.
struct RecruitMuscle {
  std::string name;
  std::vector<MotorUnitClass> classes;
  int units_per_class = 10;
  int unit_count = 5;
  double newton_scale = 1.0;

  double tetanic_capacity() const {
    double s = 0.0;
    for (const auto& c : classes) s += units_per_class * unit_count * c.max_force;
    return s * newton_scale;
  }

  static RecruitMuscle with_capacity(std::string name, std::vector<MotorUnitClass> classes,
                                     double capacity_n, int units_per_class = 10,
                                     int unit_count = 5) {
    RecruitMuscle m{std::move(name), std::move(classes), units_per_class, unit_count, 1.0};
    const double rel = m.tetanic_capacity();
    m.newton_scale = rel > 0.0 ? capacity_n / rel : 1.0;
    return m;
  }
};

struct PlanUnit {
  std::size_t cls = 0;  ///< index into StimulationPlan::classes
  int index = 0;        ///< unit number within its class
  int count = 1;
  StimulusTrain train;  ///< ms within [0, cycle_ms)
};

struct StimulationPlan {
  std::string muscle;
  std::size_t grid = 20;
  double cycle_ms = 1000.0;
  double newton_scale = 1.0;
  double eval_step_ms = 1.0;
  std::vector<MotorUnitClass> classes;
  std::vector<PlanUnit> units;

  std::size_t total_stimuli() const {
    std::size_t n = 0;
    for (const auto& u : units) n += u.train.size();
    return n;
  }

  bool respects_isi() const {
    for (const auto& u : units) {
      const auto& t = u.train.times;
      const double isi = classes[u.cls].min_isi;
      if (!u.train.respects_isi(isi)) return false;
      if (t.size() > 1 && t.front() + cycle_ms - t.back() < isi - 1e-9) return false;
    }
    return true;
  }
};

/// Empty plan with the unit layout used by recruit().
inline StimulationPlan empty_plan(const RecruitMuscle& m, std::size_t grid, double cycle_ms,
                                  double eval_step_ms = 1.0) {
  StimulationPlan p;
  p.muscle = m.name;
  p.grid = grid;
  p.cycle_ms = cycle_ms;
  p.newton_scale = m.newton_scale;
  p.eval_step_ms = eval_step_ms;
  p.classes = m.classes;
  for (std::size_t c = 0; c < m.classes.size(); ++c)
    for (int u = 0; u < m.units_per_class; ++u) p.units.push_back({c, u, m.unit_count, {}});
  return p;
}

// ---------------------------------------------------------------------------
// Forward evaluation on the cycle grid
// ---------------------------------------------------------------------------

namespace detail {

struct FineGrid {
  std::size_t n = 0;    ///< samples
  std::size_t per = 1;  ///< quadrature points per sample
  std::size_t nf = 0;
  double cycle = 0.0;
  double h = 0.0;

  FineGrid(std::size_t samples, double cycle_ms, double step_ms) : n(samples), cycle(cycle_ms) {
    if (samples == 0) throw GridError("empty recruitment grid");
    const double dt = cycle_ms / static_cast<double>(samples);
    per = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(dt / step_ms)));
    nf = n * per;
    h = cycle_ms / static_cast<double>(nf);
  }

  double time(std::size_t m) const { return (static_cast<double>(m) + 0.5) * h; }
  double sample_time(std::size_t s) const { return cycle * static_cast<double>(s) / n; }
};

/// Calls f(fine_index, value) for every fine point reached by a periodic
/// stimulus at tau. Values are summed over the periodic images of tau.
template <typename F>
void for_each_contribution(const FineGrid& g, const TwitchParams& tw, double support, double tau,
                           F&& f) {
  const double first = std::ceil((tau / g.h) - 0.5);
  const auto span = static_cast<std::size_t>(std::ceil(support / g.h)) + 1;
  for (std::size_t j = 0; j < span; ++j) {
    const double mf = first + static_cast<double>(j);
    const double age = (mf + 0.5) * g.h - tau;
    if (age <= 0.0) continue;
    if (age > support) break;
    const auto m = static_cast<std::size_t>(static_cast<long long>(mf) %
                                            static_cast<long long>(g.nf));
    f(m, twitch_force(tw, age));
  }
}

}  // namespace detail

/// Per-sample interval-mean force of a plan, newtons.
inline std::vector<double> plan_sample_forces(const StimulationPlan& plan) {
  const detail::FineGrid g(plan.grid, plan.cycle_ms, plan.eval_step_ms);
  std::vector<double> support(plan.classes.size());
  for (std::size_t c = 0; c < plan.classes.size(); ++c)
    support[c] = twitch_support(plan.classes[c].twitch);
  std::vector<double> out(g.n, 0.0), pre(g.nf);
  for (const auto& u : plan.units) {
    const auto& cls = plan.classes[u.cls];
    std::fill(pre.begin(), pre.end(), 0.0);
    for (double tau : u.train.times)
      detail::for_each_contribution(g, cls.twitch, support[u.cls], tau,
                                    [&](std::size_t m, double v) { pre[m] += v; });
    for (std::size_t m = 0; m < g.nf; ++m)
      out[m / g.per] += u.count * std::min(pre[m], cls.max_force);
  }
  for (double& v : out) v *= plan.newton_scale / static_cast<double>(g.per);
  return out;
}

inline double reproduction_error(const StimulationPlan& plan, const std::vector<double>& target) {
  if (target.size() != plan.grid) throw GridMismatch("plan grid differs from target grid");
  const auto f = plan_sample_forces(plan);
  const double peak = target.empty() ? 0.0 : *std::max_element(target.begin(), target.end());
  double ss = 0.0;
  for (std::size_t k = 0; k < target.size(); ++k) ss += (f[k] - target[k]) * (f[k] - target[k]);
  const double rms = std::sqrt(ss / static_cast<double>(target.size()));
  if (peak > 0.0) return rms / peak;
  return rms == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
}

struct StimulationHistogram {
  std::vector<std::string> classes;
  std::vector<std::vector<std::size_t>> counts;  ///< [bin][class]

  std::size_t class_total(std::size_t c, std::size_t lo_bin, std::size_t hi_bin) const {
    std::size_t s = 0;
    for (std::size_t b = lo_bin; b < hi_bin && b < counts.size(); ++b) s += counts[b][c];
    return s;
  }
};

inline StimulationHistogram stimulation_histogram(const StimulationPlan& plan, std::size_t bins) {
  if (bins == 0) throw std::invalid_argument("histogram needs at least one bin");
  StimulationHistogram h;
  for (const auto& c : plan.classes) h.classes.push_back(c.label);
  h.counts.assign(bins, std::vector<std::size_t>(plan.classes.size(), 0));
  for (const auto& u : plan.units)
    for (double t : u.train.times) {
      double frac = t / plan.cycle_ms;
      frac -= std::floor(frac);
      auto b = static_cast<std::size_t>(frac * static_cast<double>(bins));
      h.counts[std::min(b, bins - 1)][u.cls] += 1;
    }
  return h;
}

/// Stimuli of one class with onset in [lo_pct, hi_pct) of the cycle.
inline std::size_t count_stimuli(const StimulationPlan& plan, const std::string& label,
                                 double lo_pct, double hi_pct) {
  std::size_t n = 0;
  for (const auto& u : plan.units) {
    if (!label.empty() && plan.classes[u.cls].label != label) continue;
    for (double t : u.train.times) {
      const double p = 100.0 * t / plan.cycle_ms;
      if (p >= lo_pct && p < hi_pct) ++n;
    }
  }
  return n;
}

// ---------------------------------------------------------------------------
// Greedy size-principle solver
// ---------------------------------------------------------------------------

enum class SkipReason : std::uint8_t { Isi, Cap, Overshoot };

struct Placement {
  std::size_t sample = 0;
  std::size_t unit = 0;  ///< index into StimulationPlan::units
  double time = 0.0;
  std::vector<std::pair<std::size_t, SkipReason>> skipped;  ///< earlier units passed over
};

struct RecruitResult {
  StimulationPlan plan;
  std::vector<double> force;  ///< forward-evaluated, N per sample
  double error = 0.0;         ///< reproduction error
  std::vector<std::size_t> unmet_samples;  ///< deficits left because every unit would overshoot
  std::vector<Placement> log;
  std::vector<std::size_t> unit_order;  ///< units in the order they are tried
};

/// Sweeps the samples in time order. While the interval-mean force of sample s
/// is short of target - tolerance, the next stimulus goes to the first unit in
/// recruitment order whose earliest free slot inside [t_s, t_s+1) obeys
/// min_isi, still has force headroom, and keeps every sample within the
/// overshoot allowance. A deficit that only overshoot blocks is left in place;
/// one blocked by ISI or saturation of every unit is Infeasible.
inline RecruitResult recruit(const std::vector<double>& target_n, const RecruitMuscle& muscle,
                             double cycle_ms, const RecruitConfig& cfg = {}) {
  cfg.validate();
  if (muscle.classes.empty() || muscle.units_per_class < 1)
    throw ConfigError("muscle " + muscle.name + " has no motor units");
  for (double v : target_n)
    if (!(v >= 0.0)) throw std::invalid_argument("target force must be nonnegative");

  RecruitResult res;
  res.plan = empty_plan(muscle, target_n.size(), cycle_ms, cfg.eval_step_ms);
  auto& plan = res.plan;
  const detail::FineGrid g(target_n.size(), cycle_ms, cfg.eval_step_ms);
  const std::size_t n = g.n;

  // trial order
  std::vector<std::size_t> order;
  if (cfg.order.size() != muscle.classes.size())
    throw ConfigError("recruitment order must list every class exactly once");
  for (const auto& label : cfg.order) {
    std::size_t c = muscle.classes.size();
    for (std::size_t i = 0; i < muscle.classes.size(); ++i)
      if (muscle.classes[i].label == label) c = i;
    if (c == muscle.classes.size()) throw ConfigError("unknown class '" + label + "' in order");
    for (std::size_t u = 0; u < plan.units.size(); ++u)
      if (plan.units[u].cls == c) {
        if (std::find(order.begin(), order.end(), u) != order.end())
          throw ConfigError("class '" + label + "' repeated in order");
        order.push_back(u);
      }
  }
  res.unit_order = order;

  const double scale = muscle.newton_scale;
  std::vector<double> tgt(n);
  for (std::size_t k = 0; k < n; ++k) tgt[k] = target_n[k] / scale;
  const double peak = *std::max_element(tgt.begin(), tgt.end());
  const double tol = cfg.tolerance * peak;

  std::vector<double> support(plan.classes.size()), allow(plan.classes.size());
  for (std::size_t c = 0; c < plan.classes.size(); ++c) {
    support[c] = twitch_support(plan.classes[c].twitch);
    allow[c] = cfg.overshoot == OvershootPolicy::SingleTwitch
                   ? muscle.unit_count * twitch_peak(plan.classes[c].twitch)
                   : 0.0;
  }

  std::vector<std::vector<double>> pre(plan.units.size(), std::vector<double>(g.nf, 0.0));
  std::vector<double> S(n, 0.0);  // interval-mean relative force
  std::vector<double> d(n, 0.0);
  std::vector<char> mark(n, 0);
  std::vector<std::size_t> touched;
  std::vector<std::pair<std::size_t, double>> fine;

  auto isi_free = [&](const std::vector<double>& times, double tau, double isi) {
    for (double x : times) {
      double gap = std::fabs(tau - x);
      gap = std::min(gap, cycle_ms - gap);
      if (gap < isi - 1e-9) return false;
    }
    return true;
  };

  for (std::size_t s = 0; s < n; ++s) {
    const double t0 = g.sample_time(s), t1 = g.sample_time(s + 1);
    std::size_t iterations = 0;
    while (S[s] < tgt[s] - tol) {
      if (iterations++ >= cfg.max_iterations)
        throw Infeasible(muscle.name, "muscle " + muscle.name +
                                          ": iteration limit reached with a deficit at sample " +
                                          std::to_string(s));
      Placement pl;
      pl.sample = s;
      bool placed = false, blocked_by_overshoot = false;
      for (std::size_t u : order) {
        auto& unit = plan.units[u];
        const auto& cls = plan.classes[unit.cls];
        double tau = -1.0;
        for (double cand = t0; cand < t1 - 1e-9; cand += cls.min_isi)
          if (isi_free(unit.train.times, cand, cls.min_isi)) {
            tau = cand;
            break;
          }
        if (tau < 0.0) {
          pl.skipped.emplace_back(u, SkipReason::Isi);
          continue;
        }
        auto& p = pre[u];
        fine.clear();
        detail::for_each_contribution(g, cls.twitch, support[unit.cls], tau,
                                      [&](std::size_t m, double v) { fine.emplace_back(m, v); });
        if (fine.size() > g.nf) {
          // support longer than the cycle: merge periodic images
          std::sort(fine.begin(), fine.end());
          std::size_t w = 0;
          for (std::size_t r = 0; r < fine.size(); ++r) {
            if (w > 0 && fine[w - 1].first == fine[r].first)
              fine[w - 1].second += fine[r].second;
            else
              fine[w++] = fine[r];
          }
          fine.resize(w);
        }
        for (std::size_t q : touched) {
          d[q] = 0.0;
          mark[q] = 0;
        }
        touched.clear();
        for (const auto& [m, v] : fine) {
          const double old_f = std::min(p[m], cls.max_force);
          const double new_f = std::min(p[m] + v, cls.max_force);
          const std::size_t q = m / g.per;
          if (!mark[q]) {
            mark[q] = 1;
            touched.push_back(q);
          }
          d[q] += unit.count * (new_f - old_f) / static_cast<double>(g.per);
        }
        if (!(d[s] > 1e-15)) {
          pl.skipped.emplace_back(u, SkipReason::Cap);
          continue;
        }
        bool over = false;
        for (std::size_t q : touched)
          if (S[q] + d[q] > tgt[q] + allow[unit.cls] + 1e-12) over = true;
        if (over) {
          blocked_by_overshoot = true;
          pl.skipped.emplace_back(u, SkipReason::Overshoot);
          continue;
        }
        for (const auto& [m, v] : fine) p[m] += v;
        for (std::size_t q : touched) S[q] += d[q];
        auto& times = unit.train.times;
        times.insert(std::upper_bound(times.begin(), times.end(), tau), tau);
        pl.unit = u;
        pl.time = tau;
        placed = true;
        break;
      }
      if (!placed) {
        if (blocked_by_overshoot) {
          res.unmet_samples.push_back(s);
          break;
        }
        throw Infeasible(muscle.name, "muscle " + muscle.name +
                                          ": target exceeds motor-unit capacity at sample " +
                                          std::to_string(s));
      }
      res.log.push_back(std::move(pl));
    }
  }

  res.force = plan_sample_forces(plan);
  res.error = reproduction_error(plan, target_n);
  return res;
}

}  // namespace musim
