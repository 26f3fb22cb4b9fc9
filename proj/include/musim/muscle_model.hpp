// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "musim/errors.hpp"

namespace musim {

// ---------------------------------------------------------------------------
// Twitch dynamics
// ---------------------------------------------------------------------------

struct TwitchParams {
  double f0 = 0.1;       ///< twitch gain, relative force units
  double t_peak = 20.0;  ///< contraction time T, ms

  void validate() const {
    if (!(f0 > 0.0) || !(t_peak > 0.0))
      throw std::invalid_argument("twitch parameters must be positive");
  }
};

/// Classic twitch F0 (t/T) e^(-t/T).
inline double twitch_force_winter(const TwitchParams& p, double t) {
  if (t <= 0.0) return 0.0;
  const double r = t / p.t_peak;
  return p.f0 * r * std::exp(-r);
}

/// Short twitch F0 (t/T) t^(-t/T).
inline double twitch_force(const TwitchParams& p, double t) {
  if (t <= 0.0) return 0.0;
  const double r = t / p.t_peak;
  return p.f0 * r * std::exp(-r * std::log(t));
}

/// Time of the maximum of twitch_force; root of T = t (ln t + 1).
inline double twitch_peak_time(const TwitchParams& p) {
  double lo = std::exp(-1.0);
  double hi = std::max(p.t_peak, std::exp(1.0));
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid * (std::log(mid) + 1.0) < p.t_peak)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

inline double twitch_peak(const TwitchParams& p) {
  return twitch_force(p, twitch_peak_time(p));
}

/// Time after onset past which a single twitch stays below rel * peak.
inline double twitch_support(const TwitchParams& p, double rel = 1e-15) {
  const double tp = twitch_peak_time(p);
  const double thr = rel * twitch_peak(p);
  double lo = tp, hi = 2.0 * tp + 1.0;
  while (twitch_force(p, hi) >= thr) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (twitch_force(p, mid) >= thr)
      lo = mid;
    else
      hi = mid;
  }
  return hi;
}

// ---------------------------------------------------------------------------
// Motor units and stimulus trains
// ---------------------------------------------------------------------------

struct MotorUnitClass {
  std::string label;
  TwitchParams twitch;
  double max_force = 0.0;  ///< tetanic ceiling
  double min_isi = 5.0;    ///< ms

  static MotorUnitClass make(std::string label, TwitchParams tw,
                             double cap_multiple = 5.0, double min_isi = 5.0) {
    MotorUnitClass c;
    c.label = std::move(label);
    c.twitch = tw;
    c.max_force = cap_multiple * twitch_peak(tw);
    c.min_isi = min_isi;
    return c;
  }

  void validate() const {
    twitch.validate();
    if (!(max_force > 0.0)) throw std::invalid_argument("max_force must be positive");
    if (!(min_isi > 0.0)) throw std::invalid_argument("min_isi must be positive");
  }
};

/// Default A-D classes, fast to slow.
inline std::vector<MotorUnitClass> default_classes() {
  return {MotorUnitClass::make("A", {0.1, 20.0}), MotorUnitClass::make("B", {0.1, 50.0}),
          MotorUnitClass::make("C", {0.1, 70.0}), MotorUnitClass::make("D", {0.1, 100.0})};
}

struct StimulusTrain {
  std::vector<double> times;  ///< ms, strictly ascending

  StimulusTrain() = default;
  explicit StimulusTrain(std::vector<double> t) : times(std::move(t)) { validate(); }

  void validate() const {
    for (std::size_t i = 1; i < times.size(); ++i)
      if (!(times[i] > times[i - 1]))
        throw std::invalid_argument("stimulus times must be strictly ascending");
  }

  bool respects_isi(double min_isi) const {
    for (std::size_t i = 1; i < times.size(); ++i)
      if (times[i] - times[i - 1] < min_isi - 1e-9) return false;
    return true;
  }

  std::size_t size() const noexcept { return times.size(); }
  bool empty() const noexcept { return times.empty(); }
};

/// Wave summation over all stimuli at or before t.
inline double mu_force_pre_cap(const StimulusTrain& train, const TwitchParams& p, double t) {
  double sum = 0.0;
  const auto end = std::upper_bound(train.times.begin(), train.times.end(), t);
  for (auto it = train.times.begin(); it != end; ++it) sum += twitch_force(p, t - *it);
  return sum;
}

inline double mu_force(const StimulusTrain& train, const MotorUnitClass& c, double t) {
  if (!train.respects_isi(c.min_isi))
    throw IsiViolation("stimulus train violates min_isi of class " + c.label);
  return std::min(mu_force_pre_cap(train, c.twitch, t), c.max_force);
}

// ---------------------------------------------------------------------------
// Muscle agent
// ---------------------------------------------------------------------------

struct LengthForceCurve {
  std::vector<std::pair<double, double>> knots;

  static LengthForceCurve tent() { return {{{0.5, 0.0}, {1.0, 1.0}, {1.5, 0.0}}}; }

  void validate() const {
    if (knots.empty()) throw std::invalid_argument("length-force curve needs knots");
    int unit = 0;
    for (std::size_t i = 0; i < knots.size(); ++i) {
      if (i > 0 && !(knots[i].first > knots[i - 1].first))
        throw std::invalid_argument("length-force knots must be strictly increasing");
      if (knots[i].second < 0.0 || knots[i].second > 1.0)
        throw std::invalid_argument("length-force factor outside [0, 1]");
      if (knots[i].second == 1.0) ++unit;
    }
    if (unit != 1) throw std::invalid_argument("exactly one knot must reach factor 1");
  }
};

inline double length_force_factor(const LengthForceCurve& curve, double l) {
  if (!(l > 0.0)) throw std::invalid_argument("length ratio must be positive");
  const auto& k = curve.knots;
  if (k.empty() || l < k.front().first || l > k.back().first) return 0.0;
  for (std::size_t i = 0; i < k.size(); ++i) {
    if (l == k[i].first) return k[i].second;
    if (i + 1 < k.size() && l < k[i + 1].first) {
      const double u = (l - k[i].first) / (k[i + 1].first - k[i].first);
      return k[i].second + u * (k[i + 1].second - k[i].second);
    }
  }
  return k.back().second;
}

struct MuscleUnit {
  MotorUnitClass cls;
  int count = 1;
  StimulusTrain train;
};

struct MuscleAgent {
  std::string name;
  double f_p0 = 0.0;
  LengthForceCurve curve = LengthForceCurve::tent();
  std::vector<MuscleUnit> units;
  double length_ratio = 1.0;

  void validate() const {
    if (f_p0 < 0.0) throw std::invalid_argument("f_p0 must be nonnegative");
    if (!(length_ratio > 0.0)) throw std::invalid_argument("length ratio must be positive");
    curve.validate();
    for (const auto& u : units) {
      u.cls.validate();
      u.train.validate();
      if (u.count < 0) throw std::invalid_argument("unit count must be nonnegative");
    }
  }
};

inline double active_force(const MuscleAgent& m, double t) {
  double sum = 0.0;
  for (const auto& u : m.units) sum += u.count * mu_force(u.train, u.cls, t);
  if (sum == 0.0) return 0.0;
  return length_force_factor(m.curve, m.length_ratio) * sum;
}

inline double passive_force(const MuscleAgent& m) {
  if (!(m.length_ratio > 0.0)) throw std::invalid_argument("length ratio must be positive");
  return std::max(m.f_p0 * std::exp(m.length_ratio - 1.0), 0.0);
}

inline double total_force(const MuscleAgent& m, double t) {
  return active_force(m, t) + passive_force(m);
}

// ---------------------------------------------------------------------------
// Streaming evaluation with history pruning
// ---------------------------------------------------------------------------

/// Forward-in-time evaluator over an agent's trains. Stimuli whose remaining
/// contribution has decayed below epsilon are dropped, so each evaluation
/// costs O(live stimuli). The agent must outlive the handle.
class PrunedMuscle {
public:
  PrunedMuscle(const MuscleAgent& m, double epsilon) : m_(&m), eps_(epsilon) {
    if (epsilon < 0.0) throw std::invalid_argument("epsilon must be nonnegative");
    cursors_.resize(m.units.size());
    peak_time_.reserve(m.units.size());
    for (const auto& u : m.units) peak_time_.push_back(twitch_peak_time(u.cls.twitch));
  }

  void advance(double t) {
    if (t < t_) throw NonMonotonicTime("evaluation time moved backwards");
    t_ = t;
    for (std::size_t i = 0; i < cursors_.size(); ++i) {
      const auto& times = m_->units[i].train.times;
      const auto& tw = m_->units[i].cls.twitch;
      auto& c = cursors_[i];
      while (c.next < times.size() && times[c.next] <= t) ++c.next;
      while (c.first < c.next) {
        const double age = t - times[c.first];
        // past the peak a twitch only decays, so its current value bounds the rest
        if (age >= peak_time_[i] && twitch_force(tw, age) < eps_) {
          ++c.first;
          ++pruned_;
        } else {
          break;
        }
      }
    }
  }

  double time() const noexcept { return t_; }

  double unit_pre_cap(std::size_t i) const {
    const auto& times = m_->units[i].train.times;
    const auto& tw = m_->units[i].cls.twitch;
    double sum = 0.0;
    for (std::size_t k = cursors_[i].first; k < cursors_[i].next; ++k)
      sum += twitch_force(tw, t_ - times[k]);
    return sum;
  }

  double unit_force(std::size_t i) const {
    return std::min(unit_pre_cap(i), m_->units[i].cls.max_force);
  }

  double active_force() const {
    double sum = 0.0;
    for (std::size_t i = 0; i < cursors_.size(); ++i)
      sum += m_->units[i].count * unit_force(i);
    if (sum == 0.0) return 0.0;
    return length_force_factor(m_->curve, m_->length_ratio) * sum;
  }

  double total_force() const { return active_force() + passive_force(*m_); }

  std::size_t live_stimuli() const noexcept {
    std::size_t n = 0;
    for (const auto& c : cursors_) n += c.next - c.first;
    return n;
  }

  std::size_t pruned_stimuli() const noexcept { return pruned_; }

private:
  struct Cursor {
    std::size_t first = 0;
    std::size_t next = 0;
  };
  const MuscleAgent* m_;
  double eps_;
  double t_ = -std::numeric_limits<double>::infinity();
  std::vector<Cursor> cursors_;
  std::vector<double> peak_time_;
  std::size_t pruned_ = 0;
};

inline PrunedMuscle advance_and_prune(const MuscleAgent& m, double t, double epsilon) {
  PrunedMuscle h(m, epsilon);
  h.advance(t);
  return h;
}

}  // namespace musim
