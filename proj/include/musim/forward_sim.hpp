// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <stdexcept>
#include <vector>

#include "musim/boots.hpp"
#include "musim/kinematics.hpp"
#include "musim/muscle_model.hpp"
#include "musim/recruitment.hpp"

namespace musim {

/// One joint driven by a flexor and an extensor. Angles are flexion-positive
/// (dorsiflexion at the ankle); the extensor drives the angle down.
struct JointModel {
  Joint joint = Joint::Hip;
  double inertia = 1.0;  ///< kg m^2
  double lever_flexor = 0.05;
  double lever_extensor = 0.05;
  double theta_min = -1.0;
  double theta_max = 1.0;
  double theta_neutral = 0.0;
  double length_gain = 0.3;  ///< length-ratio change per rad
  MuscleAgent flexor;
  MuscleAgent extensor;
  double flexor_scale = 1.0;  ///< N per relative force unit
  double extensor_scale = 1.0;

  void validate() const {
    if (!(inertia > 0.0)) throw std::invalid_argument("joint inertia must be positive");
    if (!(lever_flexor > 0.0) || !(lever_extensor > 0.0))
      throw std::invalid_argument("lever arms must be positive");
    if (!(theta_min < theta_max)) throw std::invalid_argument("joint limits must satisfy min < max");
    flexor.validate();
    extensor.validate();
  }
};

struct SimpleLegModel {
  std::array<JointModel, 3> joints;  ///< hip, knee, ankle

  void validate() const {
    for (const auto& j : joints) j.validate();
  }
};

inline constexpr std::array<std::array<Muscle, 2>, 3> kJointMuscles = {{
    {Muscle::Iliopsoas, Muscle::GluteusMaximus},
    {Muscle::Hamstring, Muscle::Quadriceps},
    {Muscle::Dorsiflexor, Muscle::TricepsSurae},
}};  ///< {flexor, extensor} for hip, knee, ankle

/// Default leg built from anthropometry: inertias and lever arms of the body,
/// no passive tension, tent length-force curves.
inline SimpleLegModel default_leg_model(const BodyParams& b) {
  SimpleLegModel m;
  const auto& l = b.levers;
  m.joints[0] = {Joint::Hip, b.inertia_hip, l.iliopsoas, l.gluteus_maximus,
                 deg2rad(-30.0), deg2rad(120.0), 0.0, 0.3, {}, {}, 1.0, 1.0};
  m.joints[1] = {Joint::Knee, b.inertia_knee, l.hamstring, l.quadriceps,
                 deg2rad(-5.0), deg2rad(140.0), 0.0, 0.3, {}, {}, 1.0, 1.0};
  m.joints[2] = {Joint::Ankle, b.inertia_ankle, l.dorsiflexor, l.triceps_surae,
                 deg2rad(-50.0), deg2rad(30.0), 0.0, 0.3, {}, {}, 1.0, 1.0};
  for (std::size_t j = 0; j < 3; ++j) {
    m.joints[j].flexor.name = muscle_name(kJointMuscles[j][0]);
    m.joints[j].extensor.name = muscle_name(kJointMuscles[j][1]);
  }
  return m;
}

struct SimState {
  std::array<double, 3> theta{};  ///< rad
  std::array<double, 3> omega{};  ///< rad/s
  double t = 0.0;                 ///< ms
};

/// Loads a cyclic plan into an agent as trains repeated over [0, duration_ms].
inline void bind_plan(MuscleAgent& agent, double& scale, const StimulationPlan& plan,
                      double duration_ms) {
  agent.units.clear();
  scale = plan.newton_scale;
  const auto cycles = static_cast<std::size_t>(std::ceil(duration_ms / plan.cycle_ms)) + 1;
  for (const auto& u : plan.units) {
    MuscleUnit mu{plan.classes[u.cls], u.count, {}};
    for (std::size_t c = 0; c < cycles; ++c)
      for (double t : u.train.times) {
        const double at = t + static_cast<double>(c) * plan.cycle_ms;
        if (at <= duration_ms) mu.train.times.push_back(at);
      }
    agent.units.push_back(std::move(mu));
  }
}

/// Streaming force evaluation for the six muscles of a leg.
class LegDrive {
public:
  LegDrive(const SimpleLegModel& model, double epsilon) : model_(&model) {
    for (std::size_t j = 0; j < 3; ++j) {
      eval_[2 * j] = std::make_unique<PrunedMuscle>(model.joints[j].flexor, epsilon);
      eval_[2 * j + 1] = std::make_unique<PrunedMuscle>(model.joints[j].extensor, epsilon);
    }
  }

  /// Newtons of the flexor (side 0) or extensor (side 1) of joint j at time t.
  double force(std::size_t j, int side, double t) {
    auto& e = *eval_[2 * j + static_cast<std::size_t>(side)];
    e.advance(t);
    const auto& jm = model_->joints[j];
    return (side == 0 ? jm.flexor_scale : jm.extensor_scale) * e.total_force();
  }

  std::size_t live_stimuli() const {
    std::size_t n = 0;
    for (const auto& e : eval_) n += e->live_stimuli();
    return n;
  }

private:
  const SimpleLegModel* model_;
  std::array<std::unique_ptr<PrunedMuscle>, 6> eval_;
};

/// Semi-implicit Euler step. Muscle lengths follow the joint angles, so the
/// model's agents are updated in place. forces receives {flexor, extensor}
/// newtons per joint.
inline SimState step(SimpleLegModel& model, const SimState& s, LegDrive& drive, double dt_ms,
                     std::array<std::array<double, 2>, 3>* forces = nullptr) {
  if (!(dt_ms > 0.0)) throw std::invalid_argument("time step must be positive");
  SimState next = s;
  const double dt = dt_ms / 1000.0;
  for (std::size_t j = 0; j < 3; ++j) {
    auto& jm = model.joints[j];
    const double dl = jm.length_gain * (s.theta[j] - jm.theta_neutral);
    jm.flexor.length_ratio = std::max(1.0 - dl, 1e-3);
    jm.extensor.length_ratio = std::max(1.0 + dl, 1e-3);
    const double ff = drive.force(j, 0, s.t);
    const double fe = drive.force(j, 1, s.t);
    if (forces) (*forces)[j] = {ff, fe};
    const double tau_ext = torque_from_force(fe, jm.lever_extensor) -
                           torque_from_force(ff, jm.lever_flexor);
    const double alpha = -tau_ext / jm.inertia;
    next.omega[j] = s.omega[j] + alpha * dt;
    next.theta[j] = s.theta[j] + next.omega[j] * dt;
    if (next.theta[j] < jm.theta_min) {
      next.theta[j] = jm.theta_min;
      next.omega[j] = 0.0;
    } else if (next.theta[j] > jm.theta_max) {
      next.theta[j] = jm.theta_max;
      next.omega[j] = 0.0;
    }
  }
  next.t = s.t + dt_ms;
  return next;
}

struct SimOptions {
  double dt_ms = 1.0;
  double prune_epsilon = 1e-12;  ///< 0 keeps the whole stimulus history
  std::size_t grid = 20;
};

struct SimResult {
  LegTraces angles;  ///< last cycle window on the grid
  std::array<std::vector<double>, 6> forces;  ///< N, interval means, indexed by Muscle
  SimState final_state;
  std::size_t steps = 0;
};

/// Runs the leg for duration_ms under cyclically repeated plans and resamples
/// the final window of length min(duration, cycle) onto the grid.
inline SimResult simulate(const SimpleLegModel& base, const std::map<Muscle, StimulationPlan>& plans,
                          double duration_ms, const SimState& initial, const SimOptions& opt,
                          double cycle_ms = 1000.0) {
  if (!(opt.dt_ms > 0.0)) throw std::invalid_argument("time step must be positive");
  if (duration_ms < opt.dt_ms) throw std::invalid_argument("duration shorter than one step");
  if (opt.grid < 3) throw GridError("simulation grid needs at least 3 samples");
  SimpleLegModel model = base;
  for (std::size_t j = 0; j < 3; ++j)
    for (int side = 0; side < 2; ++side) {
      auto it = plans.find(kJointMuscles[j][static_cast<std::size_t>(side)]);
      if (it == plans.end()) continue;
      auto& jm = model.joints[j];
      if (side == 0)
        bind_plan(jm.flexor, jm.flexor_scale, it->second, duration_ms);
      else
        bind_plan(jm.extensor, jm.extensor_scale, it->second, duration_ms);
    }
  model.validate();
  LegDrive drive(model, opt.prune_epsilon);

  const double window = std::min(duration_ms, cycle_ms);
  const double w0 = duration_ms - window;
  const std::size_t n = opt.grid;
  const double dts = window / static_cast<double>(n);

  SimResult r;
  std::array<std::vector<double>, 3> ang;
  for (auto& a : ang) a.assign(n, 0.0);
  std::array<std::vector<double>, 6> fsum, fcnt;
  for (std::size_t m = 0; m < 6; ++m) {
    fsum[m].assign(n, 0.0);
    fcnt[m].assign(n, 0.0);
  }

  SimState s = initial;
  s.t = 0.0;
  std::size_t next_sample = 0;
  auto record_angles = [&](const SimState& a, const SimState& b) {
    while (next_sample < n) {
      const double ts = w0 + dts * static_cast<double>(next_sample);
      if (ts > b.t + 1e-9) break;
      const double u = b.t > a.t ? std::clamp((ts - a.t) / (b.t - a.t), 0.0, 1.0) : 1.0;
      for (std::size_t j = 0; j < 3; ++j)
        ang[j][next_sample] = a.theta[j] + u * (b.theta[j] - a.theta[j]);
      ++next_sample;
    }
  };
  if (w0 <= 0.0) record_angles(s, s);

  std::array<std::array<double, 2>, 3> f{};
  const auto nsteps = static_cast<std::size_t>(std::llround(duration_ms / opt.dt_ms));
  for (std::size_t i = 0; i < nsteps; ++i) {
    SimState nx = step(model, s, drive, opt.dt_ms, &f);
    if (s.t >= w0 - 1e-9) {
      const auto k = std::min(n - 1, static_cast<std::size_t>((s.t - w0) / dts + 1e-9));
      for (std::size_t j = 0; j < 3; ++j)
        for (std::size_t side = 0; side < 2; ++side) {
          const auto m = static_cast<std::size_t>(kJointMuscles[j][side]);
          fsum[m][k] += f[j][side];
          fcnt[m][k] += 1.0;
        }
    }
    record_angles(s, nx);
    s = nx;
  }
  for (; next_sample < n; ++next_sample)
    for (std::size_t j = 0; j < 3; ++j) ang[j][next_sample] = s.theta[j];

  r.angles.hip = {Joint::Hip, ang[0], window};
  r.angles.knee = {Joint::Knee, ang[1], window};
  r.angles.ankle = {Joint::Ankle, ang[2], window};
  for (std::size_t m = 0; m < 6; ++m) {
    r.forces[m].resize(n);
    for (std::size_t k = 0; k < n; ++k)
      r.forces[m][k] = fcnt[m][k] > 0.0 ? fsum[m][k] / fcnt[m][k] : 0.0;
  }
  r.final_state = s;
  r.steps = nsteps;
  return r;
}

}  // namespace musim
