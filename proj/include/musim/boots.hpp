// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "musim/kinematics.hpp"

// Sign conventions: ankle moments are plantarflexion-positive, knee and hip
// moments are extension-positive. Total joint torques follow from the angle
// traces as -I * alpha because the angles are flexion/dorsiflexion-positive.

namespace musim {

enum class Muscle { TricepsSurae, Dorsiflexor, Quadriceps, Hamstring, GluteusMaximus, Iliopsoas };

inline constexpr std::array<Muscle, 6> kAllMuscles = {
    Muscle::TricepsSurae, Muscle::Dorsiflexor,    Muscle::Quadriceps,
    Muscle::Hamstring,    Muscle::GluteusMaximus, Muscle::Iliopsoas};

inline const char* muscle_name(Muscle m) {
  switch (m) {
    case Muscle::TricepsSurae: return "triceps_surae";
    case Muscle::Dorsiflexor: return "dorsiflexor";
    case Muscle::Quadriceps: return "quadriceps";
    case Muscle::Hamstring: return "hamstring";
    case Muscle::GluteusMaximus: return "gluteus_maximus";
    case Muscle::Iliopsoas: return "iliopsoas";
  }
  return "?";
}

inline bool parse_muscle(const std::string& s, Muscle& out) {
  for (Muscle m : kAllMuscles)
    if (s == muscle_name(m)) {
      out = m;
      return true;
    }
  return false;
}

struct MuscleForceTrace {
  Muscle muscle = Muscle::TricepsSurae;
  std::vector<double> values;    ///< N, >= 0
  std::vector<double> residual;  ///< clamped opposite-sign demand, N, >= 0

  std::size_t size() const noexcept { return values.size(); }
  double peak() const {
    return values.empty() ? 0.0 : *std::max_element(values.begin(), values.end());
  }
};

// ---------------------------------------------------------------------------
// Joint balances
// ---------------------------------------------------------------------------

struct AnkleBalance {
  std::vector<double> total_torque;
  std::vector<double> moment_feet;
  std::vector<double> moment_ground;
  std::vector<double> demand;  ///< plantarflexor torque still required
};

struct KneeBalance {
  std::vector<double> total_torque;
  std::vector<double> moment_ground;
  std::vector<double> moment_shank;
  std::vector<double> part1;         ///< extensor torque required at the knee
  std::vector<double> upper_body_x;  ///< upper-body centre of mass, from the hip
  std::vector<double> upper_body_load;
  std::vector<double> part2;  ///< hip torque from the upper body, rectus-femoris positive
};

struct HipBalance {
  std::vector<double> total_torque;
  std::vector<double> moment_ground;
  std::vector<double> moment_leg;
  std::vector<double> demand;          ///< extensor torque required at the hip
  std::vector<double> gluteal_torque;  ///< demand left after the biarticular muscles
};

namespace detail {

inline void check_inputs(const LegTraces& leg, const GrfTrace& grf) {
  leg.validate();
  require_same_grid(leg.size(), grf.size(), "angles vs ground reaction");
  if (grf.heel_on_ground.size() != grf.size() || grf.toes_on_ground.size() != grf.size())
    throw GridMismatch("contact flags do not match the ground reaction grid");
}

inline std::vector<double> total_torque(const JointAngleTrace& t, double inertia) {
  auto a = angular_acceleration(t).values;
  for (double& v : a) v = -inertia * v;
  return a;
}

inline MuscleForceTrace split(Muscle m, const std::vector<double>& demand, double lever) {
  MuscleForceTrace out{m, std::vector<double>(demand.size()), std::vector<double>(demand.size())};
  for (std::size_t k = 0; k < demand.size(); ++k) {
    out.values[k] = std::max(demand[k], 0.0) / lever;
    out.residual[k] = std::max(-demand[k], 0.0) / lever;
  }
  return out;
}

}  // namespace detail

inline AnkleBalance ankle_balance(const LegTraces& leg, const BodyParams& b, const GrfTrace& grf) {
  detail::check_inputs(leg, grf);
  const auto pose = leg_pose(leg, b);
  const std::size_t n = leg.size();
  AnkleBalance r;
  r.total_torque = detail::total_torque(leg.ankle, b.inertia_ankle);
  r.moment_feet.resize(n);
  r.moment_ground.resize(n);
  r.demand.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto& s = pose[k];
    r.moment_feet[k] = (s.x_foot_com - s.x_ankle) * b.foot_mass * kGravity;
    r.moment_ground[k] = grf.force[k] > 0.0 ? -(cop_x(grf, k, s) - s.x_ankle) * grf.force[k] : 0.0;
    r.demand[k] = r.total_torque[k] - (r.moment_feet[k] + r.moment_ground[k]);
  }
  return r;
}

inline KneeBalance knee_balance(const LegTraces& leg, const BodyParams& b, const GrfTrace& grf) {
  detail::check_inputs(leg, grf);
  const auto pose = leg_pose(leg, b);
  const std::size_t n = leg.size();
  KneeBalance r;
  r.total_torque = detail::total_torque(leg.knee, b.inertia_knee);
  r.moment_ground.resize(n);
  r.moment_shank.resize(n);
  r.part1.resize(n);
  r.upper_body_x.resize(n);
  r.upper_body_load.resize(n);
  r.part2.resize(n);
  const double m_leg = b.leg_mass();
  const double m_hat = b.total_mass - 2.0 * m_leg;
  const double m_upper = m_hat + m_leg;
  const double x_trunk =
      b.trunk_com_offset * std::cos(b.trunk_lean) + b.trunk_com_height * std::sin(b.trunk_lean);
  for (std::size_t k = 0; k < n; ++k) {
    const auto& s = pose[k];
    r.moment_ground[k] = grf.force[k] > 0.0 ? (cop_x(grf, k, s) - s.x_knee) * grf.force[k] : 0.0;
    r.moment_shank[k] = (s.x_shank_com - s.x_knee) * (-b.shank_mass * kGravity);
    r.part1[k] = r.total_torque[k] - (r.moment_ground[k] + r.moment_shank[k]);

    // the other leg is half a cycle out of phase
    const auto& o = pose[(k + n / 2) % n];
    r.upper_body_x[k] = m_upper > 0.0 ? (m_hat * x_trunk + m_leg * o.x_leg_com) / m_upper : 0.0;
    r.upper_body_load[k] = b.total_mass > 0.0 ? grf.force[k] * m_upper / b.total_mass : 0.0;
    r.part2[k] = -r.upper_body_x[k] * r.upper_body_load[k];
  }
  return r;
}

// ---------------------------------------------------------------------------
// Ankle: triceps surae and dorsiflexor
// ---------------------------------------------------------------------------

inline MuscleForceTrace boots_a(const LegTraces& leg, const BodyParams& b, const GrfTrace& grf) {
  return detail::split(Muscle::TricepsSurae, ankle_balance(leg, b, grf).demand,
                       b.levers.triceps_surae);
}

/// Light-or-no ground load: foot weight and inertia only.
inline MuscleForceTrace boots_b_phase1(const LegTraces& leg, const BodyParams& b,
                                      const GrfTrace& grf) {
  const auto bal = ankle_balance(leg, b, grf);
  const std::size_t n = leg.size();
  MuscleForceTrace out{Muscle::Dorsiflexor, std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  const double w = b.foot_weight();
  for (std::size_t k = 0; k < n; ++k) {
    if (!(grf.force[k] < w)) continue;
    const double dem = -(bal.total_torque[k] - bal.moment_feet[k]);
    out.values[k] = std::max(dem, 0.0) / b.levers.dorsiflexor;
    out.residual[k] = std::max(-dem, 0.0) / b.levers.dorsiflexor;
  }
  return out;
}

/// Loaded foot with the toes off the ground: the load sits on the heel.
inline MuscleForceTrace boots_b_phase2(const LegTraces& leg, const BodyParams& b,
                                      const GrfTrace& grf) {
  const auto bal = ankle_balance(leg, b, grf);
  const auto pose = leg_pose(leg, b);
  const std::size_t n = leg.size();
  MuscleForceTrace out{Muscle::Dorsiflexor, std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  const double w = b.foot_weight();
  for (std::size_t k = 0; k < n; ++k) {
    if (grf.toes_on_ground[k] || grf.force[k] < w) continue;
    const double m_heel = (pose[k].x_ankle - pose[k].x_heel) * grf.force[k];
    const double dem = -(bal.total_torque[k] - bal.moment_feet[k] - m_heel);
    out.values[k] = std::max(dem, 0.0) / b.levers.dorsiflexor;
    out.residual[k] = std::max(-dem, 0.0) / b.levers.dorsiflexor;
  }
  return out;
}

inline MuscleForceTrace boots_b(const LegTraces& leg, const BodyParams& b, const GrfTrace& grf) {
  auto p1 = boots_b_phase1(leg, b, grf);
  const auto p2 = boots_b_phase2(leg, b, grf);
  for (std::size_t k = 0; k < p1.size(); ++k) {
    p1.values[k] += p2.values[k];
    p1.residual[k] += p2.residual[k];
  }
  return p1;
}

// ---------------------------------------------------------------------------
// Knee: quadriceps and hamstring
// ---------------------------------------------------------------------------

namespace detail {
// Each part is clamped on its own, so one muscle of the pair can be driven by
// the knee part while the other is driven by the hip part.
inline MuscleForceTrace two_part(Muscle m, const KneeBalance& kb, double sign, double lever_knee,
                                 double lever_hip) {
  const std::size_t n = kb.part1.size();
  MuscleForceTrace out{m, std::vector<double>(n), std::vector<double>(n)};
  for (std::size_t k = 0; k < n; ++k) {
    const double a = sign * kb.part1[k], h = sign * kb.part2[k];
    out.values[k] = std::max(a, 0.0) / lever_knee + std::max(h, 0.0) / lever_hip;
    out.residual[k] = std::max(-a, 0.0) / lever_knee + std::max(-h, 0.0) / lever_hip;
  }
  return out;
}
}  // namespace detail

inline MuscleForceTrace boots_c(const LegTraces& leg, const BodyParams& b, const GrfTrace& grf) {
  return detail::two_part(Muscle::Quadriceps, knee_balance(leg, b, grf), 1.0, b.levers.quadriceps,
                          b.levers.quadriceps_hip);
}

inline MuscleForceTrace boots_d(const LegTraces& leg, const BodyParams& b, const GrfTrace& grf) {
  return detail::two_part(Muscle::Hamstring, knee_balance(leg, b, grf), -1.0, b.levers.hamstring,
                          b.levers.hamstring_hip);
}

// ---------------------------------------------------------------------------
// Hip: gluteus maximus and iliopsoas
// ---------------------------------------------------------------------------

inline HipBalance hip_balance(const LegTraces& leg, const BodyParams& b, const GrfTrace& grf) {
  detail::check_inputs(leg, grf);
  const auto pose = leg_pose(leg, b);
  const auto quad = boots_c(leg, b, grf);
  const auto ham = boots_d(leg, b, grf);
  const std::size_t n = leg.size();
  HipBalance r;
  r.total_torque = detail::total_torque(leg.hip, b.inertia_hip);
  r.moment_ground.resize(n);
  r.moment_leg.resize(n);
  r.demand.resize(n);
  r.gluteal_torque.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto& s = pose[k];
    r.moment_ground[k] = grf.force[k] > 0.0 ? -cop_x(grf, k, s) * grf.force[k] : 0.0;
    r.moment_leg[k] = s.x_leg_com * b.leg_mass() * kGravity;
    r.demand[k] = r.total_torque[k] - (r.moment_ground[k] + r.moment_leg[k]);
    r.gluteal_torque[k] = r.demand[k] - ham.values[k] * b.levers.hamstring_hip +
                          quad.values[k] * b.levers.quadriceps_hip;
  }
  return r;
}

inline MuscleForceTrace boots_e(const LegTraces& leg, const BodyParams& b, const GrfTrace& grf) {
  return detail::split(Muscle::GluteusMaximus, hip_balance(leg, b, grf).gluteal_torque,
                       b.levers.gluteus_maximus);
}

inline MuscleForceTrace boots_f(const LegTraces& leg, const BodyParams& b, const GrfTrace& grf) {
  auto t = hip_balance(leg, b, grf).gluteal_torque;
  for (double& v : t) v = -v;
  return detail::split(Muscle::Iliopsoas, t, b.levers.iliopsoas);
}

// ---------------------------------------------------------------------------
// Full report
// ---------------------------------------------------------------------------

struct BootsOptions {
  GrfProfile profile = GrfProfile::DoubleHump;
  double stance_fraction = 0.6;
  ContactModel contact;
};

struct BootsReport {
  GrfTrace grf;
  std::vector<SegmentPose> pose;
  AnkleBalance ankle;
  KneeBalance knee;
  HipBalance hip;
  std::array<MuscleForceTrace, 6> forces;

  const MuscleForceTrace& force(Muscle m) const { return forces[static_cast<std::size_t>(m)]; }
};

inline GrfTrace gait_ground_reaction(const LegTraces& leg, const BodyParams& b,
                                     const BootsOptions& opt) {
  auto grf = ground_reaction(b, opt.profile, leg.size(), opt.stance_fraction);
  apply_foot_contact(grf, leg_pose(leg, b), opt.contact);
  return grf;
}

inline BootsReport boots_all(const LegTraces& leg, const BodyParams& b,
                             const BootsOptions& opt = {}) {
  leg.validate();
  b.validate();
  BootsReport r;
  r.grf = gait_ground_reaction(leg, b, opt);
  r.pose = leg_pose(leg, b);
  r.ankle = ankle_balance(leg, b, r.grf);
  r.knee = knee_balance(leg, b, r.grf);
  r.hip = hip_balance(leg, b, r.grf);
  r.forces = {boots_a(leg, b, r.grf), boots_b(leg, b, r.grf), boots_c(leg, b, r.grf),
              boots_d(leg, b, r.grf), boots_e(leg, b, r.grf), boots_f(leg, b, r.grf)};
  return r;
}

}  // namespace musim
