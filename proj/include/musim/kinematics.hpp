// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "musim/errors.hpp"

namespace musim {

inline constexpr double kGravity = 9.81;

inline double deg2rad(double d) { return d * std::numbers::pi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / std::numbers::pi; }

enum class Joint { Hip, Knee, Ankle };

inline const char* joint_name(Joint j) {
  switch (j) {
    case Joint::Hip: return "hip";
    case Joint::Knee: return "knee";
    case Joint::Ankle: return "ankle";
  }
  return "?";
}

/// One gait cycle of a joint angle, radians, uniformly sampled and periodic.
/// Hip and knee are flexion-positive, the ankle is dorsiflexion-positive.
struct JointAngleTrace {
  Joint joint = Joint::Hip;
  std::vector<double> samples;
  double cycle_ms = 1000.0;

  std::size_t size() const noexcept { return samples.size(); }
  double dt_s() const { return cycle_ms / 1000.0 / static_cast<double>(samples.size()); }

  void validate() const {
    if (samples.size() < 3) throw GridError("a joint trace needs at least 3 samples");
    if (!(cycle_ms > 0.0)) throw std::invalid_argument("cycle duration must be positive");
  }
};

struct ScalarTrace {
  std::vector<double> values;
  std::string unit;
  double cycle_ms = 1000.0;

  std::size_t size() const noexcept { return values.size(); }
};

inline void require_same_grid(std::size_t a, std::size_t b, const char* what) {
  if (a != b) throw GridMismatch(std::string("grid mismatch: ") + what);
}

namespace detail {
inline std::vector<double> central_difference(const std::vector<double>& x, double dt) {
  const std::size_t n = x.size();
  std::vector<double> d(n);
  for (std::size_t k = 0; k < n; ++k) d[k] = (x[(k + 1) % n] - x[(k + n - 1) % n]) / (2.0 * dt);
  return d;
}
}  // namespace detail

inline ScalarTrace angular_velocity(const JointAngleTrace& trace) {
  trace.validate();
  return {detail::central_difference(trace.samples, trace.dt_s()), "rad/s", trace.cycle_ms};
}

inline ScalarTrace angular_acceleration(const ScalarTrace& omega) {
  if (omega.size() < 3) throw GridError("a trace needs at least 3 samples");
  const double dt = omega.cycle_ms / 1000.0 / static_cast<double>(omega.size());
  return {detail::central_difference(omega.values, dt), "rad/s^2", omega.cycle_ms};
}

inline ScalarTrace angular_acceleration(const JointAngleTrace& trace) {
  return angular_acceleration(angular_velocity(trace));
}

inline double torque_from_force(double f, double d) {
  if (d < 0.0) throw std::invalid_argument("moment arm must be nonnegative");
  return f * d;
}

inline double torque_from_inertia(double i, double alpha) {
  if (!(i > 0.0)) throw std::invalid_argument("moment of inertia must be positive");
  return i * alpha;
}

// ---------------------------------------------------------------------------
// Anthropometry
// ---------------------------------------------------------------------------

struct LeverArms {
  double triceps_surae = 0.05;
  double dorsiflexor = 0.04;
  double quadriceps = 0.045;
  double hamstring = 0.04;
  double gluteus_maximus = 0.07;
  double iliopsoas = 0.05;
  double quadriceps_hip = 0.035;  ///< rectus femoris about the hip
  double hamstring_hip = 0.06;
};

struct BodyParams {
  double total_mass = 70.0;
  double foot_mass = 0.0145 * 70.0;
  double shank_mass = 0.0465 * 70.0;
  double thigh_mass = 0.100 * 70.0;
  double thigh_length = 0.43;
  double shank_length = 0.43;
  double thigh_com_ratio = 0.433;  ///< from the hip
  double shank_com_ratio = 0.433;  ///< from the knee
  double foot_com_offset = 0.07;   ///< forward of the ankle
  double heel_offset = 0.05;       ///< behind the ankle
  double toe_offset = 0.16;        ///< forward of the ankle
  double inertia_hip = 1.0;
  double inertia_knee = 0.35;
  double inertia_ankle = 0.012;
  double trunk_com_offset = -0.03;  ///< horizontal, from the hip; negative is posterior
  double trunk_com_height = 0.30;
  double trunk_lean = 0.0;  ///< rad, forward positive
  LeverArms levers;

  static BodyParams standard(double mass = 70.0) {
    BodyParams b;
    b.total_mass = mass;
    b.foot_mass = 0.0145 * mass;
    b.shank_mass = 0.0465 * mass;
    b.thigh_mass = 0.100 * mass;
    return b;
  }

  double leg_mass() const { return foot_mass + shank_mass + thigh_mass; }
  double foot_weight() const { return foot_mass * kGravity; }
  double body_weight() const { return total_mass * kGravity; }

  /// Masses and moments of inertia multiplied by f.
  BodyParams scaled_mass(double f) const {
    BodyParams b = *this;
    b.total_mass *= f;
    b.foot_mass *= f;
    b.shank_mass *= f;
    b.thigh_mass *= f;
    b.inertia_hip *= f;
    b.inertia_knee *= f;
    b.inertia_ankle *= f;
    return b;
  }

  void validate() const {
    const double m[] = {total_mass, foot_mass, shank_mass, thigh_mass};
    for (double v : m)
      if (v < 0.0) throw std::invalid_argument("masses must be nonnegative");
    if (total_mass > 0.0 && !(2.0 * leg_mass() < total_mass))
      throw std::invalid_argument("two legs must weigh less than the body");
    const double pos[] = {thigh_length, shank_length, thigh_com_ratio, shank_com_ratio,
                          foot_com_offset, heel_offset, toe_offset, inertia_hip,
                          inertia_knee, inertia_ankle, levers.triceps_surae,
                          levers.dorsiflexor, levers.quadriceps, levers.hamstring,
                          levers.gluteus_maximus, levers.iliopsoas, levers.quadriceps_hip,
                          levers.hamstring_hip};
    for (double v : pos)
      if (!(v > 0.0)) throw std::invalid_argument("segment geometry and inertia must be positive");
  }
};

// ---------------------------------------------------------------------------
// Gait phase and ground reaction
// ---------------------------------------------------------------------------

enum class GaitPhase { Stance, Swing };

inline double cycle_fraction(std::size_t k, std::size_t n) {
  return static_cast<double>(k) / static_cast<double>(n);
}

inline GaitPhase gait_phase(std::size_t k, std::size_t n, double stance_fraction = 0.6) {
  if (n == 0 || k >= n) throw std::out_of_range("sample index outside grid");
  return cycle_fraction(k, n) < stance_fraction ? GaitPhase::Stance : GaitPhase::Swing;
}

enum class GrfProfile { Static, DoubleHump };

inline GrfProfile parse_grf_profile(const std::string& id) {
  if (id == "static") return GrfProfile::Static;
  if (id == "double-hump") return GrfProfile::DoubleHump;
  throw UnknownProfile("unknown ground reaction profile '" + id + "'");
}

inline const char* grf_profile_name(GrfProfile p) {
  return p == GrfProfile::Static ? "static" : "double-hump";
}

struct GrfTrace {
  std::vector<double> force;  ///< vertical, N
  std::vector<bool> heel_on_ground;
  std::vector<bool> toes_on_ground;
  double stance_fraction = 0.6;

  std::size_t size() const noexcept { return force.size(); }
  bool in_contact(std::size_t k) const { return heel_on_ground[k] || toes_on_ground[k]; }
};

/// Double-hump stance shape in body weights over stance progress u in [0, 1):
/// smoothstep segments through 0, 1.1, 0.8, 1.1, 0 at u = 0, 1/6, 1/2, 5/6, 1.
inline double double_hump_shape(double u) {
  static constexpr double ku[] = {0.0, 1.0 / 6.0, 0.5, 5.0 / 6.0, 1.0};
  static constexpr double kv[] = {0.0, 1.1, 0.8, 1.1, 0.0};
  if (u <= 0.0 || u >= 1.0) return 0.0;
  for (int i = 0; i < 4; ++i) {
    if (u < ku[i + 1]) {
      const double s = (u - ku[i]) / (ku[i + 1] - ku[i]);
      return kv[i] + (kv[i + 1] - kv[i]) * s * s * (3.0 - 2.0 * s);
    }
  }
  return 0.0;
}

inline GrfTrace ground_reaction(const BodyParams& body, GrfProfile profile, std::size_t n,
                                double stance_fraction = 0.6) {
  if (n < 3) throw GridError("ground reaction needs at least 3 samples");
  if (!(stance_fraction > 0.0 && stance_fraction < 1.0))
    throw std::invalid_argument("stance fraction must lie in (0, 1)");
  GrfTrace g;
  g.stance_fraction = stance_fraction;
  g.force.assign(n, 0.0);
  g.heel_on_ground.assign(n, false);
  g.toes_on_ground.assign(n, false);
  const double bw = body.body_weight();
  for (std::size_t k = 0; k < n; ++k) {
    const double p = cycle_fraction(k, n);
    if (p >= stance_fraction) continue;
    g.force[k] = profile == GrfProfile::Static ? bw : bw * double_hump_shape(p / stance_fraction);
    g.heel_on_ground[k] = true;
    g.toes_on_ground[k] = p >= 0.05;
  }
  return g;
}

inline GrfTrace ground_reaction(const BodyParams& body, const std::string& profile,
                                std::size_t n, double stance_fraction = 0.6) {
  return ground_reaction(body, parse_grf_profile(profile), n, stance_fraction);
}

// ---------------------------------------------------------------------------
// Planar leg geometry
// ---------------------------------------------------------------------------

/// Horizontal positions (m, forward positive) relative to the hip.
struct SegmentPose {
  double thigh_angle = 0.0;  ///< from vertical, forward positive
  double shank_angle = 0.0;
  double foot_pitch = 0.0;  ///< toe-up positive
  double x_knee = 0.0;
  double x_ankle = 0.0;
  double x_heel = 0.0;
  double x_toe = 0.0;
  double x_foot_com = 0.0;
  double x_shank_com = 0.0;
  double x_thigh_com = 0.0;
  double x_leg_com = 0.0;
};

inline SegmentPose segment_pose(double hip, double knee, double ankle, const BodyParams& b) {
  SegmentPose s;
  s.thigh_angle = hip;
  s.shank_angle = hip - knee;
  s.foot_pitch = s.shank_angle + ankle;
  s.x_knee = b.thigh_length * std::sin(s.thigh_angle);
  s.x_ankle = s.x_knee + b.shank_length * std::sin(s.shank_angle);
  const double c = std::cos(s.foot_pitch);
  s.x_heel = s.x_ankle - b.heel_offset * c;
  s.x_toe = s.x_ankle + b.toe_offset * c;
  s.x_foot_com = s.x_ankle + b.foot_com_offset * c;
  s.x_shank_com = s.x_knee + b.shank_com_ratio * b.shank_length * std::sin(s.shank_angle);
  s.x_thigh_com = b.thigh_com_ratio * b.thigh_length * std::sin(s.thigh_angle);
  const double ml = b.leg_mass();
  s.x_leg_com = ml > 0.0 ? (b.thigh_mass * s.x_thigh_com + b.shank_mass * s.x_shank_com +
                            b.foot_mass * s.x_foot_com) / ml
                         : 0.0;
  return s;
}

struct LegTraces {
  JointAngleTrace hip{Joint::Hip, {}, 1000.0};
  JointAngleTrace knee{Joint::Knee, {}, 1000.0};
  JointAngleTrace ankle{Joint::Ankle, {}, 1000.0};

  std::size_t size() const noexcept { return hip.size(); }
  double cycle_ms() const noexcept { return hip.cycle_ms; }

  void validate() const {
    hip.validate();
    knee.validate();
    ankle.validate();
    require_same_grid(hip.size(), knee.size(), "hip vs knee");
    require_same_grid(hip.size(), ankle.size(), "hip vs ankle");
    if (hip.cycle_ms != knee.cycle_ms || hip.cycle_ms != ankle.cycle_ms)
      throw GridMismatch("joint traces disagree on cycle duration");
  }
};

inline std::vector<SegmentPose> leg_pose(const LegTraces& leg, const BodyParams& b) {
  leg.validate();
  std::vector<SegmentPose> out(leg.size());
  for (std::size_t k = 0; k < leg.size(); ++k)
    out[k] = segment_pose(leg.hip.samples[k], leg.knee.samples[k], leg.ankle.samples[k], b);
  return out;
}

// ---------------------------------------------------------------------------
// Foot contact and centre of pressure
// ---------------------------------------------------------------------------

struct ContactModel {
  enum class Kind { Phase, Kinematic };
  Kind kind = Kind::Kinematic;
  double toe_pitch_max = deg2rad(3.0);    ///< toes touch at or below this pitch
  double heel_pitch_min = deg2rad(-3.0);  ///< heel touches at or above this pitch
};

/// Replaces the phase contact flags of g by flags derived from foot pitch.
inline void apply_foot_contact(GrfTrace& g, const std::vector<SegmentPose>& pose,
                               const ContactModel& cm) {
  require_same_grid(g.size(), pose.size(), "ground reaction vs pose");
  if (cm.kind == ContactModel::Kind::Phase) return;
  const std::size_t n = g.size();
  for (std::size_t k = 0; k < n; ++k) {
    const bool stance = cycle_fraction(k, n) < g.stance_fraction;
    g.toes_on_ground[k] = stance && pose[k].foot_pitch <= cm.toe_pitch_max + 1e-12;
    g.heel_on_ground[k] = stance && pose[k].foot_pitch >= cm.heel_pitch_min - 1e-12;
  }
}

/// Heel-to-toe position in [0, 1] of the centre of pressure.
inline double cop_fraction(const GrfTrace& g, std::size_t k) {
  const bool heel = g.heel_on_ground[k], toes = g.toes_on_ground[k];
  if (heel && toes)
    return std::clamp(cycle_fraction(k, g.size()) / g.stance_fraction, 0.0, 1.0);
  return toes ? 1.0 : 0.0;
}

inline double cop_x(const GrfTrace& g, std::size_t k, const SegmentPose& s) {
  return s.x_heel + (s.x_toe - s.x_heel) * cop_fraction(g, k);
}

}  // namespace musim
