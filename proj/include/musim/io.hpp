// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "json.hpp"
#include "musim/boots.hpp"
#include "musim/errors.hpp"
#include "musim/forward_sim.hpp"
#include "musim/kinematics.hpp"
#include "musim/muscle_model.hpp"
#include "musim/recruitment.hpp"

namespace musim {

using json = nlohmann::json;

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kAngleHeader = "cycle_pct,hip_deg,knee_deg,ankle_deg";
inline constexpr const char* kForceHeader = "cycle_pct,force_n,residual_n";

// ---------------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------------

/// Six significant digits.
inline std::string fmt6(double v) {
  if (v == 0.0) return "0";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

inline double round6(double v) { return std::stod(fmt6(v)); }

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Writes to a sibling temporary and renames it over the target.
inline void atomic_write(const std::filesystem::path& p, const std::string& content) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (p.has_parent_path()) fs::create_directories(p.parent_path(), ec);
  const fs::path tmp = p.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  fs::rename(tmp, p, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot move output into place: " + p.string());
  }
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

namespace detail {

inline std::string trim(std::string s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, ',')) out.push_back(trim(cur));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline double parse_number(const std::string& s, std::size_t line) {
  double v = 0.0;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  if (!s.empty() && *b == '+') ++b;
  const auto [ptr, ec] = std::from_chars(b, e, v);
  if (s.empty() || ec != std::errc() || ptr != e || !std::isfinite(v))
    throw ParseError("line " + std::to_string(line) + ": not a number: '" + s + "'");
  return v;
}

/// Rows of numeric columns after an exact header line.
inline std::vector<std::vector<double>> parse_table(const std::string& text,
                                                    const std::string& header) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  bool seen_header = false;
  const std::size_t ncol = split_csv(header).size();
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty()) continue;
    if (!seen_header) {
      if (line != header)
        throw ParseError("expected header '" + header + "', found '" + line + "'");
      seen_header = true;
      continue;
    }
    const auto cells = split_csv(line);
    if (cells.size() != ncol)
      throw ParseError("line " + std::to_string(lineno) + ": expected " + std::to_string(ncol) +
                       " fields");
    std::vector<double> row;
    for (const auto& c : cells) row.push_back(parse_number(c, lineno));
    rows.push_back(std::move(row));
  }
  if (!seen_header) throw ParseError("missing header '" + header + "'");
  return rows;
}

inline double periodic_interp(const std::vector<double>& x, const std::vector<double>& y,
                              double xq, double period) {
  const std::size_t n = x.size();
  auto it = std::upper_bound(x.begin(), x.end(), xq);
  const std::size_t hi = static_cast<std::size_t>(it - x.begin());
  const std::size_t i1 = hi % n;
  const std::size_t i0 = (hi + n - 1) % n;
  double x0 = x[i0], x1 = x[i1];
  if (hi == 0) x0 -= period;
  if (hi == n) x1 += period;
  const double u = (xq - x0) / (x1 - x0);
  return y[i0] + u * (y[i1] - y[i0]);
}

}  // namespace detail

/// Parses an angle table (degrees) into radian traces. With grid == 0 the
/// rows are kept when they already form a uniform grid; otherwise, and when
/// grid differs from the row count, values are periodically interpolated.
inline LegTraces parse_angles_text(const std::string& text, std::size_t grid = 0,
                                   double cycle_ms = 1000.0) {
  auto rows = detail::parse_table(text, kAngleHeader);
  if (rows.size() < 3) throw GridError("angle file needs at least 3 rows");
  for (const auto& r : rows)
    if (r[0] < 0.0 || r[0] >= 100.0) throw RangeError("cycle_pct outside [0, 100)");
  std::stable_sort(rows.begin(), rows.end(),
                   [](const auto& a, const auto& b) { return a[0] < b[0]; });
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (rows[i][0] == rows[i - 1][0]) throw ParseError("duplicate cycle_pct " + fmt6(rows[i][0]));

  const std::size_t m = rows.size();
  bool uniform = true;
  for (std::size_t i = 0; i < m; ++i)
    if (std::fabs(rows[i][0] - 100.0 * static_cast<double>(i) / static_cast<double>(m)) > 1e-6)
      uniform = false;
  const std::size_t n = grid == 0 ? m : grid;
  if (n < 3) throw GridError("grid needs at least 3 samples");

  std::vector<double> x(m);
  std::array<std::vector<double>, 3> y;
  for (std::size_t i = 0; i < m; ++i) {
    x[i] = rows[i][0];
    for (int j = 0; j < 3; ++j) y[static_cast<std::size_t>(j)].push_back(deg2rad(rows[i][j + 1]));
  }
  LegTraces leg;
  std::array<JointAngleTrace*, 3> out = {&leg.hip, &leg.knee, &leg.ankle};
  for (int j = 0; j < 3; ++j) {
    auto& t = *out[static_cast<std::size_t>(j)];
    t.cycle_ms = cycle_ms;
    t.samples.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      if (uniform && n == m)
        t.samples[k] = y[static_cast<std::size_t>(j)][k];
      else
        t.samples[k] = detail::periodic_interp(
            x, y[static_cast<std::size_t>(j)], 100.0 * static_cast<double>(k) / n, 100.0);
    }
  }
  return leg;
}

inline LegTraces parse_angles(const std::filesystem::path& p, std::size_t grid = 0,
                              double cycle_ms = 1000.0) {
  return parse_angles_text(read_file(p), grid, cycle_ms);
}

inline std::string cycle_pct(std::size_t k, std::size_t n) {
  return fmt6(100.0 * static_cast<double>(k) / static_cast<double>(n));
}

inline std::string angles_csv(const LegTraces& leg) {
  std::string s = std::string(kAngleHeader) + "\n";
  const std::size_t n = leg.size();
  for (std::size_t k = 0; k < n; ++k)
    s += cycle_pct(k, n) + "," + fmt6(rad2deg(leg.hip.samples[k])) + "," +
         fmt6(rad2deg(leg.knee.samples[k])) + "," + fmt6(rad2deg(leg.ankle.samples[k])) + "\n";
  return s;
}

inline std::string force_csv(const MuscleForceTrace& f) {
  std::string s = std::string(kForceHeader) + "\n";
  const std::size_t n = f.size();
  for (std::size_t k = 0; k < n; ++k)
    s += cycle_pct(k, n) + "," + fmt6(f.values[k]) + "," + fmt6(f.residual[k]) + "\n";
  return s;
}

inline MuscleForceTrace parse_force_csv(const std::string& text, Muscle m) {
  const auto rows = detail::parse_table(text, kForceHeader);
  if (rows.size() < 3) throw GridError("force file needs at least 3 rows");
  MuscleForceTrace f{m, {}, {}};
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (std::fabs(rows[k][0] - 100.0 * static_cast<double>(k) / rows.size()) > 1e-3)
      throw GridError("force file rows are not on a uniform cycle grid");
    if (rows[k][1] < 0.0 || rows[k][2] < 0.0) throw RangeError("negative force in force file");
    f.values.push_back(rows[k][1]);
    f.residual.push_back(rows[k][2]);
  }
  return f;
}

inline std::string histogram_csv(const StimulationHistogram& h) {
  std::string s = "bin_start_pct,bin_end_pct";
  for (const auto& c : h.classes) s += "," + c;
  s += "\n";
  const std::size_t bins = h.counts.size();
  for (std::size_t b = 0; b < bins; ++b) {
    s += cycle_pct(b, bins) + "," + fmt6(100.0 * static_cast<double>(b + 1) / bins);
    for (auto c : h.counts[b]) s += "," + std::to_string(c);
    s += "\n";
  }
  return s;
}

// ---------------------------------------------------------------------------
// Plans
// ---------------------------------------------------------------------------

inline json class_to_json(const MotorUnitClass& c) {
  return {{"label", c.label},
          {"f0", c.twitch.f0},
          {"t_peak_ms", c.twitch.t_peak},
          {"max_force", c.max_force},
          {"min_isi_ms", c.min_isi}};
}

inline json plan_to_json(const StimulationPlan& p) {
  json units = json::array();
  for (const auto& u : p.units)
    units.push_back({{"class", p.classes[u.cls].label},
                     {"index", u.index},
                     {"count", u.count},
                     {"times_ms", u.train.times}});
  json classes = json::array();
  for (const auto& c : p.classes) classes.push_back(class_to_json(c));
  return {{"muscle", p.muscle},       {"grid", p.grid},
          {"cycle_ms", p.cycle_ms},   {"newton_scale", p.newton_scale},
          {"eval_step_ms", p.eval_step_ms}, {"classes", classes},
          {"units", units}};
}

inline StimulationPlan plan_from_json(const json& j) {
  try {
    StimulationPlan p;
    p.muscle = j.at("muscle").get<std::string>();
    p.grid = j.at("grid").get<std::size_t>();
    p.cycle_ms = j.at("cycle_ms").get<double>();
    p.newton_scale = j.at("newton_scale").get<double>();
    p.eval_step_ms = j.value("eval_step_ms", 1.0);
    for (const auto& c : j.at("classes")) {
      MotorUnitClass k;
      k.label = c.at("label").get<std::string>();
      k.twitch = {c.at("f0").get<double>(), c.at("t_peak_ms").get<double>()};
      k.max_force = c.at("max_force").get<double>();
      k.min_isi = c.at("min_isi_ms").get<double>();
      k.validate();
      p.classes.push_back(k);
    }
    for (const auto& u : j.at("units")) {
      PlanUnit pu;
      const auto label = u.at("class").get<std::string>();
      pu.cls = p.classes.size();
      for (std::size_t i = 0; i < p.classes.size(); ++i)
        if (p.classes[i].label == label) pu.cls = i;
      if (pu.cls == p.classes.size()) throw ParseError("plan unit names unknown class " + label);
      pu.index = u.at("index").get<int>();
      pu.count = u.at("count").get<int>();
      pu.train = StimulusTrain(u.at("times_ms").get<std::vector<double>>());
      p.units.push_back(std::move(pu));
    }
    if (!p.respects_isi()) throw ParseError("plan violates min_isi");
    return p;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed plan: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("malformed plan: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

struct MuscleConfig {
  double capacity_n = 1000.0;  ///< tetanic sum of all units, N
  int units_per_class = 10;
  int unit_count = 5;
};

/// Default capacities: four times the healthy bundled-gait peak of each
/// muscle, rounded.
inline std::map<Muscle, MuscleConfig> default_muscle_configs() {
  return {{Muscle::TricepsSurae, {9500.0}},  {Muscle::Dorsiflexor, {3800.0}},
          {Muscle::Quadriceps, {3000.0}},    {Muscle::Hamstring, {4400.0}},
          {Muscle::GluteusMaximus, {8400.0}}, {Muscle::Iliopsoas, {8700.0}}};
}

struct SimConfig {
  double dt_ms = 1.0;
  double prune_epsilon = 1e-12;
  int warmup_cycles = 1;
  double length_gain = 0.3;
  double f_p0 = 0.0;
  std::array<double, 3> initial = {0.0, 0.0, 0.0};  ///< rad, hip knee ankle
};

struct RunConfig {
  std::size_t grid = 20;
  double cycle_ms = 1000.0;
  BodyParams body;
  BootsOptions boots;
  std::vector<MotorUnitClass> classes = default_classes();
  std::map<Muscle, MuscleConfig> muscles = default_muscle_configs();
  RecruitConfig recruit;
  SimConfig sim;

  RecruitMuscle recruit_muscle(Muscle m) const {
    const auto& mc = muscles.at(m);
    return RecruitMuscle::with_capacity(muscle_name(m), classes, mc.capacity_n, mc.units_per_class,
                                        mc.unit_count);
  }
};

namespace detail {

inline void allow_keys(const json& j, const std::string& where, std::set<std::string> keys) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [k, v] : j.items())
    if (!keys.count(k)) throw ConfigError("unknown key '" + k + "' in " + where);
}

inline void get_pos(const json& j, const char* key, double& out, bool allow_zero = false) {
  if (!j.contains(key)) return;
  if (!j.at(key).is_number()) throw ConfigError(std::string(key) + " must be a number");
  const double v = j.at(key).get<double>();
  if (!(v > 0.0) && !(allow_zero && v == 0.0))
    throw ConfigError(std::string(key) + " must be positive");
  out = v;
}

inline void get_num(const json& j, const char* key, double& out) {
  if (!j.contains(key)) return;
  if (!j.at(key).is_number()) throw ConfigError(std::string(key) + " must be a number");
  out = j.at(key).get<double>();
}

}  // namespace detail

inline RunConfig config_from_json(const json& j) {
  using detail::get_num;
  using detail::get_pos;
  RunConfig c;
  try {
    detail::allow_keys(j, "config", {"grid", "cycle_ms", "body", "lever_arms", "ground",
                                     "motor_units", "muscles", "recruitment", "simulation"});
    if (j.contains("grid")) {
      if (!j["grid"].is_number_integer() || j["grid"].get<long long>() < 3)
        throw ConfigError("grid must be an integer >= 3");
      c.grid = j["grid"].get<std::size_t>();
    }
    get_pos(j, "cycle_ms", c.cycle_ms);

    if (j.contains("body")) {
      const auto& b = j["body"];
      detail::allow_keys(b, "body",
                         {"total_mass_kg", "foot_mass_kg", "shank_mass_kg", "thigh_mass_kg",
                          "thigh_length_m", "shank_length_m", "thigh_com_ratio",
                          "shank_com_ratio", "foot_com_offset_m", "heel_offset_m",
                          "toe_offset_m", "inertia_hip", "inertia_knee", "inertia_ankle",
                          "trunk_com_offset_m", "trunk_com_height_m", "trunk_lean_deg"});
      double mass = c.body.total_mass;
      get_pos(b, "total_mass_kg", mass, true);
      const LeverArms keep = c.body.levers;
      c.body = BodyParams::standard(mass);
      c.body.levers = keep;
      get_pos(b, "foot_mass_kg", c.body.foot_mass, true);
      get_pos(b, "shank_mass_kg", c.body.shank_mass, true);
      get_pos(b, "thigh_mass_kg", c.body.thigh_mass, true);
      get_pos(b, "thigh_length_m", c.body.thigh_length);
      get_pos(b, "shank_length_m", c.body.shank_length);
      get_pos(b, "thigh_com_ratio", c.body.thigh_com_ratio);
      get_pos(b, "shank_com_ratio", c.body.shank_com_ratio);
      get_pos(b, "foot_com_offset_m", c.body.foot_com_offset);
      get_pos(b, "heel_offset_m", c.body.heel_offset);
      get_pos(b, "toe_offset_m", c.body.toe_offset);
      get_pos(b, "inertia_hip", c.body.inertia_hip);
      get_pos(b, "inertia_knee", c.body.inertia_knee);
      get_pos(b, "inertia_ankle", c.body.inertia_ankle);
      get_num(b, "trunk_com_offset_m", c.body.trunk_com_offset);
      get_pos(b, "trunk_com_height_m", c.body.trunk_com_height);
      double lean = 0.0;
      get_num(b, "trunk_lean_deg", lean);
      c.body.trunk_lean = deg2rad(lean);
    }
    if (j.contains("lever_arms")) {
      const auto& l = j["lever_arms"];
      detail::allow_keys(l, "lever_arms",
                         {"triceps_surae", "dorsiflexor", "quadriceps", "hamstring",
                          "gluteus_maximus", "iliopsoas", "quadriceps_hip", "hamstring_hip"});
      auto& a = c.body.levers;
      get_pos(l, "triceps_surae", a.triceps_surae);
      get_pos(l, "dorsiflexor", a.dorsiflexor);
      get_pos(l, "quadriceps", a.quadriceps);
      get_pos(l, "hamstring", a.hamstring);
      get_pos(l, "gluteus_maximus", a.gluteus_maximus);
      get_pos(l, "iliopsoas", a.iliopsoas);
      get_pos(l, "quadriceps_hip", a.quadriceps_hip);
      get_pos(l, "hamstring_hip", a.hamstring_hip);
    }
    try {
      c.body.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }

    if (j.contains("ground")) {
      const auto& g = j["ground"];
      detail::allow_keys(g, "ground",
                         {"profile", "stance_fraction", "contact", "toe_pitch_deg",
                          "heel_pitch_deg"});
      if (g.contains("profile")) {
        try {
          c.boots.profile = parse_grf_profile(g["profile"].get<std::string>());
        } catch (const UnknownProfile& e) {
          throw ConfigError(e.what());
        }
      }
      get_pos(g, "stance_fraction", c.boots.stance_fraction);
      if (c.boots.stance_fraction >= 1.0) throw ConfigError("stance_fraction must be below 1");
      if (g.contains("contact")) {
        const auto k = g["contact"].get<std::string>();
        if (k == "kinematic")
          c.boots.contact.kind = ContactModel::Kind::Kinematic;
        else if (k == "phase")
          c.boots.contact.kind = ContactModel::Kind::Phase;
        else
          throw ConfigError("contact must be 'kinematic' or 'phase'");
      }
      double toe = rad2deg(c.boots.contact.toe_pitch_max), heel = rad2deg(c.boots.contact.heel_pitch_min);
      get_num(g, "toe_pitch_deg", toe);
      get_num(g, "heel_pitch_deg", heel);
      c.boots.contact.toe_pitch_max = deg2rad(toe);
      c.boots.contact.heel_pitch_min = deg2rad(heel);
    }

    if (j.contains("motor_units")) {
      if (!j["motor_units"].is_array() || j["motor_units"].empty())
        throw ConfigError("motor_units must be a nonempty array");
      c.classes.clear();
      for (const auto& u : j["motor_units"]) {
        detail::allow_keys(u, "motor_units entry",
                           {"label", "f0", "t_peak_ms", "max_force", "cap_multiple", "min_isi_ms"});
        TwitchParams tw;
        get_pos(u, "f0", tw.f0);
        if (!u.contains("t_peak_ms")) throw ConfigError("motor unit class needs t_peak_ms");
        get_pos(u, "t_peak_ms", tw.t_peak);
        double mult = 5.0, isi = 5.0;
        get_pos(u, "cap_multiple", mult);
        get_pos(u, "min_isi_ms", isi);
        auto k = MotorUnitClass::make(u.at("label").get<std::string>(), tw, mult, isi);
        get_pos(u, "max_force", k.max_force);
        for (const auto& prev : c.classes)
          if (prev.label == k.label) throw ConfigError("duplicate motor unit class " + k.label);
        c.classes.push_back(k);
      }
    }

    if (j.contains("muscles")) {
      for (const auto& [name, v] : j["muscles"].items()) {
        Muscle m;
        if (!parse_muscle(name, m)) throw ConfigError("unknown muscle '" + name + "'");
        detail::allow_keys(v, "muscles." + name, {"capacity_n", "units_per_class", "unit_count"});
        auto& mc = c.muscles[m];
        get_pos(v, "capacity_n", mc.capacity_n);
        if (v.contains("units_per_class")) mc.units_per_class = v["units_per_class"].get<int>();
        if (v.contains("unit_count")) mc.unit_count = v["unit_count"].get<int>();
        if (mc.units_per_class < 1 || mc.unit_count < 1)
          throw ConfigError("units_per_class and unit_count must be >= 1");
      }
    }

    if (j.contains("recruitment")) {
      const auto& r = j["recruitment"];
      detail::allow_keys(r, "recruitment",
                         {"order", "tolerance", "max_iterations", "overshoot", "eval_step_ms"});
      if (r.contains("order")) c.recruit.order = r["order"].get<std::vector<std::string>>();
      get_pos(r, "tolerance", c.recruit.tolerance);
      if (r.contains("max_iterations")) {
        const auto mi = r["max_iterations"].get<long long>();
        if (mi < 1) throw ConfigError("max_iterations must be positive");
        c.recruit.max_iterations = static_cast<std::size_t>(mi);
      }
      if (r.contains("overshoot")) {
        const auto o = r["overshoot"].get<std::string>();
        if (o == "single-twitch")
          c.recruit.overshoot = OvershootPolicy::SingleTwitch;
        else if (o == "none")
          c.recruit.overshoot = OvershootPolicy::None;
        else
          throw ConfigError("overshoot must be 'single-twitch' or 'none'");
      }
      get_pos(r, "eval_step_ms", c.recruit.eval_step_ms);
    }
    {
      std::vector<std::string> a = c.recruit.order, b;
      for (const auto& k : c.classes) b.push_back(k.label);
      std::sort(a.begin(), a.end());
      std::sort(b.begin(), b.end());
      if (a != b) throw ConfigError("recruitment order must be a permutation of the class labels");
    }

    if (j.contains("simulation")) {
      const auto& s = j["simulation"];
      detail::allow_keys(s, "simulation",
                         {"dt_ms", "prune_epsilon", "warmup_cycles", "length_gain_per_rad",
                          "passive_f_p0", "initial_deg"});
      get_pos(s, "dt_ms", c.sim.dt_ms);
      get_pos(s, "prune_epsilon", c.sim.prune_epsilon, true);
      if (s.contains("warmup_cycles")) {
        c.sim.warmup_cycles = s["warmup_cycles"].get<int>();
        if (c.sim.warmup_cycles < 0) throw ConfigError("warmup_cycles must be >= 0");
      }
      get_pos(s, "length_gain_per_rad", c.sim.length_gain, true);
      get_pos(s, "passive_f_p0", c.sim.f_p0, true);
      if (s.contains("initial_deg")) {
        const auto& i = s["initial_deg"];
        detail::allow_keys(i, "simulation.initial_deg", {"hip", "knee", "ankle"});
        const char* names[] = {"hip", "knee", "ankle"};
        for (std::size_t k = 0; k < 3; ++k) {
          double d = rad2deg(c.sim.initial[k]);
          get_num(i, names[k], d);
          c.sim.initial[k] = deg2rad(d);
        }
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
  return c;
}

inline RunConfig load_config(const std::filesystem::path& p) {
  const std::string text = read_file(p);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError("config is not valid JSON: " + std::string(e.what()));
  }
  return config_from_json(j);
}

inline json config_to_json(const RunConfig& c) {
  const auto& b = c.body;
  const auto& l = b.levers;
  json classes = json::array();
  for (const auto& k : c.classes) classes.push_back(class_to_json(k));
  json muscles = json::object();
  for (const auto& [m, mc] : c.muscles)
    muscles[muscle_name(m)] = {{"capacity_n", mc.capacity_n},
                               {"units_per_class", mc.units_per_class},
                               {"unit_count", mc.unit_count}};
  return {
      {"grid", c.grid},
      {"cycle_ms", c.cycle_ms},
      {"body",
       {{"total_mass_kg", b.total_mass}, {"foot_mass_kg", b.foot_mass},
        {"shank_mass_kg", b.shank_mass}, {"thigh_mass_kg", b.thigh_mass},
        {"thigh_length_m", b.thigh_length}, {"shank_length_m", b.shank_length},
        {"thigh_com_ratio", b.thigh_com_ratio}, {"shank_com_ratio", b.shank_com_ratio},
        {"foot_com_offset_m", b.foot_com_offset}, {"heel_offset_m", b.heel_offset},
        {"toe_offset_m", b.toe_offset}, {"inertia_hip", b.inertia_hip},
        {"inertia_knee", b.inertia_knee}, {"inertia_ankle", b.inertia_ankle},
        {"trunk_com_offset_m", b.trunk_com_offset}, {"trunk_com_height_m", b.trunk_com_height},
        {"trunk_lean_deg", rad2deg(b.trunk_lean)}}},
      {"lever_arms",
       {{"triceps_surae", l.triceps_surae}, {"dorsiflexor", l.dorsiflexor},
        {"quadriceps", l.quadriceps}, {"hamstring", l.hamstring},
        {"gluteus_maximus", l.gluteus_maximus}, {"iliopsoas", l.iliopsoas},
        {"quadriceps_hip", l.quadriceps_hip}, {"hamstring_hip", l.hamstring_hip}}},
      {"ground",
       {{"profile", grf_profile_name(c.boots.profile)},
        {"stance_fraction", c.boots.stance_fraction},
        {"contact", c.boots.contact.kind == ContactModel::Kind::Kinematic ? "kinematic" : "phase"},
        {"toe_pitch_deg", rad2deg(c.boots.contact.toe_pitch_max)},
        {"heel_pitch_deg", rad2deg(c.boots.contact.heel_pitch_min)}}},
      {"motor_units", classes},
      {"muscles", muscles},
      {"recruitment",
       {{"order", c.recruit.order}, {"tolerance", c.recruit.tolerance},
        {"max_iterations", c.recruit.max_iterations},
        {"overshoot", c.recruit.overshoot == OvershootPolicy::SingleTwitch ? "single-twitch" : "none"},
        {"eval_step_ms", c.recruit.eval_step_ms}}},
      {"simulation",
       {{"dt_ms", c.sim.dt_ms}, {"prune_epsilon", c.sim.prune_epsilon},
        {"warmup_cycles", c.sim.warmup_cycles}, {"length_gain_per_rad", c.sim.length_gain},
        {"passive_f_p0", c.sim.f_p0},
        {"initial_deg",
         {{"hip", rad2deg(c.sim.initial[0])}, {"knee", rad2deg(c.sim.initial[1])},
          {"ankle", rad2deg(c.sim.initial[2])}}}}}};
}

/// 64-bit FNV-1a of the canonical config JSON, hex.
inline std::string config_hash(const RunConfig& c) {
  const std::string s = config_to_json(c).dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

/// Leg model for the simulator from a run configuration.
inline SimpleLegModel leg_model_from_config(const RunConfig& c) {
  auto m = default_leg_model(c.body);
  for (std::size_t j = 0; j < 3; ++j) {
    auto& jm = m.joints[j];
    jm.length_gain = c.sim.length_gain;
    jm.theta_neutral = c.sim.initial[j];
    jm.flexor.f_p0 = c.sim.f_p0;
    jm.extensor.f_p0 = c.sim.f_p0;
  }
  return m;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

inline json rounded(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(round6(x));
  return a;
}

inline json boots_report_json(const BootsReport& r, double cycle_ms) {
  json flags_heel = json::array(), flags_toes = json::array();
  for (std::size_t k = 0; k < r.grf.size(); ++k) {
    flags_heel.push_back(static_cast<bool>(r.grf.heel_on_ground[k]));
    flags_toes.push_back(static_cast<bool>(r.grf.toes_on_ground[k]));
  }
  json muscles = json::object();
  for (const auto& f : r.forces)
    muscles[muscle_name(f.muscle)] = {{"peak_n", round6(f.peak())},
                                      {"force_n", rounded(f.values)},
                                      {"residual_n", rounded(f.residual)}};
  return {
      {"sign_convention",
       "angles: hip and knee flexion positive, ankle dorsiflexion positive; moments: ankle "
       "plantarflexion positive, knee and hip extension positive; x forward from the hip"},
      {"grid", r.grf.size()},
      {"cycle_ms", cycle_ms},
      {"ground_reaction",
       {{"force_n", rounded(r.grf.force)},
        {"heel_on_ground", flags_heel},
        {"toes_on_ground", flags_toes}}},
      {"ankle",
       {{"total_torque", rounded(r.ankle.total_torque)},
        {"moment_feet", rounded(r.ankle.moment_feet)},
        {"moment_ground", rounded(r.ankle.moment_ground)},
        {"demand", rounded(r.ankle.demand)}}},
      {"knee",
       {{"total_torque", rounded(r.knee.total_torque)},
        {"moment_ground", rounded(r.knee.moment_ground)},
        {"moment_shank", rounded(r.knee.moment_shank)},
        {"part1", rounded(r.knee.part1)},
        {"upper_body_x", rounded(r.knee.upper_body_x)},
        {"upper_body_load", rounded(r.knee.upper_body_load)},
        {"part2", rounded(r.knee.part2)}}},
      {"hip",
       {{"total_torque", rounded(r.hip.total_torque)},
        {"moment_ground", rounded(r.hip.moment_ground)},
        {"moment_leg", rounded(r.hip.moment_leg)},
        {"demand", rounded(r.hip.demand)},
        {"gluteal_torque", rounded(r.hip.gluteal_torque)}}},
      {"muscles", muscles}};
}

}  // namespace musim
