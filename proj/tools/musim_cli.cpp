// SPDX-License-Identifier: Apache-2.0
// musim command-line front end: boots | recruit | analyze | simulate

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <future>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "musim/musim.hpp"

namespace fs = std::filesystem;
using namespace musim;

namespace {

enum Exit { kOk = 0, kCompute = 1, kIo = 2, kConfig = 3, kInfeasible = 4 };

enum class Level { Error = 0, Warn = 1, Info = 2, Debug = 3 };

Level log_level() {
  const char* v = std::getenv("MUSIM_LOG_LEVEL");
  if (!v) return Level::Warn;
  const std::string s = v;
  if (s == "error") return Level::Error;
  if (s == "info") return Level::Info;
  if (s == "debug") return Level::Debug;
  return Level::Warn;
}

void log(Level l, const std::string& msg) {
  static const Level current = log_level();
  static const char* names[] = {"error", "warn", "info", "debug"};
  if (l <= current) std::cerr << "musim: " << names[static_cast<int>(l)] << ": " << msg << "\n";
}

struct Common {
  std::string config;
  std::string out;
  std::optional<std::size_t> grid;
  std::optional<double> cycle_ms;
  std::optional<std::string> profile;
  std::optional<std::string> order;
};

RunConfig make_config(const Common& o) {
  RunConfig c = o.config.empty() ? RunConfig{} : load_config(o.config);
  if (o.grid) {
    if (*o.grid < 3) throw ConfigError("--grid must be at least 3");
    c.grid = *o.grid;
  }
  if (o.cycle_ms) {
    if (!(*o.cycle_ms > 0.0)) throw ConfigError("--cycle-ms must be positive");
    c.cycle_ms = *o.cycle_ms;
  }
  if (o.profile) {
    try {
      c.boots.profile = parse_grf_profile(*o.profile);
    } catch (const UnknownProfile& e) {
      throw ConfigError(e.what());
    }
  }
  if (o.order) {
    std::vector<std::string> labels;
    std::stringstream ss(*o.order);
    std::string t;
    while (std::getline(ss, t, ',')) labels.push_back(t);
    auto a = labels;
    std::vector<std::string> b;
    for (const auto& k : c.classes) b.push_back(k.label);
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    if (a != b) throw ConfigError("--order must be a permutation of the class labels");
    c.recruit.order = labels;
  }
  return c;
}

json provenance(const RunConfig& c) {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char ts[32];
  std::strftime(ts, sizeof ts, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return {{"config_hash", config_hash(c)}, {"version", kVersion}, {"generated_at", ts}};
}

LegTraces load_angles(const std::string& path, const RunConfig& c) {
  if (!fs::exists(path)) throw IoError("angle file not found: " + path);
  return parse_angles(path, c.grid, c.cycle_ms);
}

BootsReport run_boots(const LegTraces& leg, const RunConfig& c, const fs::path& out) {
  const auto report = boots_all(leg, c.body, c.boots);
  for (const auto& f : report.forces)
    atomic_write(out / ("force_" + std::string(muscle_name(f.muscle)) + ".csv"), force_csv(f));
  json j = boots_report_json(report, c.cycle_ms);
  j["provenance"] = provenance(c);
  atomic_write(out / "report.json", j.dump(2) + "\n");
  log(Level::Info, "wrote six force traces and report.json to " + out.string());
  return report;
}

struct MuscleRecruit {
  Muscle muscle;
  RecruitResult result;
};

std::vector<MuscleRecruit> run_recruit(const std::map<Muscle, std::vector<double>>& targets,
                                       const RunConfig& c, const fs::path& out) {
  std::vector<std::pair<Muscle, std::future<RecruitResult>>> jobs;
  for (const auto& [m, tgt] : targets) {
    const auto mus = c.recruit_muscle(m);
    jobs.emplace_back(m, std::async(std::launch::async, [&c, mus, t = tgt] {
                        return recruit(t, mus, c.cycle_ms, c.recruit);
                      }));
  }
  std::vector<MuscleRecruit> res;
  std::optional<Infeasible> failure;
  for (auto& [m, fut] : jobs) {
    try {
      res.push_back({m, fut.get()});
    } catch (const Infeasible& e) {
      if (!failure) failure = e;
    }
  }
  if (failure) throw *failure;
  for (const auto& r : res) {
    const std::string name = muscle_name(r.muscle);
    atomic_write(out / ("plan_" + name + ".json"), plan_to_json(r.result.plan).dump(2) + "\n");
    atomic_write(out / ("stim_hist_" + name + ".csv"),
                 histogram_csv(stimulation_histogram(r.result.plan, r.result.plan.grid)));
    if (!r.result.unmet_samples.empty())
      log(Level::Warn, name + ": " + std::to_string(r.result.unmet_samples.size()) +
                           " samples left below target to stay within the overshoot bound");
    log(Level::Info, name + ": " + std::to_string(r.result.plan.total_stimuli()) +
                         " stimuli, reproduction error " + fmt6(r.result.error));
  }
  return res;
}

json recruit_summary(const std::vector<MuscleRecruit>& res) {
  json j = json::object();
  for (const auto& r : res) {
    json counts = json::object();
    for (const auto& cls : r.result.plan.classes)
      counts[cls.label] = count_stimuli(r.result.plan, cls.label, 0.0, 100.0);
    j[muscle_name(r.muscle)] = {{"reproduction_error", round6(r.result.error)},
                                {"total_stimuli", r.result.plan.total_stimuli()},
                                {"stimuli_per_class", counts},
                                {"unmet_samples", r.result.unmet_samples},
                                {"respects_min_isi", r.result.plan.respects_isi()}};
  }
  return j;
}

std::map<Muscle, std::vector<double>> load_forces(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::map<Muscle, std::vector<double>> out;
  for (Muscle m : kAllMuscles) {
    const fs::path p = dir / ("force_" + std::string(muscle_name(m)) + ".csv");
    if (fs::exists(p)) out[m] = parse_force_csv(read_file(p), m).values;
  }
  if (out.empty()) throw IoError("no force_<muscle>.csv files in " + dir.string());
  return out;
}

int cmd_boots(const std::string& angles, const Common& o) {
  const auto c = make_config(o);
  run_boots(load_angles(angles, c), c, o.out);
  return kOk;
}

int cmd_recruit(const std::string& dir, const Common& o) {
  const auto c = make_config(o);
  auto targets = load_forces(dir);
  for (const auto& [m, t] : targets)
    if (t.size() != targets.begin()->second.size())
      throw GridError("force files disagree on grid size");
  const auto res = run_recruit(targets, c, o.out);
  json j = {{"muscles", recruit_summary(res)}, {"provenance", provenance(c)}};
  atomic_write(fs::path(o.out) / "recruit_report.json", j.dump(2) + "\n");
  return kOk;
}

int cmd_analyze(const std::string& angles, const Common& o) {
  const auto c = make_config(o);
  const fs::path out = o.out;
  const auto report = run_boots(load_angles(angles, c), c, out);
  std::map<Muscle, std::vector<double>> targets;
  for (const auto& f : report.forces) targets[f.muscle] = f.values;
  const auto res = run_recruit(targets, c, out);
  json boots = json::object();
  for (const auto& f : report.forces) boots[muscle_name(f.muscle)] = {{"peak_n", round6(f.peak())}};
  json j = {{"input", fs::path(angles).filename().string()},
            {"grid", c.grid},
            {"cycle_ms", c.cycle_ms},
            {"boots", boots},
            {"recruitment", recruit_summary(res)},
            {"config", config_to_json(c)},
            {"provenance", provenance(c)}};
  atomic_write(out / "analysis.json", j.dump(2) + "\n");
  return kOk;
}

int cmd_simulate(const std::string& dir, const Common& o, std::optional<double> dt,
                 std::optional<double> duration) {
  auto c = make_config(o);
  if (dt) {
    if (!(*dt > 0.0)) throw ConfigError("--dt-ms must be positive");
    c.sim.dt_ms = *dt;
  }
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir);
  std::map<Muscle, StimulationPlan> plans;
  for (Muscle m : kAllMuscles) {
    const fs::path p = fs::path(dir) / ("plan_" + std::string(muscle_name(m)) + ".json");
    if (!fs::exists(p)) continue;
    json j;
    try {
      j = json::parse(read_file(p));
    } catch (const json::exception& e) {
      throw ParseError(p.string() + ": " + e.what());
    }
    plans[m] = plan_from_json(j);
  }
  if (plans.empty()) throw IoError("no plan_<muscle>.json files in " + dir);
  const double cycle = plans.begin()->second.cycle_ms;
  const double total = duration ? *duration : cycle * (1.0 + c.sim.warmup_cycles);
  SimOptions so{c.sim.dt_ms, c.sim.prune_epsilon, plans.begin()->second.grid};
  SimState init;
  init.theta = c.sim.initial;
  const auto r = simulate(leg_model_from_config(c), plans, total, init, so, cycle);

  const fs::path out = o.out;
  atomic_write(out / "angles_sim.csv", angles_csv(r.angles));
  json muscles = json::object();
  for (const auto& [m, plan] : plans) {
    const auto iso = plan_sample_forces(plan);
    const auto& sim = r.forces[static_cast<std::size_t>(m)];
    std::string s = "cycle_pct,force_n,isometric_n\n";
    for (std::size_t k = 0; k < sim.size(); ++k)
      s += cycle_pct(k, sim.size()) + "," + fmt6(sim[k]) + "," +
           fmt6(k < iso.size() ? iso[k] : 0.0) + "\n";
    const std::string name = muscle_name(m);
    atomic_write(out / ("force_sim_" + name + ".csv"), s);
    json e = {{"total_stimuli", plan.total_stimuli()}};
    const fs::path tgt = fs::path(dir) / ("force_" + name + ".csv");
    if (fs::exists(tgt)) {
      const auto target = parse_force_csv(read_file(tgt), m).values;
      if (target.size() == plan.grid) e["isometric_reproduction_error"] = round6(reproduction_error(plan, target));
    }
    muscles[name] = e;
  }
  json j = {{"duration_ms", total},
            {"dt_ms", c.sim.dt_ms},
            {"steps", r.steps},
            {"final_deg",
             {{"hip", round6(rad2deg(r.final_state.theta[0]))},
              {"knee", round6(rad2deg(r.final_state.theta[1]))},
              {"ankle", round6(rad2deg(r.final_state.theta[2]))}}},
            {"muscles", muscles},
            {"provenance", provenance(c)}};
  atomic_write(out / "sim_report.json", j.dump(2) + "\n");
  return kOk;
}

void add_common(CLI::App* sub, Common& o) {
  sub->add_option("--config", o.config, "JSON run configuration");
  sub->add_option("--out", o.out, "output directory")->required();
  sub->add_option("--grid", o.grid, "samples per gait cycle");
  sub->add_option("--cycle-ms", o.cycle_ms, "gait cycle duration, ms");
  sub->add_option("--profile", o.profile, "ground reaction profile: static | double-hump");
  sub->add_option("--order", o.order, "recruitment order, e.g. D,C,B,A");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Muscle-force inverse dynamics and motor-unit recruitment toolkit"};
  app.require_subcommand(1);
  Common o;
  std::string input;
  std::optional<double> dt, duration;

  auto* boots = app.add_subcommand("boots", "joint angles -> six muscle force traces");
  boots->add_option("angles", input, "angle CSV")->required();
  add_common(boots, o);
  auto* rec = app.add_subcommand("recruit", "force traces -> stimulation plans");
  rec->add_option("forces", input, "directory with force_<muscle>.csv")->required();
  add_common(rec, o);
  auto* ana = app.add_subcommand("analyze", "angles -> forces -> plans -> report");
  ana->add_option("angles", input, "angle CSV")->required();
  add_common(ana, o);
  auto* sim = app.add_subcommand("simulate", "plans -> simulated joint angles");
  sim->add_option("plans", input, "directory with plan_<muscle>.json")->required();
  sim->add_option("--dt-ms", dt, "integration step, ms");
  sim->add_option("--duration-ms", duration, "simulated time, ms");
  add_common(sim, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  try {
    if (*boots) return cmd_boots(input, o);
    if (*rec) return cmd_recruit(input, o);
    if (*ana) return cmd_analyze(input, o);
    if (*sim) return cmd_simulate(input, o, dt, duration);
  } catch (const Infeasible& e) {
    log(Level::Error, std::string("infeasible: ") + e.what());
    return kInfeasible;
  } catch (const ConfigError& e) {
    log(Level::Error, std::string("config: ") + e.what());
    return kConfig;
  } catch (const IoError& e) {
    log(Level::Error, e.what());
    return kIo;
  } catch (const ParseError& e) {
    log(Level::Error, std::string("input: ") + e.what());
    return kIo;
  } catch (const GridError& e) {
    log(Level::Error, std::string("input: ") + e.what());
    return kIo;
  } catch (const RangeError& e) {
    log(Level::Error, std::string("input: ") + e.what());
    return kIo;
  } catch (const std::exception& e) {
    log(Level::Error, e.what());
    return kCompute;
  }
  return kCompute;
}
