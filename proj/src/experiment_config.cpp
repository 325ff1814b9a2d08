#include "spine/experiment_config.hpp"

#include <fstream>
#include <sstream>

namespace spine {

namespace {

Vec to_vec(const std::vector<double>& v) {
  return Eigen::Map<const Vec>(v.data(), static_cast<int>(v.size()));
}

std::vector<double> to_std(const Vec& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

// A scalar weight means "that multiple of the identity"; an array is the
// full diagonal.
Vec read_diag(SectionReader& r, const std::string& key, const Vec& fallback, int size) {
  if (!r.has(key)) return fallback;
  if (!r.looks_like_array(key)) return Vec::Constant(size, r.get_double(key));
  std::vector<double> raw = r.get_array(key);
  if (raw.size() == 1) return Vec::Constant(size, raw[0]);
  if (static_cast<int>(raw.size()) != size)
    throw ConfigError(r.location(key),
                      "key '" + key + "' needs 1 or " + std::to_string(size) + " entries");
  return to_vec(raw);
}

}  // namespace

void ExperimentConfig::validate() const {
  spine.validate();
  controller.smoothing.validate();
  controller.reference.validate();
  if (run.steps < 0) throw ConfigError("run: steps must be >= 0");
  if (!(run.solver_tol > 0)) throw ConfigError("run: solver_tol must be > 0");
  if (run.solver_max_iter < 1) throw ConfigError("run: solver_max_iter must be >= 1");
  if (run.failure_limit < 0) throw ConfigError("run: failure_limit must be >= 0");
  if (!(trajectory.duration > 0)) throw ConfigError("trajectory: duration must be > 0");
  if (controller.kind == ControllerKind::smoothing &&
      spine.dimension != Dimension::spatial3d)
    throw ConfigError("the smoothing controller runs on the spatial3d model");
  if (controller.kind == ControllerKind::reference &&
      spine.dimension != Dimension::planar2d)
    throw ConfigError("the reference controller runs on the planar2d model");
}

ExperimentConfig default_experiment(ControllerKind kind) {
  ExperimentConfig c;
  c.controller.kind = kind;
  if (kind == ControllerKind::reference) {
    c.spine = planar_default();
    c.trajectory = {0.3, 10.0};
    c.run.steps = 10000;
  } else {
    c.spine = spatial_default();
    c.trajectory = {0.3, 2.0};
    c.run.steps = 2000;
    c.run.solver_tol = 1e-6;
  }
  c.controller.smoothing.layout = make_layout(spatial_default());
  c.controller.reference.layout = make_layout(planar_default());
  c.controller.reference.vertebra_height = c.spine.vertebra_height;
  c.disturbance.seed = 1;
  c.disturbance.velocity_magnitude = 0.005;
  return c;
}

ExperimentConfig parse_experiment_config(const std::string& text, const std::string& source) {
  const ConfigDoc doc = parse_config_text(text, source);

  for (const auto& section : doc.sections) {
    if (section.name != "spine" && section.name != "run" && section.name != "trajectory" &&
        section.name != "disturbance" && section.name != "smoothing_controller" &&
        section.name != "reference_controller")
      throw ConfigError(source + ":" + std::to_string(section.line),
                        "unknown section [" + section.name + "]");
  }

  SpineConfig spine_config = read_spine_section(doc);

  ControllerKind kind = ControllerKind::reference;
  if (const ConfigSection* run_section = doc.find_section("run")) {
    SectionReader r(doc, *run_section);
    const std::string word = r.get_word("controller", "reference");
    if (word == "smoothing") {
      kind = ControllerKind::smoothing;
    } else if (word != "reference") {
      throw ConfigError(r.location("controller"),
                        "controller must be 'smoothing' or 'reference', got '" + word + "'");
    }
  }

  ExperimentConfig c = default_experiment(kind);
  c.spine = spine_config;

  if (const ConfigSection* s = doc.find_section("run")) {
    SectionReader r(doc, *s);
    r.get_word("controller", "reference");  // consumed above
    c.run.steps = r.get_int("steps", c.run.steps);
    c.run.output_dir = r.get_word("output_dir", c.run.output_dir);
    c.run.solver_tol = r.get_double("solver_tol", c.run.solver_tol);
    c.run.solver_max_iter = r.get_int("solver_max_iter", c.run.solver_max_iter);
    c.run.failure_limit = r.get_int("failure_limit", c.run.failure_limit);
    c.run.disturbance_enabled = r.get_bool("disturbance_enabled", c.run.disturbance_enabled);
    r.finish();
  }
  if (const ConfigSection* s = doc.find_section("trajectory")) {
    SectionReader r(doc, *s);
    c.trajectory.sweep_angle = r.get_double("sweep_angle", c.trajectory.sweep_angle);
    c.trajectory.duration = r.get_double("duration", c.trajectory.duration);
    r.finish();
  }
  if (const ConfigSection* s = doc.find_section("disturbance")) {
    SectionReader r(doc, *s);
    c.disturbance.seed = static_cast<std::uint64_t>(r.get_double("seed", 1));
    c.disturbance.position_magnitude = r.get_double("position_magnitude", 0.0);
    c.disturbance.angle_magnitude = r.get_double("angle_magnitude", 0.0);
    c.disturbance.velocity_magnitude =
        r.get_double("velocity_magnitude", c.disturbance.velocity_magnitude);
    const std::string schedule = r.get_word("schedule", "every_step");
    if (schedule == "impulse") {
      c.disturbance.schedule = DisturbanceSchedule::impulse;
    } else if (schedule != "every_step") {
      throw ConfigError(r.location("schedule"), "schedule must be every_step or impulse");
    }
    for (double s_idx : r.get_array("impulse_steps", {}))
      c.disturbance.impulse_steps.push_back(static_cast<int>(s_idx));
    r.finish();
  }
  if (const ConfigSection* s = doc.find_section("smoothing_controller")) {
    SectionReader r(doc, *s);
    auto& sc = c.controller.smoothing;
    sc.horizon = r.get_int("N", sc.horizon);
    sc.w1 = r.get_double("w1", sc.w1);
    sc.w2 = r.get_double("w2", sc.w2);
    sc.w3 = r.get_double("w3", sc.w3);
    sc.w4 = r.get_double("w4", sc.w4);
    sc.w5 = r.get_double("w5", sc.w5);
    sc.w6 = r.get_double("w6", sc.w6);
    sc.w7 = r.get_double("w7", sc.w7);
    sc.w8 = r.get_double("w8", sc.w8);
    sc.w9 = r.get_double("w9", sc.w9);
    sc.w10 = r.get_double("w10", sc.w10);
    sc.w11 = r.get_double("w11", sc.w11);
    sc.u_min = r.get_double("u_min", sc.u_min);
    sc.u_max = r.get_double("u_max", sc.u_max);
    r.finish();
  }
  if (const ConfigSection* s = doc.find_section("reference_controller")) {
    SectionReader r(doc, *s);
    auto& rc = c.controller.reference;
    rc.horizon = r.get_int("N", rc.horizon);
    const int n = c.spine.state_size();
    const int m = c.spine.input_size();
    rc.q_diag = read_diag(r, "Q", Vec::Ones(n), n);
    rc.p_diag = read_diag(r, "P", Vec::Ones(n), n);
    rc.r_diag = read_diag(r, "R", 2.0 * Vec::Ones(m), m);
    rc.u_min = r.get_double("u_min", rc.u_min);
    rc.u_max = r.get_double("u_max", rc.u_max);
    rc.vertebra_height = r.get_double("h", c.spine.vertebra_height);
    r.finish();
  }

  // Structural layout always follows the spine section.
  c.controller.smoothing.layout = make_layout(c.spine);
  c.controller.reference.layout = make_layout(c.spine);
  c.validate();
  return c;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_experiment_config(buf.str(), path);
}

std::string write_experiment_config(const ExperimentConfig& c) {
  std::ostringstream out;
  out << "[run]\n";
  out << "controller = " << to_string(c.controller.kind) << "\n";
  out << "steps = " << c.run.steps << "\n";
  out << "output_dir = " << c.run.output_dir << "\n";
  out << "solver_tol = " << format_double(c.run.solver_tol) << "\n";
  out << "solver_max_iter = " << c.run.solver_max_iter << "\n";
  out << "failure_limit = " << c.run.failure_limit << "\n";
  out << "disturbance_enabled = " << (c.run.disturbance_enabled ? "true" : "false") << "\n";
  out << "\n[trajectory]\n";
  out << "sweep_angle = " << format_double(c.trajectory.sweep_angle) << "\n";
  out << "duration = " << format_double(c.trajectory.duration) << "\n";
  out << "\n[disturbance]\n";
  out << "seed = " << c.disturbance.seed << "\n";
  out << "position_magnitude = " << format_double(c.disturbance.position_magnitude) << "\n";
  out << "angle_magnitude = " << format_double(c.disturbance.angle_magnitude) << "\n";
  out << "velocity_magnitude = " << format_double(c.disturbance.velocity_magnitude) << "\n";
  out << "schedule = "
      << (c.disturbance.schedule == DisturbanceSchedule::impulse ? "impulse" : "every_step")
      << "\n";
  if (!c.disturbance.impulse_steps.empty()) {
    std::vector<double> steps(c.disturbance.impulse_steps.begin(),
                              c.disturbance.impulse_steps.end());
    out << "impulse_steps = " << format_array(steps) << "\n";
  }
  const auto& sc = c.controller.smoothing;
  out << "\n[smoothing_controller]\n";
  out << "N = " << sc.horizon << "\n";
  out << "w1 = " << format_double(sc.w1) << "\n";
  out << "w2 = " << format_double(sc.w2) << "\n";
  out << "w3 = " << format_double(sc.w3) << "\n";
  out << "w4 = " << format_double(sc.w4) << "\n";
  out << "w5 = " << format_double(sc.w5) << "\n";
  out << "w6 = " << format_double(sc.w6) << "\n";
  out << "w7 = " << format_double(sc.w7) << "\n";
  out << "w8 = " << format_double(sc.w8) << "\n";
  out << "w9 = " << format_double(sc.w9) << "\n";
  out << "w10 = " << format_double(sc.w10) << "\n";
  out << "w11 = " << format_double(sc.w11) << "\n";
  out << "u_min = " << format_double(sc.u_min) << "\n";
  out << "u_max = " << format_double(sc.u_max) << "\n";
  const auto& rc = c.controller.reference;
  out << "\n[reference_controller]\n";
  out << "N = " << rc.horizon << "\n";
  if (rc.q_diag.size()) out << "Q = " << format_array(to_std(rc.q_diag)) << "\n";
  if (rc.p_diag.size()) out << "P = " << format_array(to_std(rc.p_diag)) << "\n";
  if (rc.r_diag.size()) out << "R = " << format_array(to_std(rc.r_diag)) << "\n";
  out << "u_min = " << format_double(rc.u_min) << "\n";
  out << "u_max = " << format_double(rc.u_max) << "\n";
  out << "h = " << format_double(rc.vertebra_height) << "\n";
  out << "\n" << write_spine_section(c.spine);
  return out.str();
}

void apply_overrides(ExperimentConfig& config, const ExperimentOverrides& overrides) {
  if (overrides.controller) {
    config.controller.kind = *overrides.controller;
    // Switching controller implies the matching model when the file did not
    // pin one explicitly; validation still rejects true mismatches.
  }
  if (overrides.output_dir) config.run.output_dir = *overrides.output_dir;
  if (overrides.seed) config.disturbance.seed = *overrides.seed;
  if (overrides.disturbance) config.run.disturbance_enabled = *overrides.disturbance;
  if (overrides.steps) config.run.steps = *overrides.steps;
}

}  // namespace spine
