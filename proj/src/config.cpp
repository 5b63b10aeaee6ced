#include "contain/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace contain {

namespace {

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

struct Entry {
  std::string value;
  int line = 0;
  bool used = false;
};

struct RawConfig {
  std::map<std::string, Entry> entries;
  std::vector<std::string> order;

  const Entry* find(const std::string& key) const {
    const auto it = entries.find(key);
    return it == entries.end() ? nullptr : &it->second;
  }

  std::string require_string(const std::string& key) {
    auto it = entries.find(key);
    if (it == entries.end()) throw ConfigError(0, "missing required key '" + key + "'");
    it->second.used = true;
    return it->second.value;
  }

  std::optional<std::string> optional_string(const std::string& key) {
    auto it = entries.find(key);
    if (it == entries.end()) return std::nullopt;
    it->second.used = true;
    return it->second.value;
  }

  double parse_double(const std::string& key, const Entry& e) {
    try {
      size_t pos = 0;
      const double v = std::stod(e.value, &pos);
      if (pos != e.value.size()) throw std::invalid_argument("trailing characters");
      return v;
    } catch (const std::exception&) {
      throw ConfigError(e.line, "key '" + key + "': not a number: '" + e.value + "'");
    }
  }

  double require_double(const std::string& key) {
    auto it = entries.find(key);
    if (it == entries.end()) throw ConfigError(0, "missing required key '" + key + "'");
    it->second.used = true;
    return parse_double(key, it->second);
  }

  std::optional<double> optional_double(const std::string& key) {
    auto it = entries.find(key);
    if (it == entries.end()) return std::nullopt;
    it->second.used = true;
    return parse_double(key, it->second);
  }

  std::optional<bool> optional_bool(const std::string& key) {
    auto it = entries.find(key);
    if (it == entries.end()) return std::nullopt;
    it->second.used = true;
    if (it->second.value == "true") return true;
    if (it->second.value == "false") return false;
    throw ConfigError(it->second.line, "key '" + key + "': expected true or false");
  }

  int line_of(const std::string& key) const {
    const Entry* e = find(key);
    return e ? e->line : 0;
  }
};

RawConfig tokenize(const std::string& text) {
  RawConfig raw;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(lineno, "expected 'key = value', got '" + line + "'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(lineno, "empty key");
    if (raw.entries.count(key)) throw ConfigError(lineno, "duplicate key '" + key + "'");
    raw.entries[key] = {value, lineno, false};
    raw.order.push_back(key);
  }
  return raw;
}

void require_positive(const RawConfig& raw, const std::string& key, double v) {
  if (!(std::isfinite(v) && v > 0.0)) {
    throw ConfigError(raw.line_of(key), "key '" + key + "' must be finite and > 0");
  }
}

DoseSchedule parse_schedule(const std::string& text, int line) {
  DoseSchedule sched;
  std::istringstream in(text);
  std::string part;
  while (std::getline(in, part, ',')) {
    part = trim(part);
    if (part.empty()) continue;
    const auto colon = part.find(':');
    if (colon == std::string::npos) {
      throw ConfigError(line, "schedule entries must look like 't:level', got '" + part + "'");
    }
    try {
      const double t = std::stod(part.substr(0, colon));
      const double level = std::stod(part.substr(colon + 1));
      sched.breakpoints.emplace_back(t, level);
    } catch (const std::exception&) {
      throw ConfigError(line, "schedule entry '" + part + "' is not numeric");
    }
  }
  if (sched.breakpoints.empty()) throw ConfigError(line, "schedule has no breakpoints");
  for (size_t i = 0; i + 1 < sched.breakpoints.size(); ++i) {
    if (!(sched.breakpoints[i].first < sched.breakpoints[i + 1].first)) {
      throw ConfigError(line, "schedule breakpoints must be strictly increasing in t");
    }
  }
  return sched;
}

TumorModel parse_model(RawConfig& raw) {
  const std::string variant = raw.require_string("model.variant");
  const int vline = raw.line_of("model.variant");
  const double L_max = raw.require_double("model.L_max");
  const double N_crit = raw.require_double("model.N_crit");
  require_positive(raw, "model.N_crit", N_crit);
  if (!(L_max >= 0.0)) throw ConfigError(raw.line_of("model.L_max"), "L_max must be >= 0");

  auto parse_law = [&raw]() {
    const std::string law = raw.require_string("model.law");
    const int lline = raw.line_of("model.law");
    const double rho = raw.require_double("model.rho");
    if (law == "gompertz") return GrowthLaw::gompertz(rho, raw.require_double("model.K"));
    if (law == "power_law") return GrowthLaw::power_law(rho, raw.require_double("model.gamma"));
    if (law == "logistic") return GrowthLaw::logistic(rho, raw.require_double("model.K"));
    throw ConfigError(lline, "unknown law '" + law + "'");
  };

  try {
    if (variant == "monro_gaffney") {
      return TumorModel::monro_gaffney(raw.require_double("model.rho"),
                                       raw.require_double("model.K"), L_max, N_crit);
    }
    if (variant == "norton_simon") {
      return TumorModel::norton_simon(parse_law(), L_max, N_crit);
    }
    if (variant == "mutation") {
      return TumorModel::mutation(parse_law(), raw.require_double("model.tau1"),
                                  raw.require_double("model.tau2"), L_max, N_crit);
    }
    if (variant == "cost_mutation") {
      return TumorModel::cost_mutation(parse_law(), raw.require_double("model.rho_s"),
                                       raw.require_double("model.rho_r"),
                                       raw.require_double("model.tau1"),
                                       raw.require_double("model.tau2"), L_max, N_crit);
    }
  } catch (const std::invalid_argument& err) {
    throw ConfigError(vline, std::string("invalid model: ") + err.what());
  }
  throw ConfigError(vline, "unknown model variant '" + variant + "'");
}

Policy parse_policy(RawConfig& raw, const std::string& name, const Thresholds& thr) {
  const std::string prefix = "policy." + name + ".";
  const std::string variant = raw.require_string(prefix + "variant");
  const int vline = raw.line_of(prefix + "variant");
  try {
    if (variant == "no_treat") return Policy::no_treat(thr.N_tol);
    if (variant == "constant_dose") {
      return Policy::constant_dose(raw.require_double(prefix + "dose"), thr.N_tol);
    }
    if (variant == "mtd") return Policy::mtd(thr.N_tol);
    if (variant == "delayed_mtd") return Policy::delayed_mtd(thr.N_tol);
    if (variant == "containment") {
      const double c = raw.optional_double(prefix + "threshold").value_or(thr.N_tol);
      return Policy::containment(c, thr.N_tol);
    }
    if (variant == "intermittent") {
      const double n_min = raw.optional_double(prefix + "n_min").value_or(thr.N_min);
      return Policy::intermittent(n_min, thr.N_tol);
    }
    if (variant == "ideal_mtd") return Policy::ideal_mtd(thr.N_tol);
    if (variant == "delayed_ideal_mtd") return Policy::delayed_ideal_mtd(thr.N_tol);
    if (variant == "ideal_containment") {
      const double c = raw.optional_double(prefix + "threshold").value_or(thr.N_tol);
      return Policy::ideal_containment(c, thr.N_tol);
    }
    if (variant == "ideal_intermittent") {
      const double n_min = raw.optional_double(prefix + "n_min").value_or(thr.N_min);
      return Policy::ideal_intermittent(n_min, thr.N_tol);
    }
    if (variant == "alternative") {
      const std::string sched_text = raw.require_string(prefix + "schedule");
      DoseSchedule sched = parse_schedule(sched_text, raw.line_of(prefix + "schedule"));
      const auto reset = raw.optional_double(prefix + "reset_time");
      if (reset) return Policy::ideal_alternative(std::move(sched), *reset, thr.N_tol);
      const bool override_flag =
          raw.optional_bool(prefix + "feedback_override").value_or(true);
      return Policy::alternative(std::move(sched), thr.N_tol, override_flag);
    }
  } catch (const std::invalid_argument& err) {
    throw ConfigError(vline, "policy '" + name + "': " + err.what());
  }
  throw ConfigError(vline, "unknown policy variant '" + variant + "'");
}

ScenarioConfig build_scenario_config(RawConfig& raw) {
  ScenarioConfig cfg;
  cfg.model = parse_model(raw);

  cfg.init.S = raw.require_double("init.S0");
  cfg.init.R = raw.require_double("init.R0");
  cfg.init.t = 0.0;
  if (!(cfg.init.S >= 0.0)) throw ConfigError(raw.line_of("init.S0"), "S0 must be >= 0");
  require_positive(raw, "init.R0", cfg.init.R);

  cfg.thr.N0 = cfg.init.N();
  if (const auto n0 = raw.optional_double("thresholds.N0")) {
    if (std::abs(*n0 - cfg.thr.N0) > 1e-9 * cfg.thr.N0) {
      throw ConfigError(raw.line_of("thresholds.N0"),
                        "thresholds.N0 must equal S0 + R0 = " + fmt(cfg.thr.N0));
    }
  }
  cfg.thr.N_tol = raw.require_double("thresholds.N_tol");
  require_positive(raw, "thresholds.N_tol", cfg.thr.N_tol);
  if (cfg.thr.N_tol < cfg.thr.N0) {
    throw ConfigError(raw.line_of("thresholds.N_tol"),
                      "N_tol must be >= N0 (= S0 + R0 = " + fmt(cfg.thr.N0) + ")");
  }
  cfg.thr.N_crit = cfg.model.N_crit;
  if (cfg.thr.N_crit < cfg.thr.N_tol) {
    throw ConfigError(raw.line_of("model.N_crit"), "N_crit must be >= N_tol");
  }
  cfg.thr.N_min = raw.optional_double("thresholds.N_min").value_or(0.5 * cfg.thr.N_tol);
  if (!(cfg.thr.N_min > 0.0 && cfg.thr.N_min < cfg.thr.N_tol)) {
    throw ConfigError(raw.line_of("thresholds.N_min"), "need 0 < N_min < N_tol");
  }

  if (const auto method = raw.optional_string("integrator.method")) {
    if (*method == "rk45") {
      cfg.integ.method = IntegratorConfig::Method::Rk45Adaptive;
    } else if (*method == "rk4") {
      cfg.integ.method = IntegratorConfig::Method::Rk4Fixed;
    } else {
      throw ConfigError(raw.line_of("integrator.method"),
                        "unknown method '" + *method + "' (rk45 or rk4)");
    }
  }
  cfg.integ.rel_tol = raw.optional_double("integrator.rel_tol").value_or(cfg.integ.rel_tol);
  cfg.integ.abs_tol = raw.optional_double("integrator.abs_tol").value_or(cfg.integ.abs_tol);
  cfg.integ.max_step = raw.optional_double("integrator.max_step").value_or(cfg.integ.max_step);
  cfg.integ.fixed_step =
      raw.optional_double("integrator.fixed_step").value_or(cfg.integ.fixed_step);
  cfg.integ.event_time_tol =
      raw.optional_double("integrator.event_time_tol").value_or(cfg.integ.event_time_tol);
  cfg.integ.horizon = raw.require_double("integrator.horizon");
  require_positive(raw, "integrator.horizon", cfg.integ.horizon);
  cfg.integ.feedback_stabilization =
      raw.optional_bool("integrator.feedback_stabilization").value_or(false);

  // Policy blocks in declaration order.
  std::vector<std::string> names;
  for (const std::string& key : raw.order) {
    if (key.rfind("policy.", 0) != 0) continue;
    const auto dot = key.find('.', 7);
    if (dot == std::string::npos) {
      throw ConfigError(raw.line_of(key), "policy keys look like policy.<name>.<field>");
    }
    const std::string name = key.substr(7, dot - 7);
    if (std::find(names.begin(), names.end(), name) == names.end()) names.push_back(name);
  }
  if (names.empty()) throw ConfigError(0, "no policy blocks (need at least one policy.<name>.*)");
  for (const std::string& name : names) {
    cfg.policies.emplace_back(name, parse_policy(raw, name, cfg.thr));
  }

  cfg.outputs.dir = raw.optional_string("outputs.dir").value_or(cfg.outputs.dir);
  cfg.outputs.trajectories =
      raw.optional_bool("outputs.trajectories").value_or(cfg.outputs.trajectories);
  cfg.outputs.curves = raw.optional_bool("outputs.curves").value_or(cfg.outputs.curves);
  cfg.outputs.events = raw.optional_bool("outputs.events").value_or(cfg.outputs.events);

  for (const std::string& key : raw.order) {
    const Entry* e = raw.find(key);
    if (e && !e->used) throw ConfigError(e->line, "unknown key '" + key + "'");
  }
  return cfg;
}

}  // namespace

ScenarioConfig parse_scenario_config(const std::string& text) {
  RawConfig raw = tokenize(text);
  return build_scenario_config(raw);
}

ScenarioConfig load_scenario_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario_config(buf.str());
}

namespace {

void render_law(std::string& out, const GrowthLaw& law) {
  out += std::string("model.law = ") + to_string(law.kind) + "\n";
  out += "model.rho = " + fmt(law.rho) + "\n";
  if (law.kind == GrowthLaw::Kind::PowerLaw) {
    out += "model.gamma = " + fmt(law.gamma) + "\n";
  } else {
    out += "model.K = " + fmt(law.K) + "\n";
  }
}

std::string render_schedule(const DoseSchedule& sched) {
  std::string out;
  for (size_t i = 0; i < sched.breakpoints.size(); ++i) {
    if (i) out += ",";
    out += fmt(sched.breakpoints[i].first) + ":" + fmt(sched.breakpoints[i].second);
  }
  return out;
}

}  // namespace

std::string render_scenario_config(const ScenarioConfig& cfg) {
  std::string out;
  switch (cfg.model.kind) {
    case TumorModel::Kind::MonroGaffney:
      out += "model.variant = monro_gaffney\n";
      out += "model.rho = " + fmt(cfg.model.law.rho) + "\n";
      out += "model.K = " + fmt(cfg.model.law.K) + "\n";
      break;
    case TumorModel::Kind::NortonSimon:
      out += "model.variant = norton_simon\n";
      render_law(out, cfg.model.law);
      break;
    case TumorModel::Kind::Mutation:
      out += "model.variant = mutation\n";
      render_law(out, cfg.model.law);
      out += "model.tau1 = " + fmt(cfg.model.tau1) + "\n";
      out += "model.tau2 = " + fmt(cfg.model.tau2) + "\n";
      break;
    case TumorModel::Kind::CostMutation:
      out += "model.variant = cost_mutation\n";
      render_law(out, cfg.model.law);
      out += "model.tau1 = " + fmt(cfg.model.tau1) + "\n";
      out += "model.tau2 = " + fmt(cfg.model.tau2) + "\n";
      out += "model.rho_s = " + fmt(cfg.model.rho_s) + "\n";
      out += "model.rho_r = " + fmt(cfg.model.rho_r) + "\n";
      break;
    default:
      throw std::invalid_argument("render_scenario_config: model variant has no text form");
  }
  out += "model.L_max = " + fmt(cfg.model.L_max) + "\n";
  out += "model.N_crit = " + fmt(cfg.model.N_crit) + "\n";
  out += "init.S0 = " + fmt(cfg.init.S) + "\n";
  out += "init.R0 = " + fmt(cfg.init.R) + "\n";
  out += "thresholds.N_tol = " + fmt(cfg.thr.N_tol) + "\n";
  out += "thresholds.N_min = " + fmt(cfg.thr.N_min) + "\n";
  out += std::string("integrator.method = ") +
         (cfg.integ.method == IntegratorConfig::Method::Rk45Adaptive ? "rk45" : "rk4") + "\n";
  out += "integrator.rel_tol = " + fmt(cfg.integ.rel_tol) + "\n";
  out += "integrator.abs_tol = " + fmt(cfg.integ.abs_tol) + "\n";
  if (std::isfinite(cfg.integ.max_step)) {
    out += "integrator.max_step = " + fmt(cfg.integ.max_step) + "\n";
  }
  if (cfg.integ.method == IntegratorConfig::Method::Rk4Fixed) {
    out += "integrator.fixed_step = " + fmt(cfg.integ.fixed_step) + "\n";
  }
  out += "integrator.event_time_tol = " + fmt(cfg.integ.event_time_tol) + "\n";
  out += "integrator.horizon = " + fmt(cfg.integ.horizon) + "\n";
  if (cfg.integ.feedback_stabilization) {
    out += "integrator.feedback_stabilization = true\n";
  }
  for (const auto& [name, p] : cfg.policies) {
    const std::string prefix = "policy." + name + ".";
    switch (p.kind) {
      case Policy::Kind::NoTreat:
        out += prefix + "variant = no_treat\n";
        break;
      case Policy::Kind::ConstantDose:
        out += prefix + "variant = constant_dose\n";
        out += prefix + "dose = " + fmt(p.dose_level) + "\n";
        break;
      case Policy::Kind::Mtd:
        out += prefix + "variant = mtd\n";
        break;
      case Policy::Kind::DelayedMtd:
        out += prefix + "variant = delayed_mtd\n";
        break;
      case Policy::Kind::Containment:
        out += prefix + "variant = containment\n";
        out += prefix + "threshold = " + fmt(p.threshold) + "\n";
        break;
      case Policy::Kind::Intermittent:
        out += prefix + "variant = intermittent\n";
        out += prefix + "n_min = " + fmt(p.band_low) + "\n";
        break;
      case Policy::Kind::IdealMtd:
        out += prefix + "variant = ideal_mtd\n";
        break;
      case Policy::Kind::DelayedIdealMtd:
        out += prefix + "variant = delayed_ideal_mtd\n";
        break;
      case Policy::Kind::IdealContainment:
        out += prefix + "variant = ideal_containment\n";
        out += prefix + "threshold = " + fmt(p.threshold) + "\n";
        break;
      case Policy::Kind::IdealIntermittent:
        out += prefix + "variant = ideal_intermittent\n";
        out += prefix + "n_min = " + fmt(p.band_low) + "\n";
        break;
      case Policy::Kind::Alternative:
        out += prefix + "variant = alternative\n";
        out += prefix + "schedule = " + render_schedule(p.schedule) + "\n";
        if (p.ideal_reset_time) {
          out += prefix + "reset_time = " + fmt(*p.ideal_reset_time) + "\n";
        } else if (!p.feedback_override) {
          out += prefix + "feedback_override = false\n";
        }
        break;
      case Policy::Kind::DelayedDose:
        throw std::invalid_argument("render_scenario_config: delayed_dose has no text form");
    }
  }
  out += "outputs.dir = " + cfg.outputs.dir + "\n";
  out += std::string("outputs.trajectories = ") + (cfg.outputs.trajectories ? "true" : "false") +
         "\n";
  out += std::string("outputs.curves = ") + (cfg.outputs.curves ? "true" : "false") + "\n";
  out += std::string("outputs.events = ") + (cfg.outputs.events ? "true" : "false") + "\n";
  return out;
}

}  // namespace contain
