#include "aggkin/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace aggkin {

namespace {

std::string trim(std::string s) {
  const auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
  while (!s.empty() && is_space(s.front())) s.erase(s.begin());
  while (!s.empty() && is_space(s.back())) s.pop_back();
  return s;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      parts.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(trim(cur));
  return parts;
}

[[noreturn]] void fail(int line, const std::string& msg) {
  throw ConfigError("config line " + std::to_string(line) + ": " + msg);
}

double parse_real(const std::string& v, int line, const std::string& key) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return x;
  } catch (const std::exception&) {
    fail(line, "key '" + key + "': cannot parse real value '" + v + "'");
  }
}

std::uint64_t parse_uint(const std::string& v, int line, const std::string& key) {
  std::uint64_t x = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc{} || ptr != v.data() + v.size()) {
    fail(line, "key '" + key + "': cannot parse integer value '" + v + "'");
  }
  return x;
}

std::string fmt_real(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

StepperKind parse_stepper(const std::string& v, int line, const std::string& key) {
  if (v == "rk2") return StepperKind::rk2;
  if (v == "rk4") return StepperKind::rk4;
  if (v == "rkf45") return StepperKind::rkf45;
  fail(line, "key '" + key + "': expected rk2 | rk4 | rkf45, got '" + v + "'");
}

BenchCell parse_cell(const std::string& v, int line) {
  const auto colon = v.find(':');
  if (colon == std::string::npos) {
    fail(line, "bench_cells entries look like fixed:<tau> or adaptive:<tol>, got '" + v + "'");
  }
  const std::string kind = trim(v.substr(0, colon));
  BenchCell cell;
  if (kind == "fixed") {
    cell.mode = StepMode::fixed;
  } else if (kind == "adaptive") {
    cell.mode = StepMode::adaptive;
  } else {
    fail(line, "bench cell mode must be fixed or adaptive, got '" + kind + "'");
  }
  cell.value = parse_real(trim(v.substr(colon + 1)), line, "bench_cells");
  if (!(cell.value > 0.0)) fail(line, "bench cell value must be > 0");
  return cell;
}

}  // namespace

std::string to_string(StepperKind kind) {
  switch (kind) {
    case StepperKind::rk2:
      return "rk2";
    case StepperKind::rk4:
      return "rk4";
    case StepperKind::rkf45:
      return "rkf45";
  }
  return "?";
}

std::string to_string(ModelVariant variant) {
  switch (variant) {
    case ModelVariant::aggregation:
      return "aggregation";
    case ModelVariant::aggregation_sources:
      return "sources";
    case ModelVariant::aggregation_shattering:
      return "shattering";
  }
  return "?";
}

std::string to_string(KernelVariant variant) {
  switch (variant) {
    case KernelVariant::constant:
      return "constant";
    case KernelVariant::generalized_brownian:
      return "brownian";
    case KernelVariant::free_molecular:
      return "free_molecular";
    case KernelVariant::custom_factors:
      return "factors";
  }
  return "?";
}

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  std::set<std::string> seen;

  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string s = raw;
    if (const auto hash = s.find('#'); hash != std::string::npos) s.erase(hash);
    s = trim(s);
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos) fail(line, "expected key = value, got '" + trim(raw) + "'");
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (key.empty()) fail(line, "empty key");
    if (value.empty()) fail(line, "key '" + key + "' has no value");
    if (!seen.insert(key).second) fail(line, "duplicate key '" + key + "'");

    if (key == "model") {
      if (value == "aggregation") {
        cfg.model = ModelVariant::aggregation;
      } else if (value == "sources") {
        cfg.model = ModelVariant::aggregation_sources;
      } else if (value == "shattering") {
        cfg.model = ModelVariant::aggregation_shattering;
      } else {
        fail(line, "model must be aggregation | sources | shattering, got '" + value + "'");
      }
    } else if (key == "kernel") {
      if (value == "constant") {
        cfg.kernel = KernelVariant::constant;
      } else if (value == "brownian") {
        cfg.kernel = KernelVariant::generalized_brownian;
      } else if (value == "free_molecular") {
        cfg.kernel = KernelVariant::free_molecular;
      } else if (value == "factors") {
        cfg.kernel = KernelVariant::custom_factors;
      } else {
        fail(line, "kernel must be constant | brownian | free_molecular | factors, got '" +
                       value + "'");
      }
    } else if (key == "alpha") {
      cfg.alpha = parse_real(value, line, key);
    } else if (key == "factors_path") {
      cfg.factors_path = value;
    } else if (key == "m") {
      cfg.m = static_cast<std::size_t>(parse_uint(value, line, key));
    } else if (key == "lambda") {
      cfg.lambda = parse_real(value, line, key);
    } else if (key == "sources") {
      for (const std::string& item : split(value, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) {
          fail(line, "sources entries look like k:rate, got '" + item + "'");
        }
        const auto k = parse_uint(trim(item.substr(0, colon)), line, key);
        const double rate = parse_real(trim(item.substr(colon + 1)), line, key);
        cfg.sources.emplace_back(static_cast<std::size_t>(k), rate);
      }
    } else if (key == "initial") {
      if (value == "monodisperse") {
        cfg.initial = InitialKind::monodisperse;
      } else if (value == "exponential") {
        cfg.initial = InitialKind::exponential;
      } else {
        fail(line, "initial must be monodisperse | exponential, got '" + value + "'");
      }
    } else if (key == "initial_scale") {
      cfg.initial_scale = parse_real(value, line, key);
    } else if (key == "stepper") {
      cfg.stepper = parse_stepper(value, line, key);
    } else if (key == "mode") {
      if (value == "fixed") {
        cfg.mode = StepMode::fixed;
      } else if (value == "adaptive") {
        cfg.mode = StepMode::adaptive;
      } else {
        fail(line, "mode must be fixed | adaptive, got '" + value + "'");
      }
    } else if (key == "tau") {
      cfg.tau = parse_real(value, line, key);
    } else if (key == "tol") {
      cfg.tol = parse_real(value, line, key);
    } else if (key == "tau0") {
      cfg.tau0 = parse_real(value, line, key);
    } else if (key == "safety") {
      cfg.safety = parse_real(value, line, key);
    } else if (key == "growth_max") {
      cfg.growth_max = parse_real(value, line, key);
    } else if (key == "shrink_min") {
      cfg.shrink_min = parse_real(value, line, key);
    } else if (key == "tau_min") {
      cfg.tau_min = parse_real(value, line, key);
    } else if (key == "max_rejects") {
      cfg.max_rejects = static_cast<int>(parse_uint(value, line, key));
    } else if (key == "error_norm") {
      if (value == "absolute") {
        cfg.relative_error = false;
      } else if (value == "relative") {
        cfg.relative_error = true;
      } else {
        fail(line, "error_norm must be absolute | relative, got '" + value + "'");
      }
    } else if (key == "t_end") {
      cfg.t_end = parse_real(value, line, key);
    } else if (key == "snapshots") {
      for (const std::string& item : split(value, ',')) {
        cfg.snapshots.push_back(parse_real(item, line, key));
      }
    } else if (key == "record") {
      if (value == "every_step") {
        cfg.record = RecordMode::every_step;
      } else if (value == "interval") {
        cfg.record = RecordMode::interval;
      } else if (value == "none") {
        cfg.record = RecordMode::none;
      } else {
        fail(line, "record must be every_step | interval | none, got '" + value + "'");
      }
    } else if (key == "record_interval") {
      cfg.record_interval = parse_real(value, line, key);
    } else if (key == "output") {
      cfg.output = value;
    } else if (key == "seed") {
      cfg.seed = parse_uint(value, line, key);
    } else if (key == "bench_schemes") {
      for (const std::string& item : split(value, ',')) {
        cfg.bench_schemes.push_back(parse_stepper(item, line, key));
      }
    } else if (key == "bench_cells") {
      for (const std::string& item : split(value, ',')) {
        cfg.bench_cells.push_back(parse_cell(item, line));
      }
    } else {
      fail(line, "unknown key '" + key + "'");
    }
  }

  // Schema checks before anything is allocated from these values.
  const auto require = [&](const char* key) {
    if (!seen.contains(key)) {
      throw ConfigError(std::string("config is missing required key '") + key + "'");
    }
  };
  require("model");
  require("kernel");
  require("m");
  require("stepper");
  require("mode");
  require("t_end");
  if (cfg.m < 2) throw ConfigError("config key 'm' must be >= 2");
  if (cfg.kernel == KernelVariant::generalized_brownian) {
    require("alpha");
    if (!std::isfinite(cfg.alpha) || cfg.alpha < 0.0) {
      throw ConfigError("config key 'alpha' must be finite and >= 0");
    }
  }
  if (cfg.kernel == KernelVariant::custom_factors) require("factors_path");
  if (cfg.model == ModelVariant::aggregation_sources) require("sources");
  if (cfg.model == ModelVariant::aggregation_shattering) {
    require("lambda");
    if (!std::isfinite(cfg.lambda) || cfg.lambda < 0.0) {
      throw ConfigError("config key 'lambda' must be finite and >= 0");
    }
  }
  if (!(cfg.tau0 >= 0.0) || !std::isfinite(cfg.tau0)) {
    throw ConfigError("config key 'tau0' must be finite and >= 0");
  }
  if (cfg.safety < 0.0 || cfg.safety >= 1.0) {
    throw ConfigError("config key 'safety' must lie in (0,1), or 0 for the default");
  }
  if (!(cfg.shrink_min < 1.0 && 1.0 < cfg.growth_max)) {
    throw ConfigError("config keys must satisfy shrink_min < 1 < growth_max");
  }
  if (!(cfg.tau_min > 0.0)) throw ConfigError("config key 'tau_min' must be > 0");
  if (cfg.max_rejects < 1) throw ConfigError("config key 'max_rejects' must be >= 1");
  if (cfg.mode == StepMode::fixed) {
    require("tau");
    if (!(cfg.tau > 0.0)) throw ConfigError("config key 'tau' must be > 0");
  } else {
    require("tol");
    if (!(cfg.tol > 0.0)) throw ConfigError("config key 'tol' must be > 0");
  }
  if (cfg.initial == InitialKind::exponential) {
    require("initial_scale");
    if (!(cfg.initial_scale > 0.0)) throw ConfigError("config key 'initial_scale' must be > 0");
  }
  if (cfg.record == RecordMode::interval) {
    require("record_interval");
    if (!(cfg.record_interval > 0.0)) {
      throw ConfigError("config key 'record_interval' must be > 0");
    }
  }
  if (!(cfg.t_end >= 0.0) || !std::isfinite(cfg.t_end)) {
    throw ConfigError("config key 't_end' must be finite and >= 0");
  }
  std::sort(cfg.snapshots.begin(), cfg.snapshots.end());
  cfg.snapshots.erase(std::unique(cfg.snapshots.begin(), cfg.snapshots.end()),
                      cfg.snapshots.end());
  for (double s : cfg.snapshots) {
    if (!(s >= 0.0) || s > cfg.t_end) {
      throw ConfigError("snapshot times must lie in [0, t_end]");
    }
  }
  std::sort(cfg.sources.begin(), cfg.sources.end());
  for (const auto& [k, rate] : cfg.sources) {
    if (k < 1 || k > cfg.m) throw ConfigError("source index outside 1..m");
    if (!std::isfinite(rate) || rate < 0.0) {
      throw ConfigError("source rates must be finite and >= 0");
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

std::string serialize_config(const ExperimentConfig& cfg) {
  std::ostringstream out;
  out << "model = " << to_string(cfg.model) << '\n';
  out << "kernel = " << to_string(cfg.kernel) << '\n';
  if (cfg.kernel == KernelVariant::generalized_brownian) {
    out << "alpha = " << fmt_real(cfg.alpha) << '\n';
  }
  if (cfg.kernel == KernelVariant::custom_factors) {
    out << "factors_path = " << cfg.factors_path << '\n';
  }
  out << "m = " << cfg.m << '\n';
  if (cfg.model == ModelVariant::aggregation_shattering) {
    out << "lambda = " << fmt_real(cfg.lambda) << '\n';
  }
  if (cfg.model == ModelVariant::aggregation_sources) {
    out << "sources = ";
    for (std::size_t i = 0; i < cfg.sources.size(); ++i) {
      if (i > 0) out << ", ";
      out << cfg.sources[i].first << ':' << fmt_real(cfg.sources[i].second);
    }
    out << '\n';
  }
  out << "initial = " << (cfg.initial == InitialKind::exponential ? "exponential"
                                                                  : "monodisperse")
      << '\n';
  if (cfg.initial == InitialKind::exponential) {
    out << "initial_scale = " << fmt_real(cfg.initial_scale) << '\n';
  }
  out << "stepper = " << to_string(cfg.stepper) << '\n';
  out << "mode = " << (cfg.mode == StepMode::fixed ? "fixed" : "adaptive") << '\n';
  if (cfg.mode == StepMode::fixed) {
    out << "tau = " << fmt_real(cfg.tau) << '\n';
  } else {
    out << "tol = " << fmt_real(cfg.tol) << '\n';
  }
  if (cfg.tau0 > 0.0) out << "tau0 = " << fmt_real(cfg.tau0) << '\n';
  if (cfg.safety > 0.0) out << "safety = " << fmt_real(cfg.safety) << '\n';
  out << "growth_max = " << fmt_real(cfg.growth_max) << '\n';
  out << "shrink_min = " << fmt_real(cfg.shrink_min) << '\n';
  out << "tau_min = " << fmt_real(cfg.tau_min) << '\n';
  out << "max_rejects = " << cfg.max_rejects << '\n';
  out << "error_norm = " << (cfg.relative_error ? "relative" : "absolute") << '\n';
  out << "t_end = " << fmt_real(cfg.t_end) << '\n';
  if (!cfg.snapshots.empty()) {
    out << "snapshots = ";
    for (std::size_t i = 0; i < cfg.snapshots.size(); ++i) {
      if (i > 0) out << ", ";
      out << fmt_real(cfg.snapshots[i]);
    }
    out << '\n';
  }
  switch (cfg.record) {
    case RecordMode::every_step:
      out << "record = every_step\n";
      break;
    case RecordMode::interval:
      out << "record = interval\n";
      out << "record_interval = " << fmt_real(cfg.record_interval) << '\n';
      break;
    case RecordMode::none:
      out << "record = none\n";
      break;
  }
  out << "output = " << cfg.output << '\n';
  if (cfg.seed) out << "seed = " << *cfg.seed << '\n';
  if (!cfg.bench_schemes.empty()) {
    out << "bench_schemes = ";
    for (std::size_t i = 0; i < cfg.bench_schemes.size(); ++i) {
      if (i > 0) out << ", ";
      out << to_string(cfg.bench_schemes[i]);
    }
    out << '\n';
  }
  if (!cfg.bench_cells.empty()) {
    out << "bench_cells = ";
    for (std::size_t i = 0; i < cfg.bench_cells.size(); ++i) {
      if (i > 0) out << ", ";
      const auto& cell = cfg.bench_cells[i];
      out << (cell.mode == StepMode::fixed ? "fixed" : "adaptive") << ':'
          << fmt_real(cell.value);
    }
    out << '\n';
  }
  return out.str();
}

SimulationConfig to_simulation_config(const ExperimentConfig& cfg) {
  SimulationConfig sim;
  sim.model.variant = cfg.model;
  sim.model.m = cfg.m;
  sim.model.shatter_rate = cfg.model == ModelVariant::aggregation_shattering ? cfg.lambda : 0.0;
  if (cfg.model == ModelVariant::aggregation_sources) sim.model.sources.rates = cfg.sources;

  KernelSpec spec;
  spec.variant = cfg.kernel;
  spec.alpha = cfg.alpha;
  spec.factors_path = cfg.factors_path;
  if (cfg.kernel == KernelVariant::free_molecular) {
    sim.model.kernel = build_dense(spec, cfg.m);
  } else {
    sim.model.kernel = build_factors(spec, cfg.m);
  }

  sim.control.stepper = cfg.stepper;
  sim.control.mode = cfg.mode;
  sim.control.tau = cfg.tau;
  sim.control.tol = cfg.tol;
  sim.control.safety = cfg.safety;
  sim.control.growth_max = cfg.growth_max;
  sim.control.shrink_min = cfg.shrink_min;
  sim.control.tau_min = cfg.tau_min;
  sim.control.max_rejects = cfg.max_rejects;
  sim.control.relative_error = cfg.relative_error;

  sim.t_end = cfg.t_end;
  sim.initial.kind = cfg.initial;
  sim.initial.scale = cfg.initial_scale;
  sim.record = cfg.record;
  sim.record_interval = cfg.record_interval;
  sim.snapshot_times = cfg.snapshots;
  sim.initial_tau = cfg.tau0;
  return sim;
}

}  // namespace aggkin
