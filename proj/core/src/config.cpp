#include "feekit/config.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "feekit/errors.hpp"

namespace feekit {

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t");
  size_t e = s.find_last_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, e - b + 1);
}

bool parseBool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1" || v == "on") return true;
  if (v == "false" || v == "0" || v == "off") return false;
  throw ConfigError("config key '" + key + "': expected boolean, got '" + v + "'");
}

double parseDouble(const std::string& v, const std::string& key) {
  char* end = nullptr;
  double x = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0') {
    throw ConfigError("config key '" + key + "': expected number, got '" + v + "'");
  }
  return x;
}

long parseInt(const std::string& v, const std::string& key) {
  char* end = nullptr;
  long x = std::strtol(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0') {
    throw ConfigError("config key '" + key + "': expected integer, got '" + v + "'");
  }
  return x;
}

std::vector<std::string> splitList(const std::string& v) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : v) {
    if (c == ',') {
      if (!trim(cur).empty()) out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!trim(cur).empty()) out.push_back(trim(cur));
  return out;
}

}  // namespace

std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string RunConfig::canonical() const {
  std::map<std::string, std::string> kv;
  kv["panel"] = panel_path;
  kv["shocks"] = shocks_path;
  kv["weights"] = weights_path;
  kv["calendar.london"] = calendar.london.toIso();
  kv["calendar.merge"] = calendar.merge.toIso();
  kv["calendar.dencun"] = calendar.dencun.toIso();
  kv["window.start"] = confirmatoryStart().toIso();
  kv["window.end"] = confirmatoryEnd().toIso();
  kv["hac_lag_levels"] = std::to_string(hac_lag_levels);
  kv["hac_lag_diff"] = std::to_string(hac_lag_diff);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", knot);
  kv["knot"] = buf;
  std::string fam;
  for (const auto& f : fdr_family) fam += (fam.empty() ? "" : ",") + f;
  kv["fdr_family"] = fam;
  kv["demand_variant"] = demand_variant == DemandVariant::kFull ? "full" : "lite";
  std::snprintf(buf, sizeof(buf), "%.6g", winsor_tail);
  kv["winsor_tail"] = buf;
  kv["trim_pre_london"] = trim_pre_london ? "true" : "false";
  std::snprintf(buf, sizeof(buf), "%.6g", support_sd_threshold);
  kv["support_sd_threshold"] = buf;
  kv["lp_horizon"] = std::to_string(lp_horizon);
  std::snprintf(buf, sizeof(buf), "%.6g", ecm_gate_alpha);
  kv["ecm_gate_alpha"] = buf;
  kv["ecm_gate_mode"] = ecm_gate_warn_only ? "warn" : "fail";
  kv["cfact.start"] = cfact_start.toIso();
  kv["cfact.end"] = cfact_end.toIso();
  std::snprintf(buf, sizeof(buf), "%.6g", cfact_percentile);
  kv["cfact.percentile"] = buf;
  kv["cfact.price"] = cfact_price;
  kv["cfact.include_tip"] = cfact_include_tip ? "true" : "false";
  kv["synth.length"] = std::to_string(long(synth_length));
  std::snprintf(buf, sizeof(buf), "%.6g", synth_beta);
  kv["synth.beta"] = buf;
  std::snprintf(buf, sizeof(buf), "%.6g", synth_psi);
  kv["synth.psi"] = buf;
  std::snprintf(buf, sizeof(buf), "%.6g", synth_phi);
  kv["synth.phi"] = buf;
  std::snprintf(buf, sizeof(buf), "%.6g", synth_sigma_eps);
  kv["synth.sigma_eps"] = buf;
  std::snprintf(buf, sizeof(buf), "%.6g", synth_sigma_a);
  kv["synth.sigma_a"] = buf;
  kv["seed"] = std::to_string(seed);
  for (const auto& [canonical_name, actual] : schema.renames) {
    kv["schema." + canonical_name] = actual;
  }
  std::string out;
  for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
  return out;
}

std::uint64_t RunConfig::hash() const { return fnv1a64(canonical()); }

RunConfig parseConfigText(const std::string& text, const std::string& origin) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  size_t line_no = 0;
  bool window_start_set = false, window_end_set = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const size_t eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));

    if (key == "panel") {
      cfg.panel_path = value;
    } else if (key == "shocks") {
      cfg.shocks_path = value;
    } else if (key == "weights") {
      cfg.weights_path = value;
    } else if (key == "out") {
      cfg.out_dir = value;
    } else if (key == "calendar.london") {
      cfg.calendar.london = Date::parseIso(value);
    } else if (key == "calendar.merge") {
      cfg.calendar.merge = Date::parseIso(value);
    } else if (key == "calendar.dencun") {
      cfg.calendar.dencun = Date::parseIso(value);
    } else if (key == "window.start") {
      cfg.window_start = Date::parseIso(value);
      window_start_set = true;
    } else if (key == "window.end") {
      cfg.window_end = Date::parseIso(value);
      window_end_set = true;
    } else if (key == "hac_lag_levels") {
      cfg.hac_lag_levels = int(parseInt(value, key));
    } else if (key == "hac_lag_diff") {
      cfg.hac_lag_diff = int(parseInt(value, key));
    } else if (key == "knot") {
      cfg.knot = parseDouble(value, key);
    } else if (key == "fdr_family") {
      cfg.fdr_family = splitList(value);
    } else if (key == "demand_variant") {
      if (value == "full") {
        cfg.demand_variant = DemandVariant::kFull;
      } else if (value == "lite") {
        cfg.demand_variant = DemandVariant::kLite;
      } else {
        throw ConfigError("config key 'demand_variant': expected full|lite, got '" + value + "'");
      }
    } else if (key == "winsor_tail") {
      cfg.winsor_tail = parseDouble(value, key);
    } else if (key == "trim_pre_london") {
      cfg.trim_pre_london = parseBool(value, key);
    } else if (key == "support_sd_threshold") {
      cfg.support_sd_threshold = parseDouble(value, key);
    } else if (key == "lp_horizon") {
      cfg.lp_horizon = int(parseInt(value, key));
    } else if (key == "ecm_gate_alpha") {
      cfg.ecm_gate_alpha = parseDouble(value, key);
    } else if (key == "ecm_gate_mode") {
      if (value == "warn") {
        cfg.ecm_gate_warn_only = true;
      } else if (value == "fail") {
        cfg.ecm_gate_warn_only = false;
      } else {
        throw ConfigError("config key 'ecm_gate_mode': expected warn|fail, got '" + value + "'");
      }
    } else if (key == "cfact.start") {
      cfg.cfact_start = Date::parseIso(value);
    } else if (key == "cfact.end") {
      cfg.cfact_end = Date::parseIso(value);
    } else if (key == "cfact.percentile") {
      cfg.cfact_percentile = parseDouble(value, key);
    } else if (key == "cfact.price") {
      if (value != "mean" && value != "close") {
        throw ConfigError("config key 'cfact.price': expected mean|close, got '" + value + "'");
      }
      cfg.cfact_price = value;
    } else if (key == "cfact.include_tip") {
      cfg.cfact_include_tip = parseBool(value, key);
    } else if (key == "synth.length") {
      cfg.synth_length = parseInt(value, key);
    } else if (key == "synth.beta") {
      cfg.synth_beta = parseDouble(value, key);
    } else if (key == "synth.psi") {
      cfg.synth_psi = parseDouble(value, key);
    } else if (key == "synth.phi") {
      cfg.synth_phi = parseDouble(value, key);
    } else if (key == "synth.sigma_eps") {
      cfg.synth_sigma_eps = parseDouble(value, key);
    } else if (key == "synth.sigma_a") {
      cfg.synth_sigma_a = parseDouble(value, key);
    } else if (key == "seed") {
      cfg.seed = std::uint64_t(parseInt(value, key));
    } else if (key.rfind("schema.", 0) == 0) {
      const std::string canonical_name = key.substr(7);
      const auto& required = PanelSchema::requiredColumns();
      if (std::find(required.begin(), required.end(), canonical_name) == required.end()) {
        throw ConfigError("config key '" + key + "': unknown canonical column '" +
                          canonical_name + "'");
      }
      cfg.schema.renames[canonical_name] = value;
    } else {
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": unknown config key '" + key +
                        "'");
    }
  }

  cfg.calendar.validate();
  if (window_start_set && window_end_set && *cfg.window_end < *cfg.window_start) {
    throw ConfigError("config: window.end precedes window.start");
  }
  if (cfg.cfact_end < cfg.cfact_start) {
    throw ConfigError("config: cfact.end precedes cfact.start");
  }
  if (cfg.winsor_tail < 0.0 || cfg.winsor_tail >= 0.5) {
    throw ConfigError("config: winsor_tail must be in [0, 0.5)");
  }
  if (cfg.cfact_percentile <= 0.0 || cfg.cfact_percentile >= 1.0) {
    throw ConfigError("config: cfact.percentile must be in (0, 1)");
  }
  for (const auto& p : {cfg.panel_path, cfg.shocks_path, cfg.weights_path}) {
    if (!p.empty() && !std::filesystem::exists(p)) {
      throw ConfigError("config: referenced file does not exist: " + p);
    }
  }
  return cfg;
}

RunConfig parseConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parseConfigText(buf.str(), path);
}

}  // namespace feekit
