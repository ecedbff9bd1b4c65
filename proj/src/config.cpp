#include "cdii/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <regex>
#include <sstream>

namespace cdii {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  double value = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size() || !std::isfinite(value)) {
    throw ConfigError(key, "expected a number, got '" + t + "'");
  }
  return value;
}

long long to_integer(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  long long value = 0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    throw ConfigError(key, "expected an integer, got '" + t + "'");
  }
  return value;
}

std::vector<double> to_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(key, item));
  return out;
}

Side to_side(const std::string& key, const std::string& text) {
  try {
    return parse_side(trim(text));
  } catch (const std::invalid_argument& err) {
    throw ConfigError(key, err.what());
  }
}

}  // namespace

PipelineConfig parse_config(std::istream& in) {
  std::map<std::string, std::string> entries;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no), "expected key=value");
    }
    const std::string key = trim(t.substr(0, eq));
    if (entries.count(key)) throw ConfigError(key, "duplicate key");
    entries[key] = trim(t.substr(eq + 1));
  }

  PipelineConfig cfg;
  std::map<int, std::map<std::string, std::string>> electrode_fields;
  static const std::regex electrode_key(R"(electrodes\[(\d+)\]\.(side|interval|z))");

  for (const auto& [key, value] : entries) {
    std::smatch m;
    if (std::regex_match(key, m, electrode_key)) {
      electrode_fields[std::stoi(m[1].str())][m[2].str()] = value;
    } else if (key == "mesh.side_nodes") {
      const long long n = to_integer(key, value);
      if (n < 2) throw ConfigError(key, "must be >= 2");
      cfg.side_nodes = static_cast<Index>(n);
    } else if (key == "currents") {
      cfg.currents = to_list(key, value);
    } else if (key == "recon.epsilon") {
      cfg.recon.epsilon = to_double(key, value);
      if (!(cfg.recon.epsilon > 0.0 && cfg.recon.epsilon < 1.0)) throw ConfigError(key, "must lie in (0,1)");
    } else if (key == "recon.delta") {
      cfg.recon.delta = to_double(key, value);
      if (!(cfg.recon.delta > 0.0)) throw ConfigError(key, "must be positive");
    } else if (key == "recon.max_iter") {
      const long long n = to_integer(key, value);
      if (n < 1 || n > 100000000) throw ConfigError(key, "must be >= 1");
      cfg.recon.max_iter = static_cast<int>(n);
    } else if (key == "recon.solver_tol") {
      cfg.recon.solver_tol = to_double(key, value);
      if (!(cfg.recon.solver_tol > 0.0)) throw ConfigError(key, "must be positive");
    } else if (key == "phantom.center") {
      const auto c = to_list(key, value);
      if (c.size() != 2) throw ConfigError(key, "expected x,y");
      cfg.phantom.center = {c[0], c[1]};
    } else if (key == "phantom.amplitude") {
      cfg.phantom.amplitude = to_double(key, value);
      if (!(cfg.phantom.amplitude >= 0.0)) throw ConfigError(key, "must be >= 0");
    } else if (key == "phantom.width") {
      cfg.phantom.width = to_double(key, value);
      if (!(cfg.phantom.width > 0.0)) throw ConfigError(key, "must be positive");
    } else if (key == "gamma.side") {
      cfg.gamma_side = to_side(key, value);
    } else if (key == "noise.level") {
      cfg.noise_level = to_double(key, value);
      if (!(cfg.noise_level >= 0.0)) throw ConfigError(key, "must be >= 0");
    } else if (key == "noise.seed") {
      const long long s = to_integer(key, value);
      if (s < 0) throw ConfigError(key, "must be >= 0");
      cfg.noise_seed = static_cast<std::uint64_t>(s);
    } else if (key == "output.dir") {
      cfg.output_dir = value;
    } else {
      throw ConfigError(key, "unknown key");
    }
  }

  if (cfg.side_nodes == 0) throw ConfigError("mesh.side_nodes", "missing");

  int expected = 0;
  for (const auto& [index, fields] : electrode_fields) {
    const std::string base = "electrodes[" + std::to_string(index) + "]";
    if (index != expected++) throw ConfigError(base, "electrode indices must run 0,1,2,...");
    ElectrodeConfig e;
    if (!fields.count("side")) throw ConfigError(base + ".side", "missing");
    e.side = to_side(base + ".side", fields.at("side"));
    if (fields.count("interval")) {
      const auto iv = to_list(base + ".interval", fields.at("interval"));
      if (iv.size() != 2 || !(iv[0] < iv[1])) throw ConfigError(base + ".interval", "expected lo,hi with lo < hi");
      e.lo = iv[0];
      e.hi = iv[1];
    }
    if (!fields.count("z")) throw ConfigError(base + ".z", "missing");
    e.z = to_double(base + ".z", fields.at("z"));
    if (!(e.z > 0.0)) throw ConfigError(base + ".z", "must be positive");
    cfg.electrodes.push_back(e);
  }
  if (cfg.electrodes.size() < 2) throw ConfigError("electrodes", "need at least two electrodes");

  if (!entries.count("currents")) throw ConfigError("currents", "missing");
  if (cfg.currents.size() != cfg.electrodes.size()) {
    throw ConfigError("currents", "expected " + std::to_string(cfg.electrodes.size()) + " values");
  }
  double sum = 0.0, scale = 0.0;
  for (double c : cfg.currents) {
    sum += c;
    scale = std::max(scale, std::abs(c));
  }
  if (std::abs(sum) > 1e-12 * scale) throw ConfigError("currents", "must sum to zero");
  return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot read " + path.string());
  return parse_config(in);
}

}  // namespace cdii
