#include "risopt/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>

namespace risopt {

namespace {

std::string trim(const std::string &s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos)
    return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string &s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!trim(item).empty())
      out.push_back(trim(item));
  return out;
}

using Setter = std::function<void(SweepSpec &, const std::string &,
                                  const std::string &)>;

Setter real(double SystemConfig::*field) {
  return [field](SweepSpec &s, const std::string &v, const std::string &k) {
    s.base.*field = parse_double(v, k);
  };
}

Setter count(int SystemConfig::*field) {
  return [field](SweepSpec &s, const std::string &v, const std::string &k) {
    s.base.*field = static_cast<int>(parse_int(v, k));
  };
}

const std::map<std::string, Setter> &setters() {
  static const std::map<std::string, Setter> table = {
      {"k_devices", count(&SystemConfig::k_devices)},
      {"m_antennas", count(&SystemConfig::m_antennas)},
      {"n_x", count(&SystemConfig::n_x)},
      {"n_y", count(&SystemConfig::n_y)},
      {"n_elements",
       [](SweepSpec &s, const std::string &v, const std::string &k) {
         auto [nx, ny] = ris_grid(static_cast<int>(parse_int(v, k)));
         s.base.n_x = nx;
         s.base.n_y = ny;
       }},
      {"bs_ris_distance", real(&SystemConfig::bs_ris_distance)},
      {"horiz_distance", real(&SystemConfig::horiz_distance)},
      {"vert_spread", real(&SystemConfig::vert_spread)},
      {"rician_d", real(&SystemConfig::rician_d)},
      {"rician_u", real(&SystemConfig::rician_u)},
      {"rician_g", real(&SystemConfig::rician_g)},
      {"pathloss_ref_db", real(&SystemConfig::pathloss_ref_db)},
      {"ref_distance", real(&SystemConfig::ref_distance)},
      {"alpha_d", real(&SystemConfig::alpha_d)},
      {"alpha_u", real(&SystemConfig::alpha_u)},
      {"alpha_g", real(&SystemConfig::alpha_g)},
      {"noise_power", real(&SystemConfig::noise_power)},
      {"noise_power_dbm",
       [](SweepSpec &s, const std::string &v, const std::string &k) {
         s.base.noise_power = 1e-3 * std::pow(10.0, parse_double(v, k) / 10.0);
       }},
      {"rate_min", real(&SystemConfig::rate_min)},
      {"p_max", real(&SystemConfig::p_max)},
      {"seed",
       [](SweepSpec &s, const std::string &v, const std::string &k) {
         const long long x = parse_int(v, k);
         if (x < 0)
           throw ConfigError(k + ": seed must be >= 0");
         s.base.rng_seed = static_cast<std::uint64_t>(x);
       }},
      {"variable",
       [](SweepSpec &s, const std::string &v, const std::string &) {
         s.variable = parse_variable(v);
       }},
      {"values",
       [](SweepSpec &s, const std::string &v, const std::string &k) {
         s.values.clear();
         for (const auto &t : split_list(v))
           s.values.push_back(parse_double(t, k));
       }},
      {"methods",
       [](SweepSpec &s, const std::string &v, const std::string &) {
         s.methods.clear();
         for (const auto &t : split_list(v))
           s.methods.push_back(parse_method(t));
       }},
      {"realizations",
       [](SweepSpec &s, const std::string &v, const std::string &k) {
         s.realizations = static_cast<int>(parse_int(v, k));
       }},
      {"jobs",
       [](SweepSpec &s, const std::string &v, const std::string &k) {
         s.jobs = static_cast<int>(parse_int(v, k));
       }},
      {"sample_fraction",
       [](SweepSpec &s, const std::string &v, const std::string &k) {
         s.sample_fraction = parse_double(v, k);
       }},
      {"pilot_noise_variance",
       [](SweepSpec &s, const std::string &v, const std::string &k) {
         s.pilot.noise_variance = parse_double(v, k);
       }},
      {"rcg_max_iters",
       [](SweepSpec &s, const std::string &v, const std::string &k) {
         s.jo.rcg.max_iters = static_cast<int>(parse_int(v, k));
       }},
      {"rcg_tol",
       [](SweepSpec &s, const std::string &v, const std::string &k) {
         s.jo.rcg.tol = parse_double(v, k);
       }},
      {"outer_budget",
       [](SweepSpec &s, const std::string &v, const std::string &k) {
         s.jo.outer_budget = static_cast<int>(parse_int(v, k));
       }},
      {"multiplier_budget",
       [](SweepSpec &s, const std::string &v, const std::string &k) {
         s.jo.multiplier_budget = static_cast<int>(parse_int(v, k));
       }},
      {"warm_start_multipliers",
       [](SweepSpec &s, const std::string &v, const std::string &k) {
         if (v == "true" || v == "1")
           s.jo.warm_start_multipliers = true;
         else if (v == "false" || v == "0")
           s.jo.warm_start_multipliers = false;
         else
           throw ConfigError(k + ": expected true or false, got '" + v + "'");
       }},
  };
  return table;
}

} // namespace

double parse_double(const std::string &token, const std::string &key) {
  const std::string t = trim(token);
  if (t == "inf" || t == "+inf")
    return std::numeric_limits<double>::infinity();
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &pos);
  } catch (const std::exception &) {
    throw ConfigError(key + ": '" + t + "' is not a number");
  }
  if (pos != t.size() || !std::isfinite(v))
    throw ConfigError(key + ": '" + t + "' is not a finite number");
  return v;
}

long long parse_int(const std::string &token, const std::string &key) {
  const std::string t = trim(token);
  std::size_t pos = 0;
  long long v = 0;
  try {
    v = std::stoll(t, &pos);
  } catch (const std::exception &) {
    throw ConfigError(key + ": '" + t + "' is not an integer");
  }
  if (pos != t.size())
    throw ConfigError(key + ": '" + t + "' is not an integer");
  return v;
}

void apply_config_text(const std::string &text, SweepSpec &spec) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos)
      line.erase(hash);
    line = trim(line);
    if (line.empty())
      continue;
    const std::string where = "line " + std::to_string(lineno);
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(where + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end())
      throw ConfigError(where + ": unknown key '" + key + "'");
    if (value.empty())
      throw ConfigError(where + ": empty value for '" + key + "'");
    try {
      it->second(spec, value, key);
    } catch (const ConfigError &e) {
      throw ConfigError(where + ": " + e.what());
    }
  }
  try {
    spec.base.validate();
  } catch (const ConfigError &e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

void apply_config_file(const std::filesystem::path &path, SweepSpec &spec) {
  std::ifstream f(path);
  if (!f)
    throw ConfigError("cannot read config '" + path.string() + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  try {
    apply_config_text(ss.str(), spec);
  } catch (const ConfigError &e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

} // namespace risopt
