#include "stlab/harness/config.hpp"

#include "json.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace stlab::harness {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "' expects a number, got '" + v + "'");
  }
}

long long to_int(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const long long d = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "' expects an integer, got '" + v + "'");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config: key '" + key + "' expects a boolean, got '" + v + "'");
}

/// Setters keyed by name, each taking the textual value.
using Setter = std::function<void(ExperimentConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> s = {
      {"kind", [](auto& c, auto&, auto& v) { c.kind = v; }},
      {"problems", [](auto& c, auto&, auto& v) { c.problems = split_list(v); }},
      {"thetas",
       [](auto& c, auto& k, auto& v) {
         c.thetas.clear();
         for (auto& x : split_list(v)) c.thetas.push_back(to_double(k, x));
       }},
      {"qs",
       [](auto& c, auto& k, auto& v) {
         c.qs.clear();
         for (auto& x : split_list(v)) c.qs.push_back(int(to_int(k, x)));
       }},
      {"Ns",
       [](auto& c, auto& k, auto& v) {
         c.Ns.clear();
         for (auto& x : split_list(v)) c.Ns.push_back(int(to_int(k, x)));
       }},
      {"dims",
       [](auto& c, auto& k, auto& v) {
         c.dims.clear();
         for (auto& x : split_list(v)) c.dims.push_back(int(to_int(k, x)));
       }},
      {"phis", [](auto& c, auto&, auto& v) { c.phis = split_list(v); }},
      {"triple", [](auto& c, auto&, auto& v) { c.triple = v; }},
      {"length", [](auto& c, auto& k, auto& v) { c.length = to_double(k, v); }},
      {"T", [](auto& c, auto& k, auto& v) { c.T = to_double(k, v); }},
      {"seed",
       [](auto& c, auto& k, auto& v) {
         try {
           size_t pos = 0;
           c.seed = std::stoull(v, &pos);
           if (pos != v.size()) throw std::invalid_argument(v);
         } catch (const std::exception&) {
           throw ConfigError("config: key '" + k + "' expects an unsigned integer");
         }
       }},
      {"k_lambda",
       [](auto& c, auto& k, auto& v) {
         c.k_lambda.clear();
         for (auto& x : split_list(v)) c.k_lambda.push_back(to_double(k, x));
       }},
      {"cfl_N", [](auto& c, auto& k, auto& v) { c.cfl_N = int(to_int(k, v)); }},
      {"q_max", [](auto& c, auto& k, auto& v) { c.q_max = int(to_int(k, v)); }},
      {"refine", [](auto& c, auto& k, auto& v) { c.refine = int(to_int(k, v)); }},
      {"quasiopt_slack", [](auto& c, auto& k, auto& v) { c.quasiopt_slack = to_double(k, v); }},
      {"witness", [](auto& c, auto& k, auto& v) { c.witness = to_bool(k, v); }},
  };
  return s;
}

void apply(ExperimentConfig& c, const std::string& key, const std::string& value) {
  const auto it = setters().find(key);
  if (it == setters().end()) throw ConfigError("config: unknown key '" + key + "'");
  it->second(c, key, value);
}

std::string json_scalar(const nlohmann::json& j) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_boolean()) return j.get<bool>() ? "true" : "false";
  if (j.is_number_unsigned()) return std::to_string(j.get<std::uint64_t>());
  if (j.is_number_integer()) return std::to_string(j.get<long long>());
  if (j.is_number_float()) {
    std::ostringstream os;
    os.precision(17);
    os << j.get<double>();
    return os.str();
  }
  throw ConfigError("config: unsupported JSON value " + j.dump());
}

template <class T>
std::string join(const std::vector<T>& v) {
  std::ostringstream os;
  os.precision(17);
  for (size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  return os.str();
}

}  // namespace

ExperimentConfig parse_config_kv(const std::string& text) {
  ExperimentConfig c;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: line " + std::to_string(lineno) + " has no '='");
    apply(c, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  validate(c);
  return c;
}

ExperimentConfig parse_config_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: JSON root must be an object");
  ExperimentConfig c;
  for (auto it = j.begin(); it != j.end(); ++it) {
    std::string value;
    if (it.value().is_array()) {
      for (size_t i = 0; i < it.value().size(); ++i)
        value += (i ? "," : "") + json_scalar(it.value()[i]);
    } else {
      value = json_scalar(it.value());
    }
    apply(c, it.key(), value);
  }
  validate(c);
  return c;
}

ExperimentConfig parse_config(const std::string& text) {
  const auto t = trim(text);
  if (!t.empty() && t.front() == '{') return parse_config_json(text);
  return parse_config_kv(text);
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void validate(const ExperimentConfig& c) {
  static const std::vector<std::string> kinds = {"converge", "quasiopt", "bnb-scan",
                                                 "cfl-scan", "gram-check", "solve"};
  if (std::find(kinds.begin(), kinds.end(), c.kind) == kinds.end())
    throw ConfigError("config: unknown kind '" + c.kind + "'");
  if (c.triple != "spectral" && c.triple != "p1")
    throw ConfigError("config: triple must be 'spectral' or 'p1'");
  if (!(c.T > 0) || !(c.length > 0)) throw ConfigError("config: T and length must be positive");
  for (double th : c.thetas)
    if (!(th >= 0 && th <= 1)) throw ConfigError("config: theta outside [0, 1]");
  for (int q : c.qs)
    if (q < 0 || q > 6) throw ConfigError("config: q outside [0, 6]");
  for (int n : c.Ns)
    if (n < 1) throw ConfigError("config: N must be >= 1");
  for (int d : c.dims)
    if (d < 1 || (c.triple == "p1" && d < 2)) throw ConfigError("config: invalid dim");
  for (const auto& p : c.phis)
    if (p != "zero" && p != "identity" && p != "neg-identity")
      throw ConfigError("config: phi must be zero, identity or neg-identity");
  if (c.q_max < 0 || c.q_max > 12) throw ConfigError("config: q_max outside [0, 12]");
  if (c.refine < 2) throw ConfigError("config: refine must be >= 2");
  if (c.cfl_N < 1) throw ConfigError("config: cfl_N must be >= 1");
  const bool needs_grid = c.kind == "converge" || c.kind == "quasiopt" || c.kind == "bnb-scan";
  if (needs_grid) {
    if (c.Ns.empty() || c.dims.empty()) throw ConfigError("config: grids must be nonempty");
    if (c.thetas.empty() && c.qs.empty()) throw ConfigError("config: no scheme selected");
  }
  if ((c.kind == "converge" || c.kind == "quasiopt") && c.problems.empty())
    throw ConfigError("config: problems must be nonempty");
  if (c.kind == "bnb-scan" && c.phis.empty()) throw ConfigError("config: phis must be nonempty");
  if (c.kind == "cfl-scan" && c.k_lambda.empty())
    throw ConfigError("config: k_lambda must be nonempty");
}

std::string to_kv(const ExperimentConfig& c) {
  std::ostringstream os;
  os.precision(17);
  os << "kind = " << c.kind << "\n"
     << "problems = " << join(c.problems) << "\n"
     << "thetas = " << join(c.thetas) << "\n"
     << "qs = " << join(c.qs) << "\n"
     << "Ns = " << join(c.Ns) << "\n"
     << "dims = " << join(c.dims) << "\n"
     << "phis = " << join(c.phis) << "\n"
     << "triple = " << c.triple << "\n"
     << "length = " << c.length << "\n"
     << "T = " << c.T << "\n"
     << "seed = " << c.seed << "\n"
     << "k_lambda = " << join(c.k_lambda) << "\n"
     << "cfl_N = " << c.cfl_N << "\n"
     << "q_max = " << c.q_max << "\n"
     << "refine = " << c.refine << "\n"
     << "quasiopt_slack = " << c.quasiopt_slack << "\n"
     << "witness = " << (c.witness ? "true" : "false") << "\n";
  return os.str();
}

}  // namespace stlab::harness
