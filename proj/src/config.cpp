#include "fpk/app/config.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

namespace fpk::app {

ConfigError::ConfigError(std::string key, const std::string& message, int line)
    : std::runtime_error((line > 0 ? "line " + std::to_string(line) + ": " : std::string()) +
                         (key.empty() ? std::string() : "'" + key + "': ") + message),
      key_(std::move(key)),
      line_(line) {}

NewtonOptions RunConfig::newton_options() const {
  NewtonOptions o;
  o.residual_tol = newton_tol;
  o.max_iters = newton_max_iters;
  o.jacobian_mode = jacobian_mode;
  return o;
}

IntegrateOptions RunConfig::integrate_options() const {
  IntegrateOptions o;
  o.blowup_guard = blowup_guard;
  o.newton = newton_options();
  return o;
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string unquote(const std::string& s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
  return s;
}

std::optional<double> parse_number(std::string_view text) {
  const std::string s = trim(text);
  if (s.empty()) return std::nullopt;
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || errno == ERANGE) return std::nullopt;
  return v;
}

std::optional<long long> parse_integer(std::string_view text) {
  const std::string s = trim(text);
  if (s.empty()) return std::nullopt;
  char* end = nullptr;
  errno = 0;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (end != s.c_str() + s.size() || errno == ERANGE) return std::nullopt;
  return v;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

double positive(const std::string& key, const std::string& value, int line) {
  const auto v = parse_number(value);
  if (!v || !std::isfinite(*v) || !(*v > 0)) throw ConfigError(key, "expected a positive number, got '" + value + "'", line);
  return *v;
}

double finite(const std::string& key, const std::string& value, int line) {
  const auto v = parse_number(value);
  if (!v || !std::isfinite(*v)) throw ConfigError(key, "expected a finite number, got '" + value + "'", line);
  return *v;
}

long long at_least(const std::string& key, const std::string& value, long long min, int line) {
  const auto v = parse_integer(value);
  if (!v || *v < min) {
    throw ConfigError(key, "expected an integer >= " + std::to_string(min) + ", got '" + value + "'", line);
  }
  return *v;
}

SchemeId scheme_value(const std::string& key, const std::string& value, int line) {
  const auto s = parse_scheme(value);
  if (!s) {
    throw ConfigError(key, "unknown scheme '" + value + "' (mpe, mprk, explicit-euler, heun, implicit-euler)", line);
  }
  return *s;
}

bool bool_value(const std::string& key, const std::string& value, int line) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError(key, "expected true or false, got '" + value + "'", line);
}

void check_dt_token(const std::string& key, const std::string& token, int line) {
  try {
    resolve_dt(token, 1.0, 1.0);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(key, e.what(), line);
  }
}

using Setter = std::function<void(RunConfig&, const std::string&, int)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"sigma2", [](RunConfig& c, const std::string& v, int l) { c.sigma2 = positive("sigma2", v, l); }},
      {"n_cells", [](RunConfig& c, const std::string& v, int l) { c.n_cells = at_least("n_cells", v, 2, l); }},
      {"lower", [](RunConfig& c, const std::string& v, int l) { c.lower = finite("lower", v, l); }},
      {"upper", [](RunConfig& c, const std::string& v, int l) { c.upper = finite("upper", v, l); }},
      {"scheme", [](RunConfig& c, const std::string& v, int l) { c.scheme = scheme_value("scheme", v, l); }},
      {"dt",
       [](RunConfig& c, const std::string& v, int l) {
         check_dt_token("dt", v, l);
         c.dt_spec = normalize_dt_token(v);
       }},
      {"t_end", [](RunConfig& c, const std::string& v, int l) { c.t_end = positive("t_end", v, l); }},
      {"snapshot_interval",
       [](RunConfig& c, const std::string& v, int l) { c.snapshot_interval = positive("snapshot_interval", v, l); }},
      {"output_dir",
       [](RunConfig& c, const std::string& v, int l) {
         if (v.empty()) throw ConfigError("output_dir", "must not be empty", l);
         c.output_dir = v;
       }},
      {"blowup_guard", [](RunConfig& c, const std::string& v, int l) { c.blowup_guard = positive("blowup_guard", v, l); }},
      {"newton_tol", [](RunConfig& c, const std::string& v, int l) { c.newton_tol = positive("newton_tol", v, l); }},
      {"newton_max_iters",
       [](RunConfig& c, const std::string& v, int l) {
         c.newton_max_iters = static_cast<int>(at_least("newton_max_iters", v, 1, l));
       }},
      {"jacobian_mode",
       [](RunConfig& c, const std::string& v, int l) {
         const auto m = parse_jacobian_mode(v);
         if (!m) throw ConfigError("jacobian_mode", "expected finite-difference-dense or analytic-sparse-plus-rank-one", l);
         c.jacobian_mode = *m;
       }},
      {"schemes",
       [](RunConfig& c, const std::string& v, int l) {
         c.schemes.clear();
         for (const auto& s : split_list(v)) c.schemes.push_back(scheme_value("schemes", s, l));
         if (c.schemes.empty()) throw ConfigError("schemes", "list must not be empty", l);
       }},
      {"n_list",
       [](RunConfig& c, const std::string& v, int l) {
         c.n_list.clear();
         for (const auto& s : split_list(v)) c.n_list.push_back(at_least("n_list", s, 2, l));
         if (c.n_list.size() < 2) throw ConfigError("n_list", "needs at least two grid sizes", l);
         for (std::size_t i = 1; i < c.n_list.size(); ++i) {
           if (c.n_list[i] <= c.n_list[i - 1]) throw ConfigError("n_list", "must be strictly ascending", l);
         }
       }},
      {"space_reference_n_cells",
       [](RunConfig& c, const std::string& v, int l) {
         c.space_reference_n_cells = at_least("space_reference_n_cells", v, 3, l);
       }},
      {"time_n_cells",
       [](RunConfig& c, const std::string& v, int l) { c.time_n_cells = at_least("time_n_cells", v, 2, l); }},
      {"eoc_dt_list",
       [](RunConfig& c, const std::string& v, int l) {
         c.eoc_dt_list.clear();
         for (const auto& s : split_list(v)) {
           check_dt_token("eoc_dt_list", s, l);
           c.eoc_dt_list.push_back(normalize_dt_token(s));
         }
         if (c.eoc_dt_list.size() < 2) throw ConfigError("eoc_dt_list", "needs at least two step sizes", l);
       }},
      {"bench_dt_list",
       [](RunConfig& c, const std::string& v, int l) {
         c.bench_dt_list.clear();
         for (const auto& s : split_list(v)) {
           check_dt_token("bench_dt_list", s, l);
           c.bench_dt_list.push_back(normalize_dt_token(s));
         }
         if (c.bench_dt_list.empty()) throw ConfigError("bench_dt_list", "list must not be empty", l);
       }},
      {"repeats",
       [](RunConfig& c, const std::string& v, int l) { c.repeats = static_cast<int>(at_least("repeats", v, 1, l)); }},
      {"pareto", [](RunConfig& c, const std::string& v, int l) { c.pareto = bool_value("pareto", v, l); }},
      {"pareto_k_count",
       [](RunConfig& c, const std::string& v, int l) {
         c.pareto_k_count = static_cast<int>(at_least("pareto_k_count", v, 1, l));
       }},
  };
  return table;
}

void apply(RunConfig& c, std::set<std::string>& seen, const std::string& key, const std::string& value, int line) {
  const auto& table = setters();
  const auto it = table.find(key);
  if (it == table.end()) throw ConfigError(key, "unknown key", line);
  if (!seen.insert(key).second) throw ConfigError(key, "given more than once", line);
  it->second(c, value, line);
}

void finalize(RunConfig& c) {
  if (!(c.upper > c.lower)) throw ConfigError("upper", "must be greater than lower");
  if (c.dt_spec) {
    c.dt = resolve_dt(*c.dt_spec, c.dw(), c.sigma2);
  } else {
    c.dt.reset();
  }
}

}  // namespace

std::string normalize_dt_token(std::string_view token) {
  std::string out;
  for (char ch : unquote(trim(token))) {
    if (!std::isspace(static_cast<unsigned char>(ch))) out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  }
  return out;
}

double resolve_dt(std::string_view token, double dw, double sigma2) {
  const std::string t = normalize_dt_token(token);
  double dt = 0;
  if (t == "dw^2/(2*sigma2)") {
    dt = dw * dw / (2 * sigma2);
  } else if (t == "dw") {
    dt = dw;
  } else if (t == "dw/(2*sigma2)") {
    dt = dw / (2 * sigma2);
  } else if (t == "10*dw") {
    dt = 10 * dw;
  } else if (t == "dw^2.5/(2*sigma2)") {
    dt = std::pow(dw, 2.5) / (2 * sigma2);
  } else if (t.rfind("0.7^", 0) == 0) {
    const auto k = parse_integer(t.substr(4));
    if (!k || *k < 0) throw std::invalid_argument("step size '" + t + "': exponent must be an integer >= 0");
    dt = std::pow(0.7, static_cast<double>(*k));
  } else {
    const auto v = parse_number(t);
    if (!v) {
      throw std::invalid_argument("unrecognized step size '" + std::string(token) +
                                  "' (number, dw^2/(2*sigma2), dw, dw/(2*sigma2), 10*dw, dw^2.5/(2*sigma2), 0.7^k)");
    }
    dt = *v;
  }
  if (!(dt > 0) || !std::isfinite(dt)) throw std::invalid_argument("step size '" + t + "' must be positive");
  return dt;
}

RunConfig parse_config(std::string_view text, const Overrides& overrides) {
  RunConfig c;
  std::set<std::string> seen;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    // '#' inside a quoted value is kept.
    bool quoted = false;
    std::size_t cut = raw.size();
    for (std::size_t i = 0; i < raw.size(); ++i) {
      if (raw[i] == '"') quoted = !quoted;
      if (raw[i] == '#' && !quoted) {
        cut = i;
        break;
      }
    }
    const std::string body = trim(std::string_view(raw).substr(0, cut));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ConfigError("", "expected 'key = value', got '" + body + "'", line);
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = unquote(trim(std::string_view(body).substr(eq + 1)));
    if (key.empty()) throw ConfigError("", "missing key before '='", line);
    apply(c, seen, key, value, line);
  }
  std::set<std::string> seen_overrides;
  for (const auto& [key, value] : overrides) apply(c, seen_overrides, key, unquote(trim(value)), 0);
  finalize(c);
  return c;
}

RunConfig load_config(const std::string& path, const Overrides& overrides) {
  if (path.empty()) return parse_config("", overrides);
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), overrides);
}

std::string to_config_text(const RunConfig& c) {
  auto join = [](const auto& items, auto&& fmt) {
    std::string out;
    for (const auto& it : items) {
      if (!out.empty()) out += ", ";
      out += fmt(it);
    }
    return out;
  };
  std::ostringstream os;
  os << "sigma2 = " << format_double(c.sigma2) << "\n";
  os << "n_cells = " << c.n_cells << "\n";
  os << "lower = " << format_double(c.lower) << "\n";
  os << "upper = " << format_double(c.upper) << "\n";
  os << "scheme = " << scheme_name(c.scheme) << "\n";
  if (c.dt_spec) os << "dt = \"" << *c.dt_spec << "\"\n";
  os << "t_end = " << format_double(c.t_end) << "\n";
  os << "snapshot_interval = " << format_double(c.snapshot_interval) << "\n";
  os << "output_dir = \"" << c.output_dir << "\"\n";
  os << "blowup_guard = " << format_double(c.blowup_guard) << "\n";
  os << "newton_tol = " << format_double(c.newton_tol) << "\n";
  os << "newton_max_iters = " << c.newton_max_iters << "\n";
  os << "jacobian_mode = " << jacobian_mode_name(c.jacobian_mode) << "\n";
  os << "schemes = " << join(c.schemes, [](SchemeId s) { return std::string(scheme_name(s)); }) << "\n";
  os << "n_list = " << join(c.n_list, [](Index n) { return std::to_string(n); }) << "\n";
  os << "space_reference_n_cells = " << c.space_reference_n_cells << "\n";
  os << "time_n_cells = " << c.time_n_cells << "\n";
  os << "eoc_dt_list = \"" << join(c.eoc_dt_list, [](const std::string& s) { return s; }) << "\"\n";
  os << "bench_dt_list = \"" << join(c.bench_dt_list, [](const std::string& s) { return s; }) << "\"\n";
  os << "repeats = " << c.repeats << "\n";
  os << "pareto = " << (c.pareto ? "true" : "false") << "\n";
  os << "pareto_k_count = " << c.pareto_k_count << "\n";
  return os.str();
}

double require_dt(const RunConfig& config) {
  if (!config.dt) throw ConfigError("dt", "missing step size (set dt in the config or pass --dt)");
  return *config.dt;
}

}  // namespace fpk::app
