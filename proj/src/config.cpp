#include "mvu/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "mvu/csv.hpp"
#include "mvu/errors.hpp"

namespace mvu {

namespace {

const std::map<std::string, ExperimentKind>& kind_names() {
  static const std::map<std::string, ExperimentKind> names{
      {"convex_consistency", ExperimentKind::ConvexConsistency},
      {"rate_sweep", ExperimentKind::RateSweep},
      {"noise_sweep", ExperimentKind::NoiseSweep},
      {"nonconvex_tube", ExperimentKind::NonConvexTube},
      {"ellipse_hole", ExperimentKind::EllipseHole},
      {"ustat_tail", ExperimentKind::UStatTail},
      {"oracle_table", ExperimentKind::OracleTable},
      {"circle_probe", ExperimentKind::CircleProbe},
  };
  return names;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(trim(cur));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

double to_double(const std::string& s) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  auto res = std::from_chars(s.data(), end, v);
  if (s.empty() || res.ec != std::errc() || res.ptr != end || !std::isfinite(v)) {
    throw ValidationError("expected a number, got '" + s + "'");
  }
  return v;
}

long long to_integer(const std::string& s) {
  long long v = 0;
  const char* end = s.data() + s.size();
  auto res = std::from_chars(s.data(), end, v);
  if (s.empty() || res.ec != std::errc() || res.ptr != end) {
    throw ValidationError("expected an integer, got '" + s + "'");
  }
  return v;
}

std::uint64_t to_unsigned(const std::string& s) {
  std::uint64_t v = 0;
  const char* end = s.data() + s.size();
  auto res = std::from_chars(s.data(), end, v);
  if (s.empty() || res.ec != std::errc() || res.ptr != end) {
    throw ValidationError("expected a non-negative integer, got '" + s + "'");
  }
  return v;
}

int to_int(const std::string& s) {
  const long long v = to_integer(s);
  if (v < -1000000000LL || v > 1000000000LL) throw ValidationError("integer out of range: '" + s + "'");
  return static_cast<int>(v);
}

bool to_bool(const std::string& s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ValidationError("expected true or false, got '" + s + "'");
}

std::string num(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

template <typename T, typename F>
std::string join(const std::vector<T>& v, F&& fmt) {
  std::string out;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (k) out += ',';
    out += fmt(v[k]);
  }
  return out;
}

using Setter = std::function<void(ExperimentConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table{
      {"version",
       [](ExperimentConfig& c, const std::string& v) {
         c.version = to_int(v);
         if (c.version != 1) throw ValidationError("unsupported version " + v + " (expected 1)");
       }},
      {"kind", [](ExperimentConfig& c, const std::string& v) { c.kind = parse_kind(v); }},
      {"model", [](ExperimentConfig& c, const std::string& v) { c.model = v; }},
      {"n",
       [](ExperimentConfig& c, const std::string& v) {
         c.n_grid.clear();
         for (const auto& item : split(v, ',')) {
           const long long n = to_integer(item);
           if (n < 2 || n > 2000) throw ValidationError("n values must lie in [2, 2000]");
           c.n_grid.push_back(static_cast<std::size_t>(n));
         }
         if (c.n_grid.empty()) throw ValidationError("empty n grid");
         for (std::size_t k = 1; k < c.n_grid.size(); ++k)
           if (c.n_grid[k] <= c.n_grid[k - 1]) throw ValidationError("n grid must be increasing");
       }},
      {"seeds",
       [](ExperimentConfig& c, const std::string& v) {
         c.seeds.clear();
         for (const auto& item : split(v, ',')) c.seeds.push_back(to_unsigned(item));
         if (c.seeds.empty()) throw ValidationError("empty seed list");
       }},
      {"r",
       [](ExperimentConfig& c, const std::string& v) {
         if (v == "auto") {
           c.r.reset();
         } else {
           c.r = to_double(v);
           if (!(*c.r > 0.0)) throw ValidationError("r must be positive");
         }
       }},
      {"C",
       [](ExperimentConfig& c, const std::string& v) {
         c.radius_c = to_double(v);
         if (!(c.radius_c > 0.0)) throw ValidationError("C must be positive");
       }},
      {"sigma",
       [](ExperimentConfig& c, const std::string& v) {
         c.sigma_grid.clear();
         for (const auto& item : split(v, ',')) {
           const double s = to_double(item);
           if (s < 0.0) throw ValidationError("sigma values must be non-negative");
           c.sigma_grid.push_back(s);
         }
         for (std::size_t k = 1; k < c.sigma_grid.size(); ++k)
           if (c.sigma_grid[k] <= c.sigma_grid[k - 1]) throw ValidationError("sigma grid must be increasing");
       }},
      {"probe_factor",
       [](ExperimentConfig& c, const std::string& v) {
         c.probe_factor = to_int(v);
         if (c.probe_factor < 50) throw ValidationError("probe_factor must be at least 50");
       }},
      {"save_embeddings", [](ExperimentConfig& c, const std::string& v) { c.save_embeddings = to_bool(v); }},
      {"t",
       [](ExperimentConfig& c, const std::string& v) {
         c.t_grid.clear();
         for (const auto& item : split(v, ',')) {
           const double t = to_double(item);
           if (t < 0.0) throw ValidationError("t values must be non-negative");
           c.t_grid.push_back(t);
         }
       }},
      {"trials",
       [](ExperimentConfig& c, const std::string& v) {
         c.trials = to_int(v);
         if (c.trials < 1000 || c.trials > 5000) throw ValidationError("trials must lie in [1000, 5000]");
       }},
      {"reference_m",
       [](ExperimentConfig& c, const std::string& v) {
         const long long m = to_integer(v);
         if (m < 1000) throw ValidationError("reference_m must be at least 1000");
         c.reference_m = static_cast<std::size_t>(m);
       }},
      {"grid", [](ExperimentConfig& c, const std::string& v) { parse_grid(v, c.grid_lo, c.grid_hi, c.grid_step); }},
      {"threshold.energy_gap", [](ExperimentConfig& c, const std::string& v) { c.max_energy_gap = to_double(v); }},
      {"threshold.residual", [](ExperimentConfig& c, const std::string& v) { c.max_residual = to_double(v); }},
      {"floor.residual", [](ExperimentConfig& c, const std::string& v) { c.min_residual = to_double(v); }},
      {"workers",
       [](ExperimentConfig& c, const std::string& v) {
         c.workers = to_int(v);
         if (c.workers < 1) throw ValidationError("workers must be at least 1");
       }},
      {"output_dir",
       [](ExperimentConfig& c, const std::string& v) {
         if (v.empty()) throw ValidationError("output_dir must not be empty");
         c.output_dir = v;
       }},
      {"solver.backend", [](ExperimentConfig& c, const std::string& v) { c.solver.backend = parse_backend(v); }},
      {"solver.feas_tol", [](ExperimentConfig& c, const std::string& v) { c.solver.feas_tol = to_double(v); }},
      {"solver.initial_step", [](ExperimentConfig& c, const std::string& v) { c.solver.initial_step = to_double(v); }},
      {"solver.armijo", [](ExperimentConfig& c, const std::string& v) { c.solver.armijo = to_double(v); }},
      {"solver.backtrack", [](ExperimentConfig& c, const std::string& v) { c.solver.backtrack = to_double(v); }},
      {"solver.initial_penalty", [](ExperimentConfig& c, const std::string& v) { c.solver.initial_penalty = to_double(v); }},
      {"solver.penalty_growth", [](ExperimentConfig& c, const std::string& v) { c.solver.penalty_growth = to_double(v); }},
      {"solver.max_outer", [](ExperimentConfig& c, const std::string& v) { c.solver.max_outer = to_int(v); }},
      {"solver.max_inner", [](ExperimentConfig& c, const std::string& v) { c.solver.max_inner = to_int(v); }},
      {"solver.lbfgs_memory", [](ExperimentConfig& c, const std::string& v) { c.solver.lbfgs_memory = to_int(v); }},
      {"solver.rank_cap", [](ExperimentConfig& c, const std::string& v) { c.solver.rank_cap = to_int(v); }},
      {"solver.seed", [](ExperimentConfig& c, const std::string& v) { c.solver.seed = to_unsigned(v); }},
      {"solver.stop_tol", [](ExperimentConfig& c, const std::string& v) { c.solver.stop_tol = to_double(v); }},
      {"solver.restarts", [](ExperimentConfig& c, const std::string& v) { c.solver.restarts = to_int(v); }},
  };
  return table;
}

void check_solver(const SolverConfig& s) {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0)) throw ValidationError(std::string("solver.") + name + " must be positive");
  };
  positive(s.feas_tol, "feas_tol");
  positive(s.initial_step, "initial_step");
  positive(s.armijo, "armijo");
  positive(s.backtrack, "backtrack");
  positive(s.initial_penalty, "initial_penalty");
  positive(s.stop_tol, "stop_tol");
  if (s.armijo >= 1.0 || s.backtrack >= 1.0) throw ValidationError("solver.armijo and solver.backtrack must be below 1");
  if (s.penalty_growth < 1.0) throw ValidationError("solver.penalty_growth must be at least 1");
  if (s.max_outer < 1 || s.max_inner < 1 || s.lbfgs_memory < 1) {
    throw ValidationError("solver iteration budgets must be positive");
  }
  if (s.rank_cap < 0 || s.restarts < 0) throw ValidationError("solver.rank_cap and solver.restarts must be non-negative");
}

}  // namespace

std::string to_string(ExperimentKind k) {
  for (const auto& [name, kind] : kind_names())
    if (kind == k) return name;
  return "unknown";
}

ExperimentKind parse_kind(const std::string& text) {
  auto it = kind_names().find(text);
  if (it == kind_names().end()) {
    std::string names;
    for (const auto& [name, kind] : kind_names()) names += (names.empty() ? "" : ", ") + name;
    throw ValidationError("unknown experiment kind '" + text + "' (expected one of " + names + ")");
  }
  return it->second;
}

void parse_grid(const std::string& text, double& lo, double& hi, double& step) {
  const auto parts = split(text, ':');
  if (parts.size() != 3) throw ValidationError("grid must look like lo:hi:step, got '" + text + "'");
  lo = to_double(parts[0]);
  hi = to_double(parts[1]);
  step = to_double(parts[2]);
  if (!(step > 0.0) || hi < lo) throw ValidationError("grid needs lo <= hi and step > 0");
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::set<std::string> seen;
  std::istringstream is(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(is, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const std::string where = "config line " + std::to_string(line_no);
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ValidationError(where + ": expected key=value, got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ValidationError(where + ": missing key");
    if (!seen.insert(key).second) throw ValidationError(where + ", field '" + key + "': duplicate key");
    try {
      if (key.rfind("model.", 0) == 0) {
        const std::string param = key.substr(6);
        if (param.empty()) throw ValidationError("empty model parameter name");
        cfg.model_params[param] = value;
      } else {
        auto it = setters().find(key);
        if (it == setters().end()) throw ValidationError("unknown key");
        it->second(cfg, value);
      }
    } catch (const ValidationError& e) {
      throw ValidationError(where + ", field '" + key + "': " + e.what());
    }
  }
  if (!seen.count("version")) throw ValidationError("config: missing required field 'version' (use version=1)");
  if (!seen.count("kind")) throw ValidationError("config: missing required field 'kind'");
  try {
    check_solver(cfg.solver);
  } catch (const ValidationError& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  return cfg;
}

ExperimentConfig read_config(const std::string& path) { return parse_config(read_text_file(path)); }

namespace {

std::string hashed_text(const ExperimentConfig& c) {
  std::ostringstream os;
  os << "version=" << c.version << '\n';
  os << "kind=" << to_string(c.kind) << '\n';
  os << "model=" << c.model << '\n';
  // numeric spellings such as 1 and 1.0 hash alike when the model accepts them
  ModelParams params = c.model_params;
  try {
    params = make_model(c.model, c.model_params).params();
  } catch (const ValidationError&) {
  }
  for (const auto& [k, v] : params) os << "model." << k << '=' << v << '\n';
  os << "n=" << join(c.n_grid, [](std::size_t v) { return std::to_string(v); }) << '\n';
  os << "seeds=" << join(c.seeds, [](std::uint64_t v) { return std::to_string(v); }) << '\n';
  os << "r=" << (c.r ? num(*c.r) : std::string("auto")) << '\n';
  os << "C=" << num(c.radius_c) << '\n';
  os << "sigma=" << join(c.sigma_grid, num) << '\n';
  os << "probe_factor=" << c.probe_factor << '\n';
  os << "save_embeddings=" << (c.save_embeddings ? "true" : "false") << '\n';
  os << "t=" << join(c.t_grid, num) << '\n';
  os << "trials=" << c.trials << '\n';
  os << "reference_m=" << c.reference_m << '\n';
  os << "grid=" << num(c.grid_lo) << ':' << num(c.grid_hi) << ':' << num(c.grid_step) << '\n';
  if (c.max_energy_gap) os << "threshold.energy_gap=" << num(*c.max_energy_gap) << '\n';
  if (c.max_residual) os << "threshold.residual=" << num(*c.max_residual) << '\n';
  if (c.min_residual) os << "floor.residual=" << num(*c.min_residual) << '\n';
  const SolverConfig& s = c.solver;
  os << "solver.backend=" << to_string(s.backend) << '\n';
  os << "solver.feas_tol=" << num(s.feas_tol) << '\n';
  os << "solver.initial_step=" << num(s.initial_step) << '\n';
  os << "solver.armijo=" << num(s.armijo) << '\n';
  os << "solver.backtrack=" << num(s.backtrack) << '\n';
  os << "solver.initial_penalty=" << num(s.initial_penalty) << '\n';
  os << "solver.penalty_growth=" << num(s.penalty_growth) << '\n';
  os << "solver.max_outer=" << s.max_outer << '\n';
  os << "solver.max_inner=" << s.max_inner << '\n';
  os << "solver.lbfgs_memory=" << s.lbfgs_memory << '\n';
  os << "solver.rank_cap=" << s.rank_cap << '\n';
  os << "solver.seed=" << s.seed << '\n';
  os << "solver.stop_tol=" << num(s.stop_tol) << '\n';
  os << "solver.restarts=" << s.restarts << '\n';
  return os.str();
}

}  // namespace

std::string config_text(const ExperimentConfig& cfg) {
  return hashed_text(cfg) + "workers=" + std::to_string(cfg.workers) + "\noutput_dir=" + cfg.output_dir + "\n";
}

std::string config_hash(const ExperimentConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : hashed_text(cfg)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace mvu
