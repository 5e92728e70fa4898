#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <fstream>
#include <functional>
#include <sstream>

namespace strom::app {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size() || !std::isfinite(out))
    throw UsageError("config: '" + key + "' expects a number, got '" + v + "'");
  return out;
}

std::size_t to_size(const std::string& key, const std::string& v) {
  std::size_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size())
    throw UsageError("config: '" + key + "' expects a non-negative integer, got '" + v + "'");
  return out;
}

Vector to_list(const std::string& key, const std::string& v) {
  Vector out;
  for (const auto& item : split(v, ',')) out.push_back(to_double(key, item));
  return out;
}

std::vector<Vector> to_points(const std::string& key, const std::string& v) {
  std::vector<Vector> out;
  for (const auto& point : split(v, ';')) {
    if (point.empty()) continue;
    out.push_back(to_list(key, point));
  }
  return out;
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    auto num = [&t](const std::string& key, double ProblemSpec::*field) {
      t[key] = [field](RunConfig& c, const std::string& k, const std::string& v) { c.problem.*field = to_double(k, v); };
    };
    auto count = [&t](const std::string& key, std::size_t ProblemSpec::*field) {
      t[key] = [field](RunConfig& c, const std::string& k, const std::string& v) { c.problem.*field = to_size(k, v); };
    };
    t["problem.kind"] = [](RunConfig& c, const std::string&, const std::string& v) {
      try {
        c.problem.kind = parse_problem_kind(v);
      } catch (const Error& e) {
        throw UsageError(std::string("config: ") + e.what());
      }
    };
    count("problem.nx", &ProblemSpec::nx);
    count("problem.ny", &ProblemSpec::ny);
    count("problem.nz", &ProblemSpec::nz);
    count("problem.nd", &ProblemSpec::nd);
    num("problem.kappa", &ProblemSpec::kappa);
    num("problem.vx", &ProblemSpec::vx);
    num("problem.vy", &ProblemSpec::vy);
    num("problem.length", &ProblemSpec::length);
    num("problem.nu", &ProblemSpec::nu);
    num("problem.q", &ProblemSpec::q);
    num("problem.source_lo", &ProblemSpec::source_lo);
    num("problem.source_hi", &ProblemSpec::source_hi);
    num("problem.blob_x", &ProblemSpec::blob_x);
    num("problem.blob_y", &ProblemSpec::blob_y);
    num("problem.blob_width", &ProblemSpec::blob_width);
    num("problem.x0_amplitude", &ProblemSpec::x0_amplitude);
    t["problem.sigma_t"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.problem.sigma_t = to_list(k, v); };
    t["problem.sigma_s"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.problem.sigma_s = to_list(k, v); };
    t["time.dt"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.dt = to_double(k, v); };
    t["time.nt"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.steps = to_size(k, v); };
    t["params"] = [](RunConfig& c, const std::string&, const std::string& v) { c.param_names = split(v, ','); };
    t["samples"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.samples = to_points(k, v); };
    t["test_params"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.test_params = to_points(k, v); };
    t["rom.ns"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.n_s = to_size(k, v); };
    t["rom.nt"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.n_t = to_size(k, v); };
    t["svd.tol"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.svd.tol_svd = to_double(k, v); };
    t["svd.sv_tol"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.svd.tol_sv = to_double(k, v); };
    t["svd.max_rank"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.svd.max_rank = to_size(k, v); };
    t["svd.at_max_rank"] = [](RunConfig& c, const std::string&, const std::string& v) {
      if (v == "reinitialize") c.svd.at_max_rank = MaxRankPolicy::reinitialize;
      else if (v == "reject") c.svd.at_max_rank = MaxRankPolicy::reject;
      else throw UsageError("config: svd.at_max_rank must be reinitialize or reject");
    };
    t["ref_mode"] = [](RunConfig& c, const std::string&, const std::string& v) {
      try {
        c.ref_mode = parse_ref_mode(v);
      } catch (const Error& e) {
        throw UsageError(std::string("config: ") + e.what());
      }
    };
    t["paths.out"] = [](RunConfig& c, const std::string&, const std::string& v) { c.out = v; };
    t["seed"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.seed = to_size(k, v); };
    t["workers"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.workers = to_size(k, v); };
    t["run.repeats"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.repeats = to_size(k, v); };
    t["run.bounds"] = [](RunConfig& c, const std::string&, const std::string& v) {
      if (v == "auto") c.bounds = BoundsMode::automatic;
      else if (v == "on") c.bounds = BoundsMode::on;
      else if (v == "off") c.bounds = BoundsMode::off;
      else throw UsageError("config: run.bounds must be auto, on or off");
    };
    t["verify.perturb"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.perturb = to_double(k, v); };
    return t;
  }();
  return table;
}

}  // namespace

ParamPoint RunConfig::point(const Vector& values) const {
  if (values.size() != param_names.size()) {
    std::ostringstream msg;
    msg << "parameter point has " << values.size() << " values for " << param_names.size() << " names";
    throw UsageError(msg.str());
  }
  return ParamPoint{param_names, values};
}

void RunConfig::validate() const {
  auto fail = [](const std::string& m) { throw UsageError("config: " + m); };
  if (!(dt > 0.0)) fail("time.dt must be positive");
  if (steps == 0) fail("time.nt must be at least 1");
  if (samples.empty()) fail("samples must list at least one parameter point");
  if (n_s == 0) fail("rom.ns must be at least 1");
  if (n_t == 0) fail("rom.nt must be at least 1");
  if (n_t > std::min(steps, samples.size())) fail("rom.nt cannot exceed min(time.nt, number of samples)");
  if (!(svd.tol_svd > 0.0)) fail("svd.tol must be positive");
  if (svd.tol_sv < 0.0) fail("svd.sv_tol must be non-negative");
  if (svd.max_rank == 0) fail("svd.max_rank must be at least 1");
  if (workers == 0) fail("workers must be at least 1");
  if (repeats == 0) fail("run.repeats must be at least 1");
  for (const auto& name : param_names)
    if (name.empty()) fail("params contains an empty name");
  for (const auto& s : samples) (void)point(s);
  for (const auto& s : test_params) (void)point(s);
  try {
    problem.validate();
  } catch (const Error& e) {
    fail(e.what());
  }
}

RunConfig desk_scale_config() {
  RunConfig c;
  c.problem.kind = ProblemKind::advdiff2d;
  c.problem.nx = c.problem.ny = 100;
  c.problem.kappa = 0.1;
  c.problem.vx = 1.0;
  c.problem.vy = 0.5;
  c.problem.x0_amplitude = 1.0;
  c.dt = 5e-3;
  c.steps = 200;
  c.param_names = {"kappa"};
  c.samples = {{0.05}, {0.1}, {0.15}};
  c.test_params = {{0.125}};
  c.n_s = 10;
  c.n_t = 3;
  c.svd.max_rank = 40;
  c.svd.at_max_rank = MaxRankPolicy::reject;
  c.ref_mode = RefMode::zero;
  c.bounds = BoundsMode::off;
  return c;
}

RunConfig parse_config(const std::string& text, RunConfig base) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw UsageError("config line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) throw UsageError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    it->second(base, key, value);
  }
  return base;
}

RunConfig load_config(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), std::move(base));
}

Vector parse_param(const std::string& text, const std::vector<std::string>& names) {
  const auto items = split(text, ',');
  if (items.empty() || items.front().empty()) throw UsageError("--param: empty parameter list");
  Vector out(names.size(), std::numeric_limits<double>::quiet_NaN());
  const bool named = items.front().find('=') != std::string::npos;
  if (!named) {
    if (items.size() != names.size())
      throw UsageError("--param: expected " + std::to_string(names.size()) + " values");
    for (std::size_t i = 0; i < items.size(); ++i) out[i] = to_double("--param", items[i]);
    return out;
  }
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw UsageError("--param: mixed named and positional values");
    const std::string name = trim(item.substr(0, eq));
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw UsageError("--param: '" + name + "' is not listed in params");
    out[static_cast<std::size_t>(it - names.begin())] = to_double("--param", trim(item.substr(eq + 1)));
  }
  for (std::size_t i = 0; i < names.size(); ++i)
    if (std::isnan(out[i])) throw UsageError("--param: missing value for '" + names[i] + "'");
  return out;
}

std::string describe(const ParamPoint& p) {
  std::ostringstream s;
  s.precision(17);
  for (std::size_t i = 0; i < p.size(); ++i) s << (i ? "," : "") << p.names[i] << "=" << p.values[i];
  return s.str();
}

}  // namespace strom::app
