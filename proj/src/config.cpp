#include "fbstab/config.hpp"

#include <fstream>
#include <set>

namespace fbstab {

using nlohmann::json;

namespace {

void expect_keys(const json& j, const std::set<std::string>& allowed,
                 const std::string& where) {
  if (!j.is_object())
    throw ConfigInvalid(where + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key()))
      throw ConfigInvalid(where + ": unknown key '" + it.key() + "'");
}

double get_number(const json& j, const std::string& key, double fallback,
                  const std::string& where) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number())
    throw ConfigInvalid(where + "." + key + ": expected a number");
  return j[key].get<double>();
}

ArrayXd get_array(const json& j, const std::string& key,
                  const std::string& where) {
  if (!j.contains(key)) return ArrayXd();
  if (!j[key].is_array())
    throw ConfigInvalid(where + "." + key + ": expected an array of numbers");
  ArrayXd out(j[key].size());
  int i = 0;
  for (const auto& v : j[key]) {
    if (!v.is_number())
      throw ConfigInvalid(where + "." + key + ": expected an array of numbers");
    out[i++] = v.get<double>();
  }
  return out;
}

PeriodicProfile parse_profile(const json& j) {
  expect_keys(j, {"kind", "value", "mean", "cos", "sin", "coeffs"}, "scenario.profile");
  const std::string kind = j.value("kind", "constant");
  try {
    if (kind == "constant")
      return make_profile(ConstantProfileSpec{get_number(j, "value", 1.0, "profile")});
    if (kind == "fourier") {
      FourierProfileSpec spec;
      spec.mean = get_number(j, "mean", 1.0, "profile");
      spec.cos_coeffs = get_array(j, "cos", "profile");
      spec.sin_coeffs = get_array(j, "sin", "profile");
      return make_profile(spec);
    }
    if (kind == "poly") {
      PolyProfileSpec spec;
      spec.coeffs = get_array(j, "coeffs", "profile");
      return make_profile(spec);
    }
  } catch (const NonPositiveProfile& e) {
    throw ConfigInvalid(std::string("scenario.profile: ") + e.what());
  } catch (const NotPeriodic& e) {
    throw ConfigInvalid(std::string("scenario.profile: ") + e.what());
  }
  throw ConfigInvalid("scenario.profile.kind: unknown kind '" + kind + "'");
}

BoundaryDensity parse_bottom(const json& j, int nx) {
  expect_keys(j, {"kind", "value", "mean", "cos", "sin"}, "scenario.bottom");
  const std::string kind = j.value("kind", "constant");
  if (kind == "constant")
    return BoundaryDensity::constant(get_number(j, "value", 1.0, "bottom"), nx);
  if (kind == "fourier") {
    const double mean = get_number(j, "mean", 1.0, "bottom");
    const ArrayXd c = get_array(j, "cos", "bottom");
    const ArrayXd s = get_array(j, "sin", "bottom");
    return BoundaryDensity::sample(
        [&](double x) {
          double v = mean;
          for (int k = 1; k <= c.size(); ++k) v += c[k - 1] * std::cos(k * M_PI * x);
          for (int k = 1; k <= s.size(); ++k) v += s[k - 1] * std::sin(k * M_PI * x);
          return v;
        },
        nx);
  }
  throw ConfigInvalid("scenario.bottom.kind: unknown kind '" + kind + "'");
}

QField parse_q(const json& j) {
  expect_keys(j, {"kind", "value", "q", "g"}, "scenario.q");
  const std::string kind = j.value("kind", "constant");
  if (kind == "constant") {
    const double v = get_number(j, "value", 1.0, "q");
    if (v < 0.0) throw ConfigInvalid("scenario.q.value: must be >= 0");
    return QField::constant(v);
  }
  if (kind == "water_wave") {
    const double q = get_number(j, "q", 4.0, "q");
    const double g = get_number(j, "g", 1.0, "q");
    if (q <= 0.0 || g <= 0.0)
      throw ConfigInvalid("scenario.q: water_wave needs q > 0 and g > 0");
    return QField::water_wave(q, g);
  }
  throw ConfigInvalid("scenario.q.kind: unknown kind '" + kind + "'");
}

BumpPerturbation parse_bump(const json& j) {
  expect_keys(j, {"kind", "a", "b", "factor", "coeffs"}, "scenario.bump");
  const std::string kind = j.value("kind", "none");
  if (kind == "none") return BumpPerturbation();
  const double a = get_number(j, "a", -0.5, "bump");
  const double b = get_number(j, "b", 0.5, "bump");
  if (!(-1.0 < a && a < b && b < 1.0))
    throw ConfigInvalid("scenario.bump: need -1 < a < b < 1");
  try {
    if (kind == "window") return make_window_bump(get_array(j, "factor", "bump"), a, b);
    if (kind == "poly") return make_bump(get_array(j, "coeffs", "bump"), a, b);
  } catch (const EndpointConditionViolated& e) {
    throw ConfigInvalid(std::string("scenario.bump: ") + e.what());
  }
  throw ConfigInvalid("scenario.bump.kind: unknown kind '" + kind + "'");
}

json normalize_scenario(const json& s) {
  json out = json::object();
  out["profile"] = s.contains("profile") ? s["profile"] : json{{"kind", "constant"}, {"value", 1.0}};
  out["bottom"] = s.contains("bottom") ? s["bottom"] : json{{"kind", "constant"}, {"value", 1.0}};
  out["q"] = s.contains("q") ? s["q"] : json{{"kind", "constant"}, {"value", 1.0}};
  out["bump"] = s.contains("bump") ? s["bump"] : json{{"kind", "none"}};
  out["nx"] = s.value("nx", 256);
  out["ny"] = s.value("ny", 128);
  out["modes"] = s.value("modes", 32);
  json flow = s.contains("flow") ? s["flow"] : json::object();
  out["flow"] = json{{"L", flow.value("L", 0.0)},
                     {"M", flow.value("M", 0.0)},
                     {"delta0", flow.value("delta0", 0.0)},
                     {"steps", flow.value("steps", 256)}};
  out["alpha"] = s.value("alpha", 0.5);
  return out;
}

json normalize_command(const json& c, const CommandParams& defaults) {
  json out = json::object();
  out["epsilons"] = c.contains("epsilons") ? c["epsilons"] : json(defaults.epsilons);
  out["s_values"] = c.contains("s_values") ? c["s_values"] : json(defaults.s_values);
  out["s_count"] = c.value("s_count", defaults.s_count);
  out["s_max"] = c.value("s_max", defaults.s_max);
  out["fd_count"] = c.value("fd_count", defaults.fd_count);
  out["fd_max"] = c.value("fd_max", defaults.fd_max);
  out["bump_count"] = c.value("bump_count", defaults.bump_count);
  out["bump_norm"] = c.value("bump_norm", defaults.bump_norm);
  out["seed"] = c.value("seed", defaults.seed);
  out["wave_q"] = c.value("wave_q", defaults.wave_q);
  out["wave_g"] = c.value("wave_g", defaults.wave_g);
  return out;
}

}  // namespace

RunConfig parse_config(const json& doc) {
  expect_keys(doc, {"version", "scenario", "command"}, "config");
  if (!doc.contains("version") || !doc["version"].is_number_integer() ||
      doc["version"].get<int>() != 1)
    throw ConfigInvalid("config.version: required and must equal 1");

  const json sc_in = doc.contains("scenario") ? doc["scenario"] : json::object();
  expect_keys(sc_in, {"profile", "bottom", "q", "bump", "nx", "ny", "modes", "flow", "alpha"},
              "scenario");
  if (sc_in.contains("flow"))
    expect_keys(sc_in["flow"], {"L", "M", "delta0", "steps"}, "scenario.flow");

  const json sc_norm = normalize_scenario(sc_in);
  const int nx = sc_norm["nx"].get<int>();
  const int ny = sc_norm["ny"].get<int>();
  if (nx < 8) throw ConfigInvalid("scenario.nx: Nx >= 8 required");
  if (ny < 8) throw ConfigInvalid("scenario.ny: Ny >= 8 required");
  if (nx % 2 != 0) throw ConfigInvalid("scenario.nx: must be even");
  const int modes = sc_norm["modes"].get<int>();
  if (modes < 1 || modes > 128)
    throw ConfigInvalid("scenario.modes: must lie in [1,128]");
  const double alpha = sc_norm["alpha"].get<double>();
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw ConfigInvalid("scenario.alpha: must lie in (0,1]");

  RunConfig cfg;
  PeriodicProfile profile = parse_profile(sc_norm["profile"]);
  BoundaryDensity bottom = parse_bottom(sc_norm["bottom"], nx);
  QField q = parse_q(sc_norm["q"]);
  BumpPerturbation bump = parse_bump(sc_norm["bump"]);
  try {
    cfg.scenario = make_scenario(std::move(profile), std::move(bottom), std::move(q),
                                 std::move(bump), nx, ny, modes);
  } catch (const Error& e) {
    throw ConfigInvalid(std::string("scenario: ") + e.what());
  }
  cfg.scenario.alpha = alpha;
  const json& flow = sc_norm["flow"];
  cfg.scenario.flow_box.L = flow["L"].get<double>();
  cfg.scenario.flow_box.M = flow["M"].get<double>();
  cfg.scenario.flow_box.delta0 = flow["delta0"].get<double>();
  cfg.scenario.flow_steps = flow["steps"].get<int>();
  if (cfg.scenario.flow_steps < 8)
    throw ConfigInvalid("scenario.flow.steps: must be >= 8");

  const json c_in = doc.contains("command") ? doc["command"] : json::object();
  expect_keys(c_in,
              {"epsilons", "s_values", "s_count", "s_max", "fd_count", "fd_max",
               "bump_count", "bump_norm", "seed", "wave_q", "wave_g"},
              "command");
  const json c_norm = normalize_command(c_in, CommandParams{});
  CommandParams& cp = cfg.command;
  cp.epsilons = c_norm["epsilons"].get<std::vector<double>>();
  cp.s_values = c_norm["s_values"].get<std::vector<double>>();
  cp.s_count = c_norm["s_count"].get<int>();
  cp.s_max = c_norm["s_max"].get<double>();
  cp.fd_count = c_norm["fd_count"].get<int>();
  cp.fd_max = c_norm["fd_max"].get<double>();
  cp.bump_count = c_norm["bump_count"].get<int>();
  cp.bump_norm = c_norm["bump_norm"].get<double>();
  cp.seed = c_norm["seed"].get<std::uint64_t>();
  cp.wave_q = c_norm["wave_q"].get<double>();
  cp.wave_g = c_norm["wave_g"].get<double>();
  for (double e : cp.epsilons)
    if (!(e > 0.0)) throw ConfigInvalid("command.epsilons: entries must be > 0");
  for (double s : cp.s_values)
    if (!(s >= 0.0 && s <= 1.0))
      throw ConfigInvalid("command.s_values: entries must lie in [0,1]");
  if (cp.s_count < 2 || cp.fd_count < 2)
    throw ConfigInvalid("command.s_count/fd_count: must be >= 2");
  if (!(cp.s_max > 0.0 && cp.s_max <= 1.0) || !(cp.fd_max > 0.0 && cp.fd_max <= 1.0))
    throw ConfigInvalid("command.s_max/fd_max: must lie in (0,1]");
  if (cp.bump_count < 1) throw ConfigInvalid("command.bump_count: must be >= 1");
  if (!(cp.bump_norm > 0.0)) throw ConfigInvalid("command.bump_norm: must be > 0");
  if (!(cp.wave_q > 0.0 && cp.wave_g > 0.0))
    throw ConfigInvalid("command.wave_q/wave_g: must be > 0");

  cfg.echo = json{{"version", 1}, {"scenario", sc_norm}, {"command", c_norm}};
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ConfigInvalid("config parse error: " + std::string(e.what()));
  }
  return parse_config(doc);
}

RunConfig apply_overrides(const RunConfig& cfg, const CliOverrides& ov) {
  if (!ov.nx && !ov.ny && !ov.modes && !ov.seed) return cfg;
  nlohmann::json doc = cfg.echo;
  if (ov.nx) doc["scenario"]["nx"] = *ov.nx;
  if (ov.ny) doc["scenario"]["ny"] = *ov.ny;
  if (ov.modes) doc["scenario"]["modes"] = *ov.modes;
  if (ov.seed) doc["command"]["seed"] = *ov.seed;
  return parse_config(doc);
}

}  // namespace fbstab
