#include "stapwave/scenario_io.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include <json.hpp>

namespace stapwave::io {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ModelError("scenario " + path + ": " + what);
}

void reject_unknown(const json& node, const std::set<std::string>& allowed,
                    const std::string& path) {
  for (const auto& item : node.items())
    if (!allowed.count(item.key())) fail(path + "." + item.key(), "unknown key");
}

const json& require(const json& node, const std::string& key, const std::string& path) {
  if (!node.contains(key)) fail(path, "missing required section/field '" + key + "'");
  return node.at(key);
}

double require_number(const json& node, const std::string& key, const std::string& path) {
  const json& v = require(node, key, path);
  if (!v.is_number()) fail(path + "." + key, "must be a number");
  return v.get<double>();
}

double optional_number(const json& node, const std::string& key, double fallback) {
  return node.contains(key) ? node.at(key).get<double>() : fallback;
}

int require_int(const json& node, const std::string& key, const std::string& path) {
  const json& v = require(node, key, path);
  if (!v.is_number_integer()) fail(path + "." + key, "must be an integer");
  return v.get<int>();
}

cov::CorrelationLaw parse_law(const json& node, const std::string& path) {
  cov::CorrelationLaw law;
  std::string kind = require(node, "law", path).get<std::string>();
  if (kind == "exponential-abs") {
    law.kind = cov::CorrelationLaw::Kind::ExponentialAbs;
    law.parameter = require_number(node, "param", path);
  } else if (kind == "geometric") {
    law.kind = cov::CorrelationLaw::Kind::Geometric;
    law.parameter = require_number(node, "param", path);
    if (law.parameter < 0.0 || law.parameter >= 1.0)
      fail(path + ".param", "geometric ratio must lie in [0, 1)");
  } else if (kind == "custom-sequence") {
    law.kind = cov::CorrelationLaw::Kind::CustomSequence;
    const json& seq = require(node, "param", path);
    if (!seq.is_array()) fail(path + ".param", "custom-sequence needs an array");
    law.sequence = seq.get<std::vector<double>>();
    if (law.sequence.empty() || law.sequence.front() != 1.0)
      fail(path + ".param", "custom-sequence must start with 1.0 (unit diagonal)");
  } else if (kind == "delta") {
    law.kind = cov::CorrelationLaw::Kind::Delta;
  } else {
    fail(path + ".law", "unknown law '" + kind + "'");
  }
  return law;
}

MatC toeplitz_from_law(const cov::CorrelationLaw& law, int size) {
  MatC r(size, size);
  for (int i = 0; i < size; ++i)
    for (int j = 0; j < size; ++j) r(i, j) = law(i - j);
  return r;
}

}  // namespace

std::string content_hash(const std::string& canonical_text) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical_text) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << hash;
  return out.str();
}

LoadedScenario parse_scenario_text(const std::string& text, bool desk_scale) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& err) {
    throw ModelError(std::string("scenario: invalid JSON: ") + err.what());
  }
  reject_unknown(doc, {"array", "pulses", "target", "noise", "interferers", "clutter",
                       "rankdef", "algo"},
                 "scenario");

  LoadedScenario out;
  RadarScenario& sc = out.scenario;

  const json& array = require(doc, "array", "scenario");
  reject_unknown(array, {"M", "d_over_lambda", "f_o"}, "array");
  sc.array.num_elements = require_int(array, "M", "array");
  sc.array.carrier_hz = require_number(array, "f_o", "array");
  double d_over_lambda = require_number(array, "d_over_lambda", "array");
  if (sc.array.carrier_hz <= 0.0) fail("array.f_o", "carrier must be > 0");
  sc.array.element_spacing = d_over_lambda * kSpeedOfLight / sc.array.carrier_hz;

  const json& pulses = require(doc, "pulses", "scenario");
  reject_unknown(pulses, {"L", "N", "B", "T_p", "T"}, "pulses");
  sc.pulses.num_pulses = require_int(pulses, "L", "pulses");
  sc.pulses.num_samples = require_int(pulses, "N", "pulses");
  sc.pulses.bandwidth = require_number(pulses, "B", "pulses");
  sc.pulses.pri = require_number(pulses, "T_p", "pulses");
  sc.pulses.pulse_width =
      optional_number(pulses, "T", sc.pulses.num_samples / sc.pulses.bandwidth);

  if (desk_scale) {
    sc.array.num_elements = 3;
    sc.pulses.num_pulses = 8;
    sc.pulses.num_samples = 4;
  }

  const json& target = require(doc, "target", "scenario");
  reject_unknown(target, {"theta", "phi", "normalized_doppler", "rho_t"}, "target");
  sc.target.azimuth = require_number(target, "theta", "target");
  sc.target.elevation = require_number(target, "phi", "target");
  sc.target.doppler_hz =
      require_number(target, "normalized_doppler", "target") / sc.pulses.pri;
  sc.target.reflectivity = cxd(optional_number(target, "rho_t", 1.0), 0.0);

  const json& noise = require(doc, "noise", "scenario");
  reject_unknown(noise, {"law", "param"}, "noise");
  sc.noise_law = parse_law(noise, "noise");

  if (doc.contains("interferers")) {
    const json& list = doc.at("interferers");
    if (!list.is_array()) fail("interferers", "must be an array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      std::string path = "interferers[" + std::to_string(i) + "]";
      const json& item = list.at(i);
      reject_unknown(item, {"theta", "phi", "law", "param", "power"}, path);
      cov::InterferenceSource src;
      src.azimuth = require_number(item, "theta", path);
      src.elevation = require_number(item, "phi", path);
      src.law = parse_law(item, path);
      src.power = optional_number(item, "power", 1.0);
      sc.interferers.push_back(src);
    }
  }

  const json& clutter = require(doc, "clutter", "scenario");
  reject_unknown(clutter, {"patches", "ring"}, "clutter");
  if (clutter.contains("patches") == clutter.contains("ring"))
    fail("clutter", "needs exactly one of 'patches' or 'ring'");

  if (clutter.contains("patches")) {
    const json& list = clutter.at("patches");
    if (!list.is_array()) fail("clutter.patches", "must be an array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      std::string path = "clutter.patches[" + std::to_string(i) + "]";
      const json& item = list.at(i);
      reject_unknown(item,
                     {"theta", "phi", "normalized_doppler", "num_scatterers", "law", "param",
                      "azimuth_spread", "ridge_beta", "power"},
                     path);
      double theta = require_number(item, "theta", path);
      double phi = require_number(item, "phi", path);
      double doppler = require_number(item, "normalized_doppler", path) / sc.pulses.pri;
      int p = require_int(item, "num_scatterers", path);
      if (p < 1) fail(path + ".num_scatterers", "must be >= 1");
      MatC corr = toeplitz_from_law(parse_law(item, path), p);
      corr *= optional_number(item, "power", 1.0);
      double spread = optional_number(item, "azimuth_spread", 0.0);
      // scatterers spread in azimuth can ride the clutter ridge in Doppler
      double ridge_beta = optional_number(item, "ridge_beta", 0.0);
      double slope = ridge_beta * (sc.array.element_spacing / sc.array.wavelength()) *
                     std::cos(theta) * std::sin(phi) / sc.pulses.pri;
      sc.clutter.push_back(
          cov::ClutterPatch::with_azimuth_spread(theta, phi, doppler, corr, spread, slope));
    }
  } else {
    const json& ring = clutter.at("ring");
    reject_unknown(ring, {"start", "stop", "step", "elevation", "law", "param", "beta",
                          "power"},
                   "clutter.ring");
    double start = require_number(ring, "start", "clutter.ring");
    double stop = require_number(ring, "stop", "clutter.ring");
    double step = require_number(ring, "step", "clutter.ring");
    double elevation = require_number(ring, "elevation", "clutter.ring");
    double beta = optional_number(ring, "beta", 1.0);
    double power = optional_number(ring, "power", 1.0);
    if (step <= 0.0) fail("clutter.ring.step", "must be > 0");
    if (stop < start) fail("clutter.ring", "stop must be >= start");
    double d_over_lambda = sc.array.element_spacing / sc.array.wavelength();
    MatC corr = power * MatC::Identity(1, 1);
    for (double theta = start; theta <= stop + 1e-12; theta += step) {
      // sidelooking clutter ridge: f_c T_p = beta (d/λ) sinθ sinφ
      double doppler =
          beta * d_over_lambda * std::sin(theta) * std::sin(elevation) / sc.pulses.pri;
      sc.clutter.push_back(cov::ClutterPatch::nominal(theta, elevation, doppler, corr));
    }
  }

  if (doc.contains("rankdef")) {
    const json& rankdef = doc.at("rankdef");
    reject_unknown(rankdef, {"rank", "loading"}, "rankdef");
    sc.rank_limit = require_int(rankdef, "rank", "rankdef");
    sc.rank_loading = require_number(rankdef, "loading", "rankdef");
  }

  const json& algo = require(doc, "algo", "scenario");
  reject_unknown(algo,
                 {"kappa", "P_o", "rho", "alpha", "beta", "lipschitz_weights", "tol_obj",
                  "tol_constraint", "tol_root", "tol_step", "max_iter", "pam_iters",
                  "cm_max_sweeps", "seed", "power_stop"},
                 "algo");
  optim::AlgoConfig& cfg = out.algo;
  cfg.kappa = optional_number(algo, "kappa", 1.0);
  cfg.power = require_number(algo, "P_o", "algo");
  cfg.rho = optional_number(algo, "rho", 1.0);
  cfg.alpha = optional_number(algo, "alpha", 0.0);
  cfg.beta = optional_number(algo, "beta", 0.0);
  cfg.lipschitz_weights = algo.value("lipschitz_weights", false);
  cfg.tol_obj = optional_number(algo, "tol_obj", 1e-8);
  cfg.tol_constraint = optional_number(algo, "tol_constraint", 1e-8);
  cfg.tol_root = optional_number(algo, "tol_root", 1e-10);
  cfg.tol_step = optional_number(algo, "tol_step", 1e-6);
  cfg.max_iter = algo.value("max_iter", 100);
  cfg.pam_iters = algo.value("pam_iters", 200);
  cfg.cm_max_sweeps = algo.value("cm_max_sweeps", 2000);
  cfg.seed = algo.value("seed", std::uint64_t{1});
  cfg.power_stop = algo.value("power_stop", false);
  cfg.validate();

  sc.validate();

  // canonical echo with defaults applied; nlohmann::json orders keys
  json echo = doc;
  echo["pulses"]["T"] = sc.pulses.pulse_width;
  echo["algo"]["kappa"] = cfg.kappa;
  echo["algo"]["rho"] = cfg.rho;
  echo["algo"]["seed"] = cfg.seed;
  if (desk_scale) {
    echo["array"]["M"] = sc.array.num_elements;
    echo["pulses"]["L"] = sc.pulses.num_pulses;
    echo["pulses"]["N"] = sc.pulses.num_samples;
  }
  out.canonical = echo.dump();
  out.hash = content_hash(out.canonical);
  return out;
}

LoadedScenario parse_scenario(const std::string& path, bool desk_scale) {
  std::ifstream in(path);
  if (!in) throw ModelError("scenario: cannot open '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario_text(buffer.str(), desk_scale);
}

}  // namespace stapwave::io
