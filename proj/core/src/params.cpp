#include "cavitrans/params.hpp"

#include <cmath>
#include <numbers>

#include <yaml-cpp/yaml.h>

#include "cavitrans/errors.hpp"

namespace cavitrans {

namespace {

double require(const Config& config, const std::string& key) {
  auto it = config.find(key);
  if (it == config.end()) throw Error(ErrorCode::MissingKey, key);
  return it->second;
}

double require_gamma(const Config& config, const std::string& key) {
  if (auto it = config.find(key); it != config.end()) return it->second;
  if (auto it = config.find("gamma"); it != config.end()) return it->second;
  throw Error(ErrorCode::MissingKey, key);
}

}  // namespace

double SystemParams::bandwidth2() const {
  const double q = std::numbers::pi / (n_sites + 1);
  return 4.0 * t2 * std::cos(q);
}

double SystemParams::level_spacing() const {
  const double q = std::numbers::pi / (n_sites + 1);
  double best = 0.0;
  for (int k = 1; k < n_sites; ++k)
    best = std::max(best, 2.0 * t2 * (std::cos(q * k) - std::cos(q * (k + 1))));
  return best;
}

void validate(const SystemParams& p) {
  if (p.n_sites < 2) throw Error(ErrorCode::InvalidArgument, "n_sites must be >= 2");
  if (!(p.omega21() > 0.0)) throw Error(ErrorCode::NonPositiveRate, "omega2 - omega1");
  if (!(p.kappa > 0.0)) throw Error(ErrorCode::NonPositiveRate, "kappa");
  if (!(p.gamma1 > 0.0)) throw Error(ErrorCode::NonPositiveRate, "gamma1");
  if (!(p.gamma2 > 0.0)) throw Error(ErrorCode::NonPositiveRate, "gamma2");
  if (!(p.g >= 0.0)) throw Error(ErrorCode::NonPositiveRate, "g");
  if (!(p.t1 >= 0.0)) throw Error(ErrorCode::NonPositiveRate, "t1");
  if (!(p.t2 >= 0.0)) throw Error(ErrorCode::NonPositiveRate, "t2");
  if (!(p.omega_c > 0.0)) throw Error(ErrorCode::NonPositiveRate, "omega_c");
  if (!(p.n_photon_bath >= 0.0)) throw Error(ErrorCode::NonPositiveRate, "n_photon_bath");
}

SystemParams build_params(const Config& config) {
  SystemParams p;
  const double n = require(config, "n_sites");
  if (n != std::floor(n)) throw Error(ErrorCode::InvalidArgument, "n_sites must be an integer");
  p.n_sites = static_cast<int>(n);
  p.t1 = require(config, "t1");
  p.t2 = require(config, "t2");
  p.gamma1 = require_gamma(config, "gamma1");
  p.gamma2 = require_gamma(config, "gamma2");
  p.omega1 = require(config, "omega1");
  p.omega2 = require(config, "omega2");
  p.omega_c = require(config, "omega_c");
  p.kappa = require(config, "kappa");
  p.g = require(config, "g");
  if (auto it = config.find("n_photon_bath"); it != config.end()) p.n_photon_bath = it->second;
  validate(p);
  return p;
}

Config load_config(const std::filesystem::path& path) {
  YAML::Node root;
  try {
    root = YAML::LoadFile(path.string());
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::Io, path.string() + ": " + e.what());
  }
  if (!root.IsMap()) throw Error(ErrorCode::Io, path.string() + ": expected a key/value mapping");
  Config config;
  for (const auto& kv : root) {
    const auto key = kv.first.as<std::string>();
    try {
      config[key] = kv.second.as<double>();
    } catch (const YAML::Exception&) {
      throw Error(ErrorCode::InvalidArgument, path.string() + ": value of '" + key + "' is not numeric");
    }
  }
  return config;
}

Config to_config(const SystemParams& p) {
  return {{"n_sites", p.n_sites}, {"omega1", p.omega1}, {"omega2", p.omega2},
          {"t1", p.t1},           {"t2", p.t2},         {"gamma1", p.gamma1},
          {"gamma2", p.gamma2},   {"omega_c", p.omega_c}, {"kappa", p.kappa},
          {"g", p.g},             {"n_photon_bath", p.n_photon_bath}};
}

}  // namespace cavitrans
