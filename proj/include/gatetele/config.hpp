#pragma once

// Run configuration, read from JSON.
//
//   {
//     "noise": "ideal" | "calibrated" | "calibrated-point" | "fully-depolarizing" | {
//       "epr_visibility": 1.0, "mz_visibility_12": 1.0, "mz_visibility_3": 1.0,
//       "white_noise": 0.0
//     },
//     "input": "RR" | {"custom": [[re, im], [re, im], [re, im], [re, im]]},
//     "mean_counts_per_setting": 10000,
//     "seed": 0,
//     "exact": false,
//     "output_dir": "out"
//   }
//
// Every key is optional; the defaults are the values shown.

#include <cstdint>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "gatetele/core.hpp"
#include "gatetele/io.hpp"
#include "gatetele/optics.hpp"
#include "gatetele/tomography.hpp"

namespace gatetele::config {

/// Source visibility that brings the exact process fidelity to 0.80 with
/// both interferometers at 85% visibility; see calibrate_epr_visibility.
inline constexpr double kPointEprVisibility = 0.8997956;

inline optics::NoiseModel point_noise() { return {kPointEprVisibility, 0.85, 0.85, 1e4, 0.0}; }

struct RunConfig {
  optics::NoiseModel noise = optics::NoiseModel::ideal();
  std::string noise_preset = "ideal";  // or "custom"
  std::string input_label = "RR";      // a tomography input label, or "custom"
  std::optional<CVector> custom_amplitudes;
  double mean_counts_per_setting = 1e4;
  std::uint64_t seed = 0;
  bool exact = false;
  std::string output_dir = "out";

  [[nodiscard]] PureState input_state() const {
    if (input_label == "custom") {
      if (!custom_amplitudes) throw InvalidArgument("custom input without amplitudes");
      return PureState::normalized(*custom_amplitudes);
    }
    return tomography::tomo_input_state(input_label);
  }

  [[nodiscard]] optics::NoiseModel effective_noise() const {
    optics::NoiseModel n = noise;
    n.mean_counts_per_setting = mean_counts_per_setting;
    return n;
  }
};

inline optics::NoiseModel noise_preset(const std::string& name) {
  if (name == "ideal") return optics::NoiseModel::ideal();
  if (name == "calibrated") return optics::NoiseModel::calibrated();
  if (name == "calibrated-point") return point_noise();
  if (name == "fully-depolarizing") return optics::NoiseModel::fully_depolarizing();
  throw InvalidArgument("unknown noise preset '" + name + "'");
}

inline bool is_tomo_label(const std::string& s) {
  for (const char* l : tomography::kTomoInputLabels) {
    if (s == l) return true;
  }
  return false;
}

inline RunConfig parse_config(const nlohmann::json& j) {
  RunConfig c;
  if (!j.is_object()) throw InvalidArgument("config must be a JSON object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "noise") {
        if (value.is_string()) {
          c.noise_preset = value.get<std::string>();
          c.noise = noise_preset(c.noise_preset);
        } else {
          c.noise_preset = "custom";
          c.noise.epr_visibility = value.value("epr_visibility", 1.0);
          c.noise.mz_visibility_12 = value.value("mz_visibility_12", 1.0);
          c.noise.mz_visibility_3 = value.value("mz_visibility_3", 1.0);
          c.noise.white_noise = value.value("white_noise", 0.0);
        }
      } else if (key == "input") {
        if (value.is_string()) {
          c.input_label = value.get<std::string>();
          if (!is_tomo_label(c.input_label)) throw InvalidArgument("unknown input label '" + c.input_label + "'");
        } else {
          const auto& amps = value.at("custom");
          if (amps.size() != 4) throw InvalidArgument("custom input needs 4 amplitudes");
          CVector v(4);
          for (std::size_t i = 0; i < 4; ++i) {
            v(static_cast<Eigen::Index>(i)) = Complex(amps.at(i).at(0).get<double>(), amps.at(i).at(1).get<double>());
          }
          c.input_label = "custom";
          c.custom_amplitudes = v;
        }
      } else if (key == "mean_counts_per_setting") {
        c.mean_counts_per_setting = value.get<double>();
      } else if (key == "seed") {
        c.seed = value.get<std::uint64_t>();
      } else if (key == "exact") {
        c.exact = value.get<bool>();
      } else if (key == "output_dir") {
        c.output_dir = value.get<std::string>();
      } else {
        throw InvalidArgument("unknown config key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("malformed config: ") + e.what());
  }
  c.effective_noise().validate();
  if (!(c.mean_counts_per_setting > 0.0)) throw InvalidArgument("mean_counts_per_setting must be positive");
  static_cast<void>(c.input_state());  // validates custom amplitudes
  return c;
}

inline RunConfig load_config(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(io::read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(path + ": " + e.what());
  }
  return parse_config(j);
}

inline nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json j;
  j["noise"] = {{"preset", c.noise_preset},
                {"epr_visibility", c.noise.epr_visibility},
                {"mz_visibility_12", c.noise.mz_visibility_12},
                {"mz_visibility_3", c.noise.mz_visibility_3},
                {"white_noise", c.noise.white_noise}};
  if (c.input_label == "custom" && c.custom_amplitudes) {
    nlohmann::json amps = nlohmann::json::array();
    for (Eigen::Index i = 0; i < c.custom_amplitudes->size(); ++i) {
      amps.push_back({(*c.custom_amplitudes)(i).real(), (*c.custom_amplitudes)(i).imag()});
    }
    j["input"] = {{"custom", amps}};
  } else {
    j["input"] = c.input_label;
  }
  j["mean_counts_per_setting"] = c.mean_counts_per_setting;
  j["seed"] = c.seed;
  j["exact"] = c.exact;
  j["output_dir"] = c.output_dir;
  return j;
}

}  // namespace gatetele::config
