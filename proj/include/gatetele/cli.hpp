#pragma once

// Subcommand implementations behind the gatetele command-line tool.
//
// Exit codes: 0 success, 1 a verification check failed, 2 usage or config
// error, 3 file I/O error or missing artifacts, 4 reconstruction failure.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gatetele/campaign.hpp"
#include "gatetele/config.hpp"
#include "gatetele/core.hpp"
#include "gatetele/io.hpp"
#include "gatetele/optics.hpp"
#include "gatetele/protocol.hpp"
#include "gatetele/tomography.hpp"

namespace gatetele::cli {

enum ExitCode : int { kOk = 0, kCheckFailed = 1, kUsage = 2, kIo = 3, kReconstruction = 4 };

inline constexpr const char* kOutDirEnv = "GATETELE_OUT_DIR";

/// Flags shared by the pipeline subcommands; set values override the config file.
struct CommonOptions {
  std::optional<std::string> config_path;
  std::optional<std::uint64_t> seed;
  std::optional<double> counts;
  std::optional<std::string> out;
  bool exact = false;
};

inline config::RunConfig resolve_config(const CommonOptions& o) {
  config::RunConfig c;
  bool out_from_file = false;
  if (o.config_path) {
    c = config::load_config(*o.config_path);
    out_from_file = nlohmann::json::parse(io::read_file(*o.config_path)).contains("output_dir");
  }
  if (o.seed) c.seed = *o.seed;
  if (o.counts) {
    if (!(*o.counts > 0.0)) throw InvalidArgument("--counts must be positive");
    c.mean_counts_per_setting = *o.counts;
  }
  if (o.exact) c.exact = true;
  if (o.out) {
    c.output_dir = *o.out;
  } else if (!out_from_file) {
    if (const char* env = std::getenv(kOutDirEnv); env != nullptr && *env != '\0') c.output_dir = env;
  }
  return c;
}

namespace detail {

inline std::string fmt(double v, int precision = 6) {
  std::ostringstream ss;
  ss << std::setprecision(precision) << v;
  return ss.str();
}

inline void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) throw io::IoError("cannot create output directory " + dir);
}

inline std::string join(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

inline std::string lower(std::string s) {
  for (char& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return s;
}

/// Runs `body`, mapping library exceptions onto exit codes.
template <typename F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const io::IoError& e) {
    err << "error: " << e.what() << '\n';
    return kIo;
  } catch (const ReconstructionError& e) {
    err << "error: " << e.what() << '\n';
    return kReconstruction;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kIo;
  }
}

/// Setting weights from a count or probability table in CSV or JSON.
inline tomography::SettingWeights load_weights(const std::string& path) {
  const std::string text = io::read_file(path);
  if (path.ends_with(".json")) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw io::IoError(path + ": " + e.what());
    }
    if (j.is_array() && !j.empty() && j.front().contains("probability")) {
      std::vector<optics::ProbabilityRow> rows;
      for (const auto& r : j) {
        rows.push_back({{io::detail::label_cell(r.at("setting_q1").get<std::string>()),
                         io::detail::label_cell(r.at("setting_q4").get<std::string>())},
                        optics::detector_pair_from_string(r.at("detector_pair").get<std::string>()),
                        r.at("probability").get<double>()});
      }
      return tomography::weights_from_probabilities(rows);
    }
    return tomography::weights_from_counts(io::table_from_json(j));
  }
  std::istringstream is(text);
  if (text.starts_with(io::kProbabilityHeader)) {
    return tomography::weights_from_probabilities(io::read_probability_csv(is));
  }
  return tomography::weights_from_counts(io::read_csv(is));
}

inline nlohmann::json witness_json(const DensityMatrix& rho, const PureState& target) {
  const Eigen::Vector2d s = tomography::schmidt_coefficients(target);
  if (std::abs(s(0) - s(1)) > 1e-10) return nullptr;
  return tomography::entanglement_witness(rho, target).entangled;
}

/// Contents of a state_<label>.json artifact.
inline nlohmann::json state_artifact(const config::RunConfig& c, const std::string& label,
                                     const tomography::StateTomoResult& tomo, const PureState& target) {
  nlohmann::json j;
  j["input"] = label;
  j["f_s"] = state_fidelity(tomo.rho, target);
  j["entangled"] = witness_json(tomo.rho, target);
  j["raw_min_eigenvalue"] = check_physicality(tomo.raw).min_eigenvalue;
  j["rho"] = io::matrix_to_json(tomo.rho.elements());
  config::RunConfig echo = c;
  if (label != c.input_label) {
    echo.input_label = label;
    echo.custom_amplitudes.reset();
  }
  j["config"] = config::to_json(echo);
  return j;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// verify

inline int cmd_verify(int num_random, std::uint64_t seed, std::ostream& out, std::ostream& err) {
  if (num_random < 1) {
    err << "error: --inputs must be at least 1\n";
    return kUsage;
  }
  return detail::guarded(err, [&] {
    double worst_dev = 0.0;
    double worst_prob = 0.0;
    double worst_fid = 0.0;
    const DensityMatrix resource = protocol::ideal_resource();
    auto check = [&](const PureState& psi, const std::string& name, bool print) {
      const double dev = protocol::verify_identity(psi).max_deviation;
      const auto run = protocol::teleport_enumerate(psi, resource);
      const PureState target = protocol::target_output(psi);
      double prob_gap = 0.0;
      double fid_gap = 0.0;
      for (const auto& b : run.branches) {
        prob_gap = std::max(prob_gap, std::abs(b.probability - 0.25));
        fid_gap = std::max(fid_gap, std::abs(1.0 - state_fidelity(b.output, target)));
      }
      worst_dev = std::max(worst_dev, dev);
      worst_prob = std::max(worst_prob, prob_gap);
      worst_fid = std::max(worst_fid, fid_gap);
      if (print) {
        out << name << "  deviation=" << detail::fmt(dev, 3) << "  branch_prob_gap=" << detail::fmt(prob_gap, 3)
            << "  output_fidelity=" << detail::fmt(1.0 - fid_gap, 15) << '\n';
      }
    };
    for (const char* label : tomography::kTomoInputLabels) check(tomography::tomo_input_state(label), label, true);

    std::mt19937_64 rng(seed);
    for (int i = 0; i < num_random; ++i) check(haar_random_state(2, rng), "haar", false);

    const auto cost = protocol::communication_cost(
        protocol::teleport_enumerate(tomography::tomo_input_state("RR"), resource));
    out << "random inputs: " << num_random << " (seed " << seed << ")\n"
        << "max deviation: " << detail::fmt(worst_dev, 3) << '\n'
        << "max branch probability gap: " << detail::fmt(worst_prob, 3) << '\n'
        << "max output infidelity: " << detail::fmt(worst_fid, 3) << '\n'
        << "communication: " << cost.ebits << " ebit, " << cost.cbits << " cbits\n";
    const bool ok = worst_dev <= 1e-12 && worst_prob <= 1e-12 && worst_fid <= 1e-12;
    out << (ok ? "PASS" : "FAIL") << '\n';
    return ok ? kOk : kCheckFailed;
  });
}

// ---------------------------------------------------------------------------
// simulate

inline std::string table_basename(const config::RunConfig& c, optics::DetectorPair p) {
  return "table_" + c.input_label + "_" + optics::to_string(p);
}

/// Writes one CSV and one JSON table per detector pair; returns the CSV paths.
inline std::vector<std::string> write_tables(const config::RunConfig& c) {
  detail::ensure_dir(c.output_dir);
  const optics::PrepSettings prep = campaign::prep_for_product(c.input_state());
  const auto settings = optics::tomography_settings();
  const optics::NoiseModel noise = c.effective_noise();
  std::vector<std::string> paths;
  if (c.exact) {
    const auto rows = optics::exact_run(prep, noise, settings);
    for (optics::DetectorPair p : optics::kDetectorPairs) {
      std::vector<optics::ProbabilityRow> sub;
      for (const auto& r : rows) {
        if (r.pair == p) sub.push_back(r);
      }
      std::ostringstream csv;
      io::write_csv(csv, sub);
      const std::string base = detail::join(c.output_dir, table_basename(c, p));
      io::write_file(base + ".csv", csv.str());
      io::write_file(base + ".json", io::to_json(sub).dump(2) + "\n");
      paths.push_back(base + ".csv");
    }
    return paths;
  }
  const optics::CoincidenceTable all = optics::simulate_run(prep, noise, settings, c.seed);
  for (optics::DetectorPair p : optics::kDetectorPairs) {
    const optics::CoincidenceTable sub = all.for_pair(p);
    std::ostringstream csv;
    io::write_csv(csv, sub);
    const std::string base = detail::join(c.output_dir, table_basename(c, p));
    io::write_file(base + ".csv", csv.str());
    io::write_file(base + ".json", io::to_json(sub).dump(2) + "\n");
    paths.push_back(base + ".csv");
  }
  return paths;
}

inline int cmd_simulate(const CommonOptions& opts, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const config::RunConfig c = resolve_config(opts);
    for (const auto& p : write_tables(c)) out << "wrote " << p << " (+ .json)\n";
    return kOk;
  });
}

// ---------------------------------------------------------------------------
// tomo-state

inline int cmd_tomo_state(const CommonOptions& opts, const std::vector<std::string>& count_files, std::ostream& out,
                          std::ostream& err) {
  return detail::guarded(err, [&] {
    const config::RunConfig c = resolve_config(opts);
    tomography::SettingWeights weights;
    if (count_files.empty()) {
      weights = campaign::measure_input(campaign::prep_for_product(c.input_state()), c.effective_noise(), c.exact,
                                        c.seed);
    } else {
      for (const auto& f : count_files) {
        for (const auto& [s, w] : detail::load_weights(f)) weights[s] += w;
      }
    }
    if (weights.size() < 16) throw ReconstructionError("count tables do not cover all 16 analyzer settings");
    const auto tomo = tomography::state_tomo_detailed(weights);
    const PureState target = protocol::target_output(c.input_state());
    const nlohmann::json j = detail::state_artifact(c, c.input_label, tomo, target);
    detail::ensure_dir(c.output_dir);
    const std::string path = detail::join(c.output_dir, "state_" + c.input_label + ".json");
    io::write_file(path, j.dump(2) + "\n");

    out << "input " << c.input_label << ": F_s = " << detail::fmt(j["f_s"].get<double>()) << '\n';
    if (!j["entangled"].is_null()) {
      out << "entanglement witness (F_s > 0.5): " << (j["entangled"].get<bool>() ? "entangled" : "not certified")
          << '\n';
    }
    out << "wrote " << path << '\n';
    return kOk;
  });
}

// ---------------------------------------------------------------------------
// tomo-process

inline int cmd_tomo_process(const CommonOptions& opts, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const config::RunConfig c = resolve_config(opts);
    const auto camp = campaign::run_process_campaign(c.effective_noise(), c.exact, c.seed);

    nlohmann::json fids;
    for (const auto& r : camp.inputs) fids[r.label] = state_fidelity(r.tomo.rho, r.target);
    nlohmann::json j;
    j["f_p"] = camp.f_p;
    j["f_bar"] = camp.f_bar;
    j["max_reproduction_error"] = camp.process.max_reproduction_error;
    j["raw_chi_min_eigenvalue"] = check_physicality(camp.process.raw).min_eigenvalue;
    j["output_fidelities"] = fids;
    j["chi"] = io::matrix_to_json(camp.process.chi.elements());
    j["config"] = config::to_json(c);
    detail::ensure_dir(c.output_dir);
    for (const auto& r : camp.inputs) {
      const nlohmann::json sj = detail::state_artifact(c, r.label, r.tomo, r.target);
      io::write_file(detail::join(c.output_dir, "state_" + r.label + ".json"), sj.dump(2) + "\n");
    }
    const std::string path = detail::join(c.output_dir, "process.json");
    io::write_file(path, j.dump(2) + "\n");

    out << "F_P = " << detail::fmt(camp.f_p) << '\n'
        << "F_bar = (4 F_P + 1) / 5 = " << detail::fmt(camp.f_bar) << '\n'
        << "max reproduction error = " << detail::fmt(camp.process.max_reproduction_error, 3) << '\n'
        << "wrote " << path << " and 16 state_<label>.json files\n";
    return kOk;
  });
}

// ---------------------------------------------------------------------------
// report

/// Collects state_*.json and process.json from `dir` into summary.json.
///
///   f_s_<label>        state fidelity per reconstructed input (lower case)
///   witness_<label>    true/false when the ideal output is maximally entangled
///   f_p, f_bar         from process.json
///   configs            each artifact's config echo, keyed by file name
inline int cmd_report(const std::string& dir, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw io::IoError("no such artifacts directory: " + dir);
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir)) {
      const std::string name = e.path().filename().string();
      if (name == "process.json" || (name.starts_with("state_") && name.ends_with(".json"))) {
        files.push_back(e.path());
      }
    }
    if (files.empty()) throw io::IoError("no state_*.json or process.json artifacts in " + dir);
    std::sort(files.begin(), files.end());

    nlohmann::json summary;
    nlohmann::json configs;
    for (const auto& f : files) {
      const nlohmann::json j = nlohmann::json::parse(io::read_file(f.string()));
      const std::string name = f.filename().string();
      configs[name] = j.at("config");
      if (name == "process.json") {
        summary["f_p"] = j.at("f_p");
        summary["f_bar"] = j.at("f_bar");
      } else {
        const std::string label = detail::lower(j.at("input").get<std::string>());
        summary["f_s_" + label] = j.at("f_s");
        if (!j.at("entangled").is_null()) summary["witness_" + label] = j.at("entangled");
      }
    }
    summary["configs"] = configs;
    const std::string text = summary.dump(2) + "\n";
    io::write_file(detail::join(dir, "summary.json"), text);
    out << text;
    return kOk;
  });
}

}  // namespace gatetele::cli
