#pragma once

// CSV / JSON serialization of coincidence tables and matrices.
//
// Count tables:       setting_q1,setting_q4,detector_pair,count
// Probability tables: setting_q1,setting_q4,detector_pair,probability
// Matrices:           {"dim": d, "re": [[...]], "im": [[...]]}

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gatetele/core.hpp"
#include "gatetele/optics.hpp"

namespace gatetele::io {

class IoError : public Error {
 public:
  using Error::Error;
};

inline constexpr const char* kCountsHeader = "setting_q1,setting_q4,detector_pair,count";
inline constexpr const char* kProbabilityHeader = "setting_q1,setting_q4,detector_pair,probability";

namespace detail {
inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

inline char label_cell(const std::string& s) {
  if (s.size() != 1) throw IoError("bad analyzer label '" + s + "'");
  polarization_state(s[0]);
  return s[0];
}

inline std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

inline std::string format_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}
}  // namespace detail

// ---------------------------------------------------------------------------
// Count tables

inline void write_csv(std::ostream& os, const optics::CoincidenceTable& t) {
  os << kCountsHeader << '\n';
  for (const auto& r : t.rows) {
    os << r.setting.q1 << ',' << r.setting.q4 << ',' << optics::to_string(r.pair) << ',' << r.count << '\n';
  }
}

inline optics::CoincidenceTable read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || detail::strip_cr(line) != kCountsHeader) {
    throw IoError(std::string("expected CSV header '") + kCountsHeader + "'");
  }
  optics::CoincidenceTable t;
  while (std::getline(is, line)) {
    line = detail::strip_cr(line);
    if (line.empty()) continue;
    const auto cells = detail::split_csv(line);
    if (cells.size() != 4) throw IoError("expected 4 CSV columns in '" + line + "'");
    std::uint64_t n = 0;
    const auto [ptr, ec] = std::from_chars(cells[3].data(), cells[3].data() + cells[3].size(), n);
    if (ec != std::errc() || ptr != cells[3].data() + cells[3].size()) {
      throw IoError("bad count '" + cells[3] + "'");
    }
    t.rows.push_back({{detail::label_cell(cells[0]), detail::label_cell(cells[1])},
                      optics::detector_pair_from_string(cells[2]),
                      n});
  }
  t.validate();
  return t;
}

inline nlohmann::json to_json(const optics::CoincidenceTable& t) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : t.rows) {
    arr.push_back({{"setting_q1", std::string(1, r.setting.q1)},
                   {"setting_q4", std::string(1, r.setting.q4)},
                   {"detector_pair", optics::to_string(r.pair)},
                   {"count", r.count}});
  }
  return arr;
}

inline optics::CoincidenceTable table_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw IoError("coincidence table JSON must be an array");
  optics::CoincidenceTable t;
  try {
    for (const auto& row : j) {
      t.rows.push_back({{detail::label_cell(row.at("setting_q1").get<std::string>()),
                         detail::label_cell(row.at("setting_q4").get<std::string>())},
                        optics::detector_pair_from_string(row.at("detector_pair").get<std::string>()),
                        row.at("count").get<std::uint64_t>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed coincidence table JSON: ") + e.what());
  }
  t.validate();
  return t;
}

// ---------------------------------------------------------------------------
// Probability tables (exact mode)

inline void write_csv(std::ostream& os, const std::vector<optics::ProbabilityRow>& rows) {
  os << kProbabilityHeader << '\n';
  for (const auto& r : rows) {
    os << r.setting.q1 << ',' << r.setting.q4 << ',' << optics::to_string(r.pair) << ','
       << detail::format_double(r.probability) << '\n';
  }
}

inline std::vector<optics::ProbabilityRow> read_probability_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || detail::strip_cr(line) != kProbabilityHeader) {
    throw IoError(std::string("expected CSV header '") + kProbabilityHeader + "'");
  }
  std::vector<optics::ProbabilityRow> rows;
  while (std::getline(is, line)) {
    line = detail::strip_cr(line);
    if (line.empty()) continue;
    const auto cells = detail::split_csv(line);
    if (cells.size() != 4) throw IoError("expected 4 CSV columns in '" + line + "'");
    double p = 0.0;
    const auto [ptr, ec] = std::from_chars(cells[3].data(), cells[3].data() + cells[3].size(), p);
    if (ec != std::errc() || ptr != cells[3].data() + cells[3].size()) {
      throw IoError("bad probability '" + cells[3] + "'");
    }
    rows.push_back({{detail::label_cell(cells[0]), detail::label_cell(cells[1])},
                    optics::detector_pair_from_string(cells[2]),
                    p});
  }
  return rows;
}

inline nlohmann::json to_json(const std::vector<optics::ProbabilityRow>& rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows) {
    arr.push_back({{"setting_q1", std::string(1, r.setting.q1)},
                   {"setting_q4", std::string(1, r.setting.q4)},
                   {"detector_pair", optics::to_string(r.pair)},
                   {"probability", r.probability}});
  }
  return arr;
}

// ---------------------------------------------------------------------------
// Matrices

inline nlohmann::json matrix_to_json(const CMatrix& m) {
  nlohmann::json re = nlohmann::json::array();
  nlohmann::json im = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json rr = nlohmann::json::array();
    nlohmann::json ri = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      rr.push_back(m(r, c).real());
      ri.push_back(m(r, c).imag());
    }
    re.push_back(std::move(rr));
    im.push_back(std::move(ri));
  }
  return {{"dim", m.rows()}, {"re", std::move(re)}, {"im", std::move(im)}};
}

inline CMatrix matrix_from_json(const nlohmann::json& j) {
  try {
    const auto d = j.at("dim").get<Eigen::Index>();
    const auto& re = j.at("re");
    const auto& im = j.at("im");
    if (d < 1 || re.size() != static_cast<std::size_t>(d) || im.size() != static_cast<std::size_t>(d)) {
      throw IoError("matrix JSON rows do not match dim");
    }
    CMatrix m(d, d);
    for (Eigen::Index r = 0; r < d; ++r) {
      const auto& rr = re.at(static_cast<std::size_t>(r));
      const auto& ri = im.at(static_cast<std::size_t>(r));
      if (rr.size() != static_cast<std::size_t>(d) || ri.size() != static_cast<std::size_t>(d)) {
        throw IoError("matrix JSON columns do not match dim");
      }
      for (Eigen::Index c = 0; c < d; ++c) {
        m(r, c) = Complex(rr.at(static_cast<std::size_t>(c)).get<double>(), ri.at(static_cast<std::size_t>(c)).get<double>());
      }
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed matrix JSON: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Files

inline std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write " + path);
  f << content;
  if (!f) throw IoError("write failed for " + path);
}

/// Loads a count table from .csv or .json by extension.
inline optics::CoincidenceTable load_table(const std::string& path) {
  const std::string text = read_file(path);
  if (path.ends_with(".json")) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw IoError(path + ": " + e.what());
    }
    return table_from_json(j);
  }
  std::istringstream is(text);
  return read_csv(is);
}

}  // namespace gatetele::io
