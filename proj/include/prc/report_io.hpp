#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "prc/bounds.hpp"

namespace prc::io {

inline constexpr const char* kCsvHeader =
    "lambda,L,Rbar,Rm,bound_kind,Ps,P_B1,f_lo,f_hi,value,value_clamped,H_S,H_V,"
    "converged,cached,wall_s";

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

inline void write_csv_row(std::ostream& out, const bounds::BoundReport& r) {
  char wall[32];
  std::snprintf(wall, sizeof(wall), "%.3f", r.wall_s);
  out << format_double(r.lambda) << ',' << r.block_len << ','
      << (r.per_bit_cap ? *r.per_bit_cap : -1) << ',' << r.max_output_len << ','
      << r.bound_kind << ',' << format_double(r.p_s) << ','
      << format_double(r.p_b1) << ',' << format_double(r.f_lo) << ','
      << format_double(r.f_hi) << ',' << format_double(r.value) << ','
      << format_double(r.value_clamped) << ',' << format_double(r.h_s) << ','
      << format_double(r.h_v) << ',' << (r.converged ? 1 : 0) << ','
      << (r.cached ? 1 : 0) << ',' << wall << '\n';
}

inline void write_csv(std::ostream& out, const bounds::SweepResult& result) {
  out << kCsvHeader << '\n';
  for (const auto& r : result.reports) write_csv_row(out, r);
  for (const auto& r : result.envelope) write_csv_row(out, r);
}

struct ReferenceEntry {
  double lambda = 0.0;
  double value = 0.0;
  std::string source;
};

struct ReferenceComparison {
  double lambda = 0.0;
  double computed = 0.0;
  double reference = 0.0;
  double improvement_pct = 0.0;  // positive when the computed bound is tighter
  std::string source;
};

inline nlohmann::ordered_json report_to_json(const bounds::BoundReport& r) {
  nlohmann::ordered_json j;
  j["lambda"] = r.lambda;
  j["L"] = r.block_len;
  if (r.per_bit_cap)
    j["Rbar"] = *r.per_bit_cap;
  else
    j["Rbar"] = nullptr;
  j["Rm"] = r.max_output_len;
  j["bound_kind"] = r.bound_kind;
  j["Ps"] = r.p_s;
  j["P_B1"] = r.p_b1;
  j["f_lo"] = r.f_lo;
  j["f_hi"] = r.f_hi;
  j["value"] = r.value;
  j["value_clamped"] = r.value_clamped;
  j["H_S"] = r.h_s;
  j["H_V"] = r.h_v;
  j["converged"] = r.converged;
  j["cached"] = r.cached;
  j["wall_s"] = r.wall_s;
  if (!r.error.empty()) j["error"] = r.error;
  return j;
}

inline void write_json(std::ostream& out, const bounds::SweepResult& result,
                       const std::vector<ReferenceComparison>& comparisons) {
  nlohmann::ordered_json j;
  j["records"] = nlohmann::ordered_json::array();
  for (const auto& r : result.reports) j["records"].push_back(report_to_json(r));
  j["envelope"] = nlohmann::ordered_json::array();
  for (const auto& r : result.envelope) j["envelope"].push_back(report_to_json(r));
  if (!comparisons.empty()) {
    j["reference"] = nlohmann::ordered_json::array();
    for (const auto& c : comparisons) {
      nlohmann::ordered_json e;
      e["lambda"] = c.lambda;
      e["computed"] = c.computed;
      e["reference"] = c.reference;
      e["improvement_pct"] = c.improvement_pct;
      e["source"] = c.source;
      j["reference"].push_back(e);
    }
  }
  out << j.dump(2) << '\n';
}

// Literature curves for comparison only: `lambda,value,source` with a
// mandatory header row. Never used in bound computation.
inline std::vector<ReferenceEntry> load_reference_csv(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open reference CSV: " + file.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("reference CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "lambda,value,source")
    throw std::runtime_error("reference CSV must start with header 'lambda,value,source'");

  std::vector<ReferenceEntry> entries;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 == std::string::npos ? c1 : c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
      throw std::runtime_error("reference CSV line " + std::to_string(line_no) +
                               ": expected 3 columns");
    ReferenceEntry e;
    try {
      e.lambda = std::stod(line.substr(0, c1));
      e.value = std::stod(line.substr(c1 + 1, c2 - c1 - 1));
    } catch (const std::exception&) {
      throw std::runtime_error("reference CSV line " + std::to_string(line_no) +
                               ": bad number");
    }
    e.source = line.substr(c2 + 1);
    entries.push_back(std::move(e));
  }
  return entries;
}

inline std::vector<ReferenceComparison> compare_with_reference(
    const bounds::SweepResult& result, const std::vector<ReferenceEntry>& refs) {
  std::vector<ReferenceComparison> out;
  for (const auto& env : result.envelope) {
    for (const auto& ref : refs) {
      if (std::abs(env.lambda - ref.lambda) >
          1e-9 * std::max(1.0, std::abs(env.lambda)))
        continue;
      if (!(ref.value > 0.0)) continue;
      ReferenceComparison c;
      c.lambda = env.lambda;
      c.computed = env.value;
      c.reference = ref.value;
      c.improvement_pct = (ref.value - env.value) / ref.value * 100.0;
      c.source = ref.source;
      out.push_back(std::move(c));
    }
  }
  return out;
}

}  // namespace prc::io
