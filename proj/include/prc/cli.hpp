#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "prc/bounds.hpp"
#include "prc/matrix_cache.hpp"
#include "prc/report_io.hpp"

namespace prc::cli {

struct RunConfig {
  std::vector<double> lambda_grid;
  std::vector<bounds::SpecTriple> specs;
  double epsilon = 0.005;
  std::vector<bounds::BoundKind> kinds{bounds::BoundKind::upper9,
                                       bounds::BoundKind::upper15};
  std::optional<std::filesystem::path> cache_dir;
  std::size_t memory_budget = std::size_t(8) << 30;
  int jobs = 0;
  std::optional<std::filesystem::path> reference_csv;
  std::optional<std::filesystem::path> out;

  enum class Format { csv, json };
  Format format = Format::csv;
};

// Validates the config; returns an error message or empty string.
inline std::string validate(const RunConfig& cfg) {
  if (cfg.lambda_grid.empty()) return "lambda grid is empty";
  for (double l : cfg.lambda_grid)
    if (!(l >= 0.0) || !std::isfinite(l)) return "lambda values must be finite and >= 0";
  if (cfg.specs.empty()) return "no channel specs given";
  for (const auto& s : cfg.specs) {
    try {
      ChannelSpec{0.0, s.block_len, s.max_output_len, s.per_bit_cap, true}.validate();
    } catch (const std::exception& e) {
      return e.what();
    }
  }
  if (!(cfg.epsilon > 0.0)) return "epsilon must be > 0";
  if (cfg.kinds.empty()) return "no bound kinds selected";
  return {};
}

// Executes the sweep described by cfg and writes CSV/JSON results.
// Returns 0 on success, 1 on configuration error, 2 when some points failed
// (their rows carry the error; the sweep itself completes).
inline int run(const RunConfig& cfg, std::ostream& log = std::cerr) {
  if (auto err = validate(cfg); !err.empty()) {
    log << "config error: " << err << '\n';
    return 1;
  }

  std::vector<io::ReferenceEntry> refs;
  if (cfg.reference_csv) {
    try {
      refs = io::load_reference_csv(*cfg.reference_csv);
    } catch (const std::exception& e) {
      log << "config error: " << e.what() << '\n';
      return 1;
    }
  }

  if (cfg.cache_dir) {
    std::error_code ec;
    std::filesystem::create_directories(*cfg.cache_dir, ec);
    if (ec || !std::filesystem::is_directory(*cfg.cache_dir)) {
      log << "config error: cache dir not writable: " << cfg.cache_dir->string() << '\n';
      return 1;
    }
  }

  bounds::SweepOptions opts;
  opts.epsilon = cfg.epsilon;
  opts.kinds = cfg.kinds;
  opts.cache_dir = cfg.cache_dir;
  opts.memory_budget = cfg.memory_budget;
  opts.jobs = cfg.jobs;

  const auto result = bounds::sweep(cfg.lambda_grid, cfg.specs, opts);

  for (const auto& rep : result.reports)
    if (!rep.error.empty())
      log << "point failed: lambda=" << io::format_double(rep.lambda)
          << " L=" << rep.block_len << " Rm=" << rep.max_output_len << " kind="
          << rep.bound_kind << ": " << rep.error << '\n';

  std::vector<io::ReferenceComparison> comparisons;
  if (!refs.empty()) {
    comparisons = io::compare_with_reference(result, refs);
    for (const auto& c : comparisons)
      log << "reference [" << c.source << "] lambda=" << io::format_double(c.lambda)
          << " computed=" << io::format_double(c.computed)
          << " reference=" << io::format_double(c.reference) << " improvement="
          << io::format_double(c.improvement_pct) << "%\n";
  }

  auto emit = [&](std::ostream& out) {
    if (cfg.format == RunConfig::Format::csv)
      io::write_csv(out, result);
    else
      io::write_json(out, result, comparisons);
  };
  if (cfg.out) {
    std::ofstream out(*cfg.out, std::ios::trunc);
    if (!out) {
      log << "config error: cannot open output file: " << cfg.out->string() << '\n';
      return 1;
    }
    emit(out);
  } else {
    emit(std::cout);
  }

  return result.all_ok ? 0 : 2;
}

// Prints the cache listing produced by cache::cache_inspect. Returns 0, or 1
// when the directory cannot be read.
inline int inspect_cache(const std::filesystem::path& dir, std::ostream& out,
                         std::ostream& log = std::cerr) {
  std::vector<cache::CacheEntry> entries;
  try {
    entries = cache::cache_inspect(dir);
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return 1;
  }
  out << "file,lambda,L,Rbar,Rm,conditioned,outputs,bytes,status\n";
  for (const auto& e : entries) {
    out << e.file << ',';
    if (e.checksum_ok) {
      out << io::format_double(e.spec.lambda) << ',' << e.spec.block_len << ','
          << (e.spec.per_bit_cap ? *e.spec.per_bit_cap : -1) << ','
          << e.spec.max_output_len << ',' << (e.spec.conditioned ? 1 : 0) << ','
          << e.output_count << ',' << e.file_bytes << ",ok\n";
    } else {
      out << ",,,,,," << e.file_bytes << ",invalid:" << e.note << '\n';
    }
  }
  return 0;
}

}  // namespace prc::cli
