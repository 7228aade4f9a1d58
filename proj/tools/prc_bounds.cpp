// Command-line front end for the Poisson-repeat channel bound sweeps.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "prc/cli.hpp"

namespace {

std::vector<double> parse_lambda_range(const std::string& text) {
  double start = 0, stop = 0, step = 0;
  const auto c1 = text.find(':');
  const auto c2 = text.find(':', c1 == std::string::npos ? c1 : c1 + 1);
  if (c1 == std::string::npos || c2 == std::string::npos)
    throw CLI::ValidationError("--lambda-range", "expected start:stop:step");
  try {
    start = std::stod(text.substr(0, c1));
    stop = std::stod(text.substr(c1 + 1, c2 - c1 - 1));
    step = std::stod(text.substr(c2 + 1));
  } catch (const std::exception&) {
    throw CLI::ValidationError("--lambda-range", "bad number in start:stop:step");
  }
  if (!(step > 0)) throw CLI::ValidationError("--lambda-range", "step must be > 0");
  if (stop < start) throw CLI::ValidationError("--lambda-range", "stop must be >= start");
  std::vector<double> grid;
  const long count = static_cast<long>((stop - start) / step + 1e-9) + 1;
  for (long k = 0; k < count; ++k) grid.push_back(start + k * step);
  return grid;
}

prc::bounds::SpecTriple parse_spec(const std::string& text) {
  std::vector<int> parts;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = text.find(',', pos);
    const auto piece = text.substr(pos, comma == std::string::npos ? std::string::npos
                                                                   : comma - pos);
    try {
      parts.push_back(std::stoi(piece));
    } catch (const std::exception&) {
      throw CLI::ValidationError("--spec", "expected integers L[,Rbar],Rm");
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  prc::bounds::SpecTriple spec;
  if (parts.size() == 2) {
    spec.block_len = parts[0];
    spec.max_output_len = parts[1];
  } else if (parts.size() == 3) {
    spec.block_len = parts[0];
    spec.per_bit_cap = parts[1];
    spec.max_output_len = parts[2];
  } else {
    throw CLI::ValidationError("--spec", "expected L,Rm or L,Rbar,Rm");
  }
  return spec;
}

std::size_t parse_size(const std::string& text) {
  if (text.empty()) throw CLI::ValidationError("--mem-budget", "empty size");
  std::size_t idx = 0;
  double v = 0;
  try {
    v = std::stod(text, &idx);
  } catch (const std::exception&) {
    throw CLI::ValidationError("--mem-budget", "bad size: " + text);
  }
  std::string suffix = text.substr(idx);
  double mult = 1;
  if (suffix == "" || suffix == "B" || suffix == "b") mult = 1;
  else if (suffix == "K" || suffix == "k" || suffix == "KiB") mult = 1024.0;
  else if (suffix == "M" || suffix == "m" || suffix == "MiB") mult = 1024.0 * 1024;
  else if (suffix == "G" || suffix == "g" || suffix == "GiB") mult = 1024.0 * 1024 * 1024;
  else throw CLI::ValidationError("--mem-budget", "unknown size suffix: " + suffix);
  if (v < 0) throw CLI::ValidationError("--mem-budget", "size must be >= 0");
  return static_cast<std::size_t>(v * mult);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Capacity bound sweeps for the Poisson-repeat channel"};
  app.require_subcommand(1);

  // --- run ---
  auto* run_cmd = app.add_subcommand("run", "Compute bounds over a lambda grid");
  run_cmd->set_config("--config", "", "Flat key=value config file; flags win");

  std::vector<double> lambdas;
  std::string lambda_range;
  std::vector<std::string> spec_texts;
  std::vector<std::string> bound_names;
  double epsilon = 0.005;
  std::string cache_dir;
  std::string mem_budget = "8G";
  int jobs = 0;
  std::string reference_csv, out_path, format = "csv";

  auto* lam_opt = run_cmd->add_option("--lambda", lambdas, "Comma-separated lambda values")
                      ->delimiter(',');
  auto* range_opt =
      run_cmd->add_option("--lambda-range", lambda_range, "Grid as start:stop:step");
  lam_opt->excludes(range_opt);
  run_cmd->add_option("--spec", spec_texts, "Channel spec L[,Rbar],Rm (repeatable)")
      ->required();
  run_cmd->add_option("--epsilon", epsilon, "Solver bracket width (default 0.005)");
  run_cmd->add_option("--bounds", bound_names,
                      "Bound kinds: upper9,upper15,lower23 (default upper9,upper15)")
      ->delimiter(',');
  run_cmd->add_option("--cache-dir", cache_dir, "Matrix cache directory")
      ->envname("PRC_CACHE_DIR");
  run_cmd->add_option("--mem-budget", mem_budget,
                      "Matrix memory budget, e.g. 8G or 512M (default 8G)");
  run_cmd->add_option("--jobs", jobs, "Parallel sweep workers (0 = all cores)");
  run_cmd->add_option("--reference-csv", reference_csv,
                      "Literature curve CSV (lambda,value,source) for comparison");
  run_cmd->add_option("--out", out_path, "Output file (default stdout)");
  run_cmd->add_option("--format", format, "Output format")
      ->check(CLI::IsMember({"csv", "json"}));

  // --- cache-inspect ---
  auto* inspect_cmd = app.add_subcommand("cache-inspect", "List cached matrices");
  std::string inspect_dir;
  inspect_cmd->add_option("--cache-dir", inspect_dir, "Matrix cache directory")
      ->envname("PRC_CACHE_DIR")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  if (app.got_subcommand(inspect_cmd))
    return prc::cli::inspect_cache(inspect_dir, std::cout);

  prc::cli::RunConfig cfg;
  try {
    if (!lambda_range.empty()) cfg.lambda_grid = parse_lambda_range(lambda_range);
    else cfg.lambda_grid = lambdas;
    for (const auto& s : spec_texts) cfg.specs.push_back(parse_spec(s));
    if (!bound_names.empty()) {
      cfg.kinds.clear();
      for (const auto& name : bound_names) {
        auto kind = prc::bounds::bound_kind_from_string(name);
        if (!kind) {
          std::cerr << "config error: unknown bound kind: " << name << '\n';
          return 1;
        }
        cfg.kinds.push_back(*kind);
      }
    }
    cfg.epsilon = epsilon;
    if (!cache_dir.empty()) cfg.cache_dir = cache_dir;
    cfg.memory_budget = parse_size(mem_budget);
    cfg.jobs = jobs;
    if (!reference_csv.empty()) cfg.reference_csv = reference_csv;
    if (!out_path.empty()) cfg.out = out_path;
    cfg.format = format == "json" ? prc::cli::RunConfig::Format::json
                                  : prc::cli::RunConfig::Format::csv;
  } catch (const CLI::Error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  }

  try {
    return prc::cli::run(cfg);
  } catch (const std::exception& e) {
    std::cerr << "fatal: " << e.what() << '\n';
    return 2;
  }
}
