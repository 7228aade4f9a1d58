#pragma once

#include <chrono>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "prc/baa.hpp"
#include "prc/channel.hpp"
#include "prc/detail/parallel.hpp"
#include "prc/matrix_cache.hpp"
#include "prc/poisson.hpp"

namespace prc::bounds {

// One computed bound at a (lambda, spec) point. Bounds are reported per
// input bit; lower bounds are kept unclamped (reproducing a negative result
// is informative) with the clamped variant alongside.
struct BoundReport {
  double lambda = 0.0;
  int block_len = 0;
  std::optional<int> per_bit_cap;
  int max_output_len = 0;
  std::string bound_kind;  // upper9 | upper15 | lower23 | envelope

  double p_b1 = 0.0;  // F(R_m; L*lambda)
  double p_s = 0.0;   // validity probability (equals p_b1 when uncapped)
  double f_lo = 0.0;  // BAA bracket, bits/block
  double f_hi = 0.0;
  double value = std::numeric_limits<double>::quiet_NaN();
  double value_clamped = std::numeric_limits<double>::quiet_NaN();
  double h_s = 0.0;  // binary entropy of the validity event
  double h_v = 0.0;  // entropy of the block output length, Poisson(L*lambda)
  double epsilon = 0.0;
  bool converged = false;
  bool cached = false;
  double wall_s = 0.0;
  std::string error;  // nonempty when this point failed
};

// Both sides of the output-partitioning identity
//   I(X;Y) = sum_k P(B_k) R_k,
// where R_k re-weights the output marginal and the transition columns of
// partition B_k by 1/P(B_k). Returned as (lhs, rhs) for comparison in tests.
inline std::pair<double, double> partition_identity(
    const TransitionMatrix& m,
    const std::vector<std::vector<std::size_t>>& partitions,
    const std::vector<double>& input_dist) {
  const std::size_t n_rows = m.rows();
  const std::size_t n_cols = m.cols();
  if (input_dist.size() != n_rows)
    throw std::invalid_argument("partition_identity: distribution size mismatch");
  double mass = 0.0;
  for (double w : input_dist) {
    if (!(w >= 0.0)) throw std::invalid_argument("partition_identity: negative weight");
    mass += w;
  }
  if (std::abs(mass - 1.0) > 1e-9)
    throw std::invalid_argument("partition_identity: distribution must sum to 1");

  std::vector<int> owner(n_cols, -1);
  for (std::size_t k = 0; k < partitions.size(); ++k) {
    for (std::size_t c : partitions[k]) {
      if (c >= n_cols)
        throw std::invalid_argument("partition_identity: output index out of range");
      if (owner[c] != -1)
        throw std::invalid_argument("partition_identity: partitions overlap");
      owner[c] = static_cast<int>(k);
    }
  }
  for (std::size_t c = 0; c < n_cols; ++c)
    if (owner[c] == -1)
      throw std::invalid_argument("partition_identity: partitions must cover all outputs");

  std::vector<double> out(n_cols, 0.0);
  for (std::size_t r = 0; r < n_rows; ++r) {
    const double w = input_dist[r];
    if (w == 0.0) continue;
    m.for_each(r, [&](std::size_t c, double p) { out[c] += w * p; });
  }

  double lhs = 0.0;
  for (std::size_t r = 0; r < n_rows; ++r) {
    const double w = input_dist[r];
    if (w == 0.0) continue;
    m.for_each(r, [&](std::size_t c, double p) { lhs += w * p * std::log2(p / out[c]); });
  }

  double rhs = 0.0;
  for (const auto& part : partitions) {
    double pk = 0.0;
    for (std::size_t c : part) pk += out[c];
    if (pk == 0.0) continue;
    double rk = 0.0;
    for (std::size_t c : part) {
      const double v = out[c] / pk;
      if (v > 0.0) rk -= v * std::log2(v);
    }
    for (std::size_t r = 0; r < n_rows; ++r) {
      const double w = input_dist[r];
      if (w == 0.0) continue;
      double cond = 0.0;
      for (std::size_t c : part) {
        const double v = m.at(r, c) / pk;
        if (v > 0.0) cond += v * std::log2(v);
      }
      rk += w * cond;
    }
    rhs += pk * rk;
  }
  return {lhs, rhs};
}

namespace detail {

struct SolvedPoint {
  ChannelSpec spec;
  double p_b1 = 0.0;
  double p_s = 0.0;
  double h_s = 0.0;
  double h_v = 0.0;
  baa::BaaResult solver;
  bool cached = false;
  double wall_s = 0.0;
};

inline SolvedPoint solve_point(double lambda, int block_len,
                               std::optional<int> per_bit_cap, int max_output_len,
                               double epsilon, const BuildOptions& build,
                               const std::optional<std::filesystem::path>& cache_dir,
                               long max_iters) {
  const auto start = std::chrono::steady_clock::now();
  SolvedPoint point;
  point.spec = ChannelSpec{lambda, block_len, max_output_len, per_bit_cap, true};
  point.spec.validate();

  TransitionMatrix matrix;
  bool loaded = false;
  std::filesystem::path file;
  if (cache_dir) {
    file = *cache_dir / cache::cache_file_name(point.spec);
    if (auto m = cache::load_matrix(file, nullptr, build.memory_budget)) {
      matrix = std::move(*m);
      loaded = true;
    }
  }
  if (!loaded) {
    matrix = build_matrix(point.spec, build);
    if (cache_dir) cache::save_matrix(matrix, file);
  }
  point.cached = loaded;

  point.solver = baa::capacity(matrix, epsilon, max_iters);
  point.p_b1 = poisson::cdf(max_output_len, poisson::PoissonParams(block_len * lambda));
  point.p_s = matrix.row_mass;
  point.h_s = poisson::binary_entropy(point.p_s);
  point.h_v = poisson::entropy(poisson::PoissonParams(block_len * lambda));
  point.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return point;
}

inline BoundReport base_report(const SolvedPoint& point, double epsilon) {
  BoundReport rep;
  rep.lambda = point.spec.lambda;
  rep.block_len = point.spec.block_len;
  rep.per_bit_cap = point.spec.per_bit_cap;
  rep.max_output_len = point.spec.max_output_len;
  rep.p_b1 = point.p_b1;
  rep.p_s = point.p_s;
  rep.f_lo = point.solver.cap_lower;
  rep.f_hi = point.solver.cap_upper;
  rep.h_s = point.h_s;
  rep.h_v = point.h_v;
  rep.epsilon = epsilon;
  rep.converged = point.solver.converged;
  rep.cached = point.cached;
  rep.wall_s = point.wall_s;
  return rep;
}

// Upper bound from the length-truncated channel:
//   (1/L) F(R_m; L*lambda) (f + eps) + 1 - F(R_m; L*lambda).
// An unconverged bracket substitutes cap_upper for f + eps, which is still
// a valid upper bound on the true capacity f.
inline BoundReport assemble_upper9(const SolvedPoint& point, double epsilon) {
  BoundReport rep = base_report(point, epsilon);
  rep.bound_kind = "upper9";
  const double L = point.spec.block_len;
  const double f_term = point.solver.converged
                            ? point.solver.cap_lower + epsilon
                            : point.solver.cap_upper;
  rep.value = point.p_b1 * f_term / L + 1.0 - point.p_b1;
  rep.value_clamped = rep.value;
  return rep;
}

// Upper bound from the validity-event-conditioned channel:
//   (1/L) (P_s (f + eps) + (1 - P_s) L).
inline BoundReport assemble_upper15(const SolvedPoint& point, double epsilon) {
  BoundReport rep = base_report(point, epsilon);
  rep.bound_kind = "upper15";
  const double L = point.spec.block_len;
  const double f_term = point.solver.converged
                            ? point.solver.cap_lower + epsilon
                            : point.solver.cap_upper;
  rep.value = (point.p_s * f_term + (1.0 - point.p_s) * L) / L;
  rep.value_clamped = rep.value;
  return rep;
}

// Lower bound with side-information entropy subtracted:
//   (1/L) (P_s f - h(P_s) - H(V)),
// where V is the block output length. The raw BAA lower bracket needs no
// epsilon adjustment on this side.
inline BoundReport assemble_lower23(const SolvedPoint& point, double epsilon) {
  BoundReport rep = base_report(point, epsilon);
  rep.bound_kind = "lower23";
  const double L = point.spec.block_len;
  rep.value = (point.p_s * point.solver.cap_lower - point.h_s - point.h_v) / L;
  rep.value_clamped = std::max(rep.value, 0.0);
  return rep;
}

}  // namespace detail

inline BoundReport upper_bound_eq9(double lambda, int block_len, int max_output_len,
                                   double epsilon, const BuildOptions& build = {}) {
  auto point = detail::solve_point(lambda, block_len, std::nullopt, max_output_len,
                                   epsilon, build, std::nullopt, 100000);
  return detail::assemble_upper9(point, epsilon);
}

inline BoundReport upper_bound_conditioned(double lambda, int block_len,
                                           int per_bit_cap, int max_output_len,
                                           double epsilon,
                                           const BuildOptions& build = {}) {
  auto point = detail::solve_point(lambda, block_len, per_bit_cap, max_output_len,
                                   epsilon, build, std::nullopt, 100000);
  return detail::assemble_upper15(point, epsilon);
}

inline BoundReport lower_bound_eq23(double lambda, int block_len, int per_bit_cap,
                                    int max_output_len, double epsilon,
                                    const BuildOptions& build = {}) {
  auto point = detail::solve_point(lambda, block_len, per_bit_cap, max_output_len,
                                   epsilon, build, std::nullopt, 100000);
  return detail::assemble_lower23(point, epsilon);
}

enum class BoundKind { upper9, upper15, lower23 };

inline const char* to_string(BoundKind k) {
  switch (k) {
    case BoundKind::upper9: return "upper9";
    case BoundKind::upper15: return "upper15";
    case BoundKind::lower23: return "lower23";
  }
  return "?";
}

inline std::optional<BoundKind> bound_kind_from_string(const std::string& s) {
  if (s == "upper9") return BoundKind::upper9;
  if (s == "upper15") return BoundKind::upper15;
  if (s == "lower23") return BoundKind::lower23;
  return std::nullopt;
}

struct SpecTriple {
  int block_len = 1;
  std::optional<int> per_bit_cap;
  int max_output_len = 0;
};

struct SweepOptions {
  double epsilon = 0.005;
  std::vector<BoundKind> kinds{BoundKind::upper9, BoundKind::upper15};
  std::optional<std::filesystem::path> cache_dir;
  std::size_t memory_budget = std::size_t(8) << 30;
  int jobs = 0;
  long max_iters = 100000;
};

struct SweepResult {
  std::vector<BoundReport> reports;   // (lambda, spec, kind) rows in grid order
  std::vector<BoundReport> envelope;  // per-lambda minimum over upper bounds
  bool all_ok = true;
};

// Computes the requested bounds over a lambda grid and a list of channel
// specs. Upper bounds use the length-truncated channel for uncapped specs
// and the validity-conditioned channel for capped ones; the lower bound
// applies to capped specs directly and treats an uncapped spec as capped at
// R_m (a vacuous per-bit cap). Points run in parallel; a matrix is built at
// most once per point and shared between the bounds derived from it.
// Per-point failures are recorded in the report, not thrown.
inline SweepResult sweep(const std::vector<double>& lambda_grid,
                         const std::vector<SpecTriple>& specs,
                         const SweepOptions& opts = {}) {
  if (lambda_grid.empty()) throw std::invalid_argument("sweep: empty lambda grid");
  if (specs.empty()) throw std::invalid_argument("sweep: no channel specs");
  for (double l : lambda_grid)
    if (!(l >= 0.0) || !std::isfinite(l))
      throw std::invalid_argument("sweep: lambda values must be finite and >= 0");

  auto has_kind = [&](BoundKind k) {
    for (BoundKind x : opts.kinds)
      if (x == k) return true;
    return false;
  };

  BuildOptions build;
  build.memory_budget = opts.memory_budget;
  build.jobs = 1;  // parallelism lives at the point level

  const std::size_t n_points = lambda_grid.size() * specs.size();
  std::vector<std::vector<BoundReport>> per_point(n_points);

  // One mutex per cache key so concurrent points never build or write the
  // same cache file twice.
  std::mutex key_mutex_guard;
  std::map<std::string, std::shared_ptr<std::mutex>> key_mutexes;
  auto lock_for = [&](const ChannelSpec& spec) {
    std::lock_guard<std::mutex> g(key_mutex_guard);
    auto& slot = key_mutexes[cache::cache_file_name(spec)];
    if (!slot) slot = std::make_shared<std::mutex>();
    return slot;
  };

  prc::detail::parallel_for(n_points, opts.jobs, [&](std::size_t idx) {
    const double lambda = lambda_grid[idx / specs.size()];
    const SpecTriple& st = specs[idx % specs.size()];
    auto& rows = per_point[idx];

    const bool capped = st.per_bit_cap.has_value();
    const bool want_upper = capped ? has_kind(BoundKind::upper15) : has_kind(BoundKind::upper9);
    const bool want_lower = has_kind(BoundKind::lower23);
    if (!want_upper && !want_lower) return;

    auto solve = [&](std::optional<int> cap) {
      ChannelSpec spec{lambda, st.block_len, st.max_output_len, cap, true};
      auto key_lock = lock_for(spec);
      std::lock_guard<std::mutex> g(*key_lock);
      return detail::solve_point(lambda, st.block_len, cap, st.max_output_len,
                                 opts.epsilon, build, opts.cache_dir, opts.max_iters);
    };

    auto record_failure = [&](const std::string& kind, const std::string& what) {
      BoundReport rep;
      rep.lambda = lambda;
      rep.block_len = st.block_len;
      rep.per_bit_cap = st.per_bit_cap;
      rep.max_output_len = st.max_output_len;
      rep.bound_kind = kind;
      rep.epsilon = opts.epsilon;
      rep.error = what;
      rows.push_back(std::move(rep));
    };

    if (capped) {
      try {
        auto point = solve(st.per_bit_cap);
        if (want_upper) rows.push_back(detail::assemble_upper15(point, opts.epsilon));
        if (want_lower) rows.push_back(detail::assemble_lower23(point, opts.epsilon));
      } catch (const std::exception& e) {
        if (want_upper) record_failure("upper15", e.what());
        if (want_lower) record_failure("lower23", e.what());
      }
    } else {
      if (want_upper) {
        try {
          auto point = solve(std::nullopt);
          rows.push_back(detail::assemble_upper9(point, opts.epsilon));
        } catch (const std::exception& e) {
          record_failure("upper9", e.what());
        }
      }
      if (want_lower) {
        // Vacuous per-bit cap R_m: the capped pipeline with an inactive cap.
        try {
          auto point = solve(st.max_output_len);
          rows.push_back(detail::assemble_lower23(point, opts.epsilon));
        } catch (const std::exception& e) {
          record_failure("lower23", e.what());
        }
      }
    }
  });

  SweepResult result;
  for (auto& rows : per_point)
    for (auto& rep : rows) {
      if (!rep.error.empty()) result.all_ok = false;
      result.reports.push_back(std::move(rep));
    }

  // Envelope: pointwise minimum of the upper bounds at each lambda.
  for (std::size_t li = 0; li < lambda_grid.size(); ++li) {
    const BoundReport* best = nullptr;
    for (const auto& rep : result.reports) {
      if (rep.lambda != lambda_grid[li]) continue;
      if (rep.bound_kind != "upper9" && rep.bound_kind != "upper15") continue;
      if (!rep.error.empty() || std::isnan(rep.value)) continue;
      if (!best || rep.value < best->value) best = &rep;
    }
    if (best) {
      BoundReport env = *best;
      env.bound_kind = "envelope";
      result.envelope.push_back(std::move(env));
    }
  }
  return result;
}

}  // namespace prc::bounds
