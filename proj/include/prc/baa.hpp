#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "prc/channel.hpp"

namespace prc::baa {

struct BaaResult {
  std::vector<double> input_dist;   // optimizing distribution over 2^L inputs
  std::vector<double> output_dist;  // induced by input_dist
  double cap_lower = 0.0;           // certified bracket, bits/block
  double cap_upper = 0.0;
  int iterations = 0;
  double epsilon = 0.0;             // requested bracket width
  bool converged = false;
};

// Blahut-Arimoto capacity of a conditioned (row-stochastic) channel matrix.
//
// Starting from the uniform input distribution, each iteration computes
// D_j = sum_i p_ji log2(p_ji / Q_i) with Q_i = sum_j q_j p_ji, the classical
// bracket lower = log2 sum_j q_j 2^{D_j}, upper = max_j D_j, and the update
// q_j <- q_j 2^{D_j} / norm. Iteration stops once the running bracket width
// drops to epsilon. The lower bracket is nondecreasing, so cap_lower is a
// true capacity lower bound with 0 <= f - cap_lower <= epsilon on success.
inline BaaResult capacity(const TransitionMatrix& m, double epsilon = 0.005,
                          long max_iters = 100000) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("baa::capacity: epsilon must be > 0");
  if (max_iters < 1) throw std::invalid_argument("baa::capacity: max_iters must be >= 1");
  const std::size_t n_rows = m.rows();
  const std::size_t n_cols = m.cols();
  if (n_cols == 0) throw std::invalid_argument("baa::capacity: matrix has no outputs");

  for (double s : m.row_sums())
    if (std::abs(s - 1.0) > 1e-9)
      throw std::invalid_argument(
          "baa::capacity: rows must sum to 1 (conditioned matrix required)");

  // log2 of every nonzero entry, in for_each enumeration order per row.
  std::vector<std::size_t> row_off(n_rows + 1, 0);
  for (std::size_t r = 0; r < n_rows; ++r) {
    std::size_t n = 0;
    m.for_each(r, [&](std::size_t, double) { ++n; });
    row_off[r + 1] = row_off[r] + n;
  }
  std::vector<double> lp(row_off[n_rows]);
  for (std::size_t r = 0; r < n_rows; ++r) {
    std::size_t k = row_off[r];
    m.for_each(r, [&](std::size_t, double p) { lp[k++] = std::log2(p); });
  }

  std::vector<double> q(n_rows, 1.0 / static_cast<double>(n_rows));
  std::vector<double> out_dist(n_cols), log_out(n_cols), gain(n_rows);

  const double cap_ceiling =
      std::min(std::log2(double(n_rows)), std::log2(double(n_cols)));
  double lower = 0.0;
  double best_upper = cap_ceiling;
  bool converged = false;
  int iterations = 0;

  auto induce_output = [&] {
    std::fill(out_dist.begin(), out_dist.end(), 0.0);
    for (std::size_t r = 0; r < n_rows; ++r) {
      const double w = q[r];
      if (w == 0.0) continue;
      m.for_each(r, [&](std::size_t c, double p) { out_dist[c] += w * p; });
    }
  };

  for (long iter = 1; iter <= max_iters; ++iter) {
    iterations = static_cast<int>(iter);
    induce_output();
    for (std::size_t c = 0; c < n_cols; ++c)
      log_out[c] = out_dist[c] > 0.0 ? std::log2(out_dist[c]) : 0.0;

    bool lost_support = false;
    for (std::size_t r = 0; r < n_rows; ++r) {
      double d = 0.0;
      std::size_t k = row_off[r];
      m.for_each(r, [&](std::size_t c, double p) {
        if (out_dist[c] == 0.0) lost_support = true;
        d += p * (lp[k++] - log_out[c]);
      });
      gain[r] = d;
    }
    if (lost_support)
      throw std::runtime_error(
          "baa::capacity: output distribution lost support (input weights underflowed)");

    const double peak = *std::max_element(gain.begin(), gain.end());
    best_upper = std::min(best_upper, peak);
    double s = 0.0;
    for (std::size_t r = 0; r < n_rows; ++r) s += q[r] * std::exp2(gain[r] - peak);
    lower = std::max(peak + std::log2(s), 0.0);

    if (best_upper - lower <= epsilon) {
      converged = true;
      break;
    }
    if (iter == max_iters) break;

    double norm = 0.0;
    for (std::size_t r = 0; r < n_rows; ++r) {
      q[r] *= std::exp2(gain[r] - peak);
      norm += q[r];
    }
    for (std::size_t r = 0; r < n_rows; ++r) q[r] /= norm;
  }

  BaaResult result;
  result.input_dist = std::move(q);
  result.output_dist = std::move(out_dist);
  result.cap_lower = lower;
  result.cap_upper = std::max(best_upper, lower);
  result.iterations = iterations;
  result.epsilon = epsilon;
  result.converged = converged;
  return result;
}

}  // namespace prc::baa
