#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "prc/bitstring.hpp"
#include "prc/channel.hpp"
#include "prc/detail/flat_map.hpp"
#include "prc/detail/parallel.hpp"
#include "prc/poisson.hpp"

namespace prc::oracle {

struct SimConfig {
  std::uint64_t seed = 0;
  long samples_per_input = 1'000'000;
};

// Stream-splitting rule: substream k of a master seed is an mt19937_64
// seeded with mix64(master + (k+1) * 0x9e3779b97f4a7c15). Streams are
// assigned per input, never per thread, so results are reproducible for any
// worker count.
inline std::mt19937_64 make_stream(std::uint64_t master_seed, std::uint64_t stream) {
  return std::mt19937_64(
      prc::detail::mix64(master_seed + (stream + 1) * 0x9e3779b97f4a7c15ull));
}

// Uniform double in [0,1) from the top 53 bits; avoids the
// implementation-defined std::uniform_real_distribution.
inline double next_unit(std::mt19937_64& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

// Poisson draw by CDF inversion: smallest r with F(r) > u.
inline int sample_poisson(double lambda, std::mt19937_64& g) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("sample_poisson: bad lambda");
  if (lambda == 0.0) return 0;
  double term = std::exp(-lambda);
  if (term == 0.0)
    throw std::invalid_argument("sample_poisson: lambda too large for inversion");
  const double u = next_unit(g);
  double cum = term;
  int r = 0;
  while (u >= cum) {
    ++r;
    term *= lambda / r;
    cum += term;
    if (term == 0.0) break;  // beyond representable tail mass
  }
  return r;
}

inline RepetitionPattern sample_pattern(int block_len, double lambda,
                                        std::mt19937_64& g) {
  RepetitionPattern pattern;
  pattern.counts.resize(block_len);
  for (int i = 0; i < block_len; ++i) pattern.counts[i] = sample_poisson(lambda, g);
  return pattern;
}

// One channel use: each bit of x is independently repeated Poisson(lambda)
// times.
inline BitString simulate(const BitString& x, double lambda, std::mt19937_64& g) {
  if (x.size() < 1) throw std::invalid_argument("simulate: empty input");
  return apply_pattern(x, sample_pattern(static_cast<int>(x.size()), lambda, g));
}

// Ground-truth transition probability by brute force over every capped
// repetition pattern; deliberately shares no logic with the prefix dynamic
// program it checks.
inline double enumerate_transition(const BitString& x, const BitString& y,
                                   double lambda, int per_bit_cap) {
  if (per_bit_cap < 0) throw std::invalid_argument("enumerate_transition: negative cap");
  const int block = static_cast<int>(x.size());
  if (block < 1) throw std::invalid_argument("enumerate_transition: empty input");
  double n_patterns = std::pow(double(per_bit_cap) + 1.0, block);
  if (n_patterns > 1e7)
    throw std::invalid_argument("enumerate_transition: instance too large");

  const poisson::PoissonParams params(lambda);
  std::vector<double> pm(per_bit_cap + 1);
  for (int r = 0; r <= per_bit_cap; ++r) pm[r] = poisson::pmf(r, params);

  RepetitionPattern pattern;
  pattern.counts.assign(block, 0);
  double total = 0.0;
  for (;;) {
    if (apply_pattern(x, pattern) == y) {
      double p = 1.0;
      for (int r : pattern.counts) p *= pm[r];
      total += p;
    }
    int i = block - 1;
    while (i >= 0 && pattern.counts[i] == per_bit_cap) pattern.counts[i--] = 0;
    if (i < 0) break;
    ++pattern.counts[i];
  }
  return total;
}

// I(X;Y) = H(Y) - H(Y|X) straight from the definition, 0 log 0 = 0.
inline double mutual_information(const TransitionMatrix& m,
                                 const std::vector<double>& input_dist) {
  if (input_dist.size() != m.rows())
    throw std::invalid_argument("mutual_information: distribution size mismatch");
  double mass = 0.0;
  for (double w : input_dist) {
    if (!(w >= 0.0)) throw std::invalid_argument("mutual_information: negative weight");
    mass += w;
  }
  if (std::abs(mass - 1.0) > 1e-9)
    throw std::invalid_argument("mutual_information: distribution must sum to 1");

  std::vector<double> out(m.cols(), 0.0);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const double w = input_dist[r];
    if (w == 0.0) continue;
    m.for_each(r, [&](std::size_t c, double p) { out[c] += w * p; });
  }
  double info = 0.0;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const double w = input_dist[r];
    if (w == 0.0) continue;
    m.for_each(r, [&](std::size_t c, double p) {
      info += w * p * std::log2(p / out[c]);
    });
  }
  return info;
}

// Exhaustive capacity of a two-input channel over a uniform grid on
// P(X = x_1).
inline double grid_capacity(const TransitionMatrix& m, int grid_steps) {
  if (m.rows() != 2)
    throw std::invalid_argument("grid_capacity: exactly 2 inputs required");
  if (grid_steps < 1) throw std::invalid_argument("grid_capacity: grid_steps must be >= 1");
  double best = 0.0;
  std::vector<double> dist(2);
  for (int k = 0; k <= grid_steps; ++k) {
    dist[0] = static_cast<double>(k) / grid_steps;
    dist[1] = 1.0 - dist[0];
    best = std::max(best, mutual_information(m, dist));
  }
  return best;
}

struct McCheck {
  double max_entry_z = 0.0;        // worst |phat - p| / sigma over tested entries
  std::size_t entries_checked = 0;
  double max_ps_z = 0.0;           // worst acceptance-rate z-score over inputs
  bool ok(double z_threshold = 4.0) const {
    return max_entry_z <= z_threshold && max_ps_z <= z_threshold;
  }
};

// Empirically validates a conditioned matrix: per input, draws
// samples_per_input repetition patterns, rejects those violating the
// validity event, and compares renormalized output frequencies against the
// matrix entries. Entries with expected count below 10 are skipped.
inline McCheck validate_matrix_mc(const TransitionMatrix& m, const SimConfig& cfg) {
  if (!m.spec.conditioned)
    throw std::invalid_argument("validate_matrix_mc: conditioned matrix required");
  const std::size_t n_rows = m.rows();
  const long n = cfg.samples_per_input;
  const int block = m.spec.block_len;
  const int max_len = m.spec.max_output_len;
  const double p_s = m.row_mass;

  prc::detail::FlatMap64<std::uint32_t> col_of(2 * m.cols() + 2);
  for (std::size_t c = 0; c < m.cols(); ++c)
    col_of.insert(prc::detail::pack_output(m.outputs[c]), static_cast<std::uint32_t>(c));

  std::vector<double> row_z(n_rows, 0.0), row_ps_z(n_rows, 0.0);
  std::vector<std::size_t> row_checked(n_rows, 0);

  prc::detail::parallel_for(n_rows, 0, [&](std::size_t x) {
    auto rng = make_stream(cfg.seed, x);
    const BitString input = BitString::from_value(block, x);
    std::vector<long> counts(m.cols(), 0);
    long accepted = 0;
    for (long s = 0; s < n; ++s) {
      const auto pattern = sample_pattern(block, m.spec.lambda, rng);
      bool valid = true;
      int total = 0;
      for (int r : pattern.counts) {
        total += r;
        if (m.spec.per_bit_cap && r > *m.spec.per_bit_cap) valid = false;
      }
      if (total > max_len) valid = false;
      if (!valid) continue;
      ++accepted;
      const BitString y = apply_pattern(input, pattern);
      const std::uint32_t* col = col_of.find(prc::detail::pack_output(y));
      if (!col)
        throw std::logic_error("validate_matrix_mc: sampled output missing from matrix");
      ++counts[*col];
    }

    if (p_s > 0.0 && p_s < 1.0) {
      const double sigma = std::sqrt(p_s * (1.0 - p_s) / n);
      row_ps_z[x] = std::abs(double(accepted) / n - p_s) / sigma;
    }
    if (accepted == 0) return;
    double worst = 0.0;
    std::size_t checked = 0;
    m.for_each(x, [&](std::size_t c, double p) {
      if (p * accepted < 10.0 || p >= 1.0) return;
      const double sigma = std::sqrt(p * (1.0 - p) / accepted);
      worst = std::max(worst, std::abs(double(counts[c]) / accepted - p) / sigma);
      ++checked;
    });
    row_z[x] = worst;
    row_checked[x] = checked;
  });

  McCheck check;
  for (std::size_t x = 0; x < n_rows; ++x) {
    check.max_entry_z = std::max(check.max_entry_z, row_z[x]);
    check.max_ps_z = std::max(check.max_ps_z, row_ps_z[x]);
    check.entries_checked += row_checked[x];
  }
  return check;
}

}  // namespace prc::oracle
