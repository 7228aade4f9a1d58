#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "prc/bitstring.hpp"
#include "prc/detail/flat_map.hpp"
#include "prc/detail/parallel.hpp"
#include "prc/poisson.hpp"

namespace prc {

// Outputs are packed as (length << 57) | value during matrix construction,
// which limits the supported output length.
inline constexpr int kMaxOutputLen = 57;

// Identifies one truncated block channel: block length L, total output cap
// R_m, optional per-bit repetition cap, and whether transition rows are
// normalized by the probability of the validity event.
struct ChannelSpec {
  double lambda = 0.0;
  int block_len = 1;             // L
  int max_output_len = 0;        // R_m
  std::optional<int> per_bit_cap;  // Rbar_m; no per-bit restriction if absent
  bool conditioned = true;

  void validate() const {
    if (!(lambda >= 0.0) || !std::isfinite(lambda))
      throw std::invalid_argument("ChannelSpec: lambda must be finite and >= 0");
    if (block_len < 1 || block_len > 30)
      throw std::invalid_argument("ChannelSpec: block_len must be in [1, 30]");
    if (max_output_len < 0)
      throw std::invalid_argument("ChannelSpec: max_output_len must be >= 0");
    if (max_output_len > kMaxOutputLen)
      throw std::invalid_argument("ChannelSpec: max_output_len exceeds supported limit of 57");
    if (per_bit_cap && *per_bit_cap < 0)
      throw std::invalid_argument("ChannelSpec: per_bit_cap must be >= 0");
  }

  // Probability of the validity event: every per-bit count within the cap
  // (when set) and the total output length at most max_output_len.
  double validity_probability() const {
    const poisson::PoissonParams params(lambda);
    if (per_bit_cap)
      return poisson::truncated_sum_distribution(block_len, params, per_bit_cap,
                                                 max_output_len)
          .total_mass;
    return poisson::cdf(max_output_len,
                        poisson::PoissonParams(block_len * lambda));
  }
};

class MemoryBudgetError : public std::runtime_error {
 public:
  MemoryBudgetError(std::size_t required, std::size_t budget)
      : std::runtime_error("matrix needs " + std::to_string(required) +
                           " bytes, budget is " + std::to_string(budget)),
        required_bytes(required),
        budget_bytes(budget) {}

  std::size_t required_bytes;
  std::size_t budget_bytes;
};

struct BuildOptions {
  std::size_t memory_budget = std::size_t(8) << 30;  // 8 GiB
  int jobs = 0;                                      // 0 = hardware threads
};

// Row-stochastic (after conditioning) transition matrix over 2^L inputs and
// the enumerated output alphabet. Rows are indexed by the numeric value of
// the L-bit input, columns follow the canonical (length, value) output
// order. Immutable once built; safe to share across threads.
struct TransitionMatrix {
  ChannelSpec spec;
  std::vector<BitString> outputs;
  double row_mass = 1.0;  // common row sum before conditioning

  bool dense = true;
  std::vector<double> dense_rows;  // rows() * cols() when dense
  std::vector<std::vector<std::pair<std::uint32_t, double>>> sparse_rows;

  std::size_t rows() const { return std::size_t(1) << spec.block_len; }
  std::size_t cols() const { return outputs.size(); }

  double at(std::size_t r, std::size_t c) const {
    if (dense) return dense_rows[r * cols() + c];
    const auto& row = sparse_rows[r];
    auto it = std::lower_bound(
        row.begin(), row.end(), c,
        [](const auto& e, std::size_t col) { return e.first < col; });
    return (it != row.end() && it->first == c) ? it->second : 0.0;
  }

  // Calls f(col, p) for every nonzero entry of row r, in column order.
  template <class F>
  void for_each(std::size_t r, F&& f) const {
    if (dense) {
      const double* p = dense_rows.data() + r * cols();
      for (std::size_t c = 0, n = cols(); c < n; ++c)
        if (p[c] != 0.0) f(c, p[c]);
    } else {
      for (const auto& [c, p] : sparse_rows[r]) f(c, p);
    }
  }

  std::vector<double> row_sums() const {
    std::vector<double> sums(rows(), 0.0);
    for (std::size_t r = 0; r < rows(); ++r)
      for_each(r, [&](std::size_t, double p) { sums[r] += p; });
    return sums;
  }

  std::size_t nonzeros() const {
    std::size_t n = 0;
    for (std::size_t r = 0; r < rows(); ++r)
      for_each(r, [&](std::size_t, double) { ++n; });
    return n;
  }
};

// P(Y = y | X = x), unconditioned, summed over all repetition patterns that
// produce y (respecting the per-bit cap when given). Prefix dynamic program:
// dp[i][j] = probability that the first i input bits emit exactly y[0..j).
inline double transition_prob(const BitString& x, const BitString& y,
                              double lambda,
                              std::optional<int> per_bit_cap = std::nullopt) {
  if (x.size() < 1) throw std::invalid_argument("transition_prob: empty input");
  if (per_bit_cap && *per_bit_cap < 0)
    throw std::invalid_argument("transition_prob: negative per_bit_cap");
  const int block = static_cast<int>(x.size());
  const int m = static_cast<int>(y.size());
  const int cap = per_bit_cap ? std::min(*per_bit_cap, m) : m;

  const poisson::PoissonParams params(lambda);
  std::vector<double> pm(cap + 1);
  for (int r = 0; r <= cap; ++r) pm[r] = poisson::pmf(r, params);

  std::vector<double> prev(m + 1, 0.0), cur(m + 1);
  prev[0] = 1.0;
  for (int i = 0; i < block; ++i) {
    const bool xb = x.bit(i);
    for (int j = 0; j <= m; ++j) {
      double s = pm[0] * prev[j];
      for (int r = 1; r <= cap && r <= j; ++r) {
        if (y.bit(j - r) != xb) break;  // run of xb ending at j cannot extend
        s += pm[r] * prev[j - r];
      }
      cur[j] = s;
    }
    prev.swap(cur);
  }
  return prev[m];
}

namespace detail {

inline constexpr std::uint64_t kValueMask = (std::uint64_t(1) << 57) - 1;

inline std::uint64_t pack_output(std::uint32_t len, std::uint64_t value) {
  return (std::uint64_t(len) << 57) | value;
}

inline std::uint64_t pack_output(const BitString& s) {
  return pack_output(s.size(), s.value());
}

}  // namespace detail

// Every output string reachable from at least one block_len-bit input under
// the cap constraints, in canonical (length, value) order. A string with
// runs of lengths a_1..a_k is reachable iff sum_j ceil(a_j / cap) <= L
// (without a per-bit cap, iff k <= L), since each output run must be
// produced by consecutive equal input bits and deleted bits may separate
// anything. Reachability is structural: it ignores lambda.
inline std::vector<BitString> enumerate_outputs(const ChannelSpec& spec) {
  spec.validate();
  const int block = spec.block_len;
  const int max_len = spec.max_output_len;
  const bool capped = spec.per_bit_cap.has_value();
  const int cap = capped ? *spec.per_bit_cap : max_len;

  std::vector<BitString> out;
  out.emplace_back();  // empty string: the all-deletions pattern
  if (max_len == 0 || (capped && cap == 0)) return out;

  BitString current;
  auto dfs = [&](auto&& self, bool next_bit, int cost_used) -> void {
    const std::uint32_t base_len = current.size();
    for (int a = 1; base_len + a <= static_cast<std::uint32_t>(max_len); ++a) {
      const int run_cost = capped ? (a + cap - 1) / cap : 1;
      if (cost_used + run_cost > block) break;
      current.append_run(next_bit, 1);  // grow the run one bit at a time
      out.push_back(current);
      self(self, !next_bit, cost_used + run_cost);
    }
    current.truncate(base_len);
  };
  dfs(dfs, false, 0);
  dfs(dfs, true, 0);

  std::sort(out.begin(), out.end());
  return out;
}

// Builds the full transition matrix of the truncated block channel. Rows are
// filled independently (and in parallel) by a prefix dynamic program over
// output strings; all-zero columns are pruned afterwards; rows are stored
// dense unless the nonzero fraction falls below 10%. When spec.conditioned,
// every entry is divided by the validity probability (P_s with a per-bit
// cap, F(R_m; L*lambda) without), which is the common row sum.
inline TransitionMatrix build_matrix(const ChannelSpec& spec,
                                     const BuildOptions& opts = {}) {
  spec.validate();
  const int block = spec.block_len;
  const int max_len = spec.max_output_len;

  std::vector<BitString> outputs = enumerate_outputs(spec);
  const std::size_t n_rows = std::size_t(1) << block;
  std::size_t n_cols = outputs.size();

  const std::size_t required = n_rows * n_cols * sizeof(double);
  if (required > opts.memory_budget)
    throw MemoryBudgetError(required, opts.memory_budget);

  const double row_mass = spec.validity_probability();
  if (spec.conditioned && row_mass < 1e-290)
    throw std::runtime_error(
        "build_matrix: validity probability underflows, cannot condition");

  const poisson::PoissonParams params(spec.lambda);
  const int cap =
      spec.per_bit_cap ? std::min(*spec.per_bit_cap, max_len) : max_len;
  std::vector<double> pm(cap + 1);
  for (int r = 0; r <= cap; ++r) pm[r] = poisson::pmf(r, params);

  prc::detail::FlatMap64<std::uint32_t> col_of(2 * n_cols + 2);
  for (std::size_t c = 0; c < n_cols; ++c)
    col_of.insert(detail::pack_output(outputs[c]), static_cast<std::uint32_t>(c));

  std::vector<std::vector<std::pair<std::uint32_t, double>>> rows(n_rows);

  // Every DP state is an output prefix reachable from the row's input, hence
  // a member of the enumerated output set; with a fixed map capacity of
  // 2*(n_cols+1) slots no rehash can occur and the accumulation order per
  // row is independent of scheduling and thread count.
  const std::size_t map_capacity = 2 * n_cols + 2;
  const int jobs = prc::detail::resolve_jobs(opts.jobs);
  const std::size_t n_chunks =
      std::min(n_rows, static_cast<std::size_t>(jobs) * 8);
  const std::size_t chunk_size = (n_rows + n_chunks - 1) / n_chunks;

  prc::detail::parallel_for(n_chunks, opts.jobs, [&](std::size_t chunk) {
    prc::detail::FlatMap64<double> prev(map_capacity), cur(map_capacity);
    const std::size_t row_begin = chunk * chunk_size;
    const std::size_t row_end = std::min(n_rows, row_begin + chunk_size);
    for (std::size_t x = row_begin; x < row_end; ++x) {
      prev.clear();
      prev.add(detail::pack_output(0, 0), 1.0);
      for (int i = 0; i < block; ++i) {
        const bool xb = (x >> (block - 1 - i)) & 1u;
        cur.clear();
        prev.for_each([&](std::uint64_t key, double p) {
          const std::uint32_t len = static_cast<std::uint32_t>(key >> 57);
          const std::uint64_t val = key & detail::kValueMask;
          for (int r = 0; r <= cap; ++r) {
            if (len + r > static_cast<std::uint32_t>(max_len)) break;
            const double w = p * pm[r];
            if (w == 0.0) continue;
            const std::uint64_t nval =
                (val << r) | (xb ? (std::uint64_t(1) << r) - 1 : 0);
            cur.add(detail::pack_output(len + r, nval), w);
          }
        });
        prev.swap(cur);
      }
      auto& row = rows[x];
      row.reserve(prev.size());
      prev.for_each([&](std::uint64_t key, double p) {
        if (spec.conditioned) p /= row_mass;
        if (p < poisson::kProbFloor) return;  // store exact zero (drop)
        const std::uint32_t* col = col_of.find(key);
        row.emplace_back(*col, p);
      });
      std::sort(row.begin(), row.end());
    }
  });

  // Prune columns that ended up all-zero (unreachable at this lambda).
  std::vector<std::uint32_t> remap(n_cols, UINT32_MAX);
  {
    std::vector<char> used(n_cols, 0);
    for (const auto& row : rows)
      for (const auto& [c, p] : row) used[c] = 1;
    std::uint32_t next = 0;
    std::vector<BitString> kept;
    for (std::size_t c = 0; c < n_cols; ++c) {
      if (!used[c]) continue;
      remap[c] = next++;
      kept.push_back(std::move(outputs[c]));
    }
    if (kept.size() != n_cols) {
      outputs = std::move(kept);
      for (auto& row : rows)
        for (auto& e : row) e.first = remap[e.first];
      n_cols = outputs.size();
    }
  }

  TransitionMatrix m;
  m.spec = spec;
  m.outputs = std::move(outputs);
  m.row_mass = row_mass;

  std::size_t nnz = 0;
  for (const auto& row : rows) nnz += row.size();
  m.dense = n_cols == 0 || nnz * 10 >= n_rows * n_cols;

  if (m.dense) {
    m.dense_rows.assign(n_rows * n_cols, 0.0);
    for (std::size_t r = 0; r < n_rows; ++r) {
      for (const auto& [c, p] : rows[r]) m.dense_rows[r * n_cols + c] = p;
      rows[r].clear();
      rows[r].shrink_to_fit();
    }
  } else {
    m.sparse_rows = std::move(rows);
  }
  return m;
}

}  // namespace prc
