#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <vector>

namespace prc::poisson {

// Probabilities below this are stored as exact zero; subnormal leftovers
// would otherwise poison the log-domain arithmetic downstream.
inline constexpr double kProbFloor = 1e-300;

struct PoissonParams {
  double lambda = 0.0;

  explicit PoissonParams(double l) : lambda(l) {
    if (!std::isfinite(l) || l < 0.0)
      throw std::invalid_argument("PoissonParams: lambda must be finite and >= 0");
  }
};

// P(Z = r) for Z ~ Poisson(lambda), evaluated in log space so large
// r*log(lambda) cannot overflow the intermediate products.
inline double pmf(int r, const PoissonParams& params) {
  if (r < 0) throw std::invalid_argument("poisson::pmf: r must be >= 0");
  const double lambda = params.lambda;
  if (lambda == 0.0) return r == 0 ? 1.0 : 0.0;
  const double logp = -lambda + r * std::log(lambda) - std::lgamma(r + 1.0);
  const double p = std::exp(logp);
  return p < kProbFloor ? 0.0 : p;
}

// F(R; lambda) = sum_{k=0}^{R} pmf(k), by the forward term recurrence
// term_{k+1} = term_k * lambda/(k+1). Equals Gamma(R+1, lambda)/R!.
inline double cdf(int R, const PoissonParams& params) {
  if (R < 0) throw std::invalid_argument("poisson::cdf: R must be >= 0");
  const double lambda = params.lambda;
  if (lambda == 0.0) return 1.0;
  double term = std::exp(-lambda);
  double sum;
  if (term > 0.0) {
    sum = term;
    for (int k = 1; k <= R; ++k) {
      term *= lambda / k;
      sum += term;
    }
  } else {
    // exp(-lambda) underflowed (lambda beyond ~708): sum log-space terms.
    sum = 0.0;
    for (int k = 0; k <= R; ++k) sum += pmf(k, params);
  }
  return sum < 1.0 ? sum : 1.0;
}

// -p*log2(p) - (1-p)*log2(1-p), with 0 log 0 = 0.
inline double binary_entropy(double p) {
  if (!(p >= 0.0 && p <= 1.0))
    throw std::invalid_argument("binary_entropy: p must be in [0, 1]");
  double h = 0.0;
  if (p > 0.0) h -= p * std::log2(p);
  if (p < 1.0) h -= (1.0 - p) * std::log2(1.0 - p);
  return h;
}

// Entropy of Poisson(lambda) in bits, by direct summation of -p log2 p.
//
// The sum stops at the smallest R with 1 - cdf(R) < tail_tol, extended so
// that R >= 2*lambda, which makes the term ratio q = lambda/(R+2) <= 1/2.
// Past R the terms satisfy p_{R+k} <= eps * q^{k-1} with eps = 1 - cdf(R),
// and since -p log2 p is increasing for p < 1/e the omitted tail is at most
//
//   T = eps*(-log2 eps)/(1-q) + eps*(-log2 q)*q/(1-q)^2,
//
// of order tail_tol * log2(1/tail_tol). Half of T is added back, so the
// returned value is within T/2 of the exact entropy.
inline double entropy(const PoissonParams& params, double tail_tol = 1e-12) {
  if (!(tail_tol > 0.0)) throw std::invalid_argument("poisson::entropy: tail_tol must be > 0");
  const double lambda = params.lambda;
  if (lambda == 0.0) return 0.0;

  double h = 0.0;
  double cum = 0.0;
  int r = 0;

  const double seed = std::exp(-lambda);
  if (seed > 0.0) {
    double term = seed;
    for (r = 0;; ++r) {
      if (term > 0.0) {
        h -= term * std::log2(term);
        cum += term;
      }
      if (r >= 2.0 * lambda && 1.0 - cum < tail_tol) break;
      if (term == 0.0 && r >= 2.0 * lambda) break;  // no mass left to collect
      term = term * lambda / (r + 1);
    }
  } else {
    // exp(-lambda) underflowed: sum a window of log-space terms instead.
    const double sigma = std::sqrt(lambda);
    const int lo = std::max(0, static_cast<int>(lambda - 50.0 * sigma));
    for (r = lo;; ++r) {
      const double p = pmf(r, params);
      if (p > 0.0) {
        h -= p * std::log2(p);
        cum += p;
      }
      if (r >= 2.0 * lambda && 1.0 - cum < tail_tol) break;
      if (r > lambda + 60.0 * sigma && p == 0.0) break;
    }
  }

  const double eps = std::max(1.0 - cum, 0.0);
  if (eps > 0.0) {
    const double q = lambda / (r + 2);
    const double tail_bound =
        eps * (-std::log2(eps)) / (1.0 - q) +
        eps * (-std::log2(q)) * q / ((1.0 - q) * (1.0 - q));
    h += 0.5 * tail_bound;
  }
  return h;
}

// Gaussian-style entropy upper bound (1/2) log2(2 pi e (lambda + 1/12)),
// valid for lambda > 0.
inline double entropy_upper_adell(const PoissonParams& params) {
  if (params.lambda <= 0.0)
    throw std::invalid_argument("entropy_upper_adell: requires lambda > 0");
  return 0.5 * std::log2(2.0 * std::numbers::pi * std::numbers::e *
                         (params.lambda + 1.0 / 12.0));
}

// Distribution of R = sum of block_len i.i.d. Poisson(lambda) counts, with
// each count optionally capped at per_bit_cap and totals truncated to
// total_cap. probs[s] = P(R = s and every count within its cap).
struct TruncatedSumDistribution {
  std::vector<double> probs;  // indexed by total count 0..total_cap
  double total_mass = 0.0;    // sum of probs; P_s when per_bit_cap is set
};

inline TruncatedSumDistribution truncated_sum_distribution(
    int block_len, const PoissonParams& params,
    std::optional<int> per_bit_cap, int total_cap) {
  if (block_len < 1)
    throw std::invalid_argument("truncated_sum_distribution: block_len must be >= 1");
  if (total_cap < 0)
    throw std::invalid_argument("truncated_sum_distribution: total_cap must be >= 0");
  if (per_bit_cap && *per_bit_cap < 0)
    throw std::invalid_argument("truncated_sum_distribution: per_bit_cap must be >= 0");

  const int cap = per_bit_cap ? std::min(*per_bit_cap, total_cap) : total_cap;
  std::vector<double> base(cap + 1);
  for (int r = 0; r <= cap; ++r) base[r] = pmf(r, params);

  std::vector<double> acc(total_cap + 1, 0.0);
  std::copy(base.begin(), base.end(), acc.begin());
  std::vector<double> next(total_cap + 1);
  for (int b = 1; b < block_len; ++b) {
    std::fill(next.begin(), next.end(), 0.0);
    for (int s = 0; s <= total_cap; ++s) {
      double v = 0.0;
      for (int r = 0; r <= cap && r <= s; ++r) v += base[r] * acc[s - r];
      next[s] = v;
    }
    acc.swap(next);
  }

  TruncatedSumDistribution dist;
  dist.probs = std::move(acc);
  double mass = 0.0;
  for (double p : dist.probs) mass += p;
  dist.total_mass = std::min(mass, 1.0);
  return dist;
}

}  // namespace prc::poisson
