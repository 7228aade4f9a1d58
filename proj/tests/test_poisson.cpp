#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "prc/poisson.hpp"

namespace ps = prc::poisson;
using ps::PoissonParams;

namespace {

// Independent oracle: Gamma(R+1, lambda)/R! via adaptive Simpson quadrature
// of the upper incomplete gamma integrand, all in long double.
long double upper_gamma_simpson(long double a, long double x, long double hi) {
  auto f = [a](long double t) { return powl(t, a - 1) * expl(-t); };
  const int n = 200000;  // even
  const long double h = (hi - x) / n;
  long double s = f(x) + f(hi);
  for (int i = 1; i < n; ++i) s += f(x + i * h) * ((i & 1) ? 4.0L : 2.0L);
  return s * h / 3.0L;
}

long double poisson_cdf_gamma_oracle(int R, long double lambda) {
  long double fact = 1.0L;
  for (int k = 2; k <= R; ++k) fact *= k;
  // integrate to a point where the integrand is negligible
  const long double hi = lambda + 60.0L * (R + 1) + 60.0L;
  return upper_gamma_simpson(R + 1, lambda, hi) / fact;
}

}  // namespace

TEST_CASE("pmf closed-form values") {
  CHECK(ps::pmf(0, PoissonParams(0.0)) == 1.0);
  CHECK(ps::pmf(5, PoissonParams(0.0)) == 0.0);
  CHECK_THAT(ps::pmf(0, PoissonParams(1.0)),
             Catch::Matchers::WithinAbs(0.36787944117144233, 1e-15));
  // frozen from an arbitrary-precision evaluation of e^-2.5 * 2.5^3 / 6
  CHECK_THAT(ps::pmf(3, PoissonParams(2.5)),
             Catch::Matchers::WithinAbs(0.213763017249736446, 1e-13));
  // long-double closed form agrees on moderate inputs
  const long double direct = expl(-2.5L) * 2.5L * 2.5L * 2.5L / 6.0L;
  CHECK_THAT(ps::pmf(3, PoissonParams(2.5)),
             Catch::Matchers::WithinAbs(static_cast<double>(direct), 1e-14));
  CHECK_THROWS_AS(ps::pmf(-1, PoissonParams(1.0)), std::invalid_argument);
  CHECK_THROWS_AS(PoissonParams(-0.5), std::invalid_argument);
}

TEST_CASE("cdf against the incomplete-gamma oracle") {
  CHECK(ps::cdf(0, PoissonParams(2.0)) == std::exp(-2.0));
  CHECK(ps::cdf(7, PoissonParams(0.0)) == 1.0);
  // frozen from Gamma(11, 3.5)/10! at 30-digit precision
  CHECK_THAT(ps::cdf(10, PoissonParams(3.5)),
             Catch::Matchers::WithinAbs(0.998980605562382995, 1e-13));
  CHECK_THAT(static_cast<double>(poisson_cdf_gamma_oracle(10, 3.5L)),
             Catch::Matchers::WithinAbs(ps::cdf(10, PoissonParams(3.5)), 1e-12));
  CHECK_THAT(static_cast<double>(poisson_cdf_gamma_oracle(4, 1.25L)),
             Catch::Matchers::WithinAbs(ps::cdf(4, PoissonParams(1.25)), 1e-12));
}

TEST_CASE("cdf equals the pmf running sum and is monotone") {
  for (double lambda : {0.1, 0.7, 3.0, 25.0, 80.0}) {
    const PoissonParams params(lambda);
    double running = 0.0;
    double prev = 0.0;
    for (int R = 0; R <= 200; ++R) {
      running += ps::pmf(R, params);
      const double c = ps::cdf(R, params);
      REQUIRE_THAT(c, Catch::Matchers::WithinAbs(std::min(running, 1.0), 1e-12));
      REQUIRE(c >= prev - 1e-15);
      REQUIRE(c <= 1.0);
      prev = c;
    }
    REQUIRE_THAT(prev, Catch::Matchers::WithinAbs(1.0, 1e-9));
  }
}

TEST_CASE("entropy by direct reference summation") {
  CHECK(ps::entropy(PoissonParams(0.0)) == 0.0);

  // 50-term long-double reference sum for lambda = 1
  long double ref = 0.0L;
  long double term = expl(-1.0L);
  for (int r = 0; r < 50; ++r) {
    ref -= term * logl(term) / logl(2.0L);
    term /= (r + 1);
  }
  CHECK_THAT(ps::entropy(PoissonParams(1.0)),
             Catch::Matchers::WithinAbs(static_cast<double>(ref), 1e-9));
  // same value frozen from a 30-digit evaluation
  CHECK_THAT(ps::entropy(PoissonParams(1.0)),
             Catch::Matchers::WithinAbs(1.88248943204552943, 1e-9));
  CHECK_THAT(ps::entropy(PoissonParams(2.0)),
             Catch::Matchers::WithinAbs(2.45962573569978016, 1e-9));
}

TEST_CASE("entropy stays below the Adell bound") {
  for (double lambda : {0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 50.0}) {
    const PoissonParams params(lambda);
    REQUIRE(ps::entropy(params, 1e-12) < ps::entropy_upper_adell(params));
  }
}

TEST_CASE("Adell bound closed form") {
  CHECK_THAT(ps::entropy_upper_adell(PoissonParams(1.0)),
             Catch::Matchers::WithinAbs(2.10483419389060909, 1e-12));
  CHECK_THAT(ps::entropy_upper_adell(PoissonParams(0.5)),
             Catch::Matchers::WithinAbs(1.65829179584886507, 1e-12));
  CHECK_THROWS_AS(ps::entropy_upper_adell(PoissonParams(0.0)), std::invalid_argument);
}

TEST_CASE("binary entropy") {
  CHECK(ps::binary_entropy(0.5) == 1.0);
  CHECK(ps::binary_entropy(0.0) == 0.0);
  CHECK(ps::binary_entropy(1.0) == 0.0);
  CHECK_THAT(ps::binary_entropy(0.11),
             Catch::Matchers::WithinAbs(0.499915958164527996, 1e-12));
  for (double p : {0.03, 0.2, 0.41, 0.77, 0.999}) {
    REQUIRE(ps::binary_entropy(p) == ps::binary_entropy(1.0 - p));
  }
  CHECK_THROWS_AS(ps::binary_entropy(-0.1), std::invalid_argument);
  CHECK_THROWS_AS(ps::binary_entropy(1.1), std::invalid_argument);
}

TEST_CASE("truncated sum distribution") {
  SECTION("single variable reduces to the cdf") {
    for (double lambda : {0.3, 1.0, 4.0}) {
      const auto dist =
          ps::truncated_sum_distribution(1, PoissonParams(lambda), std::nullopt, 9);
      REQUIRE_THAT(dist.total_mass,
                   Catch::Matchers::WithinAbs(ps::cdf(9, PoissonParams(lambda)), 1e-12));
      for (int r = 0; r <= 9; ++r)
        REQUIRE_THAT(dist.probs[r],
                     Catch::Matchers::WithinAbs(ps::pmf(r, PoissonParams(lambda)), 1e-15));
    }
  }

  SECTION("per-bit cap zero is a point mass at zero") {
    const auto dist = ps::truncated_sum_distribution(4, PoissonParams(0.9), 0, 6);
    REQUIRE_THAT(dist.total_mass,
                 Catch::Matchers::WithinAbs(std::exp(-4 * 0.9), 1e-12));
    REQUIRE_THAT(dist.probs[0], Catch::Matchers::WithinAbs(dist.total_mass, 0.0));
    for (int r = 1; r <= 6; ++r) REQUIRE(dist.probs[r] == 0.0);
  }

  SECTION("exhaustive pattern enumeration oracle, L=3 cap=2 total=4") {
    const double lambda = 0.7;
    const PoissonParams params(lambda);
    const auto dist = ps::truncated_sum_distribution(3, params, 2, 4);
    std::vector<double> expect(5, 0.0);
    double mass = 0.0;
    for (int r1 = 0; r1 <= 2; ++r1)
      for (int r2 = 0; r2 <= 2; ++r2)
        for (int r3 = 0; r3 <= 2; ++r3) {
          const int total = r1 + r2 + r3;
          if (total > 4) continue;
          const double p =
              ps::pmf(r1, params) * ps::pmf(r2, params) * ps::pmf(r3, params);
          expect[total] += p;
          mass += p;
        }
    REQUIRE_THAT(dist.total_mass, Catch::Matchers::WithinAbs(mass, 1e-14));
    for (int s = 0; s <= 4; ++s)
      REQUIRE_THAT(dist.probs[s], Catch::Matchers::WithinAbs(expect[s], 1e-14));
  }

  SECTION("uncapped sum of L Poissons matches Poisson(L*lambda)") {
    for (double lambda : {0.25, 0.8}) {
      for (int block : {2, 5}) {
        const auto dist = ps::truncated_sum_distribution(block, PoissonParams(lambda),
                                                         std::nullopt, 16);
        REQUIRE_THAT(dist.total_mass,
                     Catch::Matchers::WithinAbs(
                         ps::cdf(16, PoissonParams(block * lambda)), 1e-10));
      }
    }
  }

  SECTION("mass and entries stay inside [0, 1]") {
    const auto dist = ps::truncated_sum_distribution(6, PoissonParams(1.3), 3, 10);
    REQUIRE(dist.total_mass <= 1.0 + 1e-12);
    double sum = 0.0;
    for (double p : dist.probs) {
      REQUIRE(p >= 0.0);
      REQUIRE(p <= 1.0 + 1e-12);
      sum += p;
    }
    REQUIRE_THAT(sum, Catch::Matchers::WithinAbs(dist.total_mass, 1e-12));
  }
}
