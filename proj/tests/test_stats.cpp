#include <doctest.h>

#include <cmath>
#include <vector>

#include "cfpp/errors.hpp"
#include "cfpp/random.hpp"
#include "cfpp/stats.hpp"

using namespace cfpp;

TEST_CASE("mean, sample sd, mean abs dev on a small series") {
  const std::vector<double> v{1, 2, 3, 4, 5};
  CHECK(stats::mean(v) == doctest::Approx(3.0));
  CHECK(stats::sample_sd(v) == doctest::Approx(std::sqrt(2.5)));
  CHECK(stats::mean_abs_dev(v) == doctest::Approx(1.2));
}

TEST_CASE("regularized incomplete beta endpoints and symmetry") {
  CHECK(stats::regularized_incomplete_beta(2.0, 3.0, 0.0) == 0.0);
  CHECK(stats::regularized_incomplete_beta(2.0, 3.0, 1.0) == 1.0);
  Rng rng(11);
  for (int i = 0; i < 50; ++i) {
    const double a = rng.uniform(0.5, 20.0);
    const double b = rng.uniform(0.5, 20.0);
    const double x = rng.uniform(0.0, 1.0);
    const double lhs = stats::regularized_incomplete_beta(a, b, x);
    const double rhs = 1.0 - stats::regularized_incomplete_beta(b, a, 1.0 - x);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    CHECK(lhs >= 0.0);
    CHECK(lhs <= 1.0);
  }
}

TEST_CASE("two-tailed t p-values against high-precision references") {
  // References computed with 30-digit arithmetic.
  CHECK(stats::student_t_two_tailed_p(4.242640687119285, 4) ==
        doctest::Approx(0.013235599563682690).epsilon(1e-10));
  CHECK(stats::student_t_two_tailed_p(2.0, 10) ==
        doctest::Approx(0.073388034770740366).epsilon(1e-10));
  CHECK(stats::student_t_two_tailed_p(1.5, 30) ==
        doctest::Approx(0.144065929128646).epsilon(1e-10));
  CHECK(stats::student_t_two_tailed_p(0.0, 7) == doctest::Approx(1.0));
}

TEST_CASE("t p-value is symmetric in the sign of t") {
  Rng rng(5);
  for (int i = 0; i < 20; ++i) {
    const double t = rng.uniform(-5.0, 5.0);
    const int df = 2 + static_cast<int>(rng.index(40));
    CHECK(stats::student_t_two_tailed_p(t, df) ==
          doctest::Approx(stats::student_t_two_tailed_p(-t, df)).epsilon(1e-13));
  }
}

TEST_CASE("domain errors") {
  CHECK_THROWS_AS(stats::sample_sd(std::vector<double>{1.0}), DomainError);
  CHECK_THROWS_AS(stats::regularized_incomplete_beta(1.0, 1.0, 1.5), DomainError);
}
