#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "mdf/normal.hpp"
#include "mdf/random.hpp"

using namespace mdf;

TEST_CASE("quantile matches reference values") {
  // Reference values from an independent high-precision implementation.
  struct Case {
    double p;
    double z;
  };
  const Case cases[] = {
      {1e-300, -37.0470962993612},    {1e-20, -9.262340089798409},
      {1e-10, -6.361340902404056},    {1e-5, -4.264890793922825},
      {0.001, -3.090232306167813},    {0.025, -1.9599639845400545},
      {0.05, -1.6448536269514729},    {0.3, -0.5244005127080409},
      {0.5, 0.0},                     {0.7, 0.5244005127080407},
      {0.975, 1.959963984540054},     {0.999999, 4.753424308817087},
  };
  for (const Case& c : cases) {
    CAPTURE(c.p);
    CHECK(normal_quantile(c.p) == doctest::Approx(c.z).epsilon(1e-14));
  }
}

TEST_CASE("quantile inverts the cdf to 1e-12") {
  Stream rng(1, 0);
  for (int i = 0; i < 10000; ++i) {
    const double p = rng.uniform();
    CHECK(std::fabs(normal_cdf(normal_quantile(p)) - p) <= 1e-12);
  }
  // Upper tail goes through the survival function; cdf(x) rounds to 1 there.
  for (double x = -8.0; x <= 8.0; x += 0.01) {
    const double back = x <= 0.0 ? normal_quantile(normal_cdf(x)) : -normal_quantile(normal_sf(x));
    CHECK(std::fabs(back - x) <= 1e-9 * std::max(1.0, std::fabs(x)));
  }
}

TEST_CASE("boundaries and domain") {
  CHECK(std::isinf(normal_quantile(0.0)));
  CHECK(normal_quantile(0.0) < 0);
  CHECK(std::isinf(normal_quantile(1.0)));
  CHECK_THROWS_AS(normal_quantile(-0.1), std::domain_error);
  CHECK_THROWS_AS(normal_quantile(1.5), std::domain_error);
  CHECK(normal_cdf(0.0) == 0.5);
  CHECK(normal_sf(37.0) == doctest::Approx(5.725571222524e-300).epsilon(1e-10));
  CHECK(normal_sf(3.0) == doctest::Approx(1.0 - normal_cdf(3.0)).epsilon(1e-12));
  CHECK(normal_pdf(0.0) == doctest::Approx(0.3989422804014327).epsilon(1e-15));
}

TEST_CASE("streams are keyed by seed and index") {
  Stream a(42, 7);
  Stream b(42, 7);
  Stream c(42, 8);
  Stream d(43, 7);
  const auto x = a.next_u64();
  CHECK(x == b.next_u64());
  CHECK(x != c.next_u64());
  CHECK(x != d.next_u64());
  Stream u(3, 3);
  for (int i = 0; i < 1000; ++i) {
    const double v = u.uniform();
    CHECK(v > 0.0);
    CHECK(v < 1.0);
  }
}
