#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "mdf/errmetrics.hpp"
#include "mdf/random.hpp"

using namespace mdf;

namespace {

ProcedureOutcome rejecting(std::vector<std::string> ids) {
  ProcedureOutcome o;
  o.J = ids.size();
  o.rejected = std::move(ids);
  return o;
}

}  // namespace

TEST_CASE("counts") {
  const GroundTruth truth({"1", "2", "3"}, {"4", "5"});
  const ErrorCounts none = count_errors(rejecting({}), truth);
  CHECK(none.s0 == 0);
  CHECK(none.s == 0);
  CHECK(none.fdp == 0.0);
  CHECK(none.missed_prop == 1.0);

  const ErrorCounts c = count_errors(rejecting({"3", "4"}), truth);
  CHECK(c.s0 == 1);
  CHECK(c.s == 2);
  CHECK(c.fdp == 0.5);
  CHECK(c.missed_prop == 0.5);

  const GroundTruth all_null({"a", "b"}, {});
  const ErrorCounts n = count_errors(rejecting({"b"}), all_null);
  CHECK(n.fdp == 1.0);
  CHECK(n.missed_prop == 0.0);

  CHECK_THROWS_AS(count_errors(rejecting({"zz"}), truth), std::invalid_argument);
  CHECK_THROWS_AS(GroundTruth({"a", "a"}, {}), std::invalid_argument);
  CHECK_THROWS_AS(GroundTruth({"a"}, {"a"}), std::invalid_argument);
  CHECK(truth.is_null("2"));
  CHECK_FALSE(truth.is_null("5"));
  CHECK(truth.contains("5"));
  CHECK_FALSE(truth.contains("6"));
}

TEST_CASE("index form matches the id form") {
  const std::vector<bool> is_null = {true, true, true, false, false};
  const std::vector<std::size_t> rejected = {2, 3};
  const ErrorCounts c = count_errors(rejected, is_null);
  CHECK(c.s0 == 1);
  CHECK(c.s == 2);
  CHECK(c.fdp == 0.5);
  CHECK(c.missed_prop == 0.5);
  CHECK_THROWS_AS(count_errors(std::vector<std::size_t>{7}, is_null), std::invalid_argument);
}

TEST_CASE("rate estimates") {
  const std::vector<ErrorCounts> one = {{0, 1, 0.0, 0.5}};
  CHECK(estimate_rates(one).fwer_hat == 0.0);

  const std::vector<ErrorCounts> two = {{0, 0, 0.0, 1.0}, {1, 2, 0.5, 0.0}};
  const RateEstimates r = estimate_rates(two);
  CHECK(r.fdr_hat == 0.25);
  CHECK(r.fwer_hat == 0.5);
  CHECK(r.mdr_hat == 0.5);
  CHECK(r.replicates == 2);
  // Plug-in SD / sqrt(n): fdp values {0, 0.5} have SD 0.25.
  CHECK(r.se_fdr == doctest::Approx(0.25 / std::sqrt(2.0)));

  const std::vector<ErrorCounts> same(1000, ErrorCounts{1, 3, 1.0 / 3.0, 0.1});
  const RateEstimates s = estimate_rates(same);
  CHECK(s.se_fwer == 0.0);
  CHECK(s.se_fdr == 0.0);
  CHECK(s.se_mdr == 0.0);

  CHECK_THROWS_AS(estimate_rates(std::vector<ErrorCounts>{}), std::invalid_argument);
}

TEST_CASE("count properties on random outcomes") {
  Stream rng(8, 8);
  std::vector<ErrorCounts> counts;
  std::vector<ErrorCounts> null_counts;
  for (int rep = 0; rep < 2000; ++rep) {
    const std::size_t m = 1 + rng.next_u64() % 20;
    std::vector<bool> is_null(m);
    std::vector<bool> all_null(m, true);
    for (std::size_t i = 0; i < m; ++i) is_null[i] = rng.uniform() < 0.6;
    std::vector<std::size_t> rejected;
    for (std::size_t i = 0; i < m; ++i) {
      if (rng.uniform() < 0.3) rejected.push_back(i);
    }
    const ErrorCounts c = count_errors(rejected, is_null);
    CHECK(c.s0 <= c.s);
    CHECK(c.fdp >= 0.0);
    CHECK(c.fdp <= 1.0);
    counts.push_back(c);
    const ErrorCounts n = count_errors(rejected, all_null);
    CHECK((n.fdp == 0.0 || n.fdp == 1.0));
    null_counts.push_back(n);
  }
  const RateEstimates r = estimate_rates(counts);
  CHECK(r.fwer_hat >= r.fdr_hat);
  const RateEstimates n = estimate_rates(null_counts);
  CHECK(n.fdr_hat == n.fwer_hat);
}
