#include <cmath>
#include <vector>

#include "doctest.h"
#include "nsldp/parallel.hpp"
#include "nsldp/rng.hpp"
#include "nsldp/stats.hpp"

using namespace nsldp;

TEST_CASE("mean and standard error") {
  const std::vector<double> x = {1.0, 2.0, 3.0, 4.0};
  const auto ms = stats::mean_stderr(x);
  CHECK(ms.mean == doctest::Approx(2.5));
  CHECK(ms.stderr_ == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
}

TEST_CASE("log-log slope of a power law") {
  const std::vector<double> x = {1e-1, 1e-2, 1e-3}, y = {2e-1 * std::sqrt(10.0), 2e-1 * 1.0, 2e-1 / std::sqrt(10.0)};
  const auto fit = stats::loglog_slope(x, y, {});
  CHECK(fit.slope == doctest::Approx(0.5));
}

TEST_CASE("Wilson interval and KS test") {
  const auto iv = stats::wilson_interval(50, 100);
  CHECK(iv.low < 0.5);
  CHECK(iv.high > 0.5);
  CHECK(iv.low == doctest::Approx(0.4038).epsilon(1e-3));
  RngStream rng(50);
  std::vector<double> a, b, c;
  for (int i = 0; i < 2000; ++i) {
    a.push_back(rng.normal());
    b.push_back(rng.normal());
    c.push_back(rng.normal() + 0.3);
  }
  CHECK(stats::ks_two_sample_pvalue(a, b) > 0.001);
  CHECK(stats::ks_two_sample_pvalue(a, c) < 1e-6);
}

TEST_CASE("log_mean_exp is stable") {
  const std::vector<double> x = {1000.0, 1000.0};
  CHECK(stats::log_mean_exp(x) == doctest::Approx(1000.0));
}

TEST_CASE("substreams are deterministic and distinct") {
  const RngStream r(7);
  RngStream a = r.substream(1), b = r.substream(1), c = r.substream(2);
  const double x = a.normal();
  CHECK(x == b.normal());
  CHECK(x != c.normal());
}

TEST_CASE("parallel_for results do not depend on the worker count") {
  std::vector<double> one(64), four(64);
  parallel_for(64, [&](int i) { one[i] = RngStream(9).substream(i).normal(); }, 1);
  parallel_for(64, [&](int i) { four[i] = RngStream(9).substream(i).normal(); }, 4);
  CHECK(one == four);
}
