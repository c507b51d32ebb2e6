#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/poisson.hpp>
#include <doctest.h>

#include "cechstat/experiments.hpp"
#include "cechstat/parallel.hpp"

using namespace cechstat;

namespace {

RegimeConfig small_critical() {
  RegimeConfig c;
  c.regime = Regime::Critical;
  c.n_list = {300, 600};
  c.grid = {0.15, 0.25, 0.3};
  c.check_t = 0.3;
  c.replicates = 20;
  c.M = 4;
  c.seed = 5;
  c.constants.eta_samples = 4000;
  c.constants.mu_samples = 20'000;
  c.constants.volume_samples = 20'000;
  return c;
}

const CheckResult* find_check(const Report& r, const std::string& name) {
  for (const auto& c : r.checks)
    if (c.name == name) return &c;
  return nullptr;
}

}  // namespace

TEST_CASE("moments") {
  const auto m = moments({1.0, 2.0, 3.0, 4.0});
  CHECK(m.count == 4);
  CHECK(m.mean == doctest::Approx(2.5));
  CHECK(m.variance == doctest::Approx(5.0 / 3.0));
  CHECK(m.skewness == doctest::Approx(0.0));
  // population m4 / m2^2 - 3 with m2 = 1.25, m4 = 2.5625
  CHECK(m.excess_kurtosis == doctest::Approx(2.5625 / 1.5625 - 3.0));
  const auto right = moments({0.0, 0.0, 0.0, 1.0});
  CHECK(right.skewness > 0.0);
  const auto one = moments({7.0});
  CHECK(one.mean == 7.0);
  CHECK(one.variance == 0.0);
  CHECK(moments({}).count == 0);
}

TEST_CASE("regime validation") {
  auto c = small_critical();
  CHECK_NOTHROW(c.validate());
  SUBCASE("k outside 1..d-1") {
    c.k = 2;
    CHECK_THROWS_AS(c.validate(), ConfigError);
  }
  SUBCASE("grid order") {
    c.grid = {0.3, 0.25};
    CHECK_THROWS_AS(c.validate(), ConfigError);
  }
  SUBCASE("truncation below k+2") {
    c.M = 2;
    CHECK_THROWS_AS(c.validate(), ConfigError);
  }
  SUBCASE("check_t off the grid") {
    c.check_t = 0.2;
    CHECK_THROWS_AS(c.validate(), ConfigError);
  }
  SUBCASE("sparse exponent window") {
    c.regime = Regime::Sparse;
    c.grid = {1.0};
    c.check_t = 1.0;
    c.gamma = 0.65;
    CHECK_NOTHROW(c.validate());
    c.gamma = 0.5;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c.gamma = 0.75;
    CHECK_THROWS_AS(c.validate(), ConfigError);
  }
  SUBCASE("zero replicates") {
    c.replicates = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
  }
}

TEST_CASE("schedules") {
  RegimeConfig c;
  c.regime = Regime::Critical;
  CHECK(1000.0 * std::pow(c.scale(1000.0), 2.0) == doctest::Approx(1.0));
  c.regime = Regime::Poisson;
  CHECK(c.rho(2000.0) == doctest::Approx(1.0));
  CHECK(c.scale(2000.0) == doctest::Approx(std::pow(2000.0, -0.75)));
  c.regime = Regime::Sparse;
  c.gamma = 0.65;
  CHECK(c.scale(4096.0) == doctest::Approx(std::pow(4096.0, -0.65)));
  CHECK(c.rho(4096.0) == doctest::Approx(std::pow(4096.0, 3.0 - 2.6)));
  CHECK(c.clt_bound() == doctest::Approx(1.0 / std::sqrt(std::numbers::e * std::numbers::pi)));
}

TEST_CASE("run_regime") {
  const auto c = small_critical();
  const auto s = run_regime(c);
  REQUIRE(s.runs.size() == 2);
  for (const auto& run : s.runs) {
    CHECK(run.replicates() == 20);
    CHECK(run.census_mismatches == 0);
    for (std::size_t r = 0; r < run.replicates(); ++r)
      for (std::size_t a = 0; a < c.grid.size(); ++a) {
        CHECK(run.beta[r][a] == run.S[r][a] + run.R[r][a]);
        CHECK(run.beta_M[r][a] <= run.beta[r][a]);
        CHECK(run.beta_M[r][a] >= run.S[r][a]);
      }
    const auto cov = run.beta_covariance();
    REQUIRE(cov.has_value());
    for (std::size_t a = 0; a < c.grid.size(); ++a) {
      CHECK((*cov)[a][a] >= 0.0);
      for (std::size_t b = 0; b < c.grid.size(); ++b) CHECK((*cov)[a][b] == (*cov)[b][a]);
    }
  }

  SUBCASE("a single replicate reports no covariance") {
    auto one = c;
    one.replicates = 1;
    const auto s1 = run_regime(one);
    CHECK_FALSE(s1.runs[0].beta_covariance().has_value());
    const auto cc = critical_constants(one);
    const auto rep = check_critical(s1, cc);
    bool noticed = false;
    for (const auto& n : rep.notices) noticed |= n.find("absent") != std::string::npos;
    CHECK(noticed);
    CHECK(find_check(rep, "critical_variance") == nullptr);

    RegimeConfig sparse;
    sparse.n_list = {256, 512};
    sparse.grid = {1.0};
    sparse.replicates = 1;
    sparse.constants.mu_samples = 20'000;
    const auto sp = check_sparse_clt(run_regime(sparse), sparse_constants(sparse));
    CHECK(find_check(sp, "sparse_mean") != nullptr);
    CHECK(find_check(sp, "sparse_variance") == nullptr);
    CHECK(find_check(sp, "sparse_skewness") == nullptr);
  }
  SUBCASE("bit identical across reruns and thread counts") {
    set_default_threads(1);
    const auto a = summary_to_json(run_regime(c)).dump();
    set_default_threads(4);
    const auto b = summary_to_json(run_regime(c)).dump();
    set_default_threads(0);
    CHECK(a == b);
    CHECK(a == summary_to_json(s).dump());
  }
  SUBCASE("simplex budget overflow names the run") {
    auto tight = c;
    tight.budget = 10;
    try {
      run_regime(tight);
      FAIL("expected a budget error");
    } catch (const BudgetError& e) {
      CHECK(e.n == 300.0);
      CHECK(e.replicate < tight.replicates);
    }
  }
}

TEST_CASE("standard error of the mean halves with doubled replicates") {
  auto c = small_critical();
  c.n_list = {1000};
  c.replicates = 200;
  const auto a = run_regime(c);
  c.replicates = 400;
  c.seed = 6;
  const auto b = run_regime(c);
  const auto ma = moments(a.runs[0].column(a.runs[0].beta, 2));
  const auto mb = moments(b.runs[0].column(b.runs[0].beta, 2));
  const double ratio = std::sqrt(mb.variance / 400.0) / std::sqrt(ma.variance / 200.0);
  CHECK(ratio >= 0.6);
  CHECK(ratio <= 0.85);
}

TEST_CASE("critical checks beyond the clt bound") {
  auto c = small_critical();
  c.grid = {0.3, 0.4};
  c.check_t = 0.4;
  const auto s = run_regime(c);
  const auto rep = check_critical(s, critical_constants(c));
  CHECK(find_check(rep, "critical_variance") != nullptr);
  CHECK(find_check(rep, "critical_slln_trend") != nullptr);
  CHECK(find_check(rep, "critical_normality") == nullptr);
  bool noticed = false;
  for (const auto& n : rep.notices) noticed |= n.find("CLT bound") != std::string::npos;
  CHECK(noticed);
}

TEST_CASE("poisson chi-square") {
  // counts drawn exactly in proportion to the pmf fit perfectly
  const double lambda = 2.0;
  boost::math::poisson_distribution<> pois(lambda);
  std::vector<long long> counts;
  for (int x = 0; x <= 12; ++x) {
    const auto copies = static_cast<long long>(std::llround(10'000.0 * boost::math::pdf(pois, x)));
    for (long long c = 0; c < copies; ++c) counts.push_back(x);
  }
  const auto good = poisson_chi_square(counts, lambda);
  CHECK(good.p_value > 0.99);
  CHECK(good.bins >= 6);
  CHECK(good.dof == static_cast<int>(good.bins) - 1);
  // pooled bins keep every expected count at 5 or more, so a shifted law is
  // rejected outright
  const auto bad = poisson_chi_square(counts, 3.0);
  CHECK(bad.p_value < 1e-6);

  // all zeros against a tiny mean: one bin, nothing to test
  const auto degenerate = poisson_chi_square(std::vector<long long>(100, 0), 1e-4);
  CHECK(degenerate.p_value == 1.0);
}

TEST_CASE("two-sample chi-square") {
  std::vector<std::vector<long long>> a, b, c;
  for (int r = 0; r < 600; ++r) {
    a.push_back({r % 3, r % 2});
    b.push_back({(r + 1) % 3, (r + 1) % 2});
    c.push_back({0, 0});
  }
  CHECK(two_sample_chi_square(a, b).p_value > 0.5);
  CHECK(two_sample_chi_square(a, c).p_value < 1e-6);
}

TEST_CASE("poisson lambda scales exactly") {
  const double l1 = poisson_lambda(1.0 / 6.0, 3.0, 1.0, 2, 1, 0.9);
  const double l2 = poisson_lambda(1.0 / 6.0, 3.0, 1.0, 2, 1, 1.8);
  CHECK(l2 / l1 == 16.0);
  CHECK(l1 == doctest::Approx(2.0 / 6.0 * std::pow(0.9, 4.0)));
}

TEST_CASE("connectivity bound") {
  const auto u = Density::uniform_cube(2);
  SUBCASE("two points never exceed the bound") {
    for (double r : {0.05, 0.2}) {
      const auto res = check_connectivity_bound(2, r, u, 20'000, 3, 0.0);
      CHECK(res.passed);
      CHECK(res.details["bound"].get<double>() == doctest::Approx(r * r * std::numbers::pi));
    }
  }
  SUBCASE("four points at r = 0.05") {
    const auto res = check_connectivity_bound(4, 0.05, u, 200'000, 4);
    CHECK(res.passed);
    CHECK(res.details["bound"].get<double>() == doctest::Approx(16.0 * std::pow(0.0025 * std::numbers::pi, 3.0)));
  }
  SUBCASE("large radius is vacuous") {
    const auto res = check_connectivity_bound(5, 2.0, u, 2000, 5);
    CHECK(res.details["empirical"].get<double>() == 1.0);
    CHECK(res.details["bound"].get<double>() > 1.0);
    CHECK(res.passed);
  }
  CHECK_THROWS(check_connectivity_bound(1, 0.1, u, 10, 1));
}

TEST_CASE("summary csv") {
  auto c = small_critical();
  c.n_list = {300};
  c.replicates = 3;
  const auto s = run_regime(c);
  std::stringstream ss;
  write_summary_csv(ss, s);
  const auto text = ss.str();
  CHECK(text.rfind("# regime=critical d=2 k=1 M=4 seed=5\n", 0) == 0);
  CHECK(text.find("\nn,t,stat,mean,variance,skewness,excess_kurtosis\n") != std::string::npos);
  std::size_t rows = 0;
  for (char ch : text) rows += ch == '\n';
  CHECK(rows == 2 + 3 * 4);
  const auto j = summary_to_json(s);
  CHECK(j.contains("runs"));
}
