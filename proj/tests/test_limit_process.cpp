#include <cmath>
#include <sstream>

#include <doctest.h>

#include "cechstat/limit_process.hpp"
#include "cechstat/parallel.hpp"

using namespace cechstat;

namespace {

struct Stats {
  double mean = 0.0, var = 0.0;
};

Stats stats(const std::vector<double>& xs) {
  Stats s;
  for (double x : xs) s.mean += x;
  s.mean /= static_cast<double>(xs.size());
  for (double x : xs) s.var += (x - s.mean) * (x - s.mean);
  s.var /= static_cast<double>(xs.size() - 1);
  return s;
}

// std error of an unbiased sample variance of a gaussian sample
double var_se(double var, std::size_t n) { return var * std::sqrt(2.0 / static_cast<double>(n - 1)); }

}  // namespace

TEST_CASE("covariance factorization") {
  Eigen::MatrixXd cov(3, 3);
  cov << 2.0, 0.5, 0.1, 0.5, 1.0, 0.3, 0.1, 0.3, 0.8;
  const auto f = factor_covariance(cov);
  CHECK((f.root * f.root.transpose() - cov).norm() < 1e-12);
  CHECK(f.clipped == 0);

  Eigen::MatrixXd rank_one = Eigen::VectorXd::Ones(3) * Eigen::VectorXd::Ones(3).transpose();
  rank_one(0, 0) -= 1e-12;
  const auto g = factor_covariance(rank_one);
  CHECK(g.clipped >= 1);
  CHECK((g.root * g.root.transpose() - rank_one).norm() < 1e-9);

  Eigen::MatrixXd bad(2, 2);
  bad << 1.0, 2.0, 2.0, 1.0;
  CHECK_THROWS_AS(factor_covariance(bad), IndefiniteCovariance);
}

TEST_CASE("gaussian process G") {
  const auto u = Density::uniform_cube(2);
  const std::vector<double> grid{0.0, 0.5, 1.0};
  const auto model = gaussian_model(1, grid, u, 400'000, 3);
  const std::size_t R = 4000;
  const auto paths = sample_G(model, R, 9);
  REQUIRE(paths.size() == R);

  std::vector<std::vector<double>> plus(grid.size()), minus(grid.size()), total(grid.size());
  for (const auto& p : paths)
    for (std::size_t a = 0; a < grid.size(); ++a) {
      plus[a].push_back(p.plus.values[a]);
      minus[a].push_back(p.minus.values[a]);
      total[a].push_back(p.total.values[a]);
      CHECK(p.total.values[a] == doctest::Approx(p.plus.values[a] - p.minus.values[a]));
    }

  SUBCASE("zero radius is degenerate") {
    for (const auto& p : paths) {
      CHECK(p.plus.values[0] == 0.0);
      CHECK(p.total.values[0] == 0.0);
    }
  }
  SUBCASE("marginal variances against independent D volumes") {
    const double c = c_f_k(u, 1);
    const auto vp = volume_D1(1, 2, Sign::Plus, 1'000'000, 41);
    const auto vm = volume_D1(1, 2, Sign::Minus, 1'000'000, 41);
    for (std::size_t a = 1; a < grid.size(); ++a) {
      const double clock = std::pow(grid[a], 4.0);
      const auto sp = stats(plus[a]);
      const auto sm = stats(minus[a]);
      const double ep = c * vp.value * clock, em = c * vm.value * clock;
      CHECK(std::abs(sp.var - ep) <= 3.0 * std::hypot(var_se(sp.var, R), c * vp.std_error * clock));
      CHECK(std::abs(sm.var - em) <= 3.0 * std::hypot(var_se(sm.var, R), c * vm.std_error * clock));
    }
  }
  SUBCASE("paths are centered") {
    for (std::size_t a = 1; a < grid.size(); ++a) {
      const auto s = stats(total[a]);
      CHECK(std::abs(s.mean) <= 4.0 * std::sqrt(s.var / R));
    }
  }
  SUBCASE("brownian time change") {
    const auto s1 = stats(plus[1]);
    const auto s2 = stats(plus[2]);
    const double ratio = s2.var / s1.var;
    const double se = ratio * std::sqrt(2.0 / (R - 1) + 2.0 / (R - 1));
    CHECK(std::abs(ratio - 16.0) <= 3.0 * se);
  }
}

TEST_CASE("poisson process V") {
  const auto u = Density::uniform_cube(2);
  // equal steps of t^4
  std::vector<double> grid;
  for (int a = 1; a <= 5; ++a) grid.push_back(std::pow(0.4 * a, 0.25) * 1.2);
  const std::size_t R = 2000;
  const auto paths = sample_V(1, grid, u, R, 5);
  REQUIRE(paths.size() == R);

  for (const auto& p : paths)
    for (std::size_t a = 0; a < grid.size(); ++a) {
      CHECK(p.total.values[a] == p.plus.values[a] - p.minus.values[a]);
      CHECK(p.plus.values[a] == std::round(p.plus.values[a]));
      if (a > 0) {
        CHECK(p.plus.values[a] >= p.plus.values[a - 1]);
        CHECK(p.minus.values[a] >= p.minus.values[a - 1]);
      }
    }

  SUBCASE("mean against D volumes") {
    const double c = c_f_k(u, 1);
    for (std::size_t a = 0; a < grid.size(); ++a) {
      std::vector<double> v;
      for (const auto& p : paths) v.push_back(p.total.values[a]);
      const auto s = stats(v);
      const auto vp = volume_D(1, 2, Sign::Plus, grid[a], 1'000'000, 60 + a);
      const auto vm = volume_D(1, 2, Sign::Minus, grid[a], 1'000'000, 60 + a);
      const double expect = c * (vp.value - vm.value);
      const double se = std::hypot(std::sqrt(s.var / R), c * std::hypot(vp.std_error, vm.std_error));
      CHECK(std::abs(s.mean - expect) <= 3.0 * se);
    }
  }
  SUBCASE("increments over equal clock steps are poisson") {
    for (std::size_t a = 1; a < grid.size(); ++a) {
      std::vector<double> inc;
      for (const auto& p : paths) inc.push_back(p.plus.values[a] - p.plus.values[a - 1]);
      const auto s = stats(inc);
      REQUIRE(s.mean > 0.0);
      CHECK(s.var / s.mean >= 0.85);
      CHECK(s.var / s.mean <= 1.15);
    }
  }
}

TEST_CASE("truncated gaussian process H") {
  const auto u = Density::uniform_cube(2);
  const std::vector<double> grid{0.15, 0.25};
  const auto phi = phi_truncated(3, 1, grid, u, u.support_box(), 20'000, 4);
  const std::size_t R = 4000;
  const auto paths = sample_H_truncated(phi, R, 8);
  REQUIRE(paths.size() == R);
  std::vector<std::vector<double>> col(grid.size());
  for (const auto& p : paths)
    for (std::size_t a = 0; a < grid.size(); ++a) col[a].push_back(p.values[a]);
  for (std::size_t a = 0; a < grid.size(); ++a) {
    const auto s = stats(col[a]);
    CHECK(std::abs(s.var - phi.values[a][a]) <= 3.0 * var_se(phi.values[a][a], R));
    CHECK(std::abs(s.mean) <= 4.0 * std::sqrt(phi.values[a][a] / R));
  }
  double cross = 0.0;
  const auto s0 = stats(col[0]), s1 = stats(col[1]);
  for (std::size_t r = 0; r < R; ++r) cross += (col[0][r] - s0.mean) * (col[1][r] - s1.mean);
  cross /= static_cast<double>(R - 1);
  const double se = std::sqrt((phi.values[0][0] * phi.values[1][1] + phi.values[0][1] * phi.values[0][1]) / (R - 1));
  CHECK(std::abs(cross - phi.values[0][1]) <= 3.0 * se);
}

TEST_CASE("paths are reproducible and thread independent") {
  const auto u = Density::uniform_cube(2);
  const std::vector<double> grid{0.8, 1.0, 1.2};
  set_default_threads(1);
  const auto a = sample_V(1, grid, u, 300, 7);
  set_default_threads(4);
  const auto b = sample_V(1, grid, u, 300, 7);
  set_default_threads(0);
  for (std::size_t r = 0; r < a.size(); ++r) CHECK(a[r].total.values == b[r].total.values);
}

TEST_CASE("paths csv") {
  const auto u = Density::uniform_cube(2);
  const std::vector<double> grid{0.5, 1.0};
  const auto paths = sample_V(1, grid, u, 3, 1);
  std::vector<ProcessSample> totals;
  for (const auto& p : paths) totals.push_back(p.total);
  std::stringstream ss;
  write_paths_csv(ss, totals);
  const auto text = ss.str();
  CHECK(text.rfind("#", 0) == 0);
  CHECK(text.find("process=V") != std::string::npos);
  CHECK(text.find("\nreplicate,t,value\n") != std::string::npos);
  std::size_t rows = 0;
  for (char ch : text) rows += ch == '\n';
  CHECK(rows == 2 + 3 * 2);
}
