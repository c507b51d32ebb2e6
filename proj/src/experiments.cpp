#include "cechstat/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

#include "cechstat/parallel.hpp"

namespace cechstat {

std::string to_string(Regime regime) {
  switch (regime) {
    case Regime::Sparse: return "sparse";
    case Regime::Critical: return "critical";
    case Regime::Poisson: return "poisson";
  }
  return "sparse";
}

Regime regime_from_string(const std::string& name) {
  if (name == "sparse") return Regime::Sparse;
  if (name == "critical") return Regime::Critical;
  if (name == "poisson") return Regime::Poisson;
  throw ConfigError("unknown regime '" + name + "'");
}

double RegimeConfig::scale(double n) const {
  const double d = static_cast<double>(dim());
  switch (regime) {
    case Regime::Sparse: return std::pow(n, -gamma);
    case Regime::Critical: return std::pow(n, -1.0 / d);
    case Regime::Poisson: return std::pow(n, -static_cast<double>(k + 2) / (d * (k + 1)));
  }
  return 1.0;
}

double RegimeConfig::rho(double n) const {
  const double d = static_cast<double>(dim());
  return std::pow(n, k + 2) * std::pow(scale(n), d * (k + 1));
}

double RegimeConfig::clt_bound() const {
  const int d = static_cast<int>(dim());
  return std::pow(std::exp(1.0) * density.sup_norm() * unit_ball_volume(d), -1.0 / d);
}

void RegimeConfig::validate() const {
  const double d = static_cast<double>(dim());
  if (k < 1 || k >= static_cast<int>(dim())) throw ConfigError("k must satisfy 1 <= k < d");
  if (n_list.empty()) throw ConfigError("n_list must not be empty");
  for (double n : n_list)
    if (!(n > 0.0)) throw ConfigError("every n must be positive");
  if (grid.empty()) throw ConfigError("t grid must not be empty");
  for (std::size_t a = 0; a < grid.size(); ++a) {
    if (!(grid[a] > 0.0)) throw ConfigError("t grid values must be positive");
    if (a > 0 && !(grid[a] > grid[a - 1])) throw ConfigError("t grid must be increasing");
  }
  if (replicates == 0) throw ConfigError("replicates must be at least 1");
  if (M < k + 2) throw ConfigError("M must be at least k+2");
  if (regime == Regime::Sparse) {
    // n s_n^d -> 0 needs gamma > 1/d; rho_n -> infinity needs gamma < (k+2)/(d(k+1))
    const double lo = 1.0 / d;
    const double hi = (k + 2) / (d * (k + 1));
    if (!(gamma > lo && gamma < hi))
      throw ConfigError("sparse gamma must lie in (" + std::to_string(lo) + ", " + std::to_string(hi) + ")");
  }
  if (regime != Regime::Poisson &&
      std::none_of(grid.begin(), grid.end(), [&](double t) { return std::abs(t - check_t) < 1e-12; }))
    throw ConfigError("check_t must be a grid point");
}

Moments moments(const std::vector<double>& xs) {
  Moments m;
  m.count = xs.size();
  if (xs.empty()) return m;
  const double n = static_cast<double>(xs.size());
  double s = 0.0;
  for (double x : xs) s += x;
  m.mean = s / n;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double x : xs) {
    const double u = x - m.mean;
    const double u2 = u * u;
    m2 += u2;
    m3 += u2 * u;
    m4 += u2 * u2;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  if (xs.size() > 1) m.variance = m2 * n / (n - 1.0);
  if (m2 > 0.0) {
    m.skewness = m3 / std::pow(m2, 1.5);
    m.excess_kurtosis = m4 / (m2 * m2) - 3.0;
  }
  return m;
}

std::vector<double> NRun::column(const std::vector<std::vector<long long>>& table,
                                 std::size_t a) const {
  std::vector<double> out;
  out.reserve(table.size());
  for (const auto& row : table) out.push_back(static_cast<double>(row[a]));
  return out;
}

std::optional<std::vector<std::vector<double>>> NRun::beta_covariance() const {
  const std::size_t r = beta.size();
  if (r < 2) return std::nullopt;
  const std::size_t g = beta.front().size();
  std::vector<double> mean(g, 0.0);
  for (const auto& row : beta)
    for (std::size_t a = 0; a < g; ++a) mean[a] += static_cast<double>(row[a]);
  for (auto& m : mean) m /= static_cast<double>(r);
  std::vector<std::vector<double>> cov(g, std::vector<double>(g, 0.0));
  for (std::size_t a = 0; a < g; ++a)
    for (std::size_t b = a; b < g; ++b) {
      double s = 0.0;
      for (const auto& row : beta) s += (row[a] - mean[a]) * (row[b] - mean[b]);
      cov[a][b] = cov[b][a] = s / static_cast<double>(r - 1);
    }
  return cov;
}

RegimeSummary run_regime(const RegimeConfig& config) {
  config.validate();
  RegimeSummary summary;
  summary.config = config;
  const std::size_t g = config.grid.size();
  const std::size_t reps = config.replicates;
  using ClassCounts = std::map<std::pair<std::size_t, int>, long long>;

  for (std::size_t a = 0; a < config.n_list.size(); ++a) {
    NRun run;
    run.n = config.n_list[a];
    run.scale = config.scale(run.n);
    run.rho = config.rho(run.n);
    run.beta.assign(reps, std::vector<long long>(g, 0));
    run.S = run.R = run.beta_M = run.beta;
    std::vector<std::vector<ClassCounts>> classes(reps, std::vector<ClassCounts>(g));
    std::vector<char> mismatch(reps, 0);

    parallel_for(reps, [&](std::size_t r) {
      try {
        const auto cloud = sample_poisson_process(config.density, run.n,
                                                  derive_seed(config.seed, a, r), run.scale);
        const auto curve = betti_curve(cloud, config.k, config.grid.back(), config.budget);
        const auto censuses = census_grid(cloud, config.k, config.grid, config.budget);
        for (std::size_t i = 0; i < g; ++i) {
          const auto& c = censuses[i];
          const long long b = curve.value_at(config.grid[i]);
          if (b != c.beta()) mismatch[r] = 1;
          run.beta[r][i] = b;
          run.S[r][i] = c.S();
          run.R[r][i] = c.beta() - c.S();
          run.beta_M[r][i] = truncated_betti(c, config.M);
          classes[r][i] = c.counts;
        }
      } catch (const SimplexBudgetExceeded& e) {
        throw BudgetError(std::string(e.what()) + " (n=" + std::to_string(run.n) +
                              ", replicate=" + std::to_string(r) + ")",
                          run.n, r);
      }
    });

    run.U.resize(g);
    for (std::size_t r = 0; r < reps; ++r) {
      run.census_mismatches += mismatch[r] ? 1 : 0;
      for (std::size_t i = 0; i < g; ++i)
        for (const auto& [key, count] : classes[r][i]) {
          auto& v = run.U[i][key];
          if (v.empty()) v.assign(reps, 0);
          v[r] = count;
        }
    }
    summary.runs.push_back(std::move(run));
  }
  return summary;
}

bool Report::acceptance_passed() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const CheckResult& c) { return !c.acceptance || c.passed; });
}

nlohmann::json Report::to_json() const {
  nlohmann::json checks_json = nlohmann::json::array();
  for (const auto& c : checks)
    checks_json.push_back(
        {{"name", c.name}, {"passed", c.passed}, {"acceptance", c.acceptance}, {"details", c.details}});
  return {{"regime", regime},
          {"acceptance_passed", acceptance_passed()},
          {"checks", checks_json},
          {"notices", notices}};
}

namespace {

std::size_t grid_index(const RegimeConfig& config, double t) {
  for (std::size_t a = 0; a < config.grid.size(); ++a)
    if (std::abs(config.grid[a] - t) < 1e-12) return a;
  throw ConfigError("t is not a grid point");
}

double rel_error(double estimate, double reference) {
  if (reference == 0.0) return estimate == 0.0 ? 0.0 : kInfinity;
  return std::abs(estimate - reference) / std::abs(reference);
}

bool strictly_decreasing(const std::vector<double>& xs) {
  for (std::size_t a = 1; a < xs.size(); ++a)
    if (!(xs[a] < xs[a - 1])) return false;
  return true;
}

// Kolmogorov distance between the empirical law of xs and N(0, 1).
double normal_ks_distance(std::vector<double> xs) {
  if (xs.empty()) return 0.0;
  std::sort(xs.begin(), xs.end());
  const boost::math::normal_distribution<double> normal;
  const double n = static_cast<double>(xs.size());
  double dist = 0.0;
  for (std::size_t a = 0; a < xs.size(); ++a) {
    const double F = boost::math::cdf(normal, xs[a]);
    dist = std::max({dist, std::abs(F - a / n), std::abs((a + 1) / n - F)});
  }
  return dist;
}

nlohmann::json moments_json(const Moments& m) {
  return {{"count", m.count},
          {"mean", m.mean},
          {"variance", m.variance},
          {"skewness", m.skewness},
          {"excess_kurtosis", m.excess_kurtosis}};
}

double int_pow(double x, int p) {
  double out = 1.0;
  for (int a = 0; a < p; ++a) out *= x;
  return out;
}

double chi_square_p(double stat, int dof) {
  if (dof <= 0) return 1.0;
  const boost::math::chi_squared_distribution<double> dist(dof);
  return boost::math::cdf(boost::math::complement(dist, stat));
}

}  // namespace

SparseConstants sparse_constants(const RegimeConfig& config) {
  SparseConstants c;
  c.mu = mu_matrix(config.k, config.grid, config.density, config.density.support_box(),
                   config.constants.mu_samples, derive_seed(config.seed, 0x5ca1eULL));
  return c;
}

Report check_sparse_clt(const RegimeSummary& summary, const SparseConstants& constants) {
  const auto& cfg = summary.config;
  const std::size_t a = grid_index(cfg, cfg.check_t);
  const auto& last = summary.runs.back();
  const double ref = constants.mu.values[a][a];
  const double ref_se = constants.mu.std_errors[a][a];
  const auto beta = moments(last.column(last.beta, a));
  const auto& th = cfg.thresholds;
  Report rep;
  rep.regime = "sparse";

  const double mean_scaled = beta.mean / last.rho;
  const double var_scaled = beta.variance / last.rho;
  rep.checks.push_back({"sparse_mean", rel_error(mean_scaled, ref) <= th.sparse_mean_rel, true,
                        {{"n", last.n}, {"t", cfg.check_t}, {"rho", last.rho},
                         {"scaled_mean", mean_scaled}, {"mu", ref}, {"mu_std_error", ref_se},
                         {"relative_error", rel_error(mean_scaled, ref)},
                         {"tolerance", th.sparse_mean_rel}}});

  std::vector<double> r_scaled, r_over_s;
  for (const auto& run : summary.runs) {
    const double mr = moments(run.column(run.R, a)).mean;
    const double ms = moments(run.column(run.S, a)).mean;
    r_scaled.push_back(mr / run.rho);
    r_over_s.push_back(ms > 0.0 ? mr / ms : kInfinity);
  }
  rep.checks.push_back({"sparse_R_negligible", strictly_decreasing(r_scaled), true,
                        {{"n_list", cfg.n_list}, {"scaled_mean_R", r_scaled}}});
  rep.checks.push_back({"sparse_R_over_S", strictly_decreasing(r_over_s), false,
                        {{"n_list", cfg.n_list}, {"mean_R_over_mean_S", r_over_s}}});

  if (last.replicates() < 2) {
    rep.notices.push_back("variance and shape diagnostics need at least two replicates; reported as absent");
  } else {
    rep.checks.push_back({"sparse_variance", rel_error(var_scaled, ref) <= th.sparse_var_rel, true,
                          {{"n", last.n}, {"t", cfg.check_t}, {"scaled_variance", var_scaled},
                           {"mu", ref}, {"relative_error", rel_error(var_scaled, ref)},
                           {"tolerance", th.sparse_var_rel}}});
    std::vector<double> standardized = last.column(last.beta, a);
    const double sd = std::sqrt(beta.variance);
    for (auto& x : standardized) x = sd > 0.0 ? (x - beta.mean) / sd : 0.0;
    rep.checks.push_back({"sparse_skewness", std::abs(beta.skewness) <= th.sparse_skewness, true,
                          {{"skewness", beta.skewness}, {"tolerance", th.sparse_skewness}}});
    rep.checks.push_back({"sparse_excess_kurtosis",
                          std::abs(beta.excess_kurtosis) <= th.sparse_excess_kurtosis, true,
                          {{"excess_kurtosis", beta.excess_kurtosis},
                           {"tolerance", th.sparse_excess_kurtosis}}});
    rep.checks.push_back({"sparse_normal_distance", true, false,
                          {{"kolmogorov_distance", normal_ks_distance(standardized)}}});
  }

  if (const auto cov = last.beta_covariance()) {
    bool symmetric = true;
    nlohmann::json scaled = nlohmann::json::array();
    for (std::size_t i = 0; i < cov->size(); ++i) {
      std::vector<double> row;
      for (std::size_t j = 0; j < cov->size(); ++j) {
        symmetric = symmetric && (*cov)[i][j] == (*cov)[j][i];
        row.push_back((*cov)[i][j] / last.rho);
      }
      scaled.push_back(row);
    }
    rep.checks.push_back({"sparse_covariance", symmetric, false,
                          {{"scaled_covariance", scaled}, {"mu", constants.mu.values}}});
  } else {
    rep.notices.push_back("covariance needs at least two replicates; reported as absent");
  }
  return rep;
}

CriticalConstants critical_constants(const RegimeConfig& config) {
  CriticalConstants c;
  c.t = config.check_t;
  const Box region = config.density.support_box();
  const auto& b = config.constants;
  for (int i = config.k + 2; i <= config.M; ++i) {
    const int cap = static_cast<int>(binomial(i, config.k + 1));
    for (int j = 1; j <= cap; ++j)
      c.eta_class[{static_cast<std::size_t>(i), j}] =
          eta(config.k, i, j, j, c.t, c.t, config.density, region, b.eta_samples,
              derive_seed(config.seed, 0xe7aULL, static_cast<std::uint64_t>(i * 256 + j)), b.cluster);
  }
  c.phi = phi_entry(config.M, config.k, c.t, c.t, config.density, region, b.eta_samples,
                    derive_seed(config.seed, 0xf1ULL), b.cluster);
  c.eta_sum = eta_mean_sum(config.k, config.M, c.t, config.density, region, b.eta_samples,
                           derive_seed(config.seed, 0x5e5ULL), b.cluster);
  return c;
}

Report check_critical(const RegimeSummary& summary, const CriticalConstants& constants) {
  const auto& cfg = summary.config;
  const std::size_t a = grid_index(cfg, constants.t);
  const auto& last = summary.runs.back();
  const auto& th = cfg.thresholds;
  Report rep;
  rep.regime = "critical";

  for (const auto& [key, est] : constants.eta_class) {
    const double ref = est.value / factorial(static_cast<int>(key.first));
    double mean = 0.0;
    if (const auto it = last.U[a].find(key); it != last.U[a].end()) {
      std::vector<double> xs(it->second.begin(), it->second.end());
      mean = moments(xs).mean;
    }
    const double scaled = mean / last.n;
    const bool leading = key.first == static_cast<std::size_t>(cfg.k) + 2 && key.second == 1;
    if (!leading && ref == 0.0 && scaled == 0.0) continue;
    rep.checks.push_back({"critical_mean_U_" + std::to_string(key.first) + "_" + std::to_string(key.second),
                          rel_error(scaled, ref) <= th.critical_mean_rel, leading,
                          {{"n", last.n}, {"t", constants.t}, {"scaled_mean", scaled},
                           {"eta_over_factorial", ref},
                           {"eta_std_error", est.std_error / factorial(static_cast<int>(key.first))},
                           {"relative_error", rel_error(scaled, ref)},
                           {"tolerance", th.critical_mean_rel}}});
  }

  const auto bm = moments(last.column(last.beta_M, a));
  const double var_scaled = bm.variance / last.n;
  if (last.replicates() < 2) {
    rep.notices.push_back("variance needs at least two replicates; reported as absent");
  } else {
    rep.checks.push_back({"critical_variance", rel_error(var_scaled, constants.phi.total.value) <= th.critical_var_rel,
                          true,
                          {{"n", last.n}, {"t", constants.t}, {"M", cfg.M},
                           {"scaled_variance", var_scaled}, {"phi", constants.phi.total.value},
                           {"phi_std_error", constants.phi.total.std_error},
                           {"phi_eta_part", constants.phi.eta_part.value},
                           {"phi_nu_part", constants.phi.nu_part.value},
                           {"relative_error", rel_error(var_scaled, constants.phi.total.value)},
                           {"tolerance", th.critical_var_rel}}});
  }

  std::vector<double> deviation, plateau;
  for (const auto& run : summary.runs) {
    double dev = 0.0;
    for (const auto& row : run.beta) dev += std::abs(row[a] / run.n - constants.eta_sum.value);
    deviation.push_back(dev / static_cast<double>(run.replicates()));
    plateau.push_back(moments(run.column(run.beta, a)).mean / run.n);
  }
  rep.checks.push_back({"critical_slln_trend", strictly_decreasing(deviation), true,
                        {{"n_list", cfg.n_list}, {"mean_abs_deviation", deviation},
                         {"eta_sum", constants.eta_sum.value},
                         {"eta_sum_std_error", constants.eta_sum.std_error}}});
  rep.checks.push_back({"critical_mean_beta_per_n", true, false,
                        {{"n_list", cfg.n_list}, {"scaled_mean_beta", plateau}}});

  if (constants.t < cfg.clt_bound()) {
    const auto b = moments(last.column(last.beta, a));
    rep.checks.push_back({"critical_normality", true, false,
                          {{"skewness", b.skewness}, {"excess_kurtosis", b.excess_kurtosis},
                           {"clt_bound", cfg.clt_bound()}}});
  } else {
    rep.notices.push_back("t = " + std::to_string(constants.t) + " is beyond the CLT bound " +
                          std::to_string(cfg.clt_bound()) + "; normality diagnostics suppressed");
  }
  return rep;
}

double poisson_lambda(double c_f_k, double d_plus, double d_minus, std::size_t d, int k, double t) {
  return c_f_k * (d_plus - d_minus) * int_pow(t, static_cast<int>(d) * (k + 1));
}

PoissonConstants poisson_constants(const RegimeConfig& config) {
  PoissonConstants c;
  const std::size_t d = config.dim();
  // shared seed: both volumes see the same draws, so their difference is
  // the volume of {h_1 = 1} with its own small error
  const std::uint64_t seed = derive_seed(config.seed, 0xd1ULL);
  c.d_plus = volume_D1(config.k, d, Sign::Plus, config.constants.volume_samples, seed);
  c.d_minus = volume_D1(config.k, d, Sign::Minus, config.constants.volume_samples, seed);
  c.c_f_k = c_f_k(config.density, config.k);
  for (double t : config.grid)
    c.lambda.push_back(poisson_lambda(c.c_f_k, c.d_plus.value, c.d_minus.value, d, config.k, t));
  const std::size_t paths =
      config.constants.limit_replicates ? config.constants.limit_replicates : config.replicates;
  c.v_paths = sample_V(config.k, config.grid, config.density, paths, derive_seed(config.seed, 0x7eULL));
  return c;
}

ChiSquare poisson_chi_square(const std::vector<long long>& counts, double lambda) {
  ChiSquare out;
  const double n = static_cast<double>(counts.size());
  if (counts.empty() || !(lambda > 0.0)) return out;
  long long top = 0;
  for (auto c : counts) top = std::max(top, c);
  // bins 0..K-1 plus a tail bin [K, inf); pooled from the right
  std::vector<double> expected, observed;
  double pmf = std::exp(-lambda);
  double cdf = 0.0;
  for (long long v = 0; v <= top; ++v) {
    expected.push_back(n * pmf);
    cdf += pmf;
    pmf *= lambda / static_cast<double>(v + 1);
  }
  expected.back() += n * std::max(0.0, 1.0 - cdf);
  observed.assign(expected.size(), 0.0);
  for (auto c : counts) observed[static_cast<std::size_t>(c)] += 1.0;
  while (expected.size() > 1 && expected.back() < 5.0) {
    const double e = expected.back(), o = observed.back();
    expected.pop_back();
    observed.pop_back();
    expected.back() += e;
    observed.back() += o;
  }
  // small leading bins (large lambda) merge forward
  while (expected.size() > 1 && expected.front() < 5.0) {
    expected[1] += expected[0];
    observed[1] += observed[0];
    expected.erase(expected.begin());
    observed.erase(observed.begin());
  }
  for (std::size_t b = 0; b < expected.size(); ++b)
    out.statistic += (observed[b] - expected[b]) * (observed[b] - expected[b]) / expected[b];
  out.bins = expected.size();
  out.dof = static_cast<int>(expected.size()) - 1;
  out.p_value = chi_square_p(out.statistic, out.dof);
  return out;
}

ChiSquare two_sample_chi_square(const std::vector<std::vector<long long>>& a,
                                const std::vector<std::vector<long long>>& b) {
  ChiSquare out;
  if (a.empty() || b.empty()) return out;
  std::map<std::vector<long long>, std::pair<double, double>> table;
  for (const auto& x : a) table[x].first += 1.0;
  for (const auto& x : b) table[x].second += 1.0;
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  const double total = na + nb;
  std::vector<std::pair<double, double>> cells;
  std::pair<double, double> pooled{0.0, 0.0};
  for (const auto& [key, c] : table) {
    const double col = c.first + c.second;
    if (std::min(col * na / total, col * nb / total) < 5.0) {
      pooled.first += c.first;
      pooled.second += c.second;
    } else {
      cells.push_back(c);
    }
  }
  if (pooled.first + pooled.second > 0.0) cells.push_back(pooled);
  for (const auto& c : cells) {
    const double col = c.first + c.second;
    const double ea = col * na / total, eb = col * nb / total;
    out.statistic += (c.first - ea) * (c.first - ea) / ea + (c.second - eb) * (c.second - eb) / eb;
  }
  out.bins = cells.size();
  out.dof = static_cast<int>(cells.size()) - 1;
  out.p_value = chi_square_p(out.statistic, out.dof);
  return out;
}

Report check_poisson(const RegimeSummary& summary, const PoissonConstants& constants) {
  const auto& cfg = summary.config;
  const auto& last = summary.runs.back();
  const auto& th = cfg.thresholds;
  const std::size_t d = cfg.dim();
  Report rep;
  rep.regime = "poisson";

  for (std::size_t a = 0; a < cfg.grid.size(); ++a) {
    const double t = cfg.grid[a];
    const double lambda = constants.lambda[a];
    const auto m = moments(last.column(last.beta, a));
    std::vector<long long> counts;
    for (const auto& row : last.beta) counts.push_back(row[a]);
    const auto chi = poisson_chi_square(counts, lambda);
    const std::string tag = "_t" + std::to_string(t).substr(0, 4);
    rep.checks.push_back({"poisson_mean" + tag, rel_error(m.mean, lambda) <= th.poisson_mean_rel, true,
                          {{"n", last.n}, {"t", t}, {"mean", m.mean}, {"lambda", lambda},
                           {"mean_std_error", std::sqrt(m.variance / static_cast<double>(m.count))},
                           {"relative_error", rel_error(m.mean, lambda)},
                           {"tolerance", th.poisson_mean_rel}}});
    rep.checks.push_back({"poisson_chi_square" + tag, chi.p_value > th.poisson_min_p, true,
                          {{"t", t}, {"statistic", chi.statistic}, {"dof", chi.dof},
                           {"bins", chi.bins}, {"p_value", chi.p_value}, {"min_p", th.poisson_min_p}}});
    const double lambda2 = poisson_lambda(constants.c_f_k, constants.d_plus.value,
                                          constants.d_minus.value, d, cfg.k, 2.0 * t);
    const double ratio = lambda2 / lambda;
    const double expected = int_pow(2.0, static_cast<int>(d) * (cfg.k + 1));
    rep.checks.push_back({"poisson_scaling" + tag, ratio == expected, true,
                          {{"t", t}, {"ratio", ratio}, {"expected", expected}}});
  }

  std::vector<std::vector<long long>> v_vectors;
  for (const auto& p : constants.v_paths) {
    std::vector<long long> row;
    for (double v : p.total.values) row.push_back(static_cast<long long>(v));
    v_vectors.push_back(std::move(row));
  }
  const auto joint = two_sample_chi_square(last.beta, v_vectors);
  rep.checks.push_back({"poisson_joint_vs_limit", joint.p_value > th.poisson_min_p, false,
                        {{"statistic", joint.statistic}, {"dof", joint.dof},
                         {"p_value", joint.p_value}, {"limit_paths", v_vectors.size()}}});
  return rep;
}

CheckResult check_connectivity_bound(int i, double radius, const Density& density,
                                     std::size_t replicates, std::uint64_t seed, double std_errors) {
  if (i < 2) throw std::invalid_argument("connectivity bound requires i >= 2");
  const std::size_t d = density.dim();
  const auto n = static_cast<std::size_t>(i);
  std::vector<char> hit(replicates, 0);
  parallel_for(replicates, [&](std::size_t r) {
    Rng rng = Rng::stream(seed, r);
    std::vector<double> pts(n * d);
    for (std::size_t p = 0; p < n; ++p) density.sample_point(rng, {pts.data() + p * d, d});
    DisjointSets sets(n);
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = a + 1; b < n; ++b)
        if (distance({pts.data() + a * d, d}, {pts.data() + b * d, d}) <= radius) sets.unite(a, b);
    hit[r] = sets.components() == 1;
  });
  double count = 0.0;
  for (char h : hit) count += h;
  const double p = count / static_cast<double>(replicates);
  const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(replicates));
  const double base = std::pow(radius, static_cast<double>(d)) * density.sup_norm() *
                      unit_ball_volume(static_cast<int>(d));
  const double bound = std::pow(static_cast<double>(i), i - 2) * std::pow(base, i - 1);
  CheckResult out;
  out.name = "connectivity_i" + std::to_string(i) + "_r" + std::to_string(radius);
  out.acceptance = true;
  out.passed = p <= bound + std_errors * se;
  out.details = {{"i", i}, {"radius", radius}, {"empirical", p}, {"std_error", se},
                 {"bound", bound}, {"replicates", replicates}, {"seed", seed}};
  return out;
}

ExperimentResult run_experiment(const RegimeConfig& config) {
  ExperimentResult out;
  out.summary = run_regime(config);
  auto mismatches = nlohmann::json::array();
  bool identity = true;
  for (const auto& run : out.summary.runs) {
    mismatches.push_back(run.census_mismatches);
    identity = identity && run.census_mismatches == 0;
  }
  switch (config.regime) {
    case Regime::Sparse: {
      const auto c = sparse_constants(config);
      out.report = check_sparse_clt(out.summary, c);
      out.constants = {{"mu", to_json(c.mu)}};
      break;
    }
    case Regime::Critical: {
      const auto c = critical_constants(config);
      out.report = check_critical(out.summary, c);
      auto classes = nlohmann::json::array();
      for (const auto& [key, est] : c.eta_class)
        classes.push_back(to_json(est, "eta", {{"i", key.first}, {"j1", key.second}, {"j2", key.second},
                                               {"t1", c.t}, {"t2", c.t}}));
      out.constants = {{"eta", classes},
                       {"phi", to_json(c.phi.total, "phi_truncated", {{"M", config.M}, {"t1", c.t}, {"t2", c.t}})},
                       {"phi_eta_part", to_json(c.phi.eta_part, "phi_eta_part", {{"M", config.M}})},
                       {"phi_nu_part", to_json(c.phi.nu_part, "phi_nu_part", {{"M", config.M}})},
                       {"eta_sum", to_json(c.eta_sum, "eta_mean_sum", {{"M", config.M}, {"t", c.t}})}};
      break;
    }
    case Regime::Poisson: {
      const auto c = poisson_constants(config);
      out.report = check_poisson(out.summary, c);
      out.constants = {{"d1_plus", to_json(c.d_plus, "d1_volume", {{"sign", "+"}, {"k", config.k}})},
                       {"d1_minus", to_json(c.d_minus, "d1_volume", {{"sign", "-"}, {"k", config.k}})},
                       {"c_f_k", c.c_f_k},
                       {"lambda", c.lambda}};
      break;
    }
  }
  out.report.checks.insert(out.report.checks.begin(),
                           CheckResult{"census_identity", identity, true,
                                       {{"mismatched_replicates", mismatches}}});
  return out;
}

nlohmann::json summary_to_json(const RegimeSummary& summary) {
  const auto& cfg = summary.config;
  nlohmann::json runs = nlohmann::json::array();
  for (const auto& run : summary.runs) {
    nlohmann::json per_t = nlohmann::json::array();
    for (std::size_t a = 0; a < cfg.grid.size(); ++a) {
      nlohmann::json classes = nlohmann::json::array();
      for (const auto& [key, counts] : run.U[a]) {
        std::vector<double> xs(counts.begin(), counts.end());
        classes.push_back({{"i", key.first}, {"j", key.second}, {"mean", moments(xs).mean}});
      }
      per_t.push_back({{"t", cfg.grid[a]},
                       {"beta", moments_json(moments(run.column(run.beta, a)))},
                       {"S", moments_json(moments(run.column(run.S, a)))},
                       {"R", moments_json(moments(run.column(run.R, a)))},
                       {"beta_M", moments_json(moments(run.column(run.beta_M, a)))},
                       {"U_means", classes}});
    }
    const auto cov = run.beta_covariance();
    runs.push_back({{"n", run.n},
                    {"s_n", run.scale},
                    {"rho_n", run.rho},
                    {"replicates", run.replicates()},
                    {"census_mismatches", run.census_mismatches},
                    {"beta_covariance", cov ? nlohmann::json(*cov) : nlohmann::json(nullptr)},
                    {"per_t", per_t}});
  }
  return {{"regime", to_string(cfg.regime)}, {"d", cfg.dim()}, {"k", cfg.k},
          {"M", cfg.M}, {"seed", cfg.seed}, {"runs", runs}};
}

void write_summary_csv(std::ostream& os, const RegimeSummary& summary) {
  const auto& cfg = summary.config;
  os << "# regime=" << to_string(cfg.regime) << " d=" << cfg.dim() << " k=" << cfg.k
     << " M=" << cfg.M << " seed=" << cfg.seed << '\n';
  os << "n,t,stat,mean,variance,skewness,excess_kurtosis\n";
  for (const auto& run : summary.runs)
    for (std::size_t a = 0; a < cfg.grid.size(); ++a) {
      const std::pair<const char*, const std::vector<std::vector<long long>>*> stats[] = {
          {"beta", &run.beta}, {"S", &run.S}, {"R", &run.R}, {"beta_M", &run.beta_M}};
      for (const auto& [name, table] : stats) {
        const auto m = moments(run.column(*table, a));
        os << std::setprecision(17) << run.n << ',' << cfg.grid[a] << ',' << name << ',' << m.mean
           << ',' << m.variance << ',' << m.skewness << ',' << m.excess_kurtosis << '\n';
      }
    }
}

}  // namespace cechstat
