#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "cechstat/betti_process.hpp"
#include "cechstat/limit_constants.hpp"
#include "cechstat/limit_process.hpp"

namespace cechstat {

enum class Regime { Sparse, Critical, Poisson };

std::string to_string(Regime regime);
Regime regime_from_string(const std::string& name);

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A simplex budget overflow, tagged with the run that hit it.
class BudgetError : public std::runtime_error {
 public:
  BudgetError(const std::string& what, double n, std::size_t replicate)
      : std::runtime_error(what), n(n), replicate(replicate) {}
  double n;
  std::size_t replicate;
};

/// Pass/fail thresholds of the regime checks.
struct Thresholds {
  double sparse_mean_rel = 0.15;
  double sparse_var_rel = 0.15;
  double sparse_skewness = 0.25;
  double sparse_excess_kurtosis = 0.5;
  double critical_mean_rel = 0.10;
  double critical_var_rel = 0.20;
  double poisson_mean_rel = 0.10;
  double poisson_min_p = 0.01;
  double connectivity_std_errors = 3.0;
};

/// Monte Carlo budgets of the limit constants used by the checks.
struct ConstantBudget {
  std::size_t mu_samples = 1'000'000;
  std::size_t volume_samples = 1'000'000;
  std::size_t eta_samples = 200'000;
  ClusterOptions cluster;
  /// Paths drawn from the limiting process; 0 means as many as replicates.
  std::size_t limit_replicates = 0;
};

struct RegimeConfig {
  Regime regime = Regime::Sparse;
  int k = 1;
  Density density = Density::uniform_cube(2);
  std::vector<double> n_list;
  /// Sparse schedule s_n = n^{-gamma}.
  double gamma = 0.65;
  std::vector<double> grid;
  /// Grid point used by the single-t checks (sparse and critical).
  double check_t = 1.0;
  std::size_t replicates = 100;
  int M = 4;
  std::uint64_t seed = 1;
  std::size_t budget = kDefaultSimplexBudget;
  Thresholds thresholds;
  ConstantBudget constants;

  std::size_t dim() const noexcept { return density.dim(); }
  double scale(double n) const;
  /// rho_n = n^{k+2} s_n^{d(k+1)}.
  double rho(double n) const;
  /// (e ||f|| theta_d)^{-1/d}.
  double clt_bound() const;
  /// Throws ConfigError when the schedule or grid breaks the regime's
  /// assumptions.
  void validate() const;
};

struct Moments {
  std::size_t count = 0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased; 0 if count < 2
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
};

Moments moments(const std::vector<double>& xs);

/// Per-replicate observations for one n, indexed [replicate][grid point].
struct NRun {
  double n = 0.0;
  double scale = 0.0;
  double rho = 0.0;
  std::vector<std::vector<long long>> beta;
  std::vector<std::vector<long long>> S;
  std::vector<std::vector<long long>> R;
  std::vector<std::vector<long long>> beta_M;
  /// Per grid point: (i, j) -> per-replicate U_{i,j} counts.
  std::vector<std::map<std::pair<std::size_t, int>, std::vector<long long>>> U;
  /// Replicates where the census total disagreed with the barcode curve.
  std::size_t census_mismatches = 0;

  std::size_t replicates() const noexcept { return beta.size(); }
  std::vector<double> column(const std::vector<std::vector<long long>>& table, std::size_t a) const;
  /// Sample covariance of beta across the grid; empty if fewer than two
  /// replicates.
  std::optional<std::vector<std::vector<double>>> beta_covariance() const;
};

struct RegimeSummary {
  RegimeConfig config;
  std::vector<NRun> runs;
};

/// R replications per n. Replicate r of the a-th n samples its cloud from
/// stream (seed, a, r); folds run in replicate order.
RegimeSummary run_regime(const RegimeConfig& config);

struct CheckResult {
  std::string name;
  bool passed = false;
  bool acceptance = false;
  nlohmann::json details;
};

struct Report {
  std::string regime;
  std::vector<CheckResult> checks;
  std::vector<std::string> notices;

  bool acceptance_passed() const;
  nlohmann::json to_json() const;
};

struct SparseConstants {
  LimitCovariance mu;
};
SparseConstants sparse_constants(const RegimeConfig& config);
Report check_sparse_clt(const RegimeSummary& summary, const SparseConstants& constants);

struct CriticalConstants {
  double t = 0.0;
  /// eta^{(i,j,j)}(t, t) for k+2 <= i <= M, 1 <= j <= C(i, k+1).
  std::map<std::pair<std::size_t, int>, McEstimate> eta_class;
  PhiEntry phi;
  /// Sum over i <= M, j of (j / i!) eta^{(i,j,j)}(t, t).
  McEstimate eta_sum;
};
CriticalConstants critical_constants(const RegimeConfig& config);
Report check_critical(const RegimeSummary& summary, const CriticalConstants& constants);

struct PoissonConstants {
  McEstimate d_plus;
  McEstimate d_minus;
  double c_f_k = 0.0;
  /// lambda(t) = C_{f,k} (m(D_1^+) - m(D_1^-)) t^{d(k+1)} per grid point.
  std::vector<double> lambda;
  std::vector<SignedPaths> v_paths;
};
PoissonConstants poisson_constants(const RegimeConfig& config);
Report check_poisson(const RegimeSummary& summary, const PoissonConstants& constants);

/// lambda(t) from the two D_1 volumes.
double poisson_lambda(double c_f_k, double d_plus, double d_minus, std::size_t d, int k, double t);

/// Chi-square goodness of fit of counts against Poisson(lambda), pooling
/// tail bins until each expected count is at least 5.
struct ChiSquare {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
  std::size_t bins = 0;
};
ChiSquare poisson_chi_square(const std::vector<long long>& counts, double lambda);

/// Two-sample chi-square homogeneity test over categorical outcomes;
/// categories expected fewer than 5 times are pooled.
ChiSquare two_sample_chi_square(const std::vector<std::vector<long long>>& a,
                                const std::vector<std::vector<long long>>& b);

/// Empirical probability that i i.i.d. points from f are connected at
/// parameter r, against i^{i-2} (r^d ||f|| theta_d)^{i-1}.
CheckResult check_connectivity_bound(int i, double radius, const Density& density,
                                     std::size_t replicates, std::uint64_t seed,
                                     double std_errors = 3.0);

/// Regime run plus its checks.
struct ExperimentResult {
  RegimeSummary summary;
  Report report;
  nlohmann::json constants;
};
ExperimentResult run_experiment(const RegimeConfig& config);

nlohmann::json summary_to_json(const RegimeSummary& summary);
/// `n,t,stat,mean,variance,skewness,excess_kurtosis` rows for beta, S, R, beta_M.
void write_summary_csv(std::ostream& os, const RegimeSummary& summary);

}  // namespace cechstat
