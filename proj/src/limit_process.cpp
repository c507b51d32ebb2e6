#include "cechstat/limit_process.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <random>

#include "cechstat/cech.hpp"
#include "cechstat/parallel.hpp"

namespace cechstat {

namespace {

void check_grid(std::span<const double> grid) {
  if (grid.empty()) throw std::invalid_argument("empty grid");
  for (std::size_t a = 0; a < grid.size(); ++a) {
    if (grid[a] < 0.0) throw std::invalid_argument("grid values must be nonnegative");
    if (a > 0 && !(grid[a] > grid[a - 1])) throw std::invalid_argument("grid must be increasing");
  }
}

void uniform_in_ball(Rng& rng, double r, std::size_t d, double* out) {
  std::normal_distribution<double> gauss;
  double s = 0.0;
  for (std::size_t a = 0; a < d; ++a) {
    out[a] = gauss(rng);
    s += out[a] * out[a];
  }
  const double scale = r * std::pow(rng.uniform(), 1.0 / static_cast<double>(d)) / std::sqrt(s);
  for (std::size_t a = 0; a < d; ++a) out[a] *= scale;
}

// Returns (plus, minus) thresholds of a uniform draw on B(0, T)^{k+1}.
EmptySimplexThresholds draw_thresholds(Rng& rng, int k, std::size_t d, double T) {
  const auto m = static_cast<std::size_t>(k) + 2;
  std::vector<double> pts(m * d, 0.0);
  for (std::size_t p = 1; p < m; ++p) uniform_in_ball(rng, T, d, pts.data() + p * d);
  return empty_simplex_thresholds(pts, d, k);
}

ProcessSample make_sample(std::string tag, std::span<const double> grid, std::size_t r,
                          std::uint64_t seed) {
  ProcessSample s;
  s.process = std::move(tag);
  s.grid.assign(grid.begin(), grid.end());
  s.values.assign(grid.size(), 0.0);
  s.replicate = r;
  s.seed = seed;
  return s;
}

Eigen::VectorXd standard_normal(Rng& rng, Eigen::Index n) {
  std::normal_distribution<double> gauss;
  Eigen::VectorXd z(n);
  for (Eigen::Index a = 0; a < n; ++a) z[a] = gauss(rng);
  return z;
}

}  // namespace

CovarianceFactor factor_covariance(const Eigen::MatrixXd& cov) {
  if (cov.rows() != cov.cols()) throw std::invalid_argument("covariance must be square");
  CovarianceFactor out;
  if (cov.rows() == 0) return out;
  const Eigen::MatrixXd sym = 0.5 * (cov + cov.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
  if (solver.info() != Eigen::Success) throw IndefiniteCovariance("eigen decomposition failed");
  Eigen::VectorXd lambda = solver.eigenvalues();
  const double scale = lambda.cwiseAbs().maxCoeff();
  out.min_eigenvalue = lambda.minCoeff();
  for (Eigen::Index a = 0; a < lambda.size(); ++a) {
    if (lambda[a] >= 0.0) continue;
    if (lambda[a] < -1e-10 * scale)
      throw IndefiniteCovariance("covariance has eigenvalue " + std::to_string(lambda[a]) +
                                 " beyond the clipping tolerance");
    lambda[a] = 0.0;
    ++out.clipped;
  }
  out.root = solver.eigenvectors() * lambda.cwiseSqrt().asDiagonal();
  // a zero-variance coordinate has a zero row in any PSD matrix; keep it
  // exactly degenerate instead of carrying eigenvector round-off
  for (Eigen::Index a = 0; a < sym.rows(); ++a)
    if (sym(a, a) == 0.0) out.root.row(a).setZero();
  return out;
}

GaussianModel gaussian_model(int k, std::span<const double> grid, const Density& density,
                             std::size_t samples, std::uint64_t seed) {
  check_grid(grid);
  const std::size_t d = density.dim();
  const double C = c_f_k(density, k);
  const double T = grid.back();
  const auto g = static_cast<Eigen::Index>(grid.size());
  GaussianModel model;
  model.k = k;
  model.grid.assign(grid.begin(), grid.end());
  model.covariance = Eigen::MatrixXd::Zero(2 * g, 2 * g);
  model.std_errors = Eigen::MatrixXd::Zero(2 * g, 2 * g);
  if (!(T > 0.0) || samples == 0) return model;
  const double volume =
      std::pow(unit_ball_volume(static_cast<int>(d)) * std::pow(T, static_cast<double>(d)), k + 1);

  constexpr std::size_t block = 4096;
  const std::size_t blocks = (samples + block - 1) / block;
  std::vector<Eigen::MatrixXd> counts(blocks, Eigen::MatrixXd::Zero(2 * g, 2 * g));
  parallel_for(blocks, [&](std::size_t b) {
    Rng rng = Rng::stream(seed, b);
    Eigen::VectorXd ind(2 * g);
    const std::size_t hi = std::min(samples, (b + 1) * block);
    for (std::size_t s = b * block; s < hi; ++s) {
      const auto th = draw_thresholds(rng, k, d, T);
      for (Eigen::Index a = 0; a < g; ++a) {
        ind[a] = th.plus <= grid[static_cast<std::size_t>(a)] ? 1.0 : 0.0;
        ind[g + a] = th.minus <= grid[static_cast<std::size_t>(a)] ? 1.0 : 0.0;
      }
      if (ind[g - 1] == 0.0) continue;  // h^+ at t_max bounds every other indicator
      counts[b].noalias() += ind * ind.transpose();
    }
  });
  Eigen::MatrixXd total = Eigen::MatrixXd::Zero(2 * g, 2 * g);
  for (const auto& c : counts) total += c;
  const double n = static_cast<double>(samples);
  const Eigen::MatrixXd p = total / n;
  model.covariance = C * volume * p;
  // indicator products are Bernoulli(p)
  model.std_errors = (C * volume) * (p.array() * (1.0 - p.array()) / n).sqrt().matrix();
  return model;
}

std::vector<SignedPaths> sample_G(const GaussianModel& model, std::size_t replicates,
                                  std::uint64_t seed, CovarianceFactor* factor_out) {
  const auto factor = factor_covariance(model.covariance);
  const auto g = static_cast<Eigen::Index>(model.grid.size());
  std::vector<SignedPaths> out(replicates);
  parallel_for(replicates, [&](std::size_t r) {
    Rng rng = Rng::stream(seed, r);
    const Eigen::VectorXd x = factor.root * standard_normal(rng, 2 * g);
    auto& p = out[r];
    p.plus = make_sample("G+", model.grid, r, seed);
    p.minus = make_sample("G-", model.grid, r, seed);
    p.total = make_sample("G", model.grid, r, seed);
    for (Eigen::Index a = 0; a < g; ++a) {
      const auto ua = static_cast<std::size_t>(a);
      p.plus.values[ua] = x[a];
      p.minus.values[ua] = x[g + a];
      p.total.values[ua] = x[a] - x[g + a];
    }
  });
  if (factor_out) *factor_out = factor;
  return out;
}

std::vector<SignedPaths> sample_V(int k, std::span<const double> grid, const Density& density,
                                  std::size_t replicates, std::uint64_t seed) {
  check_grid(grid);
  const std::size_t d = density.dim();
  const double C = c_f_k(density, k);
  const double T = grid.back();
  const double mean =
      C * std::pow(unit_ball_volume(static_cast<int>(d)) * std::pow(T, static_cast<double>(d)), k + 1);
  std::vector<SignedPaths> out(replicates);
  parallel_for(replicates, [&](std::size_t r) {
    Rng rng = Rng::stream(seed, r);
    auto& p = out[r];
    p.plus = make_sample("V+", grid, r, seed);
    p.minus = make_sample("V-", grid, r, seed);
    p.total = make_sample("V", grid, r, seed);
    if (!(T > 0.0)) return;
    std::poisson_distribution<long> atoms(mean);
    const long n = atoms(rng);
    for (long a = 0; a < n; ++a) {
      const auto th = draw_thresholds(rng, k, d, T);
      for (std::size_t i = 0; i < grid.size(); ++i) {
        if (th.plus <= grid[i]) p.plus.values[i] += 1.0;
        if (th.minus <= grid[i]) p.minus.values[i] += 1.0;
      }
    }
    for (std::size_t i = 0; i < grid.size(); ++i)
      p.total.values[i] = p.plus.values[i] - p.minus.values[i];
  });
  return out;
}

std::vector<ProcessSample> sample_H_truncated(const LimitCovariance& phi, std::size_t replicates,
                                              std::uint64_t seed, CovarianceFactor* factor_out) {
  const auto g = static_cast<Eigen::Index>(phi.grid.size());
  Eigen::MatrixXd cov(g, g);
  for (Eigen::Index a = 0; a < g; ++a)
    for (Eigen::Index b = 0; b < g; ++b)
      cov(a, b) = phi.values[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
  const auto factor = factor_covariance(cov);
  std::vector<ProcessSample> out(replicates);
  parallel_for(replicates, [&](std::size_t r) {
    Rng rng = Rng::stream(seed, r);
    const Eigen::VectorXd x = factor.root * standard_normal(rng, g);
    out[r] = make_sample("H", phi.grid, r, seed);
    for (Eigen::Index a = 0; a < g; ++a) out[r].values[static_cast<std::size_t>(a)] = x[a];
  });
  if (factor_out) *factor_out = factor;
  return out;
}

void write_paths_csv(std::ostream& os, std::span<const ProcessSample> paths) {
  os << "# process=" << (paths.empty() ? std::string("none") : paths.front().process);
  if (!paths.empty()) os << " seed=" << paths.front().seed;
  os << "\nreplicate,t,value\n";
  for (const auto& p : paths)
    for (std::size_t i = 0; i < p.grid.size(); ++i)
      os << p.replicate << ',' << std::setprecision(17) << p.grid[i] << ',' << p.values[i] << '\n';
}

}  // namespace cechstat
