#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cechstat/limit_constants.hpp"
#include "cechstat/pointproc.hpp"

namespace cechstat {

/// One path of a limiting process evaluated on a grid.
struct ProcessSample {
  std::string process;  // "G", "G+", "G-", "H", "V", "V+", "V-"
  std::vector<double> grid;
  std::vector<double> values;
  std::size_t replicate = 0;
  std::uint64_t seed = 0;
};

class IndefiniteCovariance : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Square root B = V sqrt(L) with B B^T = cov after eigenvalue clipping:
/// eigenvalues down to -1e-10 * max|eigenvalue| are set to zero, anything
/// more negative throws IndefiniteCovariance. Rows of zero-variance
/// coordinates are exactly zero.
struct CovarianceFactor {
  Eigen::MatrixXd root;
  std::size_t clipped = 0;
  double min_eigenvalue = 0.0;
};
CovarianceFactor factor_covariance(const Eigen::MatrixXd& cov);

/// Covariance of (G^+(t_1..t_g), G^-(t_1..t_g)) estimated from the joint
/// indicators of D_t^± on B(0, t_max)^{k+1}: entry (a, b) is
/// C_{f,k} m(D^a ∩ D^b).
struct GaussianModel {
  int k = 0;
  std::vector<double> grid;
  Eigen::MatrixXd covariance;  // 2g x 2g, plus block first
  Eigen::MatrixXd std_errors;
};
GaussianModel gaussian_model(int k, std::span<const double> grid, const Density& density,
                             std::size_t samples, std::uint64_t seed);

struct SignedPaths {
  ProcessSample total;
  ProcessSample plus;
  ProcessSample minus;
};

/// Draws of G = G^+ - G^- jointly with its parts.
std::vector<SignedPaths> sample_G(const GaussianModel& model, std::size_t replicates,
                                  std::uint64_t seed, CovarianceFactor* factor_out = nullptr);

/// Draws of V = V^+ - V^- from one Poisson random measure with mean
/// C_{f,k} dy, restricted to B(0, t_max)^{k+1} which contains every atom
/// that can count on the grid.
std::vector<SignedPaths> sample_V(int k, std::span<const double> grid, const Density& density,
                                  std::size_t replicates, std::uint64_t seed);

/// Centered gaussian draws with covariance phi.values.
std::vector<ProcessSample> sample_H_truncated(const LimitCovariance& phi, std::size_t replicates,
                                              std::uint64_t seed,
                                              CovarianceFactor* factor_out = nullptr);

/// CSV `replicate,t,value` with the process tag in a `#` header line.
void write_paths_csv(std::ostream& os, std::span<const ProcessSample> paths);

}  // namespace cechstat
