#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cechstat/pointproc.hpp"

namespace cechstat {

struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
};

/// Sum of independent estimates scaled by `weights`.
McEstimate combine(std::span<const McEstimate> parts, std::span<const double> weights);

/// Accumulates i.i.d. evaluations in fixed blocks so the result does not
/// depend on how blocks were spread over threads.
class McAccumulator {
 public:
  void add(double v) noexcept {
    sum_ += v;
    sum_sq_ += v * v;
    ++count_;
  }
  void merge(const McAccumulator& other) noexcept {
    sum_ += other.sum_;
    sum_sq_ += other.sum_sq_;
    count_ += other.count_;
  }
  McEstimate estimate(std::uint64_t seed) const noexcept;

 private:
  double sum_ = 0.0;
  double sum_sq_ = 0.0;
  std::size_t count_ = 0;
};

/// Evaluates sample(rng) `samples` times with per-block streams of `seed`
/// and returns the mean with its standard error.
template <typename Sample>
McEstimate monte_carlo(std::size_t samples, std::uint64_t seed, Sample&& sample);

enum class Sign { Plus, Minus };

/// m_k(D_1^±): volume of {y in R^{d(k+1)} : h_1^±(0, y) = 1}.
McEstimate volume_D1(int k, std::size_t d, Sign sign, std::size_t samples, std::uint64_t seed);

/// Same set at radius t, i.e. m_k(D_t^±), sampled on B(0, t)^{k+1}.
McEstimate volume_D(int k, std::size_t d, Sign sign, double t, std::size_t samples,
                    std::uint64_t seed);

/// mu_{k,A}(t1, t2) = (k+2)!^{-1} int_A f^{k+2} * int h_{t1}(0,y) h_{t2}(0,y) dy.
McEstimate mu(int k, const Box& region, double t1, double t2, const Density& density,
              std::size_t samples, std::uint64_t seed);

/// Lebesgue measure of the union of radius-r balls, by Monte Carlo over the
/// bounding box of the union.
McEstimate union_ball_volume(std::span<const double> centers, std::size_t d, double r,
                             std::size_t samples, std::uint64_t seed);

/// How the void factor of eta is written. Derived: exp(-f(x) m(B({0,y}; t∨)));
/// Literal: exp(-t∨^d f(x) m(B({0,y}; 1))).
enum class VoidForm { Derived, Literal };

/// Proposal for the relative positions y of a connected cluster.
///  - Tree: each new point uniform in the ball of radius t around a
///    uniformly chosen earlier point; weights use the density averaged over
///    point orders, so every connected configuration is covered.
///  - Box: uniform on [-(i-1)t∨, (i-1)t∨]^{d(i-1)}.
enum class ClusterSampler { Tree, Box };

struct ClusterOptions {
  VoidForm void_form = VoidForm::Derived;
  ClusterSampler sampler = ClusterSampler::Tree;
  /// Independent replicates of the (unbiased) void-probability estimator
  /// averaged per outer sample.
  int inner = 32;
  /// Box sampler half-width multiplier on (i-1)t∨.
  double box_scale = 1.0;
};

/// Selects which Betti-number weight multiplies the cluster integrand.
/// j > 0 gives the indicator b_{j,t}; kBettiWeight gives beta_k itself, i.e.
/// the sum over j of j b_{j,t}.
constexpr int kBettiWeight = -1;

/// eta_{k,A}^{(i,j1,j2)}(t1, t2).
McEstimate eta(int k, int i, int j1, int j2, double t1, double t2, const Density& density,
               const Box& region, std::size_t samples, std::uint64_t seed,
               const ClusterOptions& options = {});

/// nu_{k,A}^{(i1,i2,j1,j2)}(t1, t2).
McEstimate nu(int k, int i1, int i2, int j1, int j2, double t1, double t2,
              const Density& density, const Box& region, std::size_t samples,
              std::uint64_t seed, const ClusterOptions& options = {});

/// Sum over i <= M and j of (j / i!) eta^{(i,j,j)}(t, t): the limit of
/// n^{-1} E[beta^{(M)}(t)] in the critical regime.
McEstimate eta_mean_sum(int k, int M, double t, const Density& density, const Box& region,
                        std::size_t samples, std::uint64_t seed,
                        const ClusterOptions& options = {});

struct LimitCovariance {
  std::vector<double> grid;
  std::vector<std::vector<double>> values;
  std::vector<std::vector<double>> std_errors;
  std::string regime;
};

/// Phi^{(M)}_{k,A}(t_a, t_b) on `grid`. Entry (a, b) and (b, a) share one
/// estimate, so the matrix is exactly symmetric.
LimitCovariance phi_truncated(int M, int k, std::span<const double> grid, const Density& density,
                              const Box& region, std::size_t samples, std::uint64_t seed,
                              const ClusterOptions& options = {});

/// One entry of Phi^{(M)} with its eta and nu parts.
struct PhiEntry {
  McEstimate total;
  McEstimate eta_part;
  McEstimate nu_part;
};
PhiEntry phi_entry(int M, int k, double t1, double t2, const Density& density, const Box& region,
                   std::size_t samples, std::uint64_t seed, const ClusterOptions& options = {});

/// mu(t_a, t_b) matrix for the sparse regime, one estimate per unordered pair.
LimitCovariance mu_matrix(int k, std::span<const double> grid, const Density& density,
                          const Box& region, std::size_t samples, std::uint64_t seed);

/// Unbiased estimate of exp(-lambda * m(union of balls)). Balls are given as
/// flat centers with one radius each. Poisson-product estimator: with
/// N ~ Poisson(lambda * total ball volume) proposal points, each drawn from
/// a ball chosen by volume, the product of (1 - 1/coverage) has the target
/// mean and lies in [0, 1].
double void_probability_estimate(std::span<const double> centers, std::span<const double> radii,
                                 std::size_t d, double lambda, Rng& rng);

/// Unbiased estimate of the bracket of the nu integrand for two fixed
/// clusters with ball radii t1 and t2 at void intensity f:
/// a_{t1,t2} e^{-f m(U1 ∪ U2)} (1 - e^{-f m(U1 ∩ U2)}) - a_{t1∨t2} e^{-f m(U1 ∪ U2)},
/// where a_{r,s} is 1 iff the two ball unions meet. Zero, without drawing,
/// when the clusters are too far apart to touch.
double nu_bracket(std::span<const double> c1, std::span<const double> c2, std::size_t d, double t1,
                  double t2, double f, int inner, Rng& rng);

nlohmann::json to_json(const McEstimate& e, const std::string& name, const nlohmann::json& params);
nlohmann::json to_json(const LimitCovariance& c);

// ---------------------------------------------------------------------------

namespace detail {
constexpr std::size_t kMcBlock = 2048;
void run_blocks(std::size_t blocks, const std::function<void(std::size_t)>& body);
}  // namespace detail

template <typename Sample>
McEstimate monte_carlo(std::size_t samples, std::uint64_t seed, Sample&& sample) {
  const std::size_t blocks = (samples + detail::kMcBlock - 1) / detail::kMcBlock;
  std::vector<McAccumulator> acc(blocks);
  detail::run_blocks(blocks, [&](std::size_t b) {
    Rng rng = Rng::stream(seed, b);
    const std::size_t lo = b * detail::kMcBlock;
    const std::size_t hi = std::min(samples, lo + detail::kMcBlock);
    for (std::size_t s = lo; s < hi; ++s) acc[b].add(sample(rng));
  });
  McAccumulator total;
  for (const auto& a : acc) total.merge(a);
  return total.estimate(seed);
}

}  // namespace cechstat
