#include "cechstat/limit_constants.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <random>
#include <stdexcept>

#include "cechstat/cech.hpp"
#include "cechstat/homology.hpp"
#include "cechstat/parallel.hpp"

namespace cechstat {

McEstimate McAccumulator::estimate(std::uint64_t seed) const noexcept {
  McEstimate e;
  e.samples = count_;
  e.seed = seed;
  if (count_ == 0) return e;
  const double n = static_cast<double>(count_);
  e.value = sum_ / n;
  if (count_ > 1) {
    const double var = std::max(0.0, (sum_sq_ - n * e.value * e.value) / (n - 1.0));
    e.std_error = std::sqrt(var / n);
  }
  return e;
}

McEstimate combine(std::span<const McEstimate> parts, std::span<const double> weights) {
  if (parts.size() != weights.size()) throw std::invalid_argument("combine: size mismatch");
  McEstimate out;
  double var = 0.0;
  for (std::size_t a = 0; a < parts.size(); ++a) {
    out.value += weights[a] * parts[a].value;
    var += weights[a] * weights[a] * parts[a].std_error * parts[a].std_error;
    out.samples += parts[a].samples;
  }
  out.std_error = std::sqrt(var);
  if (!parts.empty()) out.seed = parts.front().seed;
  return out;
}

namespace detail {
void run_blocks(std::size_t blocks, const std::function<void(std::size_t)>& body) {
  parallel_for(blocks, body);
}
}  // namespace detail

namespace {

void uniform_in_ball(Rng& rng, const double* center, double r, std::size_t d, double* out) {
  if (d <= 3) {
    while (true) {
      double s = 0.0;
      for (std::size_t a = 0; a < d; ++a) {
        out[a] = rng.uniform(-1.0, 1.0);
        s += out[a] * out[a];
      }
      if (s <= 1.0) break;
    }
  } else {
    std::normal_distribution<double> gauss;
    double s = 0.0;
    for (std::size_t a = 0; a < d; ++a) {
      out[a] = gauss(rng);
      s += out[a] * out[a];
    }
    const double scale = std::pow(rng.uniform(), 1.0 / static_cast<double>(d)) / std::sqrt(s);
    for (std::size_t a = 0; a < d; ++a) out[a] *= scale;
  }
  for (std::size_t a = 0; a < d; ++a) out[a] = center[a] + r * out[a];
}

double sq_dist(const double* a, const double* b, std::size_t d) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double u = a[i] - b[i];
    s += u * u;
  }
  return s;
}

double ball_volume(std::size_t d, double r) {
  return unit_ball_volume(static_cast<int>(d)) * std::pow(r, static_cast<double>(d));
}

void check_k(int k, std::size_t d) {
  if (k < 1 || k >= static_cast<int>(d)) throw std::invalid_argument("requires 1 <= k < d");
}

// Product estimator for exp(-lambda * m(U)), U the union of the proposal
// balls. When `filter` is given, only the part of U inside the filter balls
// counts: the estimate targets exp(-lambda * m(U ∩ F)).
double void_product(std::span<const double> centers, std::span<const double> radii, std::size_t d,
                    double lambda, Rng& rng, std::span<const double> filter_centers = {},
                    std::span<const double> filter_radii = {}) {
  const std::size_t m = radii.size();
  if (m == 0 || lambda <= 0.0) return 1.0;
  std::array<double, 64> cumulative{};
  if (m > cumulative.size()) throw std::invalid_argument("too many balls");
  double total = 0.0;
  for (std::size_t b = 0; b < m; ++b) {
    total += ball_volume(d, radii[b]);
    cumulative[b] = total;
  }
  std::poisson_distribution<long> count_dist(lambda * total);
  const long n = count_dist(rng);
  double prod = 1.0;
  std::array<double, 16> pt{};
  for (long p = 0; p < n; ++p) {
    const double u = rng.uniform() * total;
    std::size_t b = 0;
    while (b + 1 < m && cumulative[b] <= u) ++b;
    uniform_in_ball(rng, centers.data() + b * d, radii[b], d, pt.data());
    int cover = 0;
    for (std::size_t c = 0; c < m; ++c)
      if (sq_dist(pt.data(), centers.data() + c * d, d) <= radii[c] * radii[c]) ++cover;
    bool inside = true;
    if (!filter_radii.empty()) {
      inside = false;
      for (std::size_t c = 0; c < filter_radii.size() && !inside; ++c)
        inside = sq_dist(pt.data(), filter_centers.data() + c * d, d) <= filter_radii[c] * filter_radii[c];
    }
    if (inside) prod *= 1.0 - 1.0 / cover;
    if (prod == 0.0) break;
  }
  return prod;
}

// Sum over orders of the points (first point drawn from `root`) of the
// product of prefix degrees, by dynamic programming over subsets. With the
// tree proposal this yields the order-averaged proposal density.
double order_weight(const double* pts, std::size_t n, std::size_t d, double t,
                    std::span<const double> root) {
  const double t2 = t * t;
  std::array<std::uint32_t, 16> nb{};
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b)
      if (sq_dist(pts + a * d, pts + b * d, d) <= t2) {
        nb[a] |= 1U << b;
        nb[b] |= 1U << a;
      }
  const std::uint32_t full = (1U << n) - 1;
  std::vector<double> F(std::size_t{1} << n, 0.0);
  for (std::size_t v = 0; v < n; ++v) F[1U << v] = root[v];
  for (std::uint32_t S = 1; S <= full; ++S) {
    if (std::popcount(S) < 2) continue;
    double acc = 0.0;
    for (std::uint32_t bits = S; bits; bits &= bits - 1) {
      const auto v = static_cast<std::size_t>(std::countr_zero(bits));
      const std::uint32_t rest = S & ~(1U << v);
      if (F[rest] == 0.0) continue;
      acc += F[rest] * std::popcount(nb[v] & rest);
    }
    F[S] = acc;
  }
  return F[full];
}

// Grows points[first..n) as a random recursive tree: each new point is
// uniform in the radius-t ball around a uniformly chosen earlier point.
void grow_tree(Rng& rng, double* pts, std::size_t first, std::size_t n, std::size_t d, double t) {
  for (std::size_t m = first; m < n; ++m) {
    const std::size_t parent = static_cast<std::size_t>(rng.uniform() * static_cast<double>(m));
    uniform_in_ball(rng, pts + parent * d, t, d, pts + m * d);
  }
}

bool connected(const double* pts, std::size_t n, std::size_t d, double t) {
  DisjointSets sets(n);
  const double t2 = t * t;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b)
      if (sq_dist(pts + a * d, pts + b * d, d) <= t2) sets.unite(a, b);
  return sets.components() == 1;
}

int betti_k(const double* pts, std::size_t n, std::size_t d, int k, double t) {
  if (n < static_cast<std::size_t>(k) + 2) return 0;
  return betti_of_points({pts, n * d}, d, k, t);
}

double j_weight(int j, int beta) {
  if (j == kBettiWeight) return beta;
  return beta == j ? 1.0 : 0.0;
}

// Weight choice for the two Betti factors of a cluster integrand.
struct PairWeight {
  int j1;
  int j2;
  bool single = false;  // only the first factor (mean of beta at t1 = t2)
  double operator()(int b1, int b2) const {
    if (single) return j_weight(j1, b1);
    return j_weight(j1, b1) * j_weight(j2, b2);
  }
};

double factorial_u(std::size_t n) { return factorial(static_cast<int>(n)); }

McEstimate eta_core(int k, int i, PairWeight weight, double t1, double t2, const Density& density,
                    const Box& region, std::size_t samples, std::uint64_t seed,
                    const ClusterOptions& opt) {
  const std::size_t d = density.dim();
  check_k(k, d);
  if (i < k + 2) throw std::invalid_argument("eta requires i >= k+2");
  if (i > 15) throw std::invalid_argument("eta supports i <= 15");
  const double lo = std::min(t1, t2);
  const double hi = std::max(t1, t2);
  if (!(lo > 0.0)) return McEstimate{0.0, 0.0, samples, seed};
  const auto n = static_cast<std::size_t>(i);
  const double free_pts = static_cast<double>(n - 1);
  const double ball_t = ball_volume(d, lo);
  const double tree_norm = factorial_u(n - 1) * factorial_u(n - 1) * std::pow(ball_t, free_pts);
  const double half = opt.box_scale * free_pts * hi;
  const double box_volume = std::pow(2.0 * half, static_cast<double>(d) * free_pts);
  const double void_r = opt.void_form == VoidForm::Derived ? hi : 1.0;
  const double lambda_scale = opt.void_form == VoidForm::Derived ? 1.0 : std::pow(hi, static_cast<double>(d));
  std::vector<double> root(n, 0.0);
  root[0] = 1.0;

  return monte_carlo(samples, seed, [&](Rng& rng) {
    std::array<double, 16> x{};
    density.sample_point(rng, {x.data(), d});
    if (!region.contains({x.data(), d})) return 0.0;
    const double fx = density.evaluate({x.data(), d});
    double w = std::pow(fx, free_pts);

    std::array<double, 16 * 16> pts{};
    if (opt.sampler == ClusterSampler::Tree) {
      grow_tree(rng, pts.data(), 1, n, d, lo);
      w *= tree_norm / order_weight(pts.data(), n, d, lo, root);
    } else {
      for (std::size_t a = d; a < n * d; ++a) pts[a] = rng.uniform(-half, half);
      if (!connected(pts.data(), n, d, lo)) return 0.0;
      w *= box_volume;
    }
    const int b1 = betti_k(pts.data(), n, d, k, t1);
    const int b2 = t1 == t2 ? b1 : betti_k(pts.data(), n, d, k, t2);
    w *= weight(b1, b2);
    if (w == 0.0) return 0.0;

    std::vector<double> radii(n, void_r);
    double v = 0.0;
    for (int r = 0; r < opt.inner; ++r)
      v += void_product({pts.data(), n * d}, radii, d, fx * lambda_scale, rng);
    return w * v / opt.inner;
  });
}

McEstimate nu_core(int k, int i1, int i2, PairWeight weight, double t1, double t2,
                   const Density& density, const Box& region, std::size_t samples,
                   std::uint64_t seed, const ClusterOptions& opt) {
  const std::size_t d = density.dim();
  check_k(k, d);
  if (i1 < k + 2 || i2 < k + 2) throw std::invalid_argument("nu requires i1, i2 >= k+2");
  if (i1 + i2 > 16) throw std::invalid_argument("nu supports i1 + i2 <= 16");
  if (!(t1 > 0.0) || !(t2 > 0.0)) return McEstimate{0.0, 0.0, samples, seed};
  const auto n1 = static_cast<std::size_t>(i1);
  const auto n2 = static_cast<std::size_t>(i2);
  const double reach = t1 + static_cast<double>(n2) * t2;
  const double reach_volume = ball_volume(d, reach);
  const double norm1 =
      factorial_u(n1 - 1) * factorial_u(n1 - 1) * std::pow(ball_volume(d, t1), static_cast<double>(n1 - 1));
  const double norm2 =
      factorial_u(n2) * factorial_u(n2 - 1) * std::pow(ball_volume(d, t2), static_cast<double>(n2 - 1));
  std::vector<double> root1(n1, 0.0);
  root1[0] = 1.0;

  return monte_carlo(samples, seed, [&](Rng& rng) {
    std::array<double, 16> x{};
    density.sample_point(rng, {x.data(), d});
    if (!region.contains({x.data(), d})) return 0.0;
    const double fx = density.evaluate({x.data(), d});
    double w = std::pow(fx, static_cast<double>(n1 + n2 - 1));

    std::array<double, 16 * 16> c1{};
    std::array<double, 16 * 16> c2{};
    grow_tree(rng, c1.data(), 1, n1, d, t1);
    const std::size_t anchor = static_cast<std::size_t>(rng.uniform() * static_cast<double>(n1));
    uniform_in_ball(rng, c1.data() + anchor * d, reach, d, c2.data());
    grow_tree(rng, c2.data(), 1, n2, d, t2);

    const int b1 = betti_k(c1.data(), n1, d, k, t1);
    const int b2 = betti_k(c2.data(), n2, d, k, t2);
    w *= weight(b1, b2);
    if (w == 0.0) return 0.0;

    const double bracket =
        nu_bracket({c1.data(), n1 * d}, {c2.data(), n2 * d}, d, t1, t2, fx, opt.inner, rng);
    if (bracket == 0.0) return 0.0;

    std::vector<double> root2(n2);
    const double reach_sq = reach * reach;
    for (std::size_t v = 0; v < n2; ++v) {
      int cover = 0;
      for (std::size_t a = 0; a < n1; ++a)
        if (sq_dist(c2.data() + v * d, c1.data() + a * d, d) <= reach_sq) ++cover;
      root2[v] = cover / (static_cast<double>(n1) * reach_volume);
    }
    const double q1 = order_weight(c1.data(), n1, d, t1, root1) / norm1;
    const double q2 = order_weight(c2.data(), n2, d, t2, root2) / norm2;
    return w * bracket / (q1 * q2);
  });
}

}  // namespace

double nu_bracket(std::span<const double> c1, std::span<const double> c2, std::size_t d, double t1,
                  double t2, double f, int inner, Rng& rng) {
  const std::size_t n1 = c1.size() / d;
  const std::size_t n2 = c2.size() / d;
  double min_sq = kInfinity;
  for (std::size_t a = 0; a < n1; ++a)
    for (std::size_t b = 0; b < n2; ++b)
      min_sq = std::min(min_sq, sq_dist(c1.data() + a * d, c2.data() + b * d, d));
  const double gap = std::sqrt(min_sq);
  const double alpha_touch = gap <= t1 + t2 ? 1.0 : 0.0;
  const double alpha_merge = gap <= std::max(t1, t2) ? 1.0 : 0.0;
  if (alpha_touch == 0.0) return 0.0;

  std::vector<double> all(c1.begin(), c1.end());
  all.insert(all.end(), c2.begin(), c2.end());
  std::vector<double> radii(n1 + n2, t1);
  std::fill(radii.begin() + static_cast<std::ptrdiff_t>(n1), radii.end(), t2);
  const std::span<const double> r1(radii.data(), n1);
  const std::span<const double> r2(radii.data() + n1, n2);
  // union void and overlap void are estimated independently, so the
  // product of their means is unbiased
  double acc = 0.0;
  for (int r = 0; r < inner; ++r) {
    const double union_void = void_product(all, radii, d, f, rng);
    const double overlap_void = void_product(c1, r1, d, f, rng, c2, r2);
    acc += alpha_touch * union_void * (1.0 - overlap_void) - alpha_merge * union_void;
  }
  return acc / inner;
}

double void_probability_estimate(std::span<const double> centers, std::span<const double> radii,
                                 std::size_t d, double lambda, Rng& rng) {
  if (centers.size() != radii.size() * d) throw std::invalid_argument("centers/radii mismatch");
  return void_product(centers, radii, d, lambda, rng);
}

McEstimate volume_D(int k, std::size_t d, Sign sign, double t, std::size_t samples,
                    std::uint64_t seed) {
  check_k(k, d);
  if (!(t > 0.0)) return McEstimate{0.0, 0.0, samples, seed};
  const auto m = static_cast<std::size_t>(k) + 2;
  const double volume = std::pow(ball_volume(d, t), static_cast<double>(k + 1));
  const double zero[16] = {};
  return monte_carlo(samples, seed, [&](Rng& rng) {
    std::array<double, 16 * 16> pts{};
    for (std::size_t p = 1; p < m; ++p) uniform_in_ball(rng, zero, t, d, pts.data() + p * d);
    const std::span<const double> y(pts.data(), m * d);
    const int ind = sign == Sign::Plus ? h_plus(y, d, k, t) : h_minus(y, d, k, t);
    return volume * ind;
  });
}

McEstimate volume_D1(int k, std::size_t d, Sign sign, std::size_t samples, std::uint64_t seed) {
  return volume_D(k, d, sign, 1.0, samples, seed);
}

McEstimate mu(int k, const Box& region, double t1, double t2, const Density& density,
              std::size_t samples, std::uint64_t seed) {
  const std::size_t d = density.dim();
  check_k(k, d);
  if (!(t1 > 0.0) || !(t2 > 0.0)) return McEstimate{0.0, 0.0, samples, seed};
  const double factor = density.integral_of_power(k + 2, region) / factorial(k + 2);
  const double T = std::max(t1, t2);
  const auto m = static_cast<std::size_t>(k) + 2;
  const double volume = std::pow(ball_volume(d, T), static_cast<double>(k + 1));
  const double zero[16] = {};
  return monte_carlo(samples, seed, [&](Rng& rng) {
    std::array<double, 16 * 16> pts{};
    for (std::size_t p = 1; p < m; ++p) uniform_in_ball(rng, zero, T, d, pts.data() + p * d);
    const auto th = empty_simplex_thresholds({pts.data(), m * d}, d, k);
    const bool a = th.plus <= t1 && t1 < th.minus;
    const bool b = th.plus <= t2 && t2 < th.minus;
    return (a && b) ? factor * volume : 0.0;
  });
}

McEstimate union_ball_volume(std::span<const double> centers, std::size_t d, double r,
                             std::size_t samples, std::uint64_t seed) {
  if (!(r > 0.0)) throw std::invalid_argument("union_ball_volume requires r > 0");
  if (d == 0 || centers.size() % d != 0) throw std::invalid_argument("bad centers");
  const std::size_t m = centers.size() / d;
  if (m == 0) return McEstimate{0.0, 0.0, samples, seed};
  std::vector<double> lo(d, kInfinity), hi(d, -kInfinity);
  for (std::size_t p = 0; p < m; ++p)
    for (std::size_t a = 0; a < d; ++a) {
      lo[a] = std::min(lo[a], centers[p * d + a] - r);
      hi[a] = std::max(hi[a], centers[p * d + a] + r);
    }
  double box = 1.0;
  for (std::size_t a = 0; a < d; ++a) box *= hi[a] - lo[a];
  const double r2 = r * r;
  return monte_carlo(samples, seed, [&](Rng& rng) {
    std::array<double, 16> pt{};
    for (std::size_t a = 0; a < d; ++a) pt[a] = rng.uniform(lo[a], hi[a]);
    for (std::size_t p = 0; p < m; ++p)
      if (sq_dist(pt.data(), centers.data() + p * d, d) <= r2) return box;
    return 0.0;
  });
}

McEstimate eta(int k, int i, int j1, int j2, double t1, double t2, const Density& density,
               const Box& region, std::size_t samples, std::uint64_t seed,
               const ClusterOptions& options) {
  const int cap = static_cast<int>(binomial(i, k + 1));
  if ((j1 != kBettiWeight && (j1 < 1 || j1 > cap)) || (j2 != kBettiWeight && (j2 < 1 || j2 > cap)))
    throw std::invalid_argument("eta requires 1 <= j <= C(i, k+1)");
  return eta_core(k, i, PairWeight{j1, j2}, t1, t2, density, region, samples, seed, options);
}

McEstimate nu(int k, int i1, int i2, int j1, int j2, double t1, double t2,
              const Density& density, const Box& region, std::size_t samples,
              std::uint64_t seed, const ClusterOptions& options) {
  if ((j1 != kBettiWeight && (j1 < 1 || j1 > static_cast<int>(binomial(i1, k + 1)))) ||
      (j2 != kBettiWeight && (j2 < 1 || j2 > static_cast<int>(binomial(i2, k + 1)))))
    throw std::invalid_argument("nu requires 1 <= j <= C(i, k+1)");
  return nu_core(k, i1, i2, PairWeight{j1, j2}, t1, t2, density, region, samples, seed, options);
}

McEstimate eta_mean_sum(int k, int M, double t, const Density& density, const Box& region,
                        std::size_t samples, std::uint64_t seed, const ClusterOptions& options) {
  if (M < k + 2) throw std::invalid_argument("eta_mean_sum requires M >= k+2");
  std::vector<McEstimate> parts;
  std::vector<double> weights;
  for (int i = k + 2; i <= M; ++i) {
    parts.push_back(eta_core(k, i, PairWeight{kBettiWeight, kBettiWeight, true}, t, t, density,
                             region, samples, derive_seed(seed, static_cast<std::uint64_t>(i)),
                             options));
    weights.push_back(1.0 / factorial(i));
  }
  auto out = combine(parts, weights);
  out.seed = seed;
  return out;
}

PhiEntry phi_entry(int M, int k, double t1, double t2, const Density& density, const Box& region,
                   std::size_t samples, std::uint64_t seed, const ClusterOptions& options) {
  if (M < k + 2) throw std::invalid_argument("phi requires M >= k+2");
  const PairWeight both{kBettiWeight, kBettiWeight};
  std::vector<McEstimate> eta_parts, nu_parts;
  std::vector<double> eta_w, nu_w;
  for (int i = k + 2; i <= M; ++i) {
    eta_parts.push_back(eta_core(k, i, both, t1, t2, density, region, samples,
                                 derive_seed(seed, 1, static_cast<std::uint64_t>(i)), options));
    eta_w.push_back(1.0 / factorial(i));
  }
  for (int i1 = k + 2; i1 <= M; ++i1)
    for (int i2 = k + 2; i2 <= M; ++i2) {
      nu_parts.push_back(nu_core(k, i1, i2, both, t1, t2, density, region, samples,
                                 derive_seed(seed, 2, static_cast<std::uint64_t>(i1 * 64 + i2)),
                                 options));
      nu_w.push_back(1.0 / (factorial(i1) * factorial(i2)));
    }
  PhiEntry e;
  e.eta_part = combine(eta_parts, eta_w);
  e.nu_part = combine(nu_parts, nu_w);
  const McEstimate both_parts[2] = {e.eta_part, e.nu_part};
  const double ones[2] = {1.0, 1.0};
  e.total = combine(both_parts, ones);
  e.eta_part.seed = e.nu_part.seed = e.total.seed = seed;
  return e;
}

LimitCovariance phi_truncated(int M, int k, std::span<const double> grid, const Density& density,
                              const Box& region, std::size_t samples, std::uint64_t seed,
                              const ClusterOptions& options) {
  LimitCovariance out;
  out.grid.assign(grid.begin(), grid.end());
  out.regime = "critical";
  const std::size_t g = grid.size();
  out.values.assign(g, std::vector<double>(g, 0.0));
  out.std_errors.assign(g, std::vector<double>(g, 0.0));
  for (std::size_t a = 0; a < g; ++a)
    for (std::size_t b = a; b < g; ++b) {
      const auto e = phi_entry(M, k, grid[a], grid[b], density, region, samples,
                               derive_seed(seed, a, b), options);
      out.values[a][b] = out.values[b][a] = e.total.value;
      out.std_errors[a][b] = out.std_errors[b][a] = e.total.std_error;
    }
  return out;
}

LimitCovariance mu_matrix(int k, std::span<const double> grid, const Density& density,
                          const Box& region, std::size_t samples, std::uint64_t seed) {
  LimitCovariance out;
  out.grid.assign(grid.begin(), grid.end());
  out.regime = "sparse";
  const std::size_t g = grid.size();
  out.values.assign(g, std::vector<double>(g, 0.0));
  out.std_errors.assign(g, std::vector<double>(g, 0.0));
  for (std::size_t a = 0; a < g; ++a)
    for (std::size_t b = a; b < g; ++b) {
      const auto e = mu(k, region, grid[a], grid[b], density, samples, derive_seed(seed, a, b));
      out.values[a][b] = out.values[b][a] = e.value;
      out.std_errors[a][b] = out.std_errors[b][a] = e.std_error;
    }
  return out;
}

nlohmann::json to_json(const McEstimate& e, const std::string& name, const nlohmann::json& params) {
  return nlohmann::json{{"name", name},          {"params", params},   {"value", e.value},
                        {"std_error", e.std_error}, {"samples", e.samples}, {"seed", e.seed}};
}

nlohmann::json to_json(const LimitCovariance& c) {
  return nlohmann::json{{"grid", c.grid},
                        {"values", c.values},
                        {"std_errors", c.std_errors},
                        {"regime", c.regime}};
}

}  // namespace cechstat
