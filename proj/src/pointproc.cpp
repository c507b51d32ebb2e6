#include "cechstat/pointproc.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/erf.hpp>

namespace cechstat {

namespace {

constexpr std::size_t kMaxRejectionAttempts = 10'000'000;
constexpr int kQuadratureNodes = 10;

using GaussRule = boost::math::quadrature::gauss<double, kQuadratureNodes>;

// Full (symmetric) Gauss-Legendre nodes and weights on [-1, 1].
struct Rule {
  std::vector<double> x;
  std::vector<double> w;
};

const Rule& legendre_rule() {
  static const Rule rule = [] {
    Rule r;
    const auto& a = GaussRule::abscissa();
    const auto& w = GaussRule::weights();
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i] == 0.0) {
        r.x.push_back(0.0);
        r.w.push_back(w[i]);
        continue;
      }
      r.x.push_back(a[i]);
      r.w.push_back(w[i]);
      r.x.push_back(-a[i]);
      r.w.push_back(w[i]);
    }
    return r;
  }();
  return rule;
}

// Integral over [lo, hi] of (phi_sigma(x) / z)^p, phi_sigma the N(0, sigma^2) pdf.
double gaussian_power_integral_1d(double sigma, double z, double p, double lo, double hi) {
  if (hi <= lo) return 0.0;
  const double c = std::pow(1.0 / (sigma * std::sqrt(2.0 * std::numbers::pi) * z), p);
  const double s = std::sqrt(p) / (sigma * std::numbers::sqrt2);
  // integral of exp(-p x^2 / (2 sigma^2)) = sqrt(pi)/(2 s) * (erf(s hi) - erf(s lo))
  const double gauss = std::sqrt(std::numbers::pi) / (2.0 * s) * (std::erf(s * hi) - std::erf(s * lo));
  return c * gauss;
}

}  // namespace

double Box::volume() const noexcept {
  double v = 1.0;
  for (std::size_t a = 0; a < lo.size(); ++a) v *= std::max(0.0, hi[a] - lo[a]);
  return v;
}

bool Box::contains(std::span<const double> x) const noexcept {
  for (std::size_t a = 0; a < lo.size(); ++a)
    if (!(x[a] >= lo[a] && x[a] < hi[a])) return false;
  return true;
}

bool Box::closed_contains(std::span<const double> x) const noexcept {
  for (std::size_t a = 0; a < lo.size(); ++a)
    if (!(x[a] >= lo[a] && x[a] <= hi[a])) return false;
  return true;
}

bool Box::empty() const noexcept {
  for (std::size_t a = 0; a < lo.size(); ++a)
    if (!(hi[a] > lo[a])) return true;
  return false;
}

Box Box::cube(std::size_t d, double lo, double hi) {
  return Box{std::vector<double>(d, lo), std::vector<double>(d, hi)};
}

std::string to_string(DensityKind kind) {
  switch (kind) {
    case DensityKind::UniformCube: return "uniform-cube";
    case DensityKind::TruncatedGaussian: return "truncated-gaussian";
    case DensityKind::CustomGrid: return "custom-grid";
  }
  return "unknown";
}

DensityKind density_kind_from_string(const std::string& name) {
  if (name == "uniform-cube") return DensityKind::UniformCube;
  if (name == "truncated-gaussian") return DensityKind::TruncatedGaussian;
  if (name == "custom-grid") return DensityKind::CustomGrid;
  throw std::invalid_argument("unknown density kind: " + name);
}

Density Density::uniform_cube(std::size_t d, double side) {
  if (d < 2) throw std::invalid_argument("density dimension must be >= 2");
  if (!(side > 0.0)) throw std::invalid_argument("cube side must be positive");
  Density f;
  f.kind_ = DensityKind::UniformCube;
  f.dim_ = d;
  f.side_ = side;
  f.support_ = Box::cube(d, 0.0, side);
  f.sup_norm_ = 1.0 / std::pow(side, static_cast<double>(d));
  return f;
}

Density Density::truncated_gaussian(std::size_t d, double scale, double half_width) {
  if (d < 2) throw std::invalid_argument("density dimension must be >= 2");
  if (!(scale > 0.0)) throw std::invalid_argument("gaussian scale must be positive");
  if (half_width <= 0.0) {
    // per-axis tail mass 1e-12 / d, so the box keeps mass >= 1 - 1e-12
    const double z = std::numbers::sqrt2 * boost::math::erfc_inv(1e-12 / static_cast<double>(d));
    half_width = z * scale;
  }
  Density f;
  f.kind_ = DensityKind::TruncatedGaussian;
  f.dim_ = d;
  f.scale_ = scale;
  f.half_width_ = half_width;
  f.support_ = Box::cube(d, -half_width, half_width);
  f.norm_1d_ = std::erf(half_width / (scale * std::numbers::sqrt2));
  f.sup_norm_ =
      std::pow(1.0 / (scale * std::sqrt(2.0 * std::numbers::pi) * f.norm_1d_), static_cast<double>(d));
  return f;
}

Density Density::custom_grid(Box box, std::vector<std::size_t> shape, std::vector<double> values) {
  const std::size_t d = box.dim();
  if (d < 2) throw std::invalid_argument("density dimension must be >= 2");
  if (shape.size() != d || box.hi.size() != d)
    throw std::invalid_argument("grid shape and box must match the dimension");
  std::size_t total = 1;
  for (std::size_t a = 0; a < d; ++a) {
    if (shape[a] < 2) throw std::invalid_argument("grid needs at least two nodes per axis");
    if (!(box.hi[a] > box.lo[a])) throw std::invalid_argument("grid box must have positive extent");
    total *= shape[a];
  }
  if (values.size() != total) throw std::invalid_argument("grid value count does not match shape");
  for (double v : values)
    if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("grid values must be finite and >= 0");

  Density f;
  f.kind_ = DensityKind::CustomGrid;
  f.dim_ = d;
  f.support_ = std::move(box);
  f.shape_ = std::move(shape);
  f.values_ = std::move(values);
  f.sup_norm_ = 1.0;  // placeholder so integral_of_power can run before normalization
  const double mass = f.integral_of_power(1.0);
  if (!(mass > 0.0)) throw std::invalid_argument("grid density has zero mass");
  for (double& v : f.values_) v /= mass;
  f.sup_norm_ = *std::max_element(f.values_.begin(), f.values_.end());
  return f;
}

double Density::grid_value(std::span<const double> x) const {
  const std::size_t d = dim_;
  // locate the cell and local coordinates
  std::vector<std::size_t> base(d);
  std::vector<double> frac(d);
  for (std::size_t a = 0; a < d; ++a) {
    const double h = (support_.hi[a] - support_.lo[a]) / static_cast<double>(shape_[a] - 1);
    double u = (x[a] - support_.lo[a]) / h;
    if (u < 0.0 || u > static_cast<double>(shape_[a] - 1)) return 0.0;
    auto cell = static_cast<std::size_t>(std::floor(u));
    if (cell >= shape_[a] - 1) cell = shape_[a] - 2;
    base[a] = cell;
    frac[a] = u - static_cast<double>(cell);
  }
  double acc = 0.0;
  for (std::size_t corner = 0; corner < (std::size_t{1} << d); ++corner) {
    double w = 1.0;
    std::size_t flat = 0;
    for (std::size_t a = 0; a < d; ++a) {
      const bool up = (corner >> a) & 1U;
      w *= up ? frac[a] : 1.0 - frac[a];
      flat = flat * shape_[a] + base[a] + (up ? 1 : 0);
    }
    if (w != 0.0) acc += w * values_[flat];
  }
  return acc;
}

double Density::evaluate(std::span<const double> x) const {
  switch (kind_) {
    case DensityKind::UniformCube:
      return support_.closed_contains(x) ? sup_norm_ : 0.0;
    case DensityKind::TruncatedGaussian: {
      if (!support_.closed_contains(x)) return 0.0;
      double r2 = 0.0;
      for (std::size_t a = 0; a < dim_; ++a) r2 += x[a] * x[a];
      return sup_norm_ * std::exp(-0.5 * r2 / (scale_ * scale_));
    }
    case DensityKind::CustomGrid:
      return grid_value(x);
  }
  return 0.0;
}

double Density::integral_of_power(double p) const { return integral_of_power(p, support_); }

double Density::integral_of_power(double p, const Box& region) const {
  if (region.dim() != dim_) throw std::invalid_argument("region dimension mismatch");
  Box cut{std::vector<double>(dim_), std::vector<double>(dim_)};
  for (std::size_t a = 0; a < dim_; ++a) {
    cut.lo[a] = std::max(region.lo[a], support_.lo[a]);
    cut.hi[a] = std::min(region.hi[a], support_.hi[a]);
  }
  if (cut.empty()) return 0.0;

  switch (kind_) {
    case DensityKind::UniformCube:
      return std::pow(sup_norm_, p) * cut.volume();
    case DensityKind::TruncatedGaussian: {
      double v = 1.0;
      for (std::size_t a = 0; a < dim_; ++a)
        v *= gaussian_power_integral_1d(scale_, norm_1d_, p, cut.lo[a], cut.hi[a]);
      return v;
    }
    case DensityKind::CustomGrid:
      break;
  }

  // Tensor Gauss-Legendre over each grid cell clipped to `cut`. The
  // interpolant has degree one per axis inside a cell, so integer powers
  // up to 2 * kQuadratureNodes - 1 are integrated exactly.
  const Rule& rule = legendre_rule();
  const std::size_t q = rule.x.size();
  const std::size_t d = dim_;

  std::vector<std::vector<double>> axis_nodes(d);
  std::vector<std::vector<double>> axis_weights(d);
  for (std::size_t a = 0; a < d; ++a) {
    const double h = (support_.hi[a] - support_.lo[a]) / static_cast<double>(shape_[a] - 1);
    for (std::size_t c = 0; c + 1 < shape_[a]; ++c) {
      const double lo = std::max(cut.lo[a], support_.lo[a] + h * static_cast<double>(c));
      const double hi = std::min(cut.hi[a], support_.lo[a] + h * static_cast<double>(c + 1));
      if (!(hi > lo)) continue;
      const double mid = 0.5 * (lo + hi);
      const double half = 0.5 * (hi - lo);
      for (std::size_t i = 0; i < q; ++i) {
        axis_nodes[a].push_back(mid + half * rule.x[i]);
        axis_weights[a].push_back(half * rule.w[i]);
      }
    }
  }

  double total = 0.0;
  std::vector<std::size_t> idx(d, 0);
  std::vector<double> x(d);
  for (std::size_t a = 0; a < d; ++a)
    if (axis_nodes[a].empty()) return 0.0;
  while (true) {
    double w = 1.0;
    for (std::size_t a = 0; a < d; ++a) {
      x[a] = axis_nodes[a][idx[a]];
      w *= axis_weights[a][idx[a]];
    }
    const double fx = grid_value(x);
    if (fx > 0.0) total += w * std::pow(fx, p);
    std::size_t a = d;
    while (a > 0) {
      --a;
      if (++idx[a] < axis_nodes[a].size()) break;
      idx[a] = 0;
      if (a == 0) return total;
    }
  }
}

void Density::sample_point(Rng& rng, std::span<double> out) const {
  for (std::size_t attempt = 0; attempt < kMaxRejectionAttempts; ++attempt) {
    for (std::size_t a = 0; a < dim_; ++a) out[a] = rng.uniform(support_.lo[a], support_.hi[a]);
    const double fx = evaluate(out);
    if (fx > sup_norm_ * (1.0 + 1e-12))
      throw SamplerFailure("density exceeds its sup_norm envelope");
    if (rng.uniform() * sup_norm_ < fx) return;
  }
  throw SamplerFailure("rejection sampler exhausted its attempt budget");
}

PointCloud::PointCloud(std::size_t d, std::vector<double> coords, double n, double scale,
                       std::uint64_t seed)
    : dim_(d), coords_(std::move(coords)), n_(n), scale_(scale), seed_(seed) {
  if (d == 0) throw std::invalid_argument("point cloud dimension must be positive");
  if (coords_.size() % d != 0) throw std::invalid_argument("coordinate count is not a multiple of d");
  if (!(scale > 0.0)) throw std::invalid_argument("scale must be positive");
}

PointCloud PointCloud::with_scale(double scale) const {
  return PointCloud(dim_, coords_, n_, scale, seed_);
}

PointCloud sample_poisson_process(const Density& density, double n, std::uint64_t seed, double scale) {
  if (!(n > 0.0)) throw std::invalid_argument("intensity multiplier n must be positive");
  Rng rng(seed);
  std::poisson_distribution<long long> count_dist(n);
  const auto count = static_cast<std::size_t>(count_dist(rng));
  const std::size_t d = density.dim();
  std::vector<double> coords(count * d);
  for (std::size_t i = 0; i < count; ++i)
    density.sample_point(rng, std::span<double>(coords.data() + i * d, d));
  return PointCloud(d, std::move(coords), n, scale, seed);
}

double factorial(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

double binomial(int n, int r) {
  if (r < 0 || r > n) return 0.0;
  double v = 1.0;
  for (int i = 1; i <= r; ++i) v = v * (n - r + i) / i;
  return std::round(v);
}

double c_f_k(const Density& density, int k) {
  if (k < 1 || k >= static_cast<int>(density.dim()))
    throw std::invalid_argument("c_f_k requires 1 <= k < d");
  return density.integral_of_power(k + 2.0) / factorial(k + 2);
}

double unit_ball_volume(int d) {
  if (d < 1) throw std::invalid_argument("unit_ball_volume requires d >= 1");
  const double h = 0.5 * d;
  return std::pow(std::numbers::pi, h) / std::tgamma(h + 1.0);
}

void write_cloud_csv(std::ostream& os, const PointCloud& cloud) {
  os << "# d=" << cloud.dim() << " n=" << std::setprecision(17) << cloud.intensity()
     << " scale=" << cloud.scale() << " seed=" << cloud.seed() << '\n';
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto p = cloud.point(i);
    for (std::size_t a = 0; a < p.size(); ++a) {
      if (a) os << ',';
      os << std::setprecision(17) << p[a];
    }
    os << '\n';
  }
}

PointCloud read_cloud_csv(std::istream& is) {
  std::string line;
  std::size_t d = 0;
  double n = 0.0;
  double scale = 1.0;
  std::uint64_t seed = 0;
  bool header = false;
  std::vector<double> coords;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream hs(line.substr(1));
      std::string tok;
      while (hs >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = tok.substr(0, eq);
        const std::string val = tok.substr(eq + 1);
        if (key == "d") d = std::stoul(val);
        else if (key == "n") n = std::stod(val);
        else if (key == "scale") scale = std::stod(val);
        else if (key == "seed") seed = std::stoull(val);
      }
      header = true;
      continue;
    }
    std::istringstream ls(line);
    std::string cell;
    std::size_t cols = 0;
    while (std::getline(ls, cell, ',')) {
      coords.push_back(std::stod(cell));
      ++cols;
    }
    if (d == 0) d = cols;
    if (cols != d) throw std::runtime_error("point cloud row has " + std::to_string(cols) +
                                            " columns, expected " + std::to_string(d));
  }
  if (!header && d == 0) throw std::runtime_error("point cloud file has no header and no rows");
  return PointCloud(d, std::move(coords), n, scale, seed);
}

}  // namespace cechstat
