#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cechstat/rng.hpp"

namespace cechstat {

/// Axis-aligned box. Membership is half-open, lo <= x < hi, so that boxes
/// tiling a region partition it.
struct Box {
  std::vector<double> lo;
  std::vector<double> hi;

  std::size_t dim() const noexcept { return lo.size(); }
  double volume() const noexcept;
  bool contains(std::span<const double> x) const noexcept;
  bool closed_contains(std::span<const double> x) const noexcept;
  bool empty() const noexcept;

  static Box cube(std::size_t d, double lo, double hi);
};

enum class DensityKind { UniformCube, TruncatedGaussian, CustomGrid };

std::string to_string(DensityKind kind);
DensityKind density_kind_from_string(const std::string& name);

/// A bounded probability density on R^d with a box containing its support.
///
/// Three families are supported:
///  - uniform on [0, side]^d
///  - isotropic gaussian N(0, scale^2 I) truncated to [-half_width, half_width]^d
///    and renormalized; the default half width keeps mass 1 - 1e-12
///  - a table of values on a regular grid over a box, interpolated
///    multilinearly and normalized to integrate to one
///
/// Immutable after construction.
class Density {
 public:
  static Density uniform_cube(std::size_t d, double side = 1.0);
  static Density truncated_gaussian(std::size_t d, double scale, double half_width = 0.0);
  /// `values` is in row-major order with the last axis varying fastest;
  /// `shape[a] >= 2` nodes span [box.lo[a], box.hi[a]].
  static Density custom_grid(Box box, std::vector<std::size_t> shape, std::vector<double> values);

  DensityKind kind() const noexcept { return kind_; }
  std::size_t dim() const noexcept { return dim_; }
  double sup_norm() const noexcept { return sup_norm_; }
  const Box& support_box() const noexcept { return support_; }

  double side() const noexcept { return side_; }
  double scale() const noexcept { return scale_; }
  double half_width() const noexcept { return half_width_; }
  const std::vector<std::size_t>& grid_shape() const noexcept { return shape_; }
  const std::vector<double>& grid_values() const noexcept { return values_; }

  double evaluate(std::span<const double> x) const;

  /// Integral of f^p over the support; closed form for the uniform and gaussian
  /// families, tensor Gauss-Legendre quadrature otherwise.
  double integral_of_power(double p) const;

  /// Integral of f^p over `region` intersected with the support.
  double integral_of_power(double p, const Box& region) const;

  /// Draws one point with density f by rejection against the uniform law on
  /// the support box with envelope sup_norm.
  void sample_point(Rng& rng, std::span<double> out) const;

 private:
  Density() = default;

  double grid_value(std::span<const double> x) const;

  DensityKind kind_ = DensityKind::UniformCube;
  std::size_t dim_ = 0;
  Box support_;
  double sup_norm_ = 0.0;
  double side_ = 0.0;
  double scale_ = 0.0;
  double half_width_ = 0.0;
  double norm_1d_ = 1.0;  // truncated gaussian: per-axis mass kept
  std::vector<std::size_t> shape_;
  std::vector<double> values_;
};

class SamplerFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Finite realization of the Poisson process with intensity n f, with the
/// radius scale s_n attached. Coordinates are stored flat, point-major.
class PointCloud {
 public:
  PointCloud() = default;
  PointCloud(std::size_t d, std::vector<double> coords, double n, double scale,
             std::uint64_t seed = 0);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return dim_ == 0 ? 0 : coords_.size() / dim_; }
  bool empty() const noexcept { return coords_.empty(); }
  double intensity() const noexcept { return n_; }
  double scale() const noexcept { return scale_; }
  std::uint64_t seed() const noexcept { return seed_; }

  std::span<const double> point(std::size_t i) const noexcept {
    return {coords_.data() + i * dim_, dim_};
  }
  const std::vector<double>& coords() const noexcept { return coords_; }

  /// Same points, different radius scale.
  PointCloud with_scale(double scale) const;

 private:
  std::size_t dim_ = 0;
  std::vector<double> coords_;
  double n_ = 0.0;
  double scale_ = 1.0;
  std::uint64_t seed_ = 0;
};

/// Poisson(n) many i.i.d. draws from `density`. Deterministic given `seed`.
PointCloud sample_poisson_process(const Density& density, double n, std::uint64_t seed,
                                  double scale = 1.0);

/// C_{f,k} = (k+2)!^{-1} * integral of f^{k+2}. Requires 1 <= k < d.
double c_f_k(const Density& density, int k);

/// Volume of the unit ball in R^d.
double unit_ball_volume(int d);

double factorial(int n);
double binomial(int n, int r);

/// Point cloud CSV: header `# d=<d> n=<n> scale=<s> seed=<seed>`, then
/// one row per point, comma separated, written with round-trip precision.
void write_cloud_csv(std::ostream& os, const PointCloud& cloud);
PointCloud read_cloud_csv(std::istream& is);

}  // namespace cechstat
