#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <vector>

#include "cechstat/pointproc.hpp"

namespace cechstat {

/// Closed-ball convention: a simplex belongs to the Čech complex at
/// parameter t iff its filtration value is <= t. The value of a vertex set
/// is twice the radius of its minimum enclosing ball, so t -> Č(X, t) is
/// right-continuous and Betti curves are càdlàg step functions.

struct Ball {
  std::vector<double> center;
  double radius = 0.0;
};

/// Minimum enclosing ball of `count` points stored flat in `coords` (point
/// major, `d` coordinates each). Move-to-front Welzl recursion over the
/// points in index order, so the result is deterministic.
Ball min_enclosing_ball(std::span<const double> coords, std::size_t d);

/// Radius only; uses closed forms for one, two and three points.
double min_enclosing_radius(std::span<const double> coords, std::size_t d);

/// Filtration values of every nonempty subset of at most kMaxSubsetPoints
/// points, indexed by bitmask. Each value is the larger of twice the
/// enclosing radius and the values of its facets, which keeps the filtration
/// monotone under floating-point rounding. Pairs get the plain distance.
class SubsetValues {
 public:
  static constexpr std::size_t kMaxSubsetPoints = 10;

  SubsetValues(std::span<const double> coords, std::size_t d);

  std::size_t size() const noexcept { return count_; }
  double value(std::uint32_t mask) const noexcept { return values_[mask]; }
  std::uint32_t full_mask() const noexcept { return (std::uint32_t{1} << count_) - 1; }

 private:
  std::size_t count_ = 0;
  std::vector<double> values_;
};

double distance(std::span<const double> a, std::span<const double> b) noexcept;

/// Filtration value of the simplex spanned by `vertices` (indices into the
/// cloud, physical units). Throws std::invalid_argument on duplicates.
double filtration_value(const PointCloud& cloud, std::span<const std::uint32_t> vertices);

struct Edge {
  std::uint32_t u = 0;
  std::uint32_t v = 0;
  double length = 0.0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// All pairs at distance <= radius (physical units), sorted by (u, v) with
/// u < v. Grid hashing with cell side `radius`.
std::vector<Edge> edges_within(const PointCloud& cloud, double radius);

/// All pairs at distance <= s_n * t_max.
std::vector<Edge> neighborhood_graph(const PointCloud& cloud, double t_max);

class SimplexBudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

constexpr std::size_t kMaxSimplexVertices = 8;
constexpr std::size_t kDefaultSimplexBudget = 10'000'000;

struct FilteredSimplex {
  std::array<std::uint32_t, kMaxSimplexVertices> v{};
  std::uint8_t count = 0;
  double value = 0.0;

  int dim() const noexcept { return static_cast<int>(count) - 1; }
  std::span<const std::uint32_t> vertices() const noexcept { return {v.data(), count}; }
};

/// Strict filtration order: by value, then dimension, then vertex tuple.
bool filtration_less(const FilteredSimplex& a, const FilteredSimplex& b) noexcept;

struct FilteredComplex {
  std::size_t n_points = 0;
  double scale = 1.0;
  int max_dim = 0;
  double cutoff = 0.0;
  std::vector<FilteredSimplex> simplices;

  std::size_t count_of_dim(int q) const;
};

/// Čech filtration of `cloud` up to `max_dim` with values <= cutoff
/// (physical units). Cliques of the neighborhood graph are enumerated and
/// then assigned their exact Čech value.
FilteredComplex enumerate_simplices(const PointCloud& cloud, int max_dim, double cutoff,
                                    std::size_t budget = kDefaultSimplexBudget);

/// Same, restricted to the given vertex subset (indices into `cloud`).
FilteredComplex enumerate_simplices(const PointCloud& cloud, std::span<const std::uint32_t> subset,
                                    int max_dim, double cutoff,
                                    std::size_t budget = kDefaultSimplexBudget);

/// Empty-simplex indicators for exactly k+2 points (flat coords, physical t).
int h_plus(std::span<const double> coords, std::size_t d, int k, double t);
int h_minus(std::span<const double> coords, std::size_t d, int k, double t);
int h(std::span<const double> coords, std::size_t d, int k, double t);

/// Thresholds of the indicators above: h_t^+ = 1 iff t >= plus and
/// h_t^- = 1 iff t >= minus, so h_t = 1 iff plus <= t < minus.
struct EmptySimplexThresholds {
  double plus = 0.0;
  double minus = 0.0;
};
EmptySimplexThresholds empty_simplex_thresholds(std::span<const double> coords, std::size_t d, int k);

/// CSV `dim,value,v0,...,v_dim` in filtration order, with a `#` metadata line.
void write_complex_csv(std::ostream& os, const FilteredComplex& complex);
FilteredComplex read_complex_csv(std::istream& is);

}  // namespace cechstat
