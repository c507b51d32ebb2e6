#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <vector>

#include "cechstat/cech.hpp"

namespace cechstat {

constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct Interval {
  double birth = 0.0;
  double death = kInfinity;

  /// Closed convention: alive at t iff birth <= t < death.
  bool alive_at(double t) const noexcept { return birth <= t && t < death; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

struct Barcode {
  int dim = 0;
  std::vector<Interval> intervals;

  int betti_at(double t) const noexcept;
};

/// Betti numbers beta_0..beta_max_q over GF(2).
using BettiVector = std::vector<int>;

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n);
  std::size_t find(std::size_t x) noexcept;
  bool unite(std::size_t a, std::size_t b) noexcept;
  std::size_t components() const noexcept { return components_; }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::uint32_t> rank_;
  std::size_t components_;
};

enum class Beta0Method { UnionFind, Rank };

/// Exact Betti numbers of the subcomplex {sigma : value(sigma) <= t}, from
/// ranks of bit-packed boundary matrices. beta_0 uses union-find unless
/// `Rank` is requested. Requires max_q < complex.max_dim and t <= cutoff.
BettiVector betti_at(const FilteredComplex& complex, double t, int max_q,
                     Beta0Method beta0 = Beta0Method::UnionFind);

/// Persistence barcodes for dimensions 0..max_q by column reduction over
/// GF(2). Zero-length intervals are dropped; classes alive at the cutoff
/// get death = +inf. Throws std::invalid_argument if `complex` is not
/// sorted as a filtration.
std::vector<Barcode> persistence(const FilteredComplex& complex, int max_q);

/// beta_k of the Čech complex (up to dimension k+1) of a small point set at
/// physical parameter t.
int betti_of_points(std::span<const double> coords, std::size_t d, int k, double t);

struct ComponentBetti {
  std::size_t size = 0;
  int betti = 0;
  /// Left-most member in dictionary order (ties broken by index).
  std::uint32_t lmp = 0;
};

/// Connected components of Č(cloud, s_n t) with the k-th Betti number of
/// each, ordered by smallest member index.
std::vector<ComponentBetti> component_betti(const PointCloud& cloud, double t, int k,
                                            std::size_t budget = kDefaultSimplexBudget);

/// As above, reusing edges already computed at some radius >= s_n t.
std::vector<ComponentBetti> component_betti(const PointCloud& cloud, std::span<const Edge> edges,
                                            double t, int k,
                                            std::size_t budget = kDefaultSimplexBudget);

/// True if point a precedes point b in dictionary order (index breaks ties).
bool dictionary_less(const PointCloud& cloud, std::uint32_t a, std::uint32_t b) noexcept;

/// CSV `q,birth,death` with `inf` for unbounded intervals.
void write_barcodes_csv(std::ostream& os, std::span<const Barcode> barcodes);

}  // namespace cechstat
