#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "cechstat/homology.hpp"

namespace cechstat {

/// t -> beta_{k,n}(t) for the Čech complex at radius s_n t, held exactly as
/// the k-th barcode in t-units.
struct BettiCurve {
  int k = 0;
  double scale = 1.0;
  double t_max = 0.0;
  std::vector<Interval> bars;

  int value_at(double t) const noexcept;
  std::vector<int> values_on(std::span<const double> grid) const;
  /// Sorted distinct jump locations within [0, t_max].
  std::vector<double> jumps() const;
};

BettiCurve betti_curve(const PointCloud& cloud, int k, double t_max,
                       std::size_t budget = kDefaultSimplexBudget);

/// Counts of components by (size i, beta_k j) at one t. Components with
/// j = 0 are kept apart in `trivial`.
struct ComponentCensus {
  int k = 0;
  double t = 0.0;
  std::map<std::pair<std::size_t, int>, long long> counts;
  long long trivial = 0;

  long long U(std::size_t i, int j) const;
  long long beta() const;
  long long S() const { return U(static_cast<std::size_t>(k) + 2, 1); }
  long long R() const { return beta() - S(); }
  std::size_t largest_size() const;
};

constexpr int kNoTruncation = std::numeric_limits<int>::max();

ComponentCensus census(const PointCloud& cloud, int k, double t,
                       std::size_t budget = kDefaultSimplexBudget);

/// Census at each t of an increasing grid, sharing one neighborhood graph.
std::vector<ComponentCensus> census_grid(const PointCloud& cloud, int k,
                                         std::span<const double> grid,
                                         std::size_t budget = kDefaultSimplexBudget);

/// Only components whose dictionary-minimal point lies in `region`.
ComponentCensus restrict_lmp(const PointCloud& cloud, int k, double t, const Box& region,
                             std::size_t budget = kDefaultSimplexBudget);

/// Builds a census from per-component results, optionally keeping only
/// components whose LMP lies in `region`.
ComponentCensus tally(const PointCloud& cloud, int k, double t,
                      std::span<const ComponentBetti> components, const Box* region = nullptr);

/// Sum over sizes k+2..M of j * U_{i,j}. M = kNoTruncation gives beta.
long long truncated_betti(const ComponentCensus& census, int M);

/// Integral of beta_{k,n} over [0, t], exactly from the bars.
double lifetime_sum(const BettiCurve& curve, double t);

struct CurveHeader {
  std::size_t d = 0;
  int k = 0;
  double n = 0.0;
  double scale = 1.0;
  std::uint64_t seed = 0;
};

/// `t,beta` at 0, each jump and t_max.
void write_curve_csv(std::ostream& os, const CurveHeader& header, const BettiCurve& curve);
/// `t,i,j,count`; trivial components are written with j = 0 and i = 0.
void write_census_csv(std::ostream& os, const CurveHeader& header,
                      std::span<const ComponentCensus> censuses);

}  // namespace cechstat
