#include "cechstat/betti_process.hpp"

#include <algorithm>
#include <iomanip>
#include <ostream>
#include <stdexcept>

namespace cechstat {

namespace {

void check_k(const PointCloud& cloud, int k) {
  if (k < 1 || k >= static_cast<int>(cloud.dim()))
    throw std::invalid_argument("Betti process requires 1 <= k < d");
}

void write_header(std::ostream& os, const CurveHeader& h) {
  os << "# d=" << h.d << " k=" << h.k << " n=" << std::setprecision(17) << h.n
     << " s_n=" << h.scale << " seed=" << h.seed << '\n';
}

}  // namespace

int BettiCurve::value_at(double t) const noexcept {
  int count = 0;
  for (const auto& iv : bars)
    if (iv.alive_at(t)) ++count;
  return count;
}

std::vector<int> BettiCurve::values_on(std::span<const double> grid) const {
  std::vector<int> out;
  out.reserve(grid.size());
  for (double t : grid) out.push_back(value_at(t));
  return out;
}

std::vector<double> BettiCurve::jumps() const {
  std::vector<double> out;
  for (const auto& iv : bars) {
    if (iv.birth <= t_max) out.push_back(iv.birth);
    if (iv.death <= t_max) out.push_back(iv.death);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

BettiCurve betti_curve(const PointCloud& cloud, int k, double t_max, std::size_t budget) {
  check_k(cloud, k);
  if (!(t_max > 0.0)) throw std::invalid_argument("betti_curve requires t_max > 0");
  BettiCurve curve;
  curve.k = k;
  curve.scale = cloud.scale();
  curve.t_max = t_max;
  if (cloud.size() < static_cast<std::size_t>(k) + 2) return curve;

  const auto complex = enumerate_simplices(cloud, k + 1, cloud.scale() * t_max, budget);
  const auto barcodes = persistence(complex, k);
  const double s = cloud.scale();
  for (const auto& iv : barcodes[static_cast<std::size_t>(k)].intervals) {
    // deaths past the cutoff are unknown; the bar is alive through t_max
    const double death = iv.death == kInfinity ? kInfinity : iv.death / s;
    curve.bars.push_back(Interval{iv.birth / s, death});
  }
  return curve;
}

long long ComponentCensus::U(std::size_t i, int j) const {
  const auto it = counts.find({i, j});
  return it == counts.end() ? 0 : it->second;
}

long long ComponentCensus::beta() const {
  long long total = 0;
  for (const auto& [key, count] : counts) total += key.second * count;
  return total;
}

std::size_t ComponentCensus::largest_size() const {
  std::size_t m = 0;
  for (const auto& [key, count] : counts)
    if (count > 0) m = std::max(m, key.first);
  return m;
}

ComponentCensus tally(const PointCloud& cloud, int k, double t,
                      std::span<const ComponentBetti> components, const Box* region) {
  ComponentCensus out;
  out.k = k;
  out.t = t;
  for (const auto& c : components) {
    if (region && !region->contains(cloud.point(c.lmp))) continue;
    if (c.betti > 0) ++out.counts[{c.size, c.betti}];
    else ++out.trivial;
  }
  return out;
}

ComponentCensus census(const PointCloud& cloud, int k, double t, std::size_t budget) {
  check_k(cloud, k);
  const auto components = component_betti(cloud, t, k, budget);
  return tally(cloud, k, t, components);
}

std::vector<ComponentCensus> census_grid(const PointCloud& cloud, int k,
                                         std::span<const double> grid, std::size_t budget) {
  check_k(cloud, k);
  std::vector<ComponentCensus> out;
  if (grid.empty()) return out;
  if (!std::is_sorted(grid.begin(), grid.end()))
    throw std::invalid_argument("census_grid requires an increasing grid");
  const auto edges = edges_within(cloud, cloud.scale() * grid.back());
  out.reserve(grid.size());
  for (double t : grid) {
    const auto components = component_betti(cloud, edges, t, k, budget);
    out.push_back(tally(cloud, k, t, components));
  }
  return out;
}

ComponentCensus restrict_lmp(const PointCloud& cloud, int k, double t, const Box& region,
                             std::size_t budget) {
  check_k(cloud, k);
  if (region.dim() != cloud.dim()) throw std::invalid_argument("region dimension mismatch");
  const auto components = component_betti(cloud, t, k, budget);
  return tally(cloud, k, t, components, &region);
}

long long truncated_betti(const ComponentCensus& census, int M) {
  if (M < census.k + 2) throw std::invalid_argument("truncated_betti requires M >= k+2");
  long long total = 0;
  for (const auto& [key, count] : census.counts)
    if (M == kNoTruncation || key.first <= static_cast<std::size_t>(M)) total += key.second * count;
  return total;
}

double lifetime_sum(const BettiCurve& curve, double t) {
  if (t > curve.t_max) throw std::invalid_argument("lifetime_sum requires t <= t_max");
  double total = 0.0;
  for (const auto& iv : curve.bars) total += std::min(iv.death, t) - std::min(iv.birth, t);
  return total;
}

void write_curve_csv(std::ostream& os, const CurveHeader& header, const BettiCurve& curve) {
  write_header(os, header);
  os << "t,beta\n";
  std::vector<double> ts{0.0};
  for (double v : curve.jumps())
    if (v > 0.0 && v < curve.t_max) ts.push_back(v);
  ts.push_back(curve.t_max);
  for (double t : ts) os << std::setprecision(17) << t << ',' << curve.value_at(t) << '\n';
}

void write_census_csv(std::ostream& os, const CurveHeader& header,
                      std::span<const ComponentCensus> censuses) {
  write_header(os, header);
  os << "t,i,j,count\n";
  for (const auto& c : censuses) {
    for (const auto& [key, count] : c.counts)
      os << std::setprecision(17) << c.t << ',' << key.first << ',' << key.second << ',' << count
         << '\n';
    os << std::setprecision(17) << c.t << ",0,0," << c.trivial << '\n';
  }
}

}  // namespace cechstat
