#include "cechstat/cech.hpp"

#include "simplex_key.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>

namespace cechstat {

using detail::SimplexKey;
using detail::SimplexKeyHash;

namespace {

constexpr std::size_t kMaxAmbientDim = 16;
constexpr double kInsideTolerance = 1e-12;

struct WorkBall {
  std::array<double, kMaxAmbientDim> c{};
  double r2 = -1.0;
};

class Welzl {
 public:
  Welzl(std::span<const double> coords, std::size_t d) : coords_(coords), d_(d) {
    const std::size_t n = coords.size() / d;
    order_.resize(n);
    std::iota(order_.begin(), order_.end(), std::size_t{0});
  }

  WorkBall solve() {
    support_.clear();
    return mtf(order_.size());
  }

 private:
  const double* pt(std::size_t i) const { return coords_.data() + i * d_; }

  bool inside(const WorkBall& b, std::size_t i) const {
    if (b.r2 < 0.0) return false;
    const double* p = pt(i);
    double s = 0.0;
    for (std::size_t a = 0; a < d_; ++a) {
      const double diff = p[a] - b.c[a];
      s += diff * diff;
    }
    return s <= b.r2 * (1.0 + kInsideTolerance);
  }

  // Smallest ball with all support points on its boundary (circumball
  // within their affine hull). Drops trailing points that are affinely
  // dependent on the rest.
  WorkBall circumball() const {
    WorkBall b;
    const std::size_t m = support_.size();
    if (m == 0) return b;
    const double* p0 = pt(support_[0]);
    if (m == 1) {
      std::copy(p0, p0 + d_, b.c.begin());
      b.r2 = 0.0;
      return b;
    }
    const std::size_t q = m - 1;
    std::array<std::array<double, kMaxAmbientDim>, kMaxAmbientDim + 1> v{};
    for (std::size_t j = 0; j < q; ++j) {
      const double* pj = pt(support_[j + 1]);
      for (std::size_t a = 0; a < d_; ++a) v[j][a] = pj[a] - p0[a];
    }
    // Solve G lambda = rhs, G_ij = 2 v_i.v_j, rhs_i = |v_i|^2.
    std::array<std::array<double, kMaxAmbientDim + 2>, kMaxAmbientDim + 1> g{};
    double scale = 0.0;
    for (std::size_t i = 0; i < q; ++i) {
      for (std::size_t j = 0; j < q; ++j) {
        double s = 0.0;
        for (std::size_t a = 0; a < d_; ++a) s += v[i][a] * v[j][a];
        g[i][j] = 2.0 * s;
      }
      g[i][q] = 0.5 * g[i][i];
      scale = std::max(scale, std::abs(g[i][i]));
    }
    std::size_t rank = q;
    for (std::size_t col = 0; col < rank; ++col) {
      std::size_t piv = col;
      for (std::size_t r = col + 1; r < rank; ++r)
        if (std::abs(g[r][col]) > std::abs(g[piv][col])) piv = r;
      if (std::abs(g[piv][col]) <= 1e-13 * scale) {
        rank = col;
        break;
      }
      std::swap(g[piv], g[col]);
      for (std::size_t r = col + 1; r < rank; ++r) {
        const double f = g[r][col] / g[col][col];
        for (std::size_t c = col; c <= q; ++c) g[r][c] -= f * g[col][c];
      }
    }
    std::array<double, kMaxAmbientDim + 1> lambda{};
    if (rank == q) {
      for (std::size_t ii = q; ii-- > 0;) {
        double s = g[ii][q];
        for (std::size_t c = ii + 1; c < q; ++c) s -= g[ii][c] * lambda[c];
        lambda[ii] = s / g[ii][ii];
      }
    } else {
      // Affinely dependent support: drop the newest point.
      Welzl sub(*this);
      sub.support_.pop_back();
      return sub.circumball();
    }
    std::copy(p0, p0 + d_, b.c.begin());
    for (std::size_t j = 0; j < q; ++j)
      for (std::size_t a = 0; a < d_; ++a) b.c[a] += lambda[j] * v[j][a];
    double r2 = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double* p = pt(support_[j]);
      double s = 0.0;
      for (std::size_t a = 0; a < d_; ++a) {
        const double diff = p[a] - b.c[a];
        s += diff * diff;
      }
      r2 = std::max(r2, s);
    }
    b.r2 = r2;
    return b;
  }

  WorkBall mtf(std::size_t end) {
    WorkBall ball = circumball();
    if (support_.size() == d_ + 1) return ball;
    for (std::size_t i = 0; i < end; ++i) {
      const std::size_t p = order_[i];
      if (inside(ball, p)) continue;
      support_.push_back(p);
      ball = mtf(i);
      support_.pop_back();
      std::rotate(order_.begin(), order_.begin() + static_cast<std::ptrdiff_t>(i),
                  order_.begin() + static_cast<std::ptrdiff_t>(i) + 1);
    }
    return ball;
  }

  std::span<const double> coords_;
  std::size_t d_;
  std::vector<std::size_t> order_;
  std::vector<std::size_t> support_;
};

double triangle_radius(const double* a, const double* b, const double* c, std::size_t d) {
  double ab2 = 0.0, ac2 = 0.0, bc2 = 0.0, dot = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double u = b[i] - a[i];
    const double v = c[i] - a[i];
    const double w = c[i] - b[i];
    ab2 += u * u;
    ac2 += v * v;
    bc2 += w * w;
    dot += u * v;
  }
  // Obtuse or right: the longest side is a diameter.
  const double m = std::max({ab2, ac2, bc2});
  if (2.0 * m >= ab2 + ac2 + bc2) return 0.5 * std::sqrt(m);
  const double area2x4 = ab2 * ac2 - dot * dot;  // (2 * area)^2
  if (area2x4 <= 0.0) return 0.5 * std::sqrt(m);
  return std::sqrt(ab2 * ac2 * bc2 / (4.0 * area2x4));
}

void check_dim(std::size_t d) {
  if (d == 0 || d > kMaxAmbientDim)
    throw std::invalid_argument("ambient dimension must be in [1, 16]");
}


// Value of an m-point simplex (m >= 4) given its facet values, where
// facet_value(j) is the value of the facet without point j. When a point
// lies in the enclosing ball of its opposite facet the ball does not grow,
// so the simplex takes the facet's value exactly instead of a re-solved
// radius that may differ in the last bits.
template <typename FacetValue>
double simplex_value(std::span<const double> coords, std::size_t d, FacetValue&& facet_value) {
  const std::size_t m = coords.size() / d;
  double fmax = 0.0;
  for (std::size_t j = 0; j < m; ++j) fmax = std::max(fmax, facet_value(j));
  std::array<double, SubsetValues::kMaxSubsetPoints * kMaxAmbientDim> facet{};
  for (std::size_t j = 0; j < m; ++j) {
    if (facet_value(j) != fmax) continue;
    std::size_t f = 0;
    for (std::size_t i = 0; i < m; ++i)
      if (i != j) {
        std::copy_n(coords.data() + i * d, d, facet.data() + f * d);
        ++f;
      }
    const Ball b = min_enclosing_ball(std::span<const double>(facet.data(), f * d), d);
    if (distance(coords.subspan(j * d, d), b.center) <= b.radius) return fmax;
  }
  return std::max(fmax, 2.0 * min_enclosing_radius(coords, d));
}

}  // namespace

Ball min_enclosing_ball(std::span<const double> coords, std::size_t d) {
  check_dim(d);
  Ball out;
  out.center.assign(d, 0.0);
  if (coords.empty()) return out;
  Welzl w(coords, d);
  const WorkBall b = w.solve();
  std::copy(b.c.begin(), b.c.begin() + static_cast<std::ptrdiff_t>(d), out.center.begin());
  out.radius = std::sqrt(std::max(0.0, b.r2));
  return out;
}

double min_enclosing_radius(std::span<const double> coords, std::size_t d) {
  check_dim(d);
  const std::size_t n = coords.size() / d;
  if (n <= 1) return 0.0;
  if (n == 2) return 0.5 * distance(coords.subspan(0, d), coords.subspan(d, d));
  if (n == 3) return triangle_radius(coords.data(), coords.data() + d, coords.data() + 2 * d, d);
  Welzl w(coords, d);
  return std::sqrt(std::max(0.0, w.solve().r2));
}

double distance(std::span<const double> a, std::span<const double> b) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    s += diff * diff;
  }
  return std::sqrt(s);
}

SubsetValues::SubsetValues(std::span<const double> coords, std::size_t d) {
  check_dim(d);
  count_ = coords.size() / d;
  if (count_ > kMaxSubsetPoints) throw std::invalid_argument("too many points for SubsetValues");
  const std::uint32_t total = std::uint32_t{1} << count_;
  values_.assign(total, 0.0);
  std::array<double, kMaxSubsetPoints * kMaxAmbientDim> buf{};
  // Masks in increasing order visit every facet before its coface.
  for (std::uint32_t mask = 1; mask < total; ++mask) {
    const int pc = std::popcount(mask);
    if (pc == 1) continue;
    std::size_t m = 0;
    std::array<std::size_t, kMaxSubsetPoints> idx{};
    for (std::size_t i = 0; i < count_; ++i)
      if (mask & (1U << i)) idx[m++] = i;
    if (pc == 2) {
      values_[mask] = distance(coords.subspan(idx[0] * d, d), coords.subspan(idx[1] * d, d));
      continue;
    }
    for (std::size_t j = 0; j < m; ++j)
      std::copy_n(coords.data() + idx[j] * d, d, buf.data() + j * d);
    const std::span<const double> pts(buf.data(), m * d);
    if (m == 3) {
      double v = 2.0 * min_enclosing_radius(pts, d);
      for (std::size_t j = 0; j < m; ++j) v = std::max(v, values_[mask & ~(1U << idx[j])]);
      values_[mask] = v;
    } else {
      values_[mask] = simplex_value(pts, d, [&](std::size_t j) { return values_[mask & ~(1U << idx[j])]; });
    }
  }
}

double filtration_value(const PointCloud& cloud, std::span<const std::uint32_t> vertices) {
  std::vector<std::uint32_t> sorted(vertices.begin(), vertices.end());
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw std::invalid_argument("filtration_value: duplicate vertex indices");
  for (auto i : sorted)
    if (i >= cloud.size()) throw std::out_of_range("filtration_value: vertex index out of range");
  const std::size_t d = cloud.dim();
  if (sorted.size() <= 1) return 0.0;
  if (sorted.size() == 2) return distance(cloud.point(sorted[0]), cloud.point(sorted[1]));
  std::vector<double> buf;
  buf.reserve(sorted.size() * d);
  for (auto i : sorted) {
    const auto p = cloud.point(i);
    buf.insert(buf.end(), p.begin(), p.end());
  }
  if (sorted.size() <= SubsetValues::kMaxSubsetPoints) {
    SubsetValues sv(buf, d);
    return sv.value(sv.full_mask());
  }
  return 2.0 * min_enclosing_radius(buf, d);
}

std::vector<Edge> edges_within(const PointCloud& cloud, double radius) {
  std::vector<Edge> edges;
  const std::size_t n = cloud.size();
  const std::size_t d = cloud.dim();
  if (n < 2 || !(radius > 0.0)) return edges;
  check_dim(d);

  std::vector<double> lo(d, std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < n; ++i) {
    const auto p = cloud.point(i);
    for (std::size_t a = 0; a < d; ++a) lo[a] = std::min(lo[a], p[a]);
  }
  // integer cell coordinates
  std::vector<std::int64_t> cell(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    const auto p = cloud.point(i);
    for (std::size_t a = 0; a < d; ++a)
      cell[i * d + a] = static_cast<std::int64_t>(std::floor((p[a] - lo[a]) / radius));
  }
  auto cell_less = [&](std::size_t i, std::size_t j) {
    return std::lexicographical_compare(cell.begin() + static_cast<std::ptrdiff_t>(i * d),
                                        cell.begin() + static_cast<std::ptrdiff_t>(i * d + d),
                                        cell.begin() + static_cast<std::ptrdiff_t>(j * d),
                                        cell.begin() + static_cast<std::ptrdiff_t>(j * d + d));
  };
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), cell_less);

  struct VecHash {
    std::size_t operator()(const std::vector<std::int64_t>& v) const noexcept {
      std::uint64_t h = 0x9e3779b97f4a7c15ULL;
      for (auto x : v) {
        h ^= static_cast<std::uint64_t>(x) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
      }
      return static_cast<std::size_t>(h);
    }
  };
  std::unordered_map<std::vector<std::int64_t>, std::pair<std::size_t, std::size_t>, VecHash> buckets;
  for (std::size_t s = 0; s < n;) {
    std::size_t e = s + 1;
    while (e < n && !cell_less(order[s], order[e])) ++e;
    std::vector<std::int64_t> key(cell.begin() + static_cast<std::ptrdiff_t>(order[s] * d),
                                  cell.begin() + static_cast<std::ptrdiff_t>(order[s] * d + d));
    buckets.emplace(std::move(key), std::make_pair(s, e));
    s = e;
  }

  std::size_t neighbors = 1;
  for (std::size_t a = 0; a < d; ++a) neighbors *= 3;
  std::vector<std::int64_t> probe(d);
  for (std::size_t i = 0; i < n; ++i) {
    const auto pi = cloud.point(i);
    for (std::size_t code = 0; code < neighbors; ++code) {
      std::size_t c = code;
      for (std::size_t a = 0; a < d; ++a) {
        probe[a] = cell[i * d + a] + static_cast<std::int64_t>(c % 3) - 1;
        c /= 3;
      }
      const auto it = buckets.find(probe);
      if (it == buckets.end()) continue;
      for (std::size_t s = it->second.first; s < it->second.second; ++s) {
        const std::size_t j = order[s];
        if (j <= i) continue;
        const double len = distance(pi, cloud.point(j));
        if (len <= radius)
          edges.push_back(Edge{static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), len});
      }
    }
  }
  std::sort(edges.begin(), edges.end(),
            [](const Edge& a, const Edge& b) { return a.u != b.u ? a.u < b.u : a.v < b.v; });
  return edges;
}

std::vector<Edge> neighborhood_graph(const PointCloud& cloud, double t_max) {
  if (!(t_max > 0.0)) throw std::invalid_argument("neighborhood_graph requires t_max > 0");
  return edges_within(cloud, cloud.scale() * t_max);
}

bool filtration_less(const FilteredSimplex& a, const FilteredSimplex& b) noexcept {
  if (a.value != b.value) return a.value < b.value;
  if (a.count != b.count) return a.count < b.count;
  return std::lexicographical_compare(a.v.begin(), a.v.begin() + a.count, b.v.begin(),
                                      b.v.begin() + b.count);
}

std::size_t FilteredComplex::count_of_dim(int q) const {
  return static_cast<std::size_t>(std::count_if(simplices.begin(), simplices.end(),
                                                [q](const FilteredSimplex& s) { return s.dim() == q; }));
}

namespace {

class CliqueEnumerator {
 public:
  CliqueEnumerator(const PointCloud& cloud, int max_dim, double cutoff, std::size_t budget,
                   FilteredComplex& out)
      : cloud_(cloud), max_dim_(max_dim), cutoff_(cutoff), budget_(budget), out_(out) {}

  void run(std::span<const std::uint32_t> subset, const std::vector<Edge>& edges) {
    const std::size_t n = cloud_.size();
    upper_.assign(n, {});
    for (const auto& e : edges) {
      upper_[e.u].push_back(e.v);
      values_.emplace(key_of({e.u, e.v}), e.length);
    }
    for (auto& list : upper_) std::sort(list.begin(), list.end());

    for (auto v : subset) push({v}, 0.0);
    for (const auto& e : edges) push({e.u, e.v}, e.length);
    if (max_dim_ < 2) return;

    std::vector<std::uint32_t> clique;
    for (const auto& e : edges) {
      clique = {e.u, e.v};
      std::vector<std::uint32_t> cand;
      std::set_intersection(upper_[e.u].begin(), upper_[e.u].end(), upper_[e.v].begin(),
                            upper_[e.v].end(), std::back_inserter(cand));
      extend(clique, cand);
    }
  }

 private:
  static SimplexKey key_of(std::initializer_list<std::uint32_t> vs) {
    SimplexKey k;
    for (auto v : vs) k.v[k.count++] = v;
    return k;
  }

  void push(std::initializer_list<std::uint32_t> vs, double value) {
    FilteredSimplex s;
    for (auto v : vs) s.v[s.count++] = v;
    s.value = value;
    add(s);
  }

  void add(const FilteredSimplex& s) {
    if (out_.simplices.size() >= budget_)
      throw SimplexBudgetExceeded("simplex budget of " + std::to_string(budget_) + " exceeded");
    out_.simplices.push_back(s);
  }

  // Facets found later in edge order are not cached yet; their values are
  // computed on demand and memoized.
  double value_of(std::span<const std::uint32_t> clique) {
    const std::size_t d = cloud_.dim();
    const std::size_t m = clique.size();
    std::vector<double> buf;
    buf.reserve(m * d);
    for (auto v : clique) {
      const auto p = cloud_.point(v);
      buf.insert(buf.end(), p.begin(), p.end());
    }
    std::array<double, kMaxSimplexVertices> facet_values{};
    SimplexKey facet;
    for (std::size_t drop = 0; drop < m; ++drop) {
      facet.count = 0;
      for (std::size_t j = 0; j < m; ++j)
        if (j != drop) facet.v[facet.count++] = clique[j];
      auto it = values_.find(facet);
      if (it == values_.end()) {
        const double fv = value_of(std::span<const std::uint32_t>(facet.v.data(), facet.count));
        it = values_.emplace(facet, fv).first;
      }
      facet_values[drop] = it->second;
    }
    if (m >= 4) return simplex_value(buf, d, [&](std::size_t j) { return facet_values[j]; });
    // clamp to facets
    double value = 2.0 * min_enclosing_radius(buf, d);
    for (std::size_t j = 0; j < m; ++j) value = std::max(value, facet_values[j]);
    return value;
  }

  void extend(std::vector<std::uint32_t>& clique, const std::vector<std::uint32_t>& cand) {
    if (static_cast<int>(clique.size()) > max_dim_) return;
    for (auto w : cand) {
      clique.push_back(w);
      const double value = value_of(clique);
      if (value <= cutoff_) {
        FilteredSimplex s;
        for (auto v : clique) s.v[s.count++] = v;
        s.value = value;
        add(s);
        SimplexKey key;
        for (auto v : clique) key.v[key.count++] = v;
        values_.insert_or_assign(key, value);
        if (static_cast<int>(clique.size()) <= max_dim_) {
          std::vector<std::uint32_t> next;
          std::set_intersection(cand.begin(), cand.end(), upper_[w].begin(), upper_[w].end(),
                                std::back_inserter(next));
          if (!next.empty()) extend(clique, next);
        }
      }
      clique.pop_back();
    }
  }

  const PointCloud& cloud_;
  int max_dim_;
  double cutoff_;
  std::size_t budget_;
  FilteredComplex& out_;
  std::vector<std::vector<std::uint32_t>> upper_;
  std::unordered_map<SimplexKey, double, SimplexKeyHash> values_;
};

FilteredComplex build_complex(const PointCloud& cloud, std::span<const std::uint32_t> subset,
                              const std::vector<Edge>& edges, int max_dim, double cutoff,
                              std::size_t budget) {
  if (max_dim < 1) throw std::invalid_argument("enumerate_simplices requires max_dim >= 1");
  if (max_dim + 1 > static_cast<int>(kMaxSimplexVertices))
    throw std::invalid_argument("max_dim exceeds the supported simplex size");
  if (!(cutoff > 0.0)) throw std::invalid_argument("enumerate_simplices requires cutoff > 0");
  FilteredComplex out;
  out.n_points = cloud.size();
  out.scale = cloud.scale();
  out.max_dim = max_dim;
  out.cutoff = cutoff;
  CliqueEnumerator enumerator(cloud, max_dim, cutoff, budget, out);
  enumerator.run(subset, edges);
  std::sort(out.simplices.begin(), out.simplices.end(), filtration_less);
  return out;
}

}  // namespace

FilteredComplex enumerate_simplices(const PointCloud& cloud, int max_dim, double cutoff,
                                    std::size_t budget) {
  std::vector<std::uint32_t> all(cloud.size());
  std::iota(all.begin(), all.end(), 0U);
  const auto edges = cutoff > 0.0 ? edges_within(cloud, cutoff) : std::vector<Edge>{};
  return build_complex(cloud, all, edges, max_dim, cutoff, budget);
}

FilteredComplex enumerate_simplices(const PointCloud& cloud, std::span<const std::uint32_t> subset,
                                    int max_dim, double cutoff, std::size_t budget) {
  std::vector<std::uint32_t> sorted(subset.begin(), subset.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<Edge> edges;
  for (std::size_t a = 0; a < sorted.size(); ++a)
    for (std::size_t b = a + 1; b < sorted.size(); ++b) {
      const double len = distance(cloud.point(sorted[a]), cloud.point(sorted[b]));
      if (len <= cutoff) edges.push_back(Edge{sorted[a], sorted[b], len});
    }
  return build_complex(cloud, sorted, edges, max_dim, cutoff, budget);
}

namespace {

void check_cardinality(std::span<const double> coords, std::size_t d, int k) {
  check_dim(d);
  if (k < 0 || coords.size() != static_cast<std::size_t>(k + 2) * d)
    throw std::invalid_argument("empty-simplex indicator needs exactly k+2 points");
}

int h_plus_of(const SubsetValues& sv, double t) {
  const std::uint32_t full = sv.full_mask();
  for (std::size_t i = 0; i < sv.size(); ++i)
    if (sv.value(full & ~(1U << i)) > t) return 0;
  return 1;
}

}  // namespace

int h_plus(std::span<const double> coords, std::size_t d, int k, double t) {
  check_cardinality(coords, d, k);
  return h_plus_of(SubsetValues(coords, d), t);
}

int h_minus(std::span<const double> coords, std::size_t d, int k, double t) {
  check_cardinality(coords, d, k);
  const SubsetValues sv(coords, d);
  return sv.value(sv.full_mask()) <= t ? 1 : 0;
}

int h(std::span<const double> coords, std::size_t d, int k, double t) {
  check_cardinality(coords, d, k);
  const SubsetValues sv(coords, d);
  return h_plus_of(sv, t) - (sv.value(sv.full_mask()) <= t ? 1 : 0);
}

EmptySimplexThresholds empty_simplex_thresholds(std::span<const double> coords, std::size_t d,
                                                int k) {
  check_cardinality(coords, d, k);
  const SubsetValues sv(coords, d);
  const std::uint32_t full = sv.full_mask();
  EmptySimplexThresholds out;
  for (std::size_t i = 0; i < sv.size(); ++i) out.plus = std::max(out.plus, sv.value(full & ~(1U << i)));
  out.minus = sv.value(full);
  return out;
}

void write_complex_csv(std::ostream& os, const FilteredComplex& complex) {
  os << "# n_points=" << complex.n_points << " scale=" << std::setprecision(17) << complex.scale
     << " max_dim=" << complex.max_dim << " cutoff=" << complex.cutoff << '\n';
  for (const auto& s : complex.simplices) {
    os << s.dim() << ',' << std::setprecision(17) << s.value;
    for (auto v : s.vertices()) os << ',' << v;
    os << '\n';
  }
}

FilteredComplex read_complex_csv(std::istream& is) {
  FilteredComplex c;
  c.max_dim = 0;
  std::string line;
  bool have_cutoff = false;
  std::uint32_t max_vertex = 0;
  bool any = false;
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
        if (key == "n_points") c.n_points = std::stoul(val);
        else if (key == "scale") c.scale = std::stod(val);
        else if (key == "max_dim") c.max_dim = std::stoi(val);
        else if (key == "cutoff") { c.cutoff = std::stod(val); have_cutoff = true; }
      }
      continue;
    }
    std::istringstream ls(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() < 3) throw std::runtime_error("complex row too short: " + line);
    FilteredSimplex s;
    const int dim = std::stoi(cells[0]);
    if (dim < 0 || static_cast<std::size_t>(dim) + 1 > kMaxSimplexVertices ||
        cells.size() != static_cast<std::size_t>(dim) + 3)
      throw std::runtime_error("complex row has wrong vertex count: " + line);
    s.value = std::stod(cells[1]);
    for (int j = 0; j <= dim; ++j) {
      s.v[s.count++] = static_cast<std::uint32_t>(std::stoul(cells[static_cast<std::size_t>(j) + 2]));
      max_vertex = std::max(max_vertex, s.v[s.count - 1]);
    }
    std::sort(s.v.begin(), s.v.begin() + s.count);
    c.max_dim = std::max(c.max_dim, dim);
    c.simplices.push_back(s);
    any = true;
  }
  if (any) c.n_points = std::max<std::size_t>(c.n_points, max_vertex + 1);
  if (!have_cutoff) {
    double m = 0.0;
    for (const auto& s : c.simplices) m = std::max(m, s.value);
    c.cutoff = m;
  }
  return c;
}

}  // namespace cechstat
