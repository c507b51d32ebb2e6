#include "cechstat/homology.hpp"

#include <algorithm>
#include <bit>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <unordered_map>

#include "simplex_key.hpp"

namespace cechstat {

using detail::SimplexKey;
using detail::SimplexKeyHash;

int Barcode::betti_at(double t) const noexcept {
  int count = 0;
  for (const auto& iv : intervals)
    if (iv.alive_at(t)) ++count;
  return count;
}

DisjointSets::DisjointSets(std::size_t n) : parent_(n), rank_(n, 0), components_(n) {
  std::iota(parent_.begin(), parent_.end(), std::size_t{0});
}

std::size_t DisjointSets::find(std::size_t x) noexcept {
  while (parent_[x] != x) {
    parent_[x] = parent_[parent_[x]];
    x = parent_[x];
  }
  return x;
}

bool DisjointSets::unite(std::size_t a, std::size_t b) noexcept {
  a = find(a);
  b = find(b);
  if (a == b) return false;
  if (rank_[a] < rank_[b]) std::swap(a, b);
  parent_[b] = a;
  if (rank_[a] == rank_[b]) ++rank_[a];
  --components_;
  return true;
}

namespace {

// Rank over GF(2) of a matrix given column by column as lists of row
// indices. Columns are packed into 64-bit words and eliminated on their
// highest set row.
class Gf2Rank {
 public:
  explicit Gf2Rank(std::size_t rows) : rows_(rows), words_((rows + 63) / 64), pivot_(rows, -1) {}

  void add_column(std::span<const std::uint32_t> entries) {
    std::vector<std::uint64_t> col(words_, 0);
    for (auto r : entries) col[r >> 6] ^= std::uint64_t{1} << (r & 63);
    while (true) {
      const long top = highest(col);
      if (top < 0) return;
      const long owner = pivot_[static_cast<std::size_t>(top)];
      if (owner < 0) {
        pivot_[static_cast<std::size_t>(top)] = static_cast<long>(reduced_.size());
        reduced_.push_back(std::move(col));
        return;
      }
      const auto& other = reduced_[static_cast<std::size_t>(owner)];
      for (std::size_t w = 0; w < words_; ++w) col[w] ^= other[w];
    }
  }

  std::size_t rank() const noexcept { return reduced_.size(); }

 private:
  long highest(const std::vector<std::uint64_t>& col) const noexcept {
    for (std::size_t w = words_; w-- > 0;)
      if (col[w]) return static_cast<long>(w * 64 + 63 - static_cast<std::size_t>(std::countl_zero(col[w])));
    return -1;
  }

  std::size_t rows_;
  std::size_t words_;
  std::vector<long> pivot_;
  std::vector<std::vector<std::uint64_t>> reduced_;
};

std::size_t boundary_rank(const std::vector<const FilteredSimplex*>& cols,
                          const std::unordered_map<SimplexKey, std::uint32_t, SimplexKeyHash>& row_index,
                          std::size_t rows) {
  if (cols.empty() || rows == 0) return 0;
  Gf2Rank rank(rows);
  std::vector<std::uint32_t> entries;
  for (const auto* s : cols) {
    entries.clear();
    SimplexKey facet;
    for (std::size_t drop = 0; drop < s->count; ++drop) {
      facet.count = 0;
      facet.v.fill(0);
      for (std::size_t j = 0; j < s->count; ++j)
        if (j != drop) facet.v[facet.count++] = s->v[j];
      const auto it = row_index.find(facet);
      if (it == row_index.end())
        throw std::invalid_argument("complex is not closed under faces");
      entries.push_back(it->second);
    }
    rank.add_column(entries);
  }
  return rank.rank();
}

}  // namespace

BettiVector betti_at(const FilteredComplex& complex, double t, int max_q, Beta0Method beta0) {
  if (max_q < 0) throw std::invalid_argument("betti_at requires max_q >= 0");
  if (max_q >= complex.max_dim)
    throw std::invalid_argument("betti_at requires max_q < max_dim of the complex");
  if (t > complex.cutoff) throw std::invalid_argument("betti_at: t exceeds the complex cutoff");

  const int top = max_q + 1;
  std::vector<std::vector<const FilteredSimplex*>> by_dim(static_cast<std::size_t>(top) + 1);
  std::vector<std::unordered_map<SimplexKey, std::uint32_t, SimplexKeyHash>> index(
      static_cast<std::size_t>(top) + 1);
  for (const auto& s : complex.simplices) {
    if (s.value > t || s.dim() > top) continue;
    const auto q = static_cast<std::size_t>(s.dim());
    index[q].emplace(SimplexKey::of(s), static_cast<std::uint32_t>(by_dim[q].size()));
    by_dim[q].push_back(&s);
  }

  std::vector<std::size_t> ranks(static_cast<std::size_t>(top) + 2, 0);  // ranks[q] = rank of boundary_q
  for (int q = 1; q <= top; ++q)
    ranks[static_cast<std::size_t>(q)] =
        boundary_rank(by_dim[static_cast<std::size_t>(q)], index[static_cast<std::size_t>(q) - 1],
                      by_dim[static_cast<std::size_t>(q) - 1].size());

  BettiVector betti(static_cast<std::size_t>(max_q) + 1, 0);
  for (int q = 0; q <= max_q; ++q) {
    const auto uq = static_cast<std::size_t>(q);
    betti[uq] = static_cast<int>(by_dim[uq].size() - ranks[uq] - ranks[uq + 1]);
  }
  if (beta0 == Beta0Method::UnionFind) {
    DisjointSets sets(complex.n_points);
    std::size_t merges = 0;
    if (top >= 1)
      for (const auto* e : by_dim[1])
        if (sets.unite(e->v[0], e->v[1])) ++merges;
    betti[0] = static_cast<int>(by_dim[0].size() - merges);
  }
  return betti;
}

std::vector<Barcode> persistence(const FilteredComplex& complex, int max_q) {
  if (max_q < 0) throw std::invalid_argument("persistence requires max_q >= 0");
  const auto& sx = complex.simplices;
  const std::size_t n = sx.size();
  for (std::size_t i = 1; i < n; ++i)
    if (filtration_less(sx[i], sx[i - 1]))
      throw std::invalid_argument("persistence: complex is not sorted as a filtration");

  const int top = max_q + 1;
  std::unordered_map<SimplexKey, std::uint32_t, SimplexKeyHash> position;
  position.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    if (sx[i].dim() <= top) position.emplace(SimplexKey::of(sx[i]), static_cast<std::uint32_t>(i));

  std::vector<std::vector<std::uint32_t>> columns(n);
  std::vector<long> pivot_of(n, -1);  // low row -> column owning it
  std::vector<char> zero(n, 1);
  std::vector<std::uint32_t> scratch;

  for (std::size_t j = 0; j < n; ++j) {
    const auto& s = sx[j];
    if (s.dim() == 0 || s.dim() > top) continue;
    auto& col = columns[j];
    SimplexKey facet;
    for (std::size_t drop = 0; drop < s.count; ++drop) {
      facet.count = 0;
      facet.v.fill(0);
      for (std::size_t a = 0; a < s.count; ++a)
        if (a != drop) facet.v[facet.count++] = s.v[a];
      const auto it = position.find(facet);
      if (it == position.end() || it->second >= j)
        throw std::invalid_argument("persistence: a face does not precede its coface");
      col.push_back(it->second);
    }
    std::sort(col.begin(), col.end());
    while (!col.empty()) {
      const long owner = pivot_of[col.back()];
      if (owner < 0) break;
      const auto& other = columns[static_cast<std::size_t>(owner)];
      scratch.clear();
      std::set_symmetric_difference(col.begin(), col.end(), other.begin(), other.end(),
                                    std::back_inserter(scratch));
      col.swap(scratch);
    }
    if (!col.empty()) {
      pivot_of[col.back()] = static_cast<long>(j);
      zero[j] = 0;
    } else {
      col.shrink_to_fit();
    }
  }

  std::vector<Barcode> bars(static_cast<std::size_t>(max_q) + 1);
  for (int q = 0; q <= max_q; ++q) bars[static_cast<std::size_t>(q)].dim = q;
  for (std::size_t j = 0; j < n; ++j) {
    const int q = sx[j].dim();
    if (q > max_q || !zero[j]) continue;
    const long killer = pivot_of[j];
    const double birth = sx[j].value;
    const double death = killer < 0 ? kInfinity : sx[static_cast<std::size_t>(killer)].value;
    if (death > birth) bars[static_cast<std::size_t>(q)].intervals.push_back(Interval{birth, death});
  }
  return bars;
}

int betti_of_points(std::span<const double> coords, std::size_t d, int k, double t) {
  const std::size_t m = coords.size() / d;
  if (k < 0) throw std::invalid_argument("betti_of_points requires k >= 0");
  if (m < static_cast<std::size_t>(k) + 2) return k == 0 ? static_cast<int>(m > 0) : 0;
  if (m > SubsetValues::kMaxSubsetPoints) {
    const PointCloud cloud(d, std::vector<double>(coords.begin(), coords.end()), 0.0, 1.0);
    const auto complex = enumerate_simplices(cloud, k + 1, t);
    return betti_at(complex, t, k)[static_cast<std::size_t>(k)];
  }
  const SubsetValues sv(coords, d);
  // simplices of dimension k-1, k, k+1 present at t, as masks
  std::vector<std::uint32_t> lower, mid, upper;
  const std::uint32_t total = std::uint32_t{1} << m;
  for (std::uint32_t mask = 1; mask < total; ++mask) {
    const int pc = std::popcount(mask);
    if (pc == 1) {
      if (k == 1) lower.push_back(mask);
      if (k == 0) mid.push_back(mask);
      continue;
    }
    if (sv.value(mask) > t) continue;
    if (pc == k) lower.push_back(mask);
    else if (pc == k + 1) mid.push_back(mask);
    else if (pc == k + 2) upper.push_back(mask);
  }
  auto rank_of = [](const std::vector<std::uint32_t>& cols, const std::vector<std::uint32_t>& rows) {
    if (cols.empty() || rows.empty()) return std::size_t{0};
    std::unordered_map<std::uint32_t, std::uint32_t> row_of;
    for (std::uint32_t r = 0; r < rows.size(); ++r) row_of.emplace(rows[r], r);
    Gf2Rank rank(rows.size());
    std::vector<std::uint32_t> entries;
    for (auto c : cols) {
      entries.clear();
      for (std::uint32_t bits = c; bits; bits &= bits - 1) {
        const std::uint32_t facet = c & ~(bits & (~bits + 1));
        entries.push_back(row_of.at(facet));
      }
      rank.add_column(entries);
    }
    return rank.rank();
  };
  const std::size_t rank_k = k == 0 ? 0 : rank_of(mid, lower);
  const std::size_t rank_k1 = rank_of(upper, mid);
  return static_cast<int>(mid.size() - rank_k - rank_k1);
}

bool dictionary_less(const PointCloud& cloud, std::uint32_t a, std::uint32_t b) noexcept {
  const auto pa = cloud.point(a);
  const auto pb = cloud.point(b);
  for (std::size_t i = 0; i < pa.size(); ++i) {
    if (pa[i] < pb[i]) return true;
    if (pb[i] < pa[i]) return false;
  }
  return a < b;
}

std::vector<ComponentBetti> component_betti(const PointCloud& cloud, double t, int k,
                                            std::size_t budget) {
  if (!(t > 0.0)) throw std::invalid_argument("component_betti requires t > 0");
  const auto edges = edges_within(cloud, cloud.scale() * t);
  return component_betti(cloud, edges, t, k, budget);
}

std::vector<ComponentBetti> component_betti(const PointCloud& cloud, std::span<const Edge> edges,
                                            double t, int k, std::size_t budget) {
  if (k < 1 || k >= static_cast<int>(cloud.dim()))
    throw std::invalid_argument("component_betti requires 1 <= k < d");
  const double radius = cloud.scale() * t;
  const std::size_t n = cloud.size();
  DisjointSets sets(n);
  for (const auto& e : edges)
    if (e.length <= radius) sets.unite(e.u, e.v);

  std::vector<std::vector<std::uint32_t>> members;
  std::vector<long> slot(n, -1);
  for (std::uint32_t i = 0; i < n; ++i) {
    const std::size_t root = sets.find(i);
    if (slot[root] < 0) {
      slot[root] = static_cast<long>(members.size());
      members.emplace_back();
    }
    members[static_cast<std::size_t>(slot[root])].push_back(i);
  }

  const std::size_t d = cloud.dim();
  std::vector<ComponentBetti> out;
  out.reserve(members.size());
  std::vector<double> buf;
  for (const auto& group : members) {
    ComponentBetti c;
    c.size = group.size();
    c.lmp = group.front();
    for (auto v : group)
      if (dictionary_less(cloud, v, c.lmp)) c.lmp = v;
    if (group.size() >= static_cast<std::size_t>(k) + 2) {
      if (group.size() <= SubsetValues::kMaxSubsetPoints) {
        buf.clear();
        for (auto v : group) {
          const auto p = cloud.point(v);
          buf.insert(buf.end(), p.begin(), p.end());
        }
        c.betti = group.size() == static_cast<std::size_t>(k) + 2 ? h(buf, d, k, radius)
                                                                   : betti_of_points(buf, d, k, radius);
      } else {
        const auto complex = enumerate_simplices(cloud, group, k + 1, radius, budget);
        c.betti = betti_at(complex, radius, k)[static_cast<std::size_t>(k)];
      }
    }
    out.push_back(c);
  }
  return out;
}

void write_barcodes_csv(std::ostream& os, std::span<const Barcode> barcodes) {
  os << "q,birth,death\n";
  for (const auto& bc : barcodes)
    for (const auto& iv : bc.intervals) {
      os << bc.dim << ',' << std::setprecision(17) << iv.birth << ',';
      if (iv.death == kInfinity) os << "inf";
      else os << std::setprecision(17) << iv.death;
      os << '\n';
    }
}

}  // namespace cechstat
