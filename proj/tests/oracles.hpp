#pragma once

// Slow reference implementations. Nothing here calls into the library's
// geometry or homology code.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Points = std::vector<std::vector<double>>;

inline double dist(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

/// Circumcenter of the points within their affine hull; false if degenerate.
inline bool circumcenter(const Points& p, std::vector<double>& center, double& radius) {
  const std::size_t m = p.size(), d = p[0].size();
  if (m == 1) {
    center = p[0];
    radius = 0.0;
    return true;
  }
  Eigen::MatrixXd A(m - 1, m - 1);
  Eigen::VectorXd b(m - 1);
  std::vector<Eigen::VectorXd> v(m - 1, Eigen::VectorXd(d));
  for (std::size_t i = 1; i < m; ++i)
    for (std::size_t c = 0; c < d; ++c) v[i - 1][c] = p[i][c] - p[0][c];
  for (std::size_t i = 0; i + 1 < m; ++i) {
    for (std::size_t j = 0; j + 1 < m; ++j) A(i, j) = 2.0 * v[i].dot(v[j]);
    b[i] = v[i].squaredNorm();
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
  if (lu.rank() < static_cast<Eigen::Index>(m - 1)) return false;
  const Eigen::VectorXd lambda = lu.solve(b);
  center = p[0];
  for (std::size_t i = 0; i + 1 < m; ++i)
    for (std::size_t c = 0; c < d; ++c) center[c] += lambda[i] * v[i][c];
  radius = dist(center, p[0]);
  return true;
}

/// Smallest ball over all circumballs of subsets of size <= d+1 that
/// contain every point.
inline double meb_radius(const Points& p) {
  const std::size_t m = p.size();
  const std::size_t d = p[0].size();
  double best = std::numeric_limits<double>::infinity();
  for (std::uint32_t mask = 1; mask < (1u << m); ++mask) {
    if (static_cast<std::size_t>(std::popcount(mask)) > d + 1) continue;
    Points sub;
    for (std::size_t i = 0; i < m; ++i)
      if (mask >> i & 1u) sub.push_back(p[i]);
    std::vector<double> c;
    double r;
    if (!circumcenter(sub, c, r) || r >= best) continue;
    bool ok = true;
    for (const auto& q : p)
      if (dist(c, q) > r * (1 + 1e-12) + 1e-15) ok = false;
    if (ok) best = r;
  }
  return best;
}

inline Points subset(const Points& p, const std::vector<std::uint32_t>& idx) {
  Points out;
  for (auto i : idx) out.push_back(p[i]);
  return out;
}

inline double value(const Points& p, const std::vector<std::uint32_t>& idx) {
  if (idx.size() == 1) return 0.0;
  if (idx.size() == 2) return dist(p[idx[0]], p[idx[1]]);
  return 2.0 * meb_radius(subset(p, idx));
}

struct Simplex {
  std::vector<std::uint32_t> v;
  double value;
};

/// Every vertex subset of size <= max_dim+1 with value <= cutoff, found by
/// extending only subsets whose pairs are all within the cutoff.
/// Values are raised to the largest facet value so that rounding in the
/// circumcenter solve can never put a face after its coface.
inline std::vector<Simplex> all_simplices(const Points& p, int max_dim, double cutoff) {
  const std::size_t n = p.size();
  std::vector<Simplex> out;
  std::vector<std::uint32_t> cur;
  std::map<std::vector<std::uint32_t>, double> memo;
  auto clamped = [&](auto&& self, const std::vector<std::uint32_t>& idx) -> double {
    auto it = memo.find(idx);
    if (it != memo.end()) return it->second;
    double v = value(p, idx);
    if (idx.size() > 2)
      for (std::size_t drop = 0; drop < idx.size(); ++drop) {
        auto face = idx;
        face.erase(face.begin() + static_cast<long>(drop));
        v = std::max(v, self(self, face));
      }
    memo.emplace(idx, v);
    return v;
  };
  auto rec = [&](auto&& self, std::uint32_t start) -> void {
    if (!cur.empty()) {
      const double v = clamped(clamped, cur);
      if (v <= cutoff) out.push_back({cur, v});
    }
    if (cur.size() == static_cast<std::size_t>(max_dim) + 1) return;
    for (std::uint32_t j = start; j < n; ++j) {
      bool ok = true;
      for (auto i : cur)
        if (dist(p[i], p[j]) > cutoff) ok = false;
      if (!ok) continue;
      cur.push_back(j);
      self(self, j + 1);
      cur.pop_back();
    }
  };
  rec(rec, 0);
  return out;
}

/// Rank over GF(2) by plain Gaussian elimination on byte rows.
inline int gf2_rank(std::vector<std::vector<std::uint8_t>> rows) {
  if (rows.empty()) return 0;
  const std::size_t cols = rows[0].size();
  int rank = 0;
  std::size_t r = 0;
  for (std::size_t c = 0; c < cols && r < rows.size(); ++c) {
    std::size_t piv = r;
    while (piv < rows.size() && !rows[piv][c]) ++piv;
    if (piv == rows.size()) continue;
    std::swap(rows[piv], rows[r]);
    for (std::size_t i = 0; i < rows.size(); ++i)
      if (i != r && rows[i][c])
        for (std::size_t j = c; j < cols; ++j) rows[i][j] ^= rows[r][j];
    ++r;
    ++rank;
  }
  return rank;
}

/// Betti numbers 0..max_q of the complex {s : value <= t}.
inline std::vector<int> betti(const std::vector<Simplex>& all, double t, int max_q) {
  std::vector<std::map<std::vector<std::uint32_t>, std::size_t>> index(max_q + 2);
  for (const auto& s : all) {
    const int q = static_cast<int>(s.v.size()) - 1;
    if (q <= max_q + 1 && s.value <= t) index[q].emplace(s.v, index[q].size());
  }
  auto boundary_rank = [&](int q) {
    if (q == 0 || index[q].empty() || index[q - 1].empty()) return 0;
    std::vector<std::vector<std::uint8_t>> rows;
    for (const auto& [v, _] : index[q]) {
      std::vector<std::uint8_t> row(index[q - 1].size(), 0);
      for (std::size_t drop = 0; drop < v.size(); ++drop) {
        auto face = v;
        face.erase(face.begin() + static_cast<long>(drop));
        row[index[q - 1].at(face)] = 1;
      }
      rows.push_back(std::move(row));
    }
    return gf2_rank(std::move(rows));
  };
  std::vector<int> ranks(max_q + 2);
  for (int q = 0; q <= max_q + 1; ++q) ranks[q] = boundary_rank(q);
  std::vector<int> b(max_q + 1);
  for (int q = 0; q <= max_q; ++q)
    b[q] = static_cast<int>(index[q].size()) - ranks[q] - ranks[q + 1];
  return b;
}

/// Flat point-major coordinates as a list of points.
inline Points unflatten(std::span<const double> flat, std::size_t d) {
  Points p;
  for (std::size_t i = 0; i < flat.size(); i += d) p.emplace_back(flat.begin() + i, flat.begin() + i + d);
  return p;
}

}  // namespace oracle
