#pragma once

// Tolerance-based structure matching. Both crystals are Niggli-reduced; every
// unimodular change of basis of b that brings its reduced cell within
// (ltol, angle_tol) of a's is tried; for each, translations aligning atoms
// of the least frequent species are scanned, and atoms are paired per species
// by optimal assignment on minimum-image distances measured in the averaged
// cell. Distances are normalized by cbrt(V / N) with V the mean volume.

#include <Eigen/Cholesky>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "xtalgen/core/crystal.hpp"
#include "xtalgen/metrics/assignment.hpp"

namespace xtalgen {

struct MatchOptions {
  double stol = 0.5;
  double angle_tol = 10.0;  // degrees
  double ltol = 0.3;        // relative
};

struct MatchResult {
  bool matched = false;
  std::optional<double> rmse_normalized;  // present only when matched
  std::optional<double> max_distance_normalized;  // of the reported pairing
  std::size_t lattice_candidates = 0;
};

namespace detail {

struct BasisCandidate {
  Eigen::Matrix3i u;
  Mat3 rows;
};

// Integer bases U (entries in {-1, 0, 1}, det U = 1) with U * lb close to la
// in lengths and angles.
inline std::vector<BasisCandidate> basis_candidates(const Lattice& la, const Lattice& lb,
                                                    const MatchOptions& opt) {
  const LatticeParams pa = la.params();
  const std::array<double, 3> len_a{pa.a, pa.b, pa.c};
  const std::array<double, 3> ang_a{pa.alpha, pa.beta, pa.gamma};
  std::array<std::vector<Eigen::Vector3i>, 3> per_row;
  for (int i = -1; i <= 1; ++i)
    for (int j = -1; j <= 1; ++j)
      for (int k = -1; k <= 1; ++k) {
        if (i == 0 && j == 0 && k == 0) continue;
        const Eigen::Vector3i u(i, j, k);
        const double len = lb.to_cart(u.cast<double>()).norm();
        for (int r = 0; r < 3; ++r)
          if (std::abs(len - len_a[r]) <= opt.ltol * 0.5 * (len + len_a[r])) per_row[r].push_back(u);
      }
  std::vector<BasisCandidate> out;
  for (const auto& u0 : per_row[0])
    for (const auto& u1 : per_row[1])
      for (const auto& u2 : per_row[2]) {
        Eigen::Matrix3i u;
        u.row(0) = u0.transpose();
        u.row(1) = u1.transpose();
        u.row(2) = u2.transpose();
        if (u.cast<double>().determinant() < 0.5 || u.cast<double>().determinant() > 1.5) continue;
        const Mat3 rows = u.cast<double>() * lb.matrix();
        const Vec3 v0 = rows.row(0).transpose(), v1 = rows.row(1).transpose(), v2 = rows.row(2).transpose();
        if (std::abs(detail::angle_deg(v1, v2) - ang_a[0]) > opt.angle_tol) continue;
        if (std::abs(detail::angle_deg(v0, v2) - ang_a[1]) > opt.angle_tol) continue;
        if (std::abs(detail::angle_deg(v0, v1) - ang_a[2]) > opt.angle_tol) continue;
        out.push_back({u, rows});
      }
  return out;
}

// Lattice whose metric tensor is the mean of the two inputs' metrics.
inline Lattice averaged_lattice(const Mat3& a, const Mat3& b) {
  const Mat3 g = 0.5 * (a * a.transpose() + b * b.transpose());
  Eigen::LLT<Mat3> llt(g);
  if (llt.info() != Eigen::Success) throw Error("averaged metric is not positive definite");
  return Lattice(Mat3(llt.matrixL()));
}

// Deterministic order on reduced crystals; lets the matcher run the same
// direction whichever argument comes first.
inline bool canonical_less(const Crystal& x, const Crystal& y) {
  const auto key = [](const Crystal& c) {
    std::vector<double> k{c.lattice().volume()};
    for (Eigen::Index i = 0; i < 9; ++i) k.push_back(c.lattice().matrix()(i / 3, i % 3));
    for (std::size_t i = 0; i < c.size(); ++i) {
      k.push_back(c.types()[i]);
      for (int d = 0; d < 3; ++d) k.push_back(c.frac_coords()[i][d]);
    }
    return k;
  };
  return key(x) < key(y);
}

}  // namespace detail

inline MatchResult structure_match(const Crystal& a, const Crystal& b, const MatchOptions& opt = {}) {
  MatchResult result;
  if (a.counts() != b.counts()) return result;
  Crystal ra = to_niggli_cell(a);
  Crystal rb = to_niggli_cell(b);
  if (detail::canonical_less(rb, ra)) std::swap(ra, rb);
  const std::size_t n = ra.size();
  const double scale =
      std::cbrt(0.5 * (ra.lattice().volume() + rb.lattice().volume()) / static_cast<double>(n));
  const double limit = opt.stol * scale;

  // Anchor species: fewest atoms, ties to the smaller atomic number.
  const auto counts = ra.counts();
  int anchor_z = counts.begin()->first;
  for (const auto& [z, c] : counts)
    if (c < counts.at(anchor_z)) anchor_z = z;
  std::map<int, std::vector<std::size_t>> sites_a, sites_b;
  for (std::size_t i = 0; i < n; ++i) {
    sites_a[ra.types()[i]].push_back(i);
    sites_b[rb.types()[i]].push_back(i);
  }

  const auto candidates = detail::basis_candidates(ra.lattice(), rb.lattice(), opt);
  result.lattice_candidates = candidates.size();
  double best_rms = std::numeric_limits<double>::infinity();
  double best_max = std::numeric_limits<double>::infinity();
  for (const auto& cand : candidates) {
    const Lattice avg = detail::averaged_lattice(ra.lattice().matrix(), cand.rows);
    // Coordinates of b in the new basis: f' = U^{-T} f.
    const Mat3 to_new = cand.u.cast<double>().inverse().transpose().array().round().matrix();
    Coords fb(n);
    for (std::size_t i = 0; i < n; ++i) fb[i] = to_new * rb.frac_coords()[i];
    // Every (a, b) pair of anchor-species atoms defines a trial translation.
    std::vector<Vec3> shifts;
    for (std::size_t i : sites_a[anchor_z])
      for (std::size_t k : sites_b[anchor_z]) shifts.push_back(ra.frac_coords()[i] - fb[k]);
    for (const Vec3& shift : shifts) {
      double sum2 = 0.0, maxd = 0.0;
      for (const auto& [z, ia] : sites_a) {
        const auto& ib = sites_b[z];
        const auto m = static_cast<Eigen::Index>(ia.size());
        Eigen::MatrixXd cost(m, m);
        for (Eigen::Index p = 0; p < m; ++p)
          for (Eigen::Index q = 0; q < m; ++q)
            cost(p, q) = avg.to_cart(min_image_frac(avg, ra.frac_coords()[ia[p]], fb[ib[q]] + shift))
                             .squaredNorm();
        const auto col = min_cost_assignment(cost);
        for (Eigen::Index p = 0; p < m; ++p) {
          const double d2 = cost(p, col[p]);
          sum2 += d2;
          maxd = std::max(maxd, std::sqrt(d2));
        }
        if (maxd >= limit) break;
      }
      if (maxd >= limit) continue;
      const double rms = std::sqrt(sum2 / static_cast<double>(n));
      if (rms < best_rms) {
        best_rms = rms;
        best_max = maxd;
      }
    }
  }
  if (std::isfinite(best_rms)) {
    result.matched = true;
    result.rmse_normalized = best_rms / scale;
    result.max_distance_normalized = best_max / scale;
  }
  return result;
}

}  // namespace xtalgen
