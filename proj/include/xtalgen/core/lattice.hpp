#pragma once

// Lattices stored as a 3x3 matrix whose rows are the cell vectors l1, l2, l3
// (Angstrom). Fractional row vectors map to Cartesian as cart = frac * L.

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "xtalgen/core/error.hpp"

namespace xtalgen {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using IMat3 = Eigen::Matrix3i;

struct LatticeParams {
  double a = 0, b = 0, c = 0;            // Angstrom
  double alpha = 0, beta = 0, gamma = 0;  // degrees
};

namespace detail {

inline double cos_deg(double deg) {
  // Exact values for the common cell angles keep cubic/hexagonal cells clean.
  if (deg == 90.0) return 0.0;
  if (deg == 60.0) return 0.5;
  if (deg == 120.0) return -0.5;
  return std::cos(deg * std::numbers::pi / 180.0);
}

inline double angle_deg(const Vec3& u, const Vec3& v) {
  double c = u.dot(v) / (u.norm() * v.norm());
  c = std::clamp(c, -1.0, 1.0);
  return std::acos(c) * 180.0 / std::numbers::pi;
}

}  // namespace detail

class Lattice {
 public:
  Lattice() : Lattice(Mat3::Identity()) {}

  explicit Lattice(const Mat3& rows) : rows_(rows) {
    if (!rows_.allFinite()) throw Error("lattice matrix has non-finite entries");
    const double det = rows_.determinant();
    if (!(det > 0.0))
      throw Error("lattice must be right-handed with positive volume (det = " +
                  std::to_string(det) + ")");
    inverse_ = rows_.inverse();
  }

  static Lattice from_rows(const Vec3& l1, const Vec3& l2, const Vec3& l3) {
    Mat3 m;
    m.row(0) = l1.transpose();
    m.row(1) = l2.transpose();
    m.row(2) = l3.transpose();
    return Lattice(m);
  }

  static Lattice cubic(double a) { return Lattice(Mat3::Identity() * a); }

  const Mat3& matrix() const { return rows_; }
  const Mat3& inverse() const { return inverse_; }
  Vec3 row(int i) const { return rows_.row(i).transpose(); }
  double volume() const { return rows_.determinant(); }
  Mat3 metric() const { return rows_ * rows_.transpose(); }

  Vec3 to_cart(const Vec3& frac) const { return rows_.transpose() * frac; }
  Vec3 to_frac(const Vec3& cart) const { return inverse_.transpose() * cart; }

  // Length of the reciprocal vector b_i; a sphere of radius r spans at most
  // r * reciprocal_length(i) in fractional coordinate i.
  double reciprocal_length(int i) const { return inverse_.col(i).norm(); }

  // Rigid rotation of the cell: every Cartesian vector v becomes R v.
  Lattice rotated(const Mat3& rotation) const { return Lattice(rows_ * rotation.transpose()); }

  LatticeParams params() const {
    const Vec3 l1 = row(0), l2 = row(1), l3 = row(2);
    return {l1.norm(),
            l2.norm(),
            l3.norm(),
            detail::angle_deg(l2, l3),
            detail::angle_deg(l1, l3),
            detail::angle_deg(l1, l2)};
  }

  // Rotation Q with matrix() == canonical_rows * Q^T, where canonical_rows is
  // the params_to_lattice orientation (l1 along x, l2 in the xy plane).
  // Vectors expressed in the canonical frame map to this cell's frame by Q.
  Mat3 frame_rotation() const;

 private:
  Mat3 rows_;
  Mat3 inverse_;
};

inline LatticeParams lattice_params(const Lattice& lattice) { return lattice.params(); }

inline Lattice params_to_lattice(const LatticeParams& p) {
  if (!(p.a > 0 && p.b > 0 && p.c > 0))
    throw Error("lattice lengths must be positive");
  for (double ang : {p.alpha, p.beta, p.gamma})
    if (!(ang > 0 && ang < 180)) throw Error("lattice angles must lie in (0, 180) degrees");
  const double ca = detail::cos_deg(p.alpha);
  const double cb = detail::cos_deg(p.beta);
  const double cg = detail::cos_deg(p.gamma);
  const double gram_det = 1.0 - ca * ca - cb * cb - cg * cg + 2.0 * ca * cb * cg;
  if (!(gram_det > 1e-12))
    throw Error("angle triple does not describe a valid cell (metric not positive definite)");
  const double sg = std::sqrt(1.0 - cg * cg);
  const double cy = (ca - cb * cg) / sg;
  const double cz = std::sqrt(std::max(0.0, 1.0 - cb * cb - cy * cy));
  return Lattice::from_rows(Vec3(p.a, 0, 0), Vec3(p.b * cg, p.b * sg, 0),
                            Vec3(p.c * cb, p.c * cy, p.c * cz));
}

inline Mat3 Lattice::frame_rotation() const {
  const Mat3 canonical = params_to_lattice(params()).matrix();
  // rows_ = canonical * Q^T  =>  Q^T = canonical^{-1} rows_; project onto SO(3).
  const Mat3 qt = canonical.inverse() * rows_;
  Eigen::JacobiSVD<Mat3> svd(qt, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 r = svd.matrixU() * svd.matrixV().transpose();
  return r.transpose();
}

// Lattice lengths divided by cbrt(N); angles untouched.
inline LatticeParams normalized_lattice_params(const Lattice& lattice, std::size_t num_atoms) {
  LatticeParams p = lattice.params();
  const double s = std::cbrt(static_cast<double>(num_atoms));
  p.a /= s;
  p.b /= s;
  p.c /= s;
  return p;
}

// ---------------------------------------------------------------------------
// Periodic wrapping and minimum-image displacement.

// Wrap one coordinate to [0, 1).
inline double wrap_unit(double x) {
  double w = x - std::floor(x);
  if (w >= 1.0) w = 0.0;  // x = -tiny rounds up to exactly 1
  return w;
}

inline Vec3 wrap_unit(const Vec3& x) {
  if (!x.allFinite()) throw Error("cannot wrap non-finite fractional coordinate");
  return Vec3(wrap_unit(x[0]), wrap_unit(x[1]), wrap_unit(x[2]));
}

// Odd wrap to [-0.5, 0.5]: centered(-x) == -centered(x).
inline Vec3 wrap_centered(const Vec3& d) {
  return Vec3(d[0] - std::round(d[0]), d[1] - std::round(d[1]), d[2] - std::round(d[2]));
}

// The 27 image offsets with max-norm <= 1, ordered by L1 norm (k = 0 first).
inline const std::array<Vec3, 27>& near_images() {
  static const std::array<Vec3, 27> images = [] {
    std::array<Vec3, 27> out;
    int n = 0;
    for (int l1 = 0; l1 <= 3; ++l1)
      for (int i = -1; i <= 1; ++i)
        for (int j = -1; j <= 1; ++j)
          for (int k = -1; k <= 1; ++k)
            if (std::abs(i) + std::abs(j) + std::abs(k) == l1) out[n++] = Vec3(i, j, k);
    return out;
  }();
  return images;
}

// Fractional minimum-image displacement from x_from to x_to. Exact for
// Niggli-reduced cells; reduce unreduced cells first.
inline Vec3 min_image_frac(const Lattice& lattice, const Vec3& x_from, const Vec3& x_to) {
  const Vec3 base = wrap_centered(x_to - x_from);
  Vec3 best = base;
  double best_norm = lattice.to_cart(base).squaredNorm();
  for (const Vec3& k : near_images()) {
    const Vec3 cand = base + k;
    const double n2 = lattice.to_cart(cand).squaredNorm();
    if (n2 < best_norm) {
      best_norm = n2;
      best = cand;
    }
  }
  return best;
}

// Cartesian minimum-image vector (Angstrom) pointing from x_from to x_to.
inline Vec3 min_image_displacement(const Lattice& lattice, const Vec3& x_from, const Vec3& x_to) {
  return lattice.to_cart(min_image_frac(lattice, x_from, x_to));
}

// ---------------------------------------------------------------------------
// Niggli reduction (Krivy & Gruber 1976, with the epsilon handling of
// Grosse-Kunstleve et al. 2004). The tolerance is 1e-5 * cbrt(volume).

struct NiggliResult {
  Lattice lattice;
  IMat3 transform;  // reduced rows = transform * original rows, det = +1
  int iterations = 0;
};

inline NiggliResult niggli_reduce_with_transform(const Lattice& input, double rel_tol = 1e-5,
                                                 int max_iterations = 100) {
  const Mat3& orig = input.matrix();
  const double volume = input.volume();
  const double lengths = orig.row(0).norm() * orig.row(1).norm() * orig.row(2).norm();
  if (!(volume > 1e-8 * lengths))
    throw Error("cannot Niggli-reduce a degenerate (near-zero volume) lattice");
  const double e = rel_tol * std::cbrt(volume);

  IMat3 t = IMat3::Identity();
  auto apply = [&t](const IMat3& m) { t = m * t; };

  for (int iter = 0; iter < max_iterations; ++iter) {
    double A, B, C, xi, eta, zeta;
    auto g6 = [&] {
      const Mat3 b = t.cast<double>() * orig;
      const Mat3 g = b * b.transpose();
      A = g(0, 0);
      B = g(1, 1);
      C = g(2, 2);
      xi = 2 * g(1, 2);
      eta = 2 * g(0, 2);
      zeta = 2 * g(0, 1);
    };
    g6();

    // A1
    if (A > B + e || (std::abs(A - B) < e && std::abs(xi) > std::abs(eta) + e)) {
      IMat3 m;
      m << 0, -1, 0, -1, 0, 0, 0, 0, -1;
      apply(m);
      g6();
    }
    // A2
    if (B > C + e || (std::abs(B - C) < e && std::abs(eta) > std::abs(zeta) + e)) {
      IMat3 m;
      m << -1, 0, 0, 0, 0, -1, 0, -1, 0;
      apply(m);
      continue;
    }
    // A3 / A4: make xi, eta, zeta all positive or all non-positive.
    auto sgn = [e](double v) { return std::abs(v) < e ? 0 : (v > 0 ? 1 : -1); };
    const int l = sgn(xi), m = sgn(eta), n = sgn(zeta);
    int i = 1, j = 1, k = 1;
    if (l * m * n == 1) {
      i = l == -1 ? -1 : 1;
      j = m == -1 ? -1 : 1;
      k = n == -1 ? -1 : 1;
    } else {
      i = l == 1 ? -1 : 1;
      j = m == 1 ? -1 : 1;
      k = n == 1 ? -1 : 1;
      if (i * j * k == -1) {
        if (n == 0) k = -1;
        else if (m == 0) j = -1;
        else if (l == 0) i = -1;
      }
    }
    if (i != 1 || j != 1 || k != 1) {
      apply((Eigen::Vector3i(i, j, k)).asDiagonal().toDenseMatrix());
      g6();
    }
    // A5: c' = c - sign(xi) b
    if (std::abs(xi) > B + e || (std::abs(xi - B) < e && 2 * eta < zeta - e) ||
        (std::abs(xi + B) < e && zeta < -e)) {
      IMat3 mt = IMat3::Identity();
      mt(2, 1) = xi > 0 ? -1 : 1;
      apply(mt);
      continue;
    }
    // A6: c' = c - sign(eta) a
    if (std::abs(eta) > A + e || (std::abs(A - eta) < e && 2 * xi < zeta - e) ||
        (std::abs(A + eta) < e && zeta < -e)) {
      IMat3 mt = IMat3::Identity();
      mt(2, 0) = eta > 0 ? -1 : 1;
      apply(mt);
      continue;
    }
    // A7: b' = b - sign(zeta) a
    if (std::abs(zeta) > A + e || (std::abs(A - zeta) < e && 2 * xi < eta - e) ||
        (std::abs(A + zeta) < e && eta < -e)) {
      IMat3 mt = IMat3::Identity();
      mt(1, 0) = zeta > 0 ? -1 : 1;
      apply(mt);
      continue;
    }
    // A8: c' = a + b + c
    const double s = xi + eta + zeta + A + B;
    if (s < -e || (std::abs(s) < e && 2 * (A + eta) + zeta > e)) {
      IMat3 mt = IMat3::Identity();
      mt(2, 0) = 1;
      mt(2, 1) = 1;
      apply(mt);
      continue;
    }
    return {Lattice(t.cast<double>() * orig), t, iter + 1};
  }
  throw Error("Niggli reduction did not converge within " + std::to_string(max_iterations) +
              " iterations");
}

inline Lattice niggli_reduce(const Lattice& lattice) {
  return niggli_reduce_with_transform(lattice).lattice;
}

// Minimum-image displacements for fractional coordinates given in an
// arbitrary (possibly unreduced) cell: coordinates are mapped into the Niggli
// cell, where the 27-image search is exact.
class PeriodicFrame {
 public:
  explicit PeriodicFrame(const Lattice& lattice) : lattice_(lattice) {
    auto res = niggli_reduce_with_transform(lattice);
    reduced_ = res.lattice;
    // reduced rows = T * rows  =>  frac_reduced = T^{-T} frac
    to_reduced_ = res.transform.cast<double>().inverse().transpose().array().round().matrix();
  }

  const Lattice& lattice() const { return lattice_; }
  const Lattice& reduced() const { return reduced_; }
  Vec3 to_reduced(const Vec3& frac) const { return to_reduced_ * frac; }

  Vec3 displacement(const Vec3& x_from, const Vec3& x_to) const {
    return min_image_displacement(reduced_, to_reduced(x_from), to_reduced(x_to));
  }

 private:
  Lattice lattice_;
  Lattice reduced_;
  Mat3 to_reduced_;
};

}  // namespace xtalgen
