#pragma once

// Structure fingerprint: Gaussian-smeared radial distribution function.
// Composition fingerprint: fraction-weighted mean and spread of standardized
// element properties.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "xtalgen/core/crystal.hpp"
#include "xtalgen/graph.hpp"

namespace xtalgen {

using Fingerprint = std::vector<double>;

struct RdfOptions {
  double cutoff = 8.0;      // Angstrom
  double bin_width = 0.1;   // Angstrom
  double smearing = 0.15;   // Gaussian sigma, Angstrom
};

// g(r_b) = sum_pairs G(r_b - d) / (N rho 4 pi r_b^2), rho = N / V, over every
// ordered pair (i in the cell, j in any image, excluding i with itself at the
// home image) with 0 < d <= cutoff. Bin centres r_b = (b + 1/2) * bin_width.
inline Fingerprint fingerprint_structure(const Crystal& crystal, const RdfOptions& opt = {}) {
  const auto bins = static_cast<std::size_t>(std::llround(opt.cutoff / opt.bin_width));
  Fingerprint g(bins, 0.0);
  const Crystal c = to_niggli_cell(crystal);
  const Lattice& lat = c.lattice();
  const auto reach = detail::reach_for_radius(lat, opt.cutoff);
  const auto& f = c.frac_coords();
  std::vector<double> dists;
  for (std::size_t i = 0; i < f.size(); ++i)
    for (std::size_t j = 0; j < f.size(); ++j) {
      const Vec3 base = wrap_centered(Vec3(f[j] - f[i]));
      for (int a = -reach[0]; a <= reach[0]; ++a)
        for (int b = -reach[1]; b <= reach[1]; ++b)
          for (int k = -reach[2]; k <= reach[2]; ++k) {
            const double d = lat.to_cart(Vec3(base + Vec3(a, b, k))).norm();
            if (d > 0.0 && d <= opt.cutoff) dists.push_back(d);
          }
    }
  std::sort(dists.begin(), dists.end());  // order-independent summation
  const double n = static_cast<double>(c.size());
  const double rho = n / lat.volume();
  const double norm = 1.0 / (opt.smearing * std::sqrt(2.0 * std::numbers::pi));
  // Gaussian tails beyond 8 sigma are below 1e-14 of the peak and skipped.
  const double window = 8.0 * opt.smearing;
  for (double d : dists) {
    const auto lo = static_cast<std::ptrdiff_t>(std::floor((d - window) / opt.bin_width));
    const auto hi = static_cast<std::ptrdiff_t>(std::ceil((d + window) / opt.bin_width));
    for (std::ptrdiff_t bi = std::max<std::ptrdiff_t>(lo, 0);
         bi < std::min<std::ptrdiff_t>(hi, static_cast<std::ptrdiff_t>(bins)); ++bi) {
      const double x = ((static_cast<double>(bi) + 0.5) * opt.bin_width - d) / opt.smearing;
      g[bi] += norm * std::exp(-0.5 * x * x);
    }
  }
  for (std::size_t bi = 0; bi < bins; ++bi) {
    const double r = (static_cast<double>(bi) + 0.5) * opt.bin_width;
    g[bi] /= n * rho * 4.0 * std::numbers::pi * r * r;
  }
  return g;
}

inline double fingerprint_distance(const Fingerprint& a, const Fingerprint& b) {
  if (a.size() != b.size()) throw Error("fingerprints have different lengths");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

inline constexpr std::array<const char*, 6> kCompositionFeatures{
    "atomic_number", "mass", "covalent_radius", "electronegativity", "row", "group"};
inline constexpr int kMaxFingerprintZ = 96;

namespace detail {

inline std::array<double, 6> raw_features(const Element& e) {
  return {static_cast<double>(e.z), e.mass, e.covalent_radius, e.electronegativity,
          static_cast<double>(e.row()), static_cast<double>(e.group())};
}

struct FeatureStats {
  std::array<double, 6> mean{};
  std::array<double, 6> std{};
};

// Mean and population standard deviation of each feature over Z = 1..96,
// skipping undefined values.
inline FeatureStats feature_stats(const ElementTable& table) {
  FeatureStats st;
  for (int k = 0; k < 6; ++k) {
    double s = 0, s2 = 0, n = 0;
    for (int z = 1; z <= kMaxFingerprintZ; ++z) {
      const double v = raw_features(table[z])[k];
      if (std::isnan(v)) continue;
      s += v;
      s2 += v * v;
      n += 1;
    }
    st.mean[k] = s / n;
    st.std[k] = std::sqrt(s2 / n - st.mean[k] * st.mean[k]);
  }
  return st;
}

}  // namespace detail

// Standardized features of one element; undefined values map to 0 (the table mean).
inline std::array<double, 6> standardized_features(int z, const detail::FeatureStats& st,
                                                   const ElementTable& table = elements()) {
  if (z < 1 || z > kMaxFingerprintZ)
    throw Error("composition fingerprint supports Z = 1.." + std::to_string(kMaxFingerprintZ) +
                ", got " + std::to_string(z));
  auto f = detail::raw_features(table[z]);
  for (int k = 0; k < 6; ++k) f[k] = std::isnan(f[k]) ? 0.0 : (f[k] - st.mean[k]) / st.std[k];
  return f;
}

// [weighted means of the 6 standardized features, weighted standard deviations].
inline Fingerprint fingerprint_composition(const Composition& c, const ElementTable& table = elements()) {
  if (c.empty()) throw Error("composition fingerprint needs a non-empty composition");
  const auto st = detail::feature_stats(table);
  Fingerprint out(12, 0.0);
  for (const auto& [z, w] : c.fractions()) {
    const auto f = standardized_features(z, st, table);
    for (int k = 0; k < 6; ++k) out[k] += w * f[k];
  }
  for (const auto& [z, w] : c.fractions()) {
    const auto f = standardized_features(z, st, table);
    for (int k = 0; k < 6; ++k) out[6 + k] += w * (f[k] - out[k]) * (f[k] - out[k]);
  }
  for (int k = 0; k < 6; ++k) out[6 + k] = std::sqrt(out[6 + k]);
  return out;
}

inline Fingerprint fingerprint_composition(const Crystal& crystal) {
  return fingerprint_composition(crystal.composition());
}

}  // namespace xtalgen
