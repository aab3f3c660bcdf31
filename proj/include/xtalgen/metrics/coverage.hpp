#pragma once

// Coverage recall/precision with average minimum structure and composition
// distances.

#include <algorithm>
#include <limits>
#include <vector>

#include "xtalgen/metrics/fingerprint.hpp"

namespace xtalgen {

struct CoverageReport {
  double cov_r = 0.0;  // percent
  double cov_p = 0.0;  // percent
  double amsd_r = 0.0;
  double amsd_p = 0.0;
  double amcd_r = 0.0;
  double amcd_p = 0.0;
};

struct FingerprintPair {
  Fingerprint structure;
  Fingerprint composition;
};

inline FingerprintPair fingerprint(const Crystal& c, const RdfOptions& opt = {}) {
  return {fingerprint_structure(c, opt), fingerprint_composition(c)};
}

using DistanceTable = std::vector<std::vector<double>>;  // [row][col]

namespace detail {

struct OneSided {
  double cov = 0.0, amsd = 0.0, amcd = 0.0;
};

// For each row item, look for a column item within both thresholds.
inline OneSided one_sided(const DistanceTable& ds, const DistanceTable& dc, double delta_struc,
                          double delta_comp) {
  OneSided out;
  const std::size_t rows = ds.size();
  std::size_t covered = 0;
  for (std::size_t i = 0; i < rows; ++i) {
    double ms = std::numeric_limits<double>::infinity(), mc = ms;
    bool hit = false;
    for (std::size_t j = 0; j < ds[i].size(); ++j) {
      ms = std::min(ms, ds[i][j]);
      mc = std::min(mc, dc[i][j]);
      hit = hit || (ds[i][j] < delta_struc && dc[i][j] < delta_comp);
    }
    covered += hit ? 1 : 0;
    out.amsd += ms;
    out.amcd += mc;
  }
  out.cov = 100.0 * static_cast<double>(covered) / static_cast<double>(rows);
  out.amsd /= static_cast<double>(rows);
  out.amcd /= static_cast<double>(rows);
  return out;
}

inline DistanceTable transpose(const DistanceTable& t) {
  DistanceTable out(t.empty() ? 0 : t[0].size(), std::vector<double>(t.size()));
  for (std::size_t i = 0; i < t.size(); ++i)
    for (std::size_t j = 0; j < t[i].size(); ++j) out[j][i] = t[i][j];
  return out;
}

}  // namespace detail

// Tables are indexed [ground truth][generated].
inline CoverageReport coverage_from_distances(const DistanceTable& d_struc, const DistanceTable& d_comp,
                                              double delta_struc, double delta_comp) {
  if (d_struc.empty() || d_struc[0].empty()) throw Error("coverage requires non-empty sets");
  if (d_struc.size() != d_comp.size()) throw Error("coverage distance tables differ in shape");
  for (std::size_t i = 0; i < d_struc.size(); ++i)
    if (d_struc[i].size() != d_struc[0].size() || d_comp[i].size() != d_struc[0].size())
      throw Error("coverage distance tables differ in shape");
  const auto r = detail::one_sided(d_struc, d_comp, delta_struc, delta_comp);
  const auto p = detail::one_sided(detail::transpose(d_struc), detail::transpose(d_comp), delta_struc,
                                   delta_comp);
  return {r.cov, p.cov, r.amsd, p.amsd, r.amcd, p.amcd};
}

inline CoverageReport coverage(const std::vector<FingerprintPair>& generated,
                               const std::vector<FingerprintPair>& ground_truth, double delta_struc,
                               double delta_comp) {
  if (generated.empty() || ground_truth.empty()) throw Error("coverage requires non-empty sets");
  DistanceTable ds(ground_truth.size(), std::vector<double>(generated.size()));
  DistanceTable dc = ds;
  for (std::size_t i = 0; i < ground_truth.size(); ++i)
    for (std::size_t j = 0; j < generated.size(); ++j) {
      ds[i][j] = fingerprint_distance(ground_truth[i].structure, generated[j].structure);
      dc[i][j] = fingerprint_distance(ground_truth[i].composition, generated[j].composition);
    }
  return coverage_from_distances(ds, dc, delta_struc, delta_comp);
}

inline CoverageReport coverage(const std::vector<Crystal>& generated, const std::vector<Crystal>& ground_truth,
                               double delta_struc, double delta_comp) {
  std::vector<FingerprintPair> g, t;
  for (const auto& c : generated) g.push_back(fingerprint(c));
  for (const auto& c : ground_truth) t.push_back(fingerprint(c));
  return coverage(g, t, delta_struc, delta_comp);
}

// Distance from each item to its nearest other item (self excluded).
inline std::vector<double> nearest_neighbor_distances(const std::vector<Fingerprint>& items) {
  std::vector<double> out(items.size(), std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < items.size(); ++i)
    for (std::size_t j = 0; j < items.size(); ++j)
      if (i != j) out[i] = std::min(out[i], fingerprint_distance(items[i], items[j]));
  return out;
}

// Linear-interpolated percentile (q in [0, 100]) of finite values.
inline double percentile(std::vector<double> v, double q) {
  v.erase(std::remove_if(v.begin(), v.end(), [](double x) { return !std::isfinite(x); }), v.end());
  if (v.empty()) throw Error("percentile of an empty set");
  if (q < 0.0 || q > 100.0) throw Error("percentile must be within [0, 100]");
  std::sort(v.begin(), v.end());
  const double pos = q / 100.0 * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace xtalgen
