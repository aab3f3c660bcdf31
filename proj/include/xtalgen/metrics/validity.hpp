#pragma once

// Structural validity (shortest interatomic distance) and compositional
// validity (charge neutrality under tabulated oxidation states).

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "xtalgen/core/crystal.hpp"

namespace xtalgen {

inline constexpr double kMinValidDistance = 0.5;  // Angstrom, strict

// Shortest distance between any two atoms over all periodic images,
// including an atom and its own images.
inline double min_pair_distance(const Crystal& crystal) {
  const PeriodicFrame frame(crystal.lattice());
  const Lattice& red = frame.reduced();
  double best = std::numeric_limits<double>::infinity();
  for (const Vec3& k : near_images())
    if (k != Vec3::Zero()) best = std::min(best, red.to_cart(k).norm());
  const auto& f = crystal.frac_coords();
  for (std::size_t i = 0; i < f.size(); ++i)
    for (std::size_t j = i + 1; j < f.size(); ++j)
      best = std::min(best, frame.displacement(f[i], f[j]).norm());
  return best;
}

inline bool structure_valid(double min_distance) { return min_distance > kMinValidDistance; }

enum class CompositionVerdict { valid, invalid, indeterminate };

inline const char* to_string(CompositionVerdict v) {
  switch (v) {
    case CompositionVerdict::valid: return "valid";
    case CompositionVerdict::invalid: return "invalid";
    case CompositionVerdict::indeterminate: return "indeterminate";
  }
  return "?";
}

struct CompositionCheck {
  CompositionVerdict verdict = CompositionVerdict::invalid;
  bool all_metal = false;
  std::optional<std::map<int, int>> assignment;  // atomic number -> oxidation state
  double combinations = 0;                       // size of the enumerated state space
  bool valid() const { return verdict == CompositionVerdict::valid; }
};

inline constexpr double kMaxOxidationCombinations = 1e7;

// Each element takes a single oxidation state from the table; the composition
// is neutral if some choice gives sum(count * state) == 0. Compositions made
// only of metals are accepted without enumeration.
inline CompositionCheck composition_validity(const std::map<int, int>& counts,
                                             const ElementTable& table = elements()) {
  if (counts.empty()) throw Error("composition validity needs at least one element");
  CompositionCheck out;
  std::vector<int> zs, ns;
  std::vector<const std::vector<int>*> states;
  bool all_metal = true;
  double space = 1.0;
  for (const auto& [z, n] : counts) {
    if (n < 1) throw Error("element counts must be >= 1");
    const Element& e = table[z];
    zs.push_back(z);
    ns.push_back(n);
    states.push_back(&e.oxidation_states);
    all_metal = all_metal && e.metal;
    space *= static_cast<double>(e.oxidation_states.size());
  }
  out.all_metal = all_metal;
  out.combinations = space;
  if (all_metal) {
    out.verdict = CompositionVerdict::valid;
    return out;
  }
  if (space == 0.0) return out;
  if (space > kMaxOxidationCombinations) {
    out.verdict = CompositionVerdict::indeterminate;
    return out;
  }
  // Odometer over the state choices, first element varying slowest.
  const std::size_t m = zs.size();
  std::vector<std::size_t> idx(m, 0);
  for (;;) {
    long long charge = 0;
    for (std::size_t i = 0; i < m; ++i) charge += static_cast<long long>(ns[i]) * (*states[i])[idx[i]];
    if (charge == 0) {
      std::map<int, int> witness;
      for (std::size_t i = 0; i < m; ++i) witness[zs[i]] = (*states[i])[idx[i]];
      out.verdict = CompositionVerdict::valid;
      out.assignment = std::move(witness);
      return out;
    }
    std::size_t d = m;
    while (d > 0) {
      --d;
      if (++idx[d] < states[d]->size()) break;
      idx[d] = 0;
      if (d == 0) return out;
    }
  }
}

inline CompositionCheck composition_validity(const Crystal& crystal) {
  return composition_validity(crystal.counts());
}

struct ValidityReport {
  bool struct_valid = false;
  double min_pair_distance = 0.0;
  CompositionCheck composition;
  bool comp_valid() const { return composition.valid(); }
  bool valid() const { return struct_valid && comp_valid(); }
};

inline ValidityReport validity(const Crystal& crystal) {
  ValidityReport r;
  r.min_pair_distance = min_pair_distance(crystal);
  r.struct_valid = structure_valid(r.min_pair_distance);
  r.composition = composition_validity(crystal);
  return r;
}

}  // namespace xtalgen
