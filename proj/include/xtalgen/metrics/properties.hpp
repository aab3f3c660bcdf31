#pragma once

// Per-crystal scalar properties and their distribution distances.

#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "xtalgen/core/crystal.hpp"
#include "xtalgen/metrics/emd.hpp"

namespace xtalgen {

inline constexpr double kAmuPerCubicAngstromToGramPerCc = 1.66053906660;

// Mass density in g/cm^3.
inline double density(const Crystal& crystal, const ElementTable& table = elements()) {
  double mass = 0.0;
  for (int z : crystal.types()) mass += table[z].mass;
  return mass / crystal.lattice().volume() * kAmuPerCubicAngstromToGramPerCc;
}

inline std::size_t num_elements(const Crystal& crystal) {
  return std::set<int>(crystal.types().begin(), crystal.types().end()).size();
}

using PropertyFn = std::function<double(std::size_t index, const Crystal&)>;

struct PropertyStats {
  double emd_density = 0.0;
  double emd_num_elems = 0.0;
  std::map<std::string, double> emd_custom;
};

inline std::vector<double> property_values(const std::vector<Crystal>& set, const PropertyFn& fn) {
  std::vector<double> out;
  out.reserve(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) out.push_back(fn(i, set[i]));
  return out;
}

inline PropertyStats property_stats(const std::vector<Crystal>& generated, const std::vector<Crystal>& reference,
                                    const std::map<std::string, std::pair<PropertyFn, PropertyFn>>& custom = {}) {
  PropertyStats out;
  const PropertyFn rho = [](std::size_t, const Crystal& c) { return density(c); };
  const PropertyFn nel = [](std::size_t, const Crystal& c) { return static_cast<double>(num_elements(c)); };
  out.emd_density = emd_1d(property_values(generated, rho), property_values(reference, rho));
  out.emd_num_elems = emd_1d(property_values(generated, nel), property_values(reference, nel));
  for (const auto& [name, fns] : custom)
    out.emd_custom[name] = emd_1d(property_values(generated, fns.first), property_values(reference, fns.second));
  return out;
}

}  // namespace xtalgen
