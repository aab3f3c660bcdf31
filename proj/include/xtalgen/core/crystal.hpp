#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "xtalgen/core/elements.hpp"
#include "xtalgen/core/error.hpp"
#include "xtalgen/core/lattice.hpp"
#include "xtalgen/core/rng.hpp"

namespace xtalgen {

using Coords = std::vector<Vec3>;

// Normalized element fractions (atomic number -> fraction in (0, 1]).
class Composition {
 public:
  Composition() = default;

  // Weights need not be normalized; zero weights are dropped.
  explicit Composition(const std::map<int, double>& weights) {
    double total = 0.0;
    for (const auto& [z, w] : weights) {
      if (z < 1 || z > 118) throw Error("composition has invalid atomic number " + std::to_string(z));
      if (!(w >= 0.0) || !std::isfinite(w)) throw Error("composition weights must be finite and >= 0");
      total += w;
    }
    if (!(total > 0.0)) throw Error("composition has zero support");
    for (const auto& [z, w] : weights)
      if (w > 0.0) fractions_[z] = w / total;
  }

  static Composition from_types(const std::vector<int>& types) {
    std::map<int, double> counts;
    for (int z : types) counts[z] += 1.0;
    return Composition(counts);
  }

  const std::map<int, double>& fractions() const { return fractions_; }
  bool empty() const { return fractions_.empty(); }
  std::size_t size() const { return fractions_.size(); }

  double fraction(int z) const {
    auto it = fractions_.find(z);
    return it == fractions_.end() ? 0.0 : it->second;
  }

  std::vector<int> support() const {
    std::vector<int> out;
    for (const auto& [z, f] : fractions_) out.push_back(z);
    return out;
  }

  // Draw one atomic number with probability equal to its fraction.
  int sample(Philox& rng) const {
    if (fractions_.empty()) throw Error("cannot sample from an empty composition");
    const double u = rng.uniform();
    double acc = 0.0;
    for (const auto& [z, f] : fractions_) {
      acc += f;
      if (u < acc) return z;
    }
    return fractions_.rbegin()->first;
  }

  bool operator==(const Composition&) const = default;

 private:
  std::map<int, double> fractions_;
};

// One periodic structure. Coordinates are fractional and always wrapped to
// [0, 1) on construction.
class Crystal {
 public:
  Crystal(std::vector<int> types, Coords frac, Lattice lattice)
      : types_(std::move(types)), frac_(std::move(frac)), lattice_(std::move(lattice)) {
    if (types_.empty()) throw Error("crystal must contain at least one atom");
    if (types_.size() != frac_.size())
      throw Error("crystal has " + std::to_string(types_.size()) + " types but " +
                  std::to_string(frac_.size()) + " coordinates");
    for (int z : types_)
      if (z < 1 || z > 118) throw Error("invalid atomic number " + std::to_string(z));
    for (auto& x : frac_) x = wrap_unit(x);
  }

  std::size_t size() const { return types_.size(); }
  const std::vector<int>& types() const { return types_; }
  const Coords& frac_coords() const { return frac_; }
  const Lattice& lattice() const { return lattice_; }
  Composition composition() const { return Composition::from_types(types_); }

  std::map<int, int> counts() const {
    std::map<int, int> out;
    for (int z : types_) ++out[z];
    return out;
  }

  Crystal with_frac_coords(Coords frac) const { return {types_, std::move(frac), lattice_}; }
  Crystal with_types(std::vector<int> types) const { return {std::move(types), frac_, lattice_}; }
  Crystal with_lattice(Lattice lattice) const { return {types_, frac_, std::move(lattice)}; }

  bool operator==(const Crystal& o) const {
    return types_ == o.types_ && frac_ == o.frac_ && lattice_.matrix() == o.lattice_.matrix();
  }

 private:
  std::vector<int> types_;
  Coords frac_;
  Lattice lattice_;
};

inline Coords frac_to_cart(const Lattice& lattice, const Coords& frac) {
  Coords out;
  out.reserve(frac.size());
  for (const auto& f : frac) out.push_back(lattice.to_cart(f));
  return out;
}

inline Coords frac_to_cart(const Crystal& crystal) {
  return frac_to_cart(crystal.lattice(), crystal.frac_coords());
}

inline Coords cart_to_frac(const Lattice& lattice, const Coords& cart) {
  Coords out;
  out.reserve(cart.size());
  for (const auto& c : cart) out.push_back(lattice.to_frac(c));
  return out;
}

inline Coords wrap_to_cell(const Coords& frac) {
  Coords out;
  out.reserve(frac.size());
  for (const auto& f : frac) out.push_back(wrap_unit(f));
  return out;
}

// cbrt(V / N): the per-atom length scale used to normalize match distances.
inline double normalized_length_scale(const Crystal& crystal) {
  return std::cbrt(crystal.lattice().volume() / static_cast<double>(crystal.size()));
}

// Same atoms expressed in the Niggli-reduced cell of the crystal's lattice.
inline Crystal to_niggli_cell(const Crystal& crystal) {
  const Lattice reduced = niggli_reduce(crystal.lattice());
  Coords frac;
  frac.reserve(crystal.size());
  for (const auto& f : crystal.frac_coords())
    frac.push_back(reduced.to_frac(crystal.lattice().to_cart(f)));
  return {crystal.types(), std::move(frac), reduced};
}

// Apply a rigid rotation to the cell (fractional coordinates unchanged).
inline Crystal rotated(const Crystal& crystal, const Mat3& rotation) {
  return crystal.with_lattice(crystal.lattice().rotated(rotation));
}

// Rigid fractional translation followed by wrapping.
inline Crystal translated(const Crystal& crystal, const Vec3& shift) {
  Coords frac = crystal.frac_coords();
  for (auto& f : frac) f += shift;
  return crystal.with_frac_coords(std::move(frac));
}

// Relabel atoms: new atom i is old atom order[i].
inline Crystal permuted(const Crystal& crystal, const std::vector<std::size_t>& order) {
  if (order.size() != crystal.size()) throw Error("permutation size mismatch");
  std::vector<int> types;
  Coords frac;
  for (std::size_t i : order) {
    types.push_back(crystal.types().at(i));
    frac.push_back(crystal.frac_coords().at(i));
  }
  return {std::move(types), std::move(frac), crystal.lattice()};
}

inline std::string formula(const Crystal& crystal) {
  std::string out;
  for (const auto& [z, n] : crystal.counts()) {
    out += symbol_of(z);
    if (n != 1) out += std::to_string(n);
  }
  return out;
}

}  // namespace xtalgen
