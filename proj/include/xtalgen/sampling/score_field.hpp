#pragma once

// Score fields: anything that, given a noisy crystal and a noise level,
// returns per-atom coordinate scores and a per-atom distribution over atom
// types. Implementations must be safe for concurrent const use.
//
// Convention: score() returns the level-conditional score used directly by
// the Langevin update, i.e. the noise-scaled output s(M) / sigma_x. A model
// trained with the denoising loss predicts s(M) ~ d_min / sigma_x, so the
// conditional score of a perfect model is d_min / sigma_x^2.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "xtalgen/core/crystal.hpp"

namespace xtalgen {

struct NoiseLevel {
  double sigma_a = 0.0;
  double sigma_x = 1.0;
  std::size_t index = 0;
};

// Row-stochastic N x K matrix over the atomic numbers listed in `species`.
class TypeDistribution {
 public:
  TypeDistribution() = default;
  TypeDistribution(std::vector<int> species, Eigen::MatrixXd probs)
      : species_(std::move(species)), probs_(std::move(probs)) {
    if (static_cast<std::size_t>(probs_.cols()) != species_.size())
      throw Error("type distribution has mismatched species/columns");
    for (Eigen::Index i = 0; i < probs_.rows(); ++i) {
      if ((probs_.row(i).array() < 0.0).any() || !probs_.row(i).allFinite())
        throw Error("type distribution has negative or non-finite entries");
      if (std::abs(probs_.row(i).sum() - 1.0) > 1e-9)
        throw Error("type distribution row " + std::to_string(i) + " does not sum to 1");
    }
  }

  static TypeDistribution one_hot(const std::vector<int>& types) {
    std::vector<int> species = types;
    std::sort(species.begin(), species.end());
    species.erase(std::unique(species.begin(), species.end()), species.end());
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(types.size()),
                                              static_cast<Eigen::Index>(species.size()));
    for (std::size_t i = 0; i < types.size(); ++i) {
      auto col = std::lower_bound(species.begin(), species.end(), types[i]) - species.begin();
      p(static_cast<Eigen::Index>(i), col) = 1.0;
    }
    return {std::move(species), std::move(p)};
  }

  static TypeDistribution uniform(std::size_t n, std::vector<int> species) {
    if (species.empty()) throw Error("uniform type distribution needs at least one species");
    const auto k = static_cast<Eigen::Index>(species.size());
    Eigen::MatrixXd p = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(n), k, 1.0 / static_cast<double>(k));
    return {std::move(species), std::move(p)};
  }

  std::size_t rows() const { return static_cast<std::size_t>(probs_.rows()); }
  const std::vector<int>& species() const { return species_; }
  const Eigen::MatrixXd& probs() const { return probs_; }

  double prob(std::size_t atom, int z) const {
    auto it = std::find(species_.begin(), species_.end(), z);
    if (it == species_.end()) return 0.0;
    return probs_(static_cast<Eigen::Index>(atom), it - species_.begin());
  }

  // Most probable type for `atom`; ties keep `current` when it is among the
  // maxima, otherwise the smallest atomic number wins.
  int argmax(std::size_t atom, int current) const {
    const auto row = probs_.row(static_cast<Eigen::Index>(atom));
    const double best = row.maxCoeff();
    int pick = 0;
    bool found = false;
    for (Eigen::Index c = 0; c < row.size(); ++c) {
      if (row(c) == best) {
        if (species_[c] == current) return current;
        if (!found) {
          pick = species_[c];
          found = true;
        }
      }
    }
    return pick;
  }

 private:
  std::vector<int> species_;
  Eigen::MatrixXd probs_;
};

struct ScoreOutput {
  Coords scores;  // Cartesian, one per atom
  TypeDistribution types;
};

class ScoreField {
 public:
  virtual ~ScoreField() = default;
  virtual ScoreOutput score(const Crystal& noisy, const NoiseLevel& level) const = 0;
  virtual std::string name() const = 0;
};

// The minimiser of the denoising loss around a fixed reference structure:
// scores point along the minimum-image displacement back to the reference,
// d_min(x~ -> x) / sigma_x^2, and types are the reference types.
class HarmonicOracle final : public ScoreField {
 public:
  explicit HarmonicOracle(Crystal reference)
      : reference_(std::move(reference)),
        frame_(reference_.lattice()),
        types_(TypeDistribution::one_hot(reference_.types())) {}

  const Crystal& reference() const { return reference_; }

  ScoreOutput score(const Crystal& noisy, const NoiseLevel& level) const override {
    if (noisy.size() != reference_.size())
      throw Error("harmonic oracle: atom count differs from the reference");
    if (noisy.lattice().matrix() != reference_.lattice().matrix()) {
      // Rotated copies are allowed; the metric must agree.
      if ((noisy.lattice().metric() - reference_.lattice().metric()).cwiseAbs().maxCoeff() >
          1e-8 * reference_.lattice().metric().cwiseAbs().maxCoeff())
        throw Error("harmonic oracle: lattice differs from the reference");
    }
    const PeriodicFrame& frame =
        noisy.lattice().matrix() == reference_.lattice().matrix() ? frame_ : local_frame(noisy);
    const double inv_var = 1.0 / (level.sigma_x * level.sigma_x);
    ScoreOutput out;
    out.scores.reserve(noisy.size());
    for (std::size_t i = 0; i < noisy.size(); ++i)
      out.scores.push_back(
          frame.displacement(noisy.frac_coords()[i], reference_.frac_coords()[i]) * inv_var);
    out.types = types_;
    return out;
  }

  std::string name() const override { return "harmonic"; }

 private:
  // Frame for a rotated copy of the reference lattice.
  const PeriodicFrame& local_frame(const Crystal& noisy) const {
    thread_local std::unique_ptr<PeriodicFrame> cache;
    if (!cache || cache->lattice().matrix() != noisy.lattice().matrix())
      cache = std::make_unique<PeriodicFrame>(noisy.lattice());
    return *cache;
  }

  Crystal reference_;
  PeriodicFrame frame_;
  TypeDistribution types_;
};

// Always returns zero scores and a uniform type distribution over the
// species present in the input.
class ZeroScoreField final : public ScoreField {
 public:
  ScoreOutput score(const Crystal& noisy, const NoiseLevel&) const override {
    std::vector<int> species = noisy.composition().support();
    return {Coords(noisy.size(), Vec3::Zero()), TypeDistribution::uniform(noisy.size(), species)};
  }
  std::string name() const override { return "zero"; }
};

// Soft-sphere repulsion: E = sum over minimum-image pairs with d < cutoff of
// stiffness * max(0, r_i + r_j - d)^3, score = -grad E. Radii default to the
// covalent radii of the element table.
class SoftSphereField final : public ScoreField {
 public:
  SoftSphereField(double stiffness = 1.0, double cutoff = 6.0, std::map<int, double> radii = {},
                  double radius_scale = 1.0)
      : stiffness_(stiffness), cutoff_(cutoff), radii_(std::move(radii)), radius_scale_(radius_scale) {
    if (!(stiffness_ >= 0.0)) throw Error("soft-sphere stiffness must be >= 0");
    if (!(cutoff_ > 0.0)) throw Error("soft-sphere cutoff must be > 0");
  }

  double radius(int z) const {
    auto it = radii_.find(z);
    if (it != radii_.end()) return it->second;
    const double r = elements()[z].covalent_radius;
    if (std::isnan(r)) throw Error("no covalent radius for element " + symbol_of(z));
    return r * radius_scale_;
  }

  double energy(const Crystal& c) const {
    const PeriodicFrame frame(c.lattice());
    double e = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i)
      for (std::size_t j = i + 1; j < c.size(); ++j) {
        const double d = frame.displacement(c.frac_coords()[i], c.frac_coords()[j]).norm();
        const double overlap = radius(c.types()[i]) + radius(c.types()[j]) - d;
        if (d < cutoff_ && overlap > 0.0) e += stiffness_ * overlap * overlap * overlap;
      }
    return e;
  }

  Coords forces(const Crystal& c) const {
    const PeriodicFrame frame(c.lattice());
    Coords f(c.size(), Vec3::Zero());
    for (std::size_t i = 0; i < c.size(); ++i)
      for (std::size_t j = i + 1; j < c.size(); ++j) {
        const Vec3 v = frame.displacement(c.frac_coords()[i], c.frac_coords()[j]);  // i -> j
        const double d = v.norm();
        const double overlap = radius(c.types()[i]) + radius(c.types()[j]) - d;
        if (d <= 0.0 || d >= cutoff_ || overlap <= 0.0) continue;
        const Vec3 push = (3.0 * stiffness_ * overlap * overlap / d) * v;
        f[i] -= push;
        f[j] += push;
      }
    return f;
  }

  ScoreOutput score(const Crystal& noisy, const NoiseLevel&) const override {
    return {forces(noisy), TypeDistribution::uniform(noisy.size(), noisy.composition().support())};
  }

  std::string name() const override { return "soft_sphere"; }

 private:
  double stiffness_;
  double cutoff_;
  std::map<int, double> radii_;
  double radius_scale_;
};

inline Coords soft_sphere_scores(const Crystal& crystal, const SoftSphereField& field) {
  return field.forces(crystal);
}

}  // namespace xtalgen
