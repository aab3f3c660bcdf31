#pragma once

// Perturbation of clean crystals, denoising score targets and the
// Monte-Carlo denoising loss.

#include <cmath>
#include <functional>
#include <memory>
#include <numeric>
#include <vector>

#include "xtalgen/core/crystal.hpp"
#include "xtalgen/core/rng.hpp"
#include "xtalgen/sampling/schedule.hpp"
#include "xtalgen/sampling/score_field.hpp"

namespace xtalgen {

struct NoisyCrystal {
  Crystal crystal;
  std::shared_ptr<const Crystal> reference;
  std::size_t level = 0;
  Coords noise;  // Cartesian displacement added to each atom before wrapping
};

// Standard normal 3-vector in the lattice's canonical frame, rotated into the
// lattice's actual orientation. The distribution is N(0, I) either way; the
// rotation makes noise realizations follow the cell when it is rotated.
inline Vec3 lattice_frame_normal(const Mat3& frame, Philox& rng) {
  Vec3 e;
  e[0] = rng.normal();
  e[1] = rng.normal();
  e[2] = rng.normal();
  return frame * e;
}

inline NoisyCrystal perturb_coords(const Crystal& crystal, double sigma_x, Philox& rng,
                                   std::size_t level = 0) {
  if (!(sigma_x >= 0.0)) throw Error("perturb_coords requires sigma_x >= 0");
  auto ref = std::make_shared<const Crystal>(crystal);
  if (sigma_x == 0.0)
    return {crystal, std::move(ref), level, Coords(crystal.size(), Vec3::Zero())};
  const Lattice& lattice = crystal.lattice();
  const Mat3 frame = lattice.frame_rotation();
  Coords frac = crystal.frac_coords();
  Coords noise(crystal.size());
  for (std::size_t i = 0; i < frac.size(); ++i) {
    noise[i] = sigma_x * lattice_frame_normal(frame, rng);
    frac[i] = wrap_unit(Vec3(frac[i] + lattice.to_frac(noise[i])));
  }
  return {crystal.with_frac_coords(std::move(frac)), std::move(ref), level, std::move(noise)};
}

// Each type is redrawn from (1/(1+s)) one_hot(true) + (s/(1+s)) c.
inline std::vector<int> perturb_types(const std::vector<int>& true_types, const Composition& c,
                                      double sigma_a, Philox& rng) {
  if (c.empty()) throw Error("perturb_types requires a composition with non-empty support");
  if (!(sigma_a >= 0.0)) throw Error("perturb_types requires sigma_a >= 0");
  const double keep = 1.0 / (1.0 + sigma_a);
  std::vector<int> out(true_types.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = rng.uniform() < keep ? true_types[i] : c.sample(rng);
  return out;
}

// Row i: d_min(noisy_i -> reference_i) / sigma_x.
inline Coords score_target(const Crystal& reference, const Crystal& noisy, double sigma_x,
                           const PeriodicFrame& frame) {
  if (reference.size() != noisy.size())
    throw Error("score_target: noisy crystal has " + std::to_string(noisy.size()) +
                " atoms, reference has " + std::to_string(reference.size()));
  Coords out(reference.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = frame.displacement(noisy.frac_coords()[i], reference.frac_coords()[i]) / sigma_x;
  return out;
}

inline Coords score_target(const Crystal& reference, const Crystal& noisy, double sigma_x) {
  return score_target(reference, noisy, sigma_x, PeriodicFrame(reference.lattice()));
}

inline Coords score_target(const Crystal& reference, const NoisyCrystal& noisy, double sigma_x) {
  return score_target(reference, noisy.crystal, sigma_x);
}

struct LevelLoss {
  std::size_t index = 0;
  double sigma_x = 0.0;
  double sigma_a = 0.0;
  std::size_t samples = 0;
  double coord_mean = 0.0;  // E ||s_X - d_min / sigma_x||^2, summed over atoms
  double coord_se = 0.0;
  double type_mean = 0.0;  // E CE(p_A, true types), summed over atoms
  double type_se = 0.0;
  double crossing_fraction = 0.0;  // samples where some atom's d_min differs from the raw noise
};

struct LossReport {
  double total = 0.0;
  double coord_term = 0.0;  // (1/2L') sum_j coord_mean_j
  double coord_se = 0.0;
  double type_term = 0.0;  // (1/2L') sum_j (lambda_a / sigma_a_j) type_mean_j
  std::vector<LevelLoss> levels;
};

struct LossOptions {
  double lambda_a = 1.0;
  std::size_t samples_per_level = 32;
  std::vector<std::size_t> levels;  // empty: every level of the schedule
  double log_floor = 1e-12;         // probabilities are clamped before taking logs
};

using FieldProvider = std::function<const ScoreField&(std::size_t record)>;

// Monte-Carlo estimate of
//   (1/2L') sum_j E[ ||s_X - d_min/sigma_x_j||^2 + (lambda_a/sigma_a_j) CE(p_A, A) ]
// over the selected levels, where s_X = sigma_x_j * field.score(...) is the
// noise-scaled network output. Level j draws from rng.split(j).
inline LossReport denoising_loss(const FieldProvider& field_for, const std::vector<Crystal>& dataset,
                                 const NoiseSchedule& schedule, const Philox& rng,
                                 const LossOptions& opt = {}) {
  if (dataset.empty()) throw Error("denoising_loss requires a non-empty dataset");
  if (!(opt.lambda_a >= 0.0)) throw Error("denoising_loss requires lambda_a >= 0");
  if (opt.samples_per_level < 1) throw Error("denoising_loss requires samples_per_level >= 1");
  std::vector<std::size_t> levels = opt.levels;
  if (levels.empty()) {
    levels.resize(schedule.size());
    std::iota(levels.begin(), levels.end(), std::size_t{0});
  }
  std::vector<PeriodicFrame> frames;
  frames.reserve(dataset.size());
  for (const auto& c : dataset) frames.emplace_back(c.lattice());

  LossReport report;
  double coord_var_sum = 0.0;
  for (std::size_t j : levels) {
    if (j >= schedule.size()) throw Error("denoising_loss: level index out of range");
    const double sx = schedule.sigma_x(j), sa = schedule.sigma_a(j);
    Philox level_rng = rng.split(j);
    LevelLoss ll{j, sx, sa, opt.samples_per_level};
    double cs = 0, cs2 = 0, ts = 0, ts2 = 0;
    std::size_t crossings = 0;
    for (std::size_t s = 0; s < opt.samples_per_level; ++s) {
      const std::size_t r = dataset.size() == 1 ? 0 : level_rng.below(dataset.size());
      const Crystal& clean = dataset[r];
      const auto types = perturb_types(clean.types(), clean.composition(), sa, level_rng);
      NoisyCrystal noisy = perturb_coords(clean.with_types(types), sx, level_rng, j);
      const Coords target = score_target(clean, noisy.crystal, sx, frames[r]);
      const ScoreOutput out = field_for(r).score(noisy.crystal, {sa, sx, j});
      if (out.scores.size() != clean.size() || out.types.rows() != clean.size())
        throw Error("score field returned the wrong number of atoms");
      double coord = 0.0, ce = 0.0;
      bool crossed = false;
      for (std::size_t i = 0; i < clean.size(); ++i) {
        coord += (sx * out.scores[i] - target[i]).squaredNorm();
        ce -= std::log(std::max(out.types.prob(i, clean.types()[i]), opt.log_floor));
        if ((target[i] * sx + noisy.noise[i]).norm() > 1e-9 * (1.0 + noisy.noise[i].norm()))
          crossed = true;
      }
      if (!std::isfinite(coord)) throw Error("score field returned non-finite scores");
      cs += coord;
      cs2 += coord * coord;
      ts += ce;
      ts2 += ce * ce;
      crossings += crossed ? 1 : 0;
    }
    const double n = static_cast<double>(opt.samples_per_level);
    ll.coord_mean = cs / n;
    ll.type_mean = ts / n;
    if (n > 1) {
      ll.coord_se = std::sqrt(std::max(0.0, (cs2 - n * ll.coord_mean * ll.coord_mean) / (n - 1)) / n);
      ll.type_se = std::sqrt(std::max(0.0, (ts2 - n * ll.type_mean * ll.type_mean) / (n - 1)) / n);
    }
    ll.crossing_fraction = static_cast<double>(crossings) / n;
    report.coord_term += ll.coord_mean;
    coord_var_sum += ll.coord_se * ll.coord_se;
    report.type_term += opt.lambda_a / sa * ll.type_mean;
    report.levels.push_back(ll);
  }
  const double norm = 1.0 / (2.0 * static_cast<double>(levels.size()));
  report.coord_term *= norm;
  report.type_term *= norm;
  report.coord_se = norm * std::sqrt(coord_var_sum);
  report.total = report.coord_term + report.type_term;
  return report;
}

inline LossReport denoising_loss(const ScoreField& field, const std::vector<Crystal>& dataset,
                                 const NoiseSchedule& schedule, const Philox& rng,
                                 const LossOptions& opt = {}) {
  return denoising_loss([&field](std::size_t) -> const ScoreField& { return field; }, dataset,
                        schedule, rng, opt);
}

}  // namespace xtalgen
