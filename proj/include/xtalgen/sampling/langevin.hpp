#pragma once

// Annealed Langevin dynamics over a ScoreField, and the numerical check that
// the oracle force term is a harmonic spring toward the reference.

#include <cmath>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "xtalgen/sampling/noise.hpp"

namespace xtalgen {

struct SamplerConfig {
  NoiseSchedule schedule = NoiseSchedule::standard();
  double step_size_eps = 1e-4;
  int steps_per_level = 100;
  std::uint64_t seed = 0;
  bool record_trajectory = false;

  void validate() const {
    if (!(step_size_eps > 0.0) || !std::isfinite(step_size_eps))
      throw Error("sampler step size must be finite and > 0");
    if (steps_per_level < 1) throw Error("sampler needs at least one step per level");
  }
};

struct TrajectoryStep {
  std::size_t level = 0;
  int step = 0;
  double sigma_x = 0.0;
  double sigma_a = 0.0;
  double alpha = 0.0;
  double mean_score_norm = 0.0;
  std::size_t type_changes = 0;
};

struct SampleResult {
  Crystal crystal;
  std::vector<TrajectoryStep> trajectory;  // empty unless requested
};

// Uniform fractional coordinates and i.i.d. types drawn from `c`.
inline Crystal init_structure(const Composition& c, const Lattice& lattice, std::size_t n_atoms,
                              Philox& rng) {
  if (c.empty()) throw Error("init_structure requires a non-empty composition");
  if (n_atoms < 1) throw Error("init_structure requires at least one atom");
  Coords frac(n_atoms);
  std::vector<int> types(n_atoms);
  for (std::size_t i = 0; i < n_atoms; ++i) {
    frac[i] = Vec3(rng.uniform(), rng.uniform(), rng.uniform());
    types[i] = c.sample(rng);
  }
  return Crystal(std::move(types), std::move(frac), lattice);
}

// Runs L x T Langevin steps starting from `start`. Stream 1 of the seed drives
// the update noise.
inline SampleResult anneal_from(const ScoreField& field, const Crystal& start, const SamplerConfig& config) {
  config.validate();
  Philox rng = Philox(config.seed).split(1);
  const Lattice& lattice = start.lattice();
  const Mat3 frame = lattice.frame_rotation();
  const NoiseSchedule& sched = config.schedule;

  std::vector<int> types = start.types();
  Coords frac = start.frac_coords();
  SampleResult result{start, {}};
  if (config.record_trajectory)
    result.trajectory.reserve(sched.size() * static_cast<std::size_t>(config.steps_per_level));

  Crystal current = start;
  for (std::size_t j = 0; j < sched.size(); ++j) {
    const double alpha = sched.step_size(j, config.step_size_eps);
    const double noise_scale = std::sqrt(2.0 * alpha);
    const NoiseLevel level{sched.sigma_a(j), sched.sigma_x(j), j};
    for (int t = 1; t <= config.steps_per_level; ++t) {
      const ScoreOutput out = field.score(current, level);
      if (out.scores.size() != frac.size() || out.types.rows() != frac.size())
        throw Error("score field '" + field.name() + "' returned the wrong number of atoms");
      double norm_sum = 0.0;
      for (std::size_t i = 0; i < frac.size(); ++i) {
        if (!out.scores[i].allFinite())
          throw Error("non-finite score from field '" + field.name() + "' at level " +
                      std::to_string(j) + ", step " + std::to_string(t) + ", atom " +
                      std::to_string(i));
        norm_sum += out.scores[i].norm();
        const Vec3 move = alpha * out.scores[i] + noise_scale * lattice_frame_normal(frame, rng);
        frac[i] = wrap_unit(Vec3(frac[i] + lattice.to_frac(move)));
      }
      std::size_t changes = 0;
      for (std::size_t i = 0; i < types.size(); ++i) {
        const int next = out.types.argmax(i, types[i]);
        if (next != types[i]) {
          types[i] = next;
          ++changes;
        }
      }
      current = Crystal(types, frac, lattice);
      if (config.record_trajectory)
        result.trajectory.push_back({j, t, level.sigma_x, level.sigma_a, alpha,
                                     norm_sum / static_cast<double>(frac.size()), changes});
    }
  }
  result.crystal = std::move(current);
  return result;
}

// Initializes from (c, lattice, n_atoms) with stream 0 of the seed, unless an
// explicit starting structure is supplied, then anneals.
inline SampleResult anneal_sample(const ScoreField& field, const Composition& c, const Lattice& lattice,
                                  std::size_t n_atoms, const SamplerConfig& config,
                                  const std::optional<Crystal>& initial = std::nullopt) {
  config.validate();
  if (initial) return anneal_from(field, *initial, config);
  Philox init_rng = Philox(config.seed).split(0);
  return anneal_from(field, init_structure(c, lattice, n_atoms, init_rng), config);
}

inline void write_trajectory_csv(const std::vector<TrajectoryStep>& steps, std::ostream& out) {
  out << "level,step,sigma_x,sigma_a,alpha,mean_score_norm,type_changes\n";
  const auto old = out.precision(12);
  for (const auto& s : steps)
    out << s.level << ',' << s.step << ',' << s.sigma_x << ',' << s.sigma_a << ',' << s.alpha << ','
        << s.mean_score_norm << ',' << s.type_changes << '\n';
  out.precision(old);
}

struct HarmonicLevelReport {
  std::size_t index = 0;
  double sigma_x = 0.0;
  double alpha = 0.0;
  double residual = 0.0;  // max_i |alpha s_i - k d_min(x~_i -> x_i)|
  bool boundary_crossing = false;
};

struct HarmonicReport {
  double k = 0.0;  // eps / sigma_x_min^2
  std::vector<HarmonicLevelReport> levels;
  double max_residual = 0.0;
  // First level from which no sampled displacement crossed a periodic
  // boundary; equals the number of levels when even the last level crossed.
  std::size_t small_noise_start = 0;
  bool passed(double tol = 1e-10) const { return max_residual <= tol; }
};

struct HarmonicSample {
  double residual = 0.0;
  bool boundary_crossing = false;
};

// Residual for an explicit Cartesian displacement field X~ - X (unwrapped).
inline HarmonicSample harmonic_residual(const HarmonicOracle& oracle, const Coords& displacement,
                                        double sigma_x, double alpha, double k) {
  const Crystal& ref = oracle.reference();
  if (displacement.size() != ref.size()) throw Error("displacement count differs from the reference");
  Coords frac = ref.frac_coords();
  for (std::size_t i = 0; i < frac.size(); ++i)
    frac[i] = wrap_unit(Vec3(frac[i] + ref.lattice().to_frac(displacement[i])));
  const Crystal noisy = ref.with_frac_coords(frac);
  const Coords s = oracle.score(noisy, {0.0, sigma_x, 0}).scores;
  const PeriodicFrame frame(ref.lattice());
  HarmonicSample out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const Vec3 d = frame.displacement(noisy.frac_coords()[i], ref.frac_coords()[i]);
    out.residual = std::max(out.residual, (alpha * s[i] - k * d).cwiseAbs().maxCoeff());
    if ((d + displacement[i]).norm() > 1e-9 * (1.0 + displacement[i].norm())) out.boundary_crossing = true;
  }
  return out;
}

// Samples X~ ~ N(X, sigma_x_j^2 I) at every level and checks
// alpha_j s(X~) = k d_min(X~ -> X) with k = eps / sigma_x_min^2.
inline HarmonicReport harmonic_equivalence_check(const Crystal& reference, const NoiseSchedule& schedule,
                                                 double eps, Philox rng, std::size_t samples_per_level = 8) {
  if (!(eps > 0.0)) throw Error("harmonic check requires eps > 0");
  const HarmonicOracle oracle(reference);
  HarmonicReport report;
  const double smin = schedule.sigma_x().back();
  report.k = eps / (smin * smin);
  std::size_t last_crossing = schedule.size();
  for (std::size_t j = 0; j < schedule.size(); ++j) {
    const double alpha = schedule.step_size(j, eps);
    HarmonicLevelReport lr{j, schedule.sigma_x(j), alpha};
    for (std::size_t s = 0; s < samples_per_level; ++s) {
      const NoisyCrystal noisy = perturb_coords(reference, schedule.sigma_x(j), rng, j);
      const auto hs = harmonic_residual(oracle, noisy.noise, schedule.sigma_x(j), alpha, report.k);
      lr.residual = std::max(lr.residual, hs.residual);
      lr.boundary_crossing = lr.boundary_crossing || hs.boundary_crossing;
    }
    if (lr.boundary_crossing) last_crossing = j;
    report.max_residual = std::max(report.max_residual, lr.residual);
    report.levels.push_back(lr);
  }
  report.small_noise_start = last_crossing == schedule.size() ? 0 : last_crossing + 1;
  return report;
}

}  // namespace xtalgen
