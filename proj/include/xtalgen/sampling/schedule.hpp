#pragma once

// Paired geometric noise schedules for atom coordinates (Angstrom) and atom
// types (dimensionless), indexed j = 0..L-1 from the largest level down.

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "xtalgen/core/error.hpp"
#include "xtalgen/io/toml_lite.hpp"

namespace xtalgen {

// sigma_j = sigma_max * (sigma_min / sigma_max)^(j / (L - 1)), j = 0..L-1.
inline std::vector<double> make_geometric_sequence(double sigma_max, double sigma_min, int levels) {
  if (!(sigma_min > 0.0) || !(sigma_max > sigma_min))
    throw Error("noise schedule requires sigma_max > sigma_min > 0");
  if (levels < 2) throw Error("noise schedule requires at least 2 levels");
  std::vector<double> out(static_cast<std::size_t>(levels));
  const double log_ratio = std::log(sigma_min / sigma_max);
  for (int j = 0; j < levels; ++j)
    out[j] = sigma_max * std::exp(log_ratio * j / (levels - 1));
  out.front() = sigma_max;
  out.back() = sigma_min;
  return out;
}

struct GeometricSpec {
  double sigma_max = 0;
  double sigma_min = 0;
  int levels = 0;
};

class NoiseSchedule {
 public:
  NoiseSchedule(GeometricSpec coords, GeometricSpec types)
      : coord_spec_(coords),
        type_spec_(types),
        sigma_x_(make_geometric_sequence(coords.sigma_max, coords.sigma_min, coords.levels)),
        sigma_a_(make_geometric_sequence(types.sigma_max, types.sigma_min, types.levels)) {
    if (coords.levels != types.levels)
      throw Error("coordinate and type schedules must have the same number of levels");
  }

  // Coordinate levels 10 -> 0.01 A and type levels 5 -> 0.01, 50 levels each.
  static NoiseSchedule standard() { return {{10.0, 0.01, 50}, {5.0, 0.01, 50}}; }

  std::size_t size() const { return sigma_x_.size(); }
  double sigma_x(std::size_t j) const { return sigma_x_.at(j); }
  double sigma_a(std::size_t j) const { return sigma_a_.at(j); }
  const std::vector<double>& sigma_x() const { return sigma_x_; }
  const std::vector<double>& sigma_a() const { return sigma_a_; }
  const GeometricSpec& coord_spec() const { return coord_spec_; }
  const GeometricSpec& type_spec() const { return type_spec_; }

  // Langevin step size at level j: eps * sigma_x(j)^2 / sigma_x(L-1)^2.
  double step_size(std::size_t j, double eps) const {
    const double r = sigma_x(j) / sigma_x_.back();
    return eps * r * r;
  }

 private:
  GeometricSpec coord_spec_;
  GeometricSpec type_spec_;
  std::vector<double> sigma_x_;
  std::vector<double> sigma_a_;
};

inline NoiseSchedule make_schedule(double sigma_max, double sigma_min, int levels) {
  return {{sigma_max, sigma_min, levels}, {sigma_max, sigma_min, levels}};
}

inline std::string schedule_to_text(const NoiseSchedule& s) {
  std::ostringstream out;
  out.precision(17);
  auto section = [&out](const char* name, const GeometricSpec& g) {
    out << '[' << name << "]\n"
        << "sigma_max = " << g.sigma_max << '\n'
        << "sigma_min = " << g.sigma_min << '\n'
        << "levels = " << g.levels << '\n';
  };
  section("coords", s.coord_spec());
  out << '\n';
  section("types", s.type_spec());
  return out.str();
}

inline GeometricSpec geometric_spec_from_json(const nlohmann::json& j, const std::string& where) {
  if (!j.is_object()) throw Error("schedule section [" + where + "] missing");
  auto num = [&](const char* key) {
    if (!j.contains(key) || !j[key].is_number())
      throw Error("schedule section [" + where + "] needs numeric '" + key + "'");
    return j[key].get<double>();
  };
  if (!j.contains("levels") || !j["levels"].is_number_integer())
    throw Error("schedule section [" + where + "] needs integer 'levels'");
  return {num("sigma_max"), num("sigma_min"), j["levels"].get<int>()};
}

inline NoiseSchedule schedule_from_text(std::string_view text) {
  const auto doc = toml_lite::parse(text);
  return {geometric_spec_from_json(doc.value("coords", nlohmann::json{}), "coords"),
          geometric_spec_from_json(doc.value("types", nlohmann::json{}), "types")};
}

}  // namespace xtalgen
