#pragma once

// JSON-lines crystal datasets. One object per line:
//   {"id": "...", "lattice": [[...],[...],[...]] | "lattice_params": [a,b,c,al,be,ga],
//    "species": ["Na", ...], "frac_coords": [[x,y,z], ...], "properties": {"name": 1.0}}
// Saving is canonical: sorted keys, the matrix lattice form, and every float
// rounded to 12 significant digits.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "xtalgen/core/crystal.hpp"
#include "xtalgen/core/elements.hpp"
#include "xtalgen/io/files.hpp"

namespace xtalgen {

struct CrystalRecord {
  std::string id;
  Crystal crystal;
  std::map<std::string, double> properties;

  bool operator==(const CrystalRecord&) const = default;
};

using WarningSink = std::function<void(const std::string&)>;

inline void warn_to_stderr(const std::string& msg) { std::cerr << "warning: " << msg << '\n'; }

namespace io {

inline double round_sig12(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  const double r = std::strtod(buf, nullptr);
  return r == 0.0 ? 0.0 : r;  // drop negative zero
}

namespace detail {

class RecordParser {
 public:
  RecordParser(std::string source, std::size_t line, const WarningSink& warn)
      : source_(std::move(source)), line_(line), warn_(warn) {}

  CrystalRecord parse(const nlohmann::json& j) const {
    if (!j.is_object()) fail("", "expected a JSON object");
    for (const auto& [key, _] : j.items())
      if (key != "id" && key != "lattice" && key != "lattice_params" && key != "species" &&
          key != "frac_coords" && key != "properties")
        fail(key, "unknown field");
    if (!j.contains("id") || !j["id"].is_string() || j["id"].get<std::string>().empty())
      fail("id", "expected a non-empty string");
    const std::string id = j["id"].get<std::string>();

    const Lattice lattice = parse_lattice(j);
    if (!j.contains("species") || !j["species"].is_array() || j["species"].empty())
      fail("species", "expected a non-empty array of element symbols");
    std::vector<int> types;
    for (const auto& s : j["species"]) {
      if (!s.is_string()) fail("species", "expected element symbols");
      const auto z = elements().find_symbol(s.get<std::string>());
      if (!z) fail("species", "unknown element symbol '" + s.get<std::string>() + "'");
      types.push_back(*z);
    }

    if (!j.contains("frac_coords") || !j["frac_coords"].is_array())
      fail("frac_coords", "expected an array of [x, y, z]");
    const auto& fc = j["frac_coords"];
    if (fc.size() != types.size())
      fail("frac_coords", "has " + std::to_string(fc.size()) + " entries for " +
                              std::to_string(types.size()) + " species");
    Coords frac;
    for (std::size_t i = 0; i < fc.size(); ++i) {
      const Vec3 x = vec3(fc[i], "frac_coords");
      for (int d = 0; d < 3; ++d)
        if (x[d] < 0.0 || x[d] >= 1.0) {
          if (warn_)
            warn_(where() + ": atom " + std::to_string(i) + " coordinate " + std::to_string(x[d]) +
                  " outside [0, 1), wrapped");
          break;
        }
      frac.push_back(x);
    }

    std::map<std::string, double> props;
    if (j.contains("properties")) {
      if (!j["properties"].is_object()) fail("properties", "expected an object of name: number");
      for (const auto& [k, v] : j["properties"].items()) {
        if (!v.is_number() || !std::isfinite(v.get<double>()))
          fail("properties", "'" + k + "' must be a finite number");
        props[k] = v.get<double>();
      }
    }
    try {
      return {id, Crystal(std::move(types), std::move(frac), lattice), std::move(props)};
    } catch (const Error& e) {
      fail("", e.what());
    }
  }

 private:
  std::string where() const { return source_ + " line " + std::to_string(line_); }

  [[noreturn]] void fail(const std::string& field, const std::string& msg) const {
    throw Error(where() + (field.empty() ? "" : ", field '" + field + "'") + ": " + msg);
  }

  Vec3 vec3(const nlohmann::json& v, const char* field) const {
    if (!v.is_array() || v.size() != 3) fail(field, "expected an array of 3 numbers");
    Vec3 out;
    for (int d = 0; d < 3; ++d) {
      if (!v[d].is_number()) fail(field, "expected numbers");
      out[d] = v[d].get<double>();
      if (!std::isfinite(out[d])) fail(field, "non-finite value");
    }
    return out;
  }

  Lattice parse_lattice(const nlohmann::json& j) const {
    const bool has_m = j.contains("lattice"), has_p = j.contains("lattice_params");
    if (has_m == has_p) fail("lattice", "give exactly one of 'lattice' or 'lattice_params'");
    try {
      if (has_m) {
        const auto& m = j["lattice"];
        if (!m.is_array() || m.size() != 3) fail("lattice", "expected a 3x3 array");
        return Lattice::from_rows(vec3(m[0], "lattice"), vec3(m[1], "lattice"), vec3(m[2], "lattice"));
      }
      const auto& p = j["lattice_params"];
      if (!p.is_array() || p.size() != 6) fail("lattice_params", "expected [a, b, c, alpha, beta, gamma]");
      double v[6];
      for (int k = 0; k < 6; ++k) {
        if (!p[k].is_number()) fail("lattice_params", "expected numbers");
        v[k] = p[k].get<double>();
        if (!std::isfinite(v[k])) fail("lattice_params", "non-finite value");
      }
      return params_to_lattice({v[0], v[1], v[2], v[3], v[4], v[5]});
    } catch (const Error& e) {
      const std::string msg = e.what();
      if (msg.rfind(source_, 0) == 0) throw;
      fail(has_m ? "lattice" : "lattice_params", msg);
    }
  }

  std::string source_;
  std::size_t line_;
  const WarningSink& warn_;
};

inline nlohmann::json vec_json(const Vec3& v) {
  return nlohmann::json::array({round_sig12(v[0]), round_sig12(v[1]), round_sig12(v[2])});
}

}  // namespace detail

inline CrystalRecord record_from_json(const nlohmann::json& j, const std::string& where = "record",
                                      const WarningSink& warn = warn_to_stderr) {
  return detail::RecordParser(where, 1, warn).parse(j);
}

inline nlohmann::json record_to_json(const CrystalRecord& r) {
  nlohmann::json j;
  j["id"] = r.id;
  const Lattice& l = r.crystal.lattice();
  j["lattice"] = {detail::vec_json(l.row(0)), detail::vec_json(l.row(1)), detail::vec_json(l.row(2))};
  j["species"] = nlohmann::json::array();
  for (int z : r.crystal.types()) j["species"].push_back(symbol_of(z));
  j["frac_coords"] = nlohmann::json::array();
  for (const Vec3& x : r.crystal.frac_coords()) {
    Vec3 y = x;
    // 0.99999999999996 rounds to 1 at 12 digits; keep the canonical range.
    for (int d = 0; d < 3; ++d)
      if (round_sig12(y[d]) >= 1.0) y[d] = 0.0;
    j["frac_coords"].push_back(detail::vec_json(y));
  }
  if (!r.properties.empty()) {
    j["properties"] = nlohmann::json::object();
    for (const auto& [k, v] : r.properties) j["properties"][k] = round_sig12(v);
  }
  return j;
}

inline std::vector<CrystalRecord> parse_dataset(std::string_view text, const std::string& source = "dataset",
                                                const WarningSink& warn = warn_to_stderr) {
  std::vector<CrystalRecord> out;
  std::set<std::string> ids;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(source + " line " + std::to_string(line_no) + ": malformed JSON (" + e.what() + ")");
    }
    CrystalRecord rec = detail::RecordParser(source, line_no, warn).parse(j);
    if (!ids.insert(rec.id).second)
      throw Error(source + " line " + std::to_string(line_no) + ", field 'id': duplicate id '" + rec.id + "'");
    out.push_back(std::move(rec));
  }
  return out;
}

inline std::string format_dataset(const std::vector<CrystalRecord>& records) {
  std::string out;
  std::set<std::string> ids;
  for (const auto& r : records) {
    if (!ids.insert(r.id).second) throw Error("duplicate record id '" + r.id + "'");
    out += record_to_json(r).dump();
    out += '\n';
  }
  return out;
}

}  // namespace io

inline std::vector<CrystalRecord> load_dataset(const std::filesystem::path& path,
                                               const WarningSink& warn = warn_to_stderr) {
  if (!std::filesystem::exists(path)) throw Error("dataset '" + path.string() + "' does not exist");
  return io::parse_dataset(io::read_file(path), path.string(), warn);
}

inline void save_dataset(const std::vector<CrystalRecord>& records, const std::filesystem::path& path) {
  io::write_file_atomic(path, io::format_dataset(records));
}

inline std::vector<Crystal> crystals_of(const std::vector<CrystalRecord>& records) {
  std::vector<Crystal> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.crystal);
  return out;
}

}  // namespace xtalgen
