#pragma once

// Embedded element data: symbols, standard atomic masses, covalent radii,
// Pauling electronegativities, metal classification and allowed oxidation
// states. The table can be replaced at runtime by pointing XTALGEN_DATA_DIR at
// a directory containing elements.csv (same columns as ElementTable::write_csv).

#include <array>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "xtalgen/core/error.hpp"

namespace xtalgen {

struct Element {
  int z = 0;
  std::string symbol;
  double mass = 0.0;             // amu
  double covalent_radius = 0.0;  // Angstrom, NaN when unknown
  double electronegativity = 0;  // Pauling, NaN when undefined
  bool metal = false;
  std::vector<int> oxidation_states;

  int row() const { return period_of(z); }
  int group() const { return group_of(z); }

  static int period_of(int z) {
    constexpr std::array<int, 7> last{2, 10, 18, 36, 54, 86, 118};
    for (int p = 0; p < 7; ++p)
      if (z <= last[p]) return p + 1;
    return 0;
  }

  // f-block elements are placed in group 3.
  static int group_of(int z) {
    if (z == 1) return 1;
    if (z == 2) return 18;
    if (z <= 18) {
      int off = (z - 3) % 8;  // 0..7 within periods 2 and 3
      return off < 2 ? off + 1 : off + 11;
    }
    int start = 0;
    if (z <= 36) start = 19;
    else if (z <= 54) start = 37;
    else start = z <= 86 ? 55 : 87;
    int pos = z - start;  // 0-based within the period
    if (start >= 55) {
      if (pos < 2) return pos + 1;
      if (pos <= 16) return 3;  // La..Lu / Ac..Lr
      return pos - 14 + 1;
    }
    return pos + 1;
  }
};

namespace detail {

struct ElementRow {
  const char* symbol;
  double mass;
  double radius;
  double en;
  bool metal;
  const char* ox;
};

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Masses: IUPAC standard atomic weights (conventional values; mass number of
// the longest-lived isotope for elements without a standard weight).
// Radii: Cordero et al. covalent radii (low-spin values for Mn, Fe, Co).
// Oxidation states: common states from standard inorganic references.
inline constexpr std::array<ElementRow, 118> kElementRows{{
    {"H", 1.008, 0.31, 2.20, false, "-1 1"},
    {"He", 4.002602, 0.28, kNaN, false, ""},
    {"Li", 6.94, 1.28, 0.98, true, "1"},
    {"Be", 9.0121831, 0.96, 1.57, true, "2"},
    {"B", 10.81, 0.84, 2.04, false, "3"},
    {"C", 12.011, 0.76, 2.55, false, "-4 -3 -2 -1 1 2 3 4"},
    {"N", 14.007, 0.71, 3.04, false, "-3 -2 -1 1 2 3 4 5"},
    {"O", 15.999, 0.66, 3.44, false, "-2 -1 1 2"},
    {"F", 18.998403163, 0.57, 3.98, false, "-1"},
    {"Ne", 20.1797, 0.58, kNaN, false, ""},
    {"Na", 22.98976928, 1.66, 0.93, true, "1"},
    {"Mg", 24.305, 1.41, 1.31, true, "2"},
    {"Al", 26.9815385, 1.21, 1.61, true, "3"},
    {"Si", 28.085, 1.11, 1.90, false, "-4 2 4"},
    {"P", 30.973761998, 1.07, 2.19, false, "-3 3 5"},
    {"S", 32.06, 1.05, 2.58, false, "-2 2 4 6"},
    {"Cl", 35.45, 1.02, 3.16, false, "-1 1 3 5 7"},
    {"Ar", 39.948, 1.06, kNaN, false, ""},
    {"K", 39.0983, 2.03, 0.82, true, "1"},
    {"Ca", 40.078, 1.76, 1.00, true, "2"},
    {"Sc", 44.955908, 1.70, 1.36, true, "3"},
    {"Ti", 47.867, 1.60, 1.54, true, "2 3 4"},
    {"V", 50.9415, 1.53, 1.63, true, "2 3 4 5"},
    {"Cr", 51.9961, 1.39, 1.66, true, "2 3 4 6"},
    {"Mn", 54.938044, 1.39, 1.55, true, "2 3 4 6 7"},
    {"Fe", 55.845, 1.32, 1.83, true, "2 3"},
    {"Co", 58.933194, 1.26, 1.88, true, "2 3"},
    {"Ni", 58.6934, 1.24, 1.91, true, "2 3"},
    {"Cu", 63.546, 1.32, 1.90, true, "1 2"},
    {"Zn", 65.38, 1.22, 1.65, true, "2"},
    {"Ga", 69.723, 1.22, 1.81, true, "3"},
    {"Ge", 72.630, 1.20, 2.01, false, "-4 2 4"},
    {"As", 74.921595, 1.19, 2.18, false, "-3 3 5"},
    {"Se", 78.971, 1.20, 2.55, false, "-2 4 6"},
    {"Br", 79.904, 1.20, 2.96, false, "-1 1 3 5"},
    {"Kr", 83.798, 1.16, 3.00, false, "2"},
    {"Rb", 85.4678, 2.20, 0.82, true, "1"},
    {"Sr", 87.62, 1.95, 0.95, true, "2"},
    {"Y", 88.90584, 1.90, 1.22, true, "3"},
    {"Zr", 91.224, 1.75, 1.33, true, "4"},
    {"Nb", 92.90637, 1.64, 1.60, true, "3 5"},
    {"Mo", 95.95, 1.54, 2.16, true, "4 6"},
    {"Tc", 98.0, 1.47, 1.90, true, "4 7"},
    {"Ru", 101.07, 1.46, 2.20, true, "3 4"},
    {"Rh", 102.90550, 1.42, 2.28, true, "3"},
    {"Pd", 106.42, 1.39, 2.20, true, "2 4"},
    {"Ag", 107.8682, 1.45, 1.93, true, "1"},
    {"Cd", 112.414, 1.44, 1.69, true, "2"},
    {"In", 114.818, 1.42, 1.78, true, "3"},
    {"Sn", 118.710, 1.39, 1.96, true, "2 4"},
    {"Sb", 121.760, 1.39, 2.05, false, "-3 3 5"},
    {"Te", 127.60, 1.38, 2.10, false, "-2 4 6"},
    {"I", 126.90447, 1.39, 2.66, false, "-1 1 3 5 7"},
    {"Xe", 131.293, 1.40, 2.60, false, "2 4 6"},
    {"Cs", 132.90545196, 2.44, 0.79, true, "1"},
    {"Ba", 137.327, 2.15, 0.89, true, "2"},
    {"La", 138.90547, 2.07, 1.10, true, "3"},
    {"Ce", 140.116, 2.04, 1.12, true, "3 4"},
    {"Pr", 140.90766, 2.03, 1.13, true, "3"},
    {"Nd", 144.242, 2.01, 1.14, true, "3"},
    {"Pm", 145.0, 1.99, 1.13, true, "3"},
    {"Sm", 150.36, 1.98, 1.17, true, "3"},
    {"Eu", 151.964, 1.98, 1.20, true, "2 3"},
    {"Gd", 157.25, 1.96, 1.20, true, "3"},
    {"Tb", 158.92535, 1.94, 1.10, true, "3"},
    {"Dy", 162.500, 1.92, 1.22, true, "3"},
    {"Ho", 164.93033, 1.92, 1.23, true, "3"},
    {"Er", 167.259, 1.89, 1.24, true, "3"},
    {"Tm", 168.93422, 1.90, 1.25, true, "3"},
    {"Yb", 173.045, 1.87, 1.10, true, "3"},
    {"Lu", 174.9668, 1.87, 1.27, true, "3"},
    {"Hf", 178.49, 1.75, 1.30, true, "4"},
    {"Ta", 180.94788, 1.70, 1.50, true, "5"},
    {"W", 183.84, 1.62, 2.36, true, "4 6"},
    {"Re", 186.207, 1.51, 1.90, true, "4"},
    {"Os", 190.23, 1.44, 2.20, true, "4"},
    {"Ir", 192.217, 1.41, 2.20, true, "3 4"},
    {"Pt", 195.084, 1.36, 2.28, true, "2 4"},
    {"Au", 196.966569, 1.36, 2.54, true, "1 3"},
    {"Hg", 200.592, 1.32, 2.00, true, "1 2"},
    {"Tl", 204.38, 1.45, 1.62, true, "1 3"},
    {"Pb", 207.2, 1.46, 2.33, true, "2 4"},
    {"Bi", 208.98040, 1.48, 2.02, true, "3"},
    {"Po", 209.0, 1.40, 2.00, true, "-2 2 4"},
    {"At", 210.0, 1.50, 2.20, false, "-1 1"},
    {"Rn", 222.0, 1.50, 2.20, false, "2"},
    {"Fr", 223.0, 2.60, 0.70, true, "1"},
    {"Ra", 226.0, 2.21, 0.90, true, "2"},
    {"Ac", 227.0, 2.15, 1.10, true, "3"},
    {"Th", 232.0377, 2.06, 1.30, true, "4"},
    {"Pa", 231.03588, 2.00, 1.50, true, "5"},
    {"U", 238.02891, 1.96, 1.38, true, "3 4 5 6"},
    {"Np", 237.0, 1.90, 1.36, true, "5"},
    {"Pu", 244.0, 1.87, 1.28, true, "4"},
    {"Am", 243.0, 1.80, 1.13, true, "3"},
    {"Cm", 247.0, 1.69, 1.28, true, "3"},
    {"Bk", 247.0, kNaN, 1.30, true, "3"},
    {"Cf", 251.0, kNaN, 1.30, true, "3"},
    {"Es", 252.0, kNaN, 1.30, true, "3"},
    {"Fm", 257.0, kNaN, 1.30, true, "3"},
    {"Md", 258.0, kNaN, 1.30, true, "3"},
    {"No", 259.0, kNaN, 1.30, true, "2"},
    {"Lr", 266.0, kNaN, 1.30, true, "3"},
    {"Rf", 267.0, kNaN, kNaN, true, ""},
    {"Db", 268.0, kNaN, kNaN, true, ""},
    {"Sg", 269.0, kNaN, kNaN, true, ""},
    {"Bh", 270.0, kNaN, kNaN, true, ""},
    {"Hs", 277.0, kNaN, kNaN, true, ""},
    {"Mt", 278.0, kNaN, kNaN, true, ""},
    {"Ds", 281.0, kNaN, kNaN, true, ""},
    {"Rg", 282.0, kNaN, kNaN, true, ""},
    {"Cn", 285.0, kNaN, kNaN, true, ""},
    {"Nh", 286.0, kNaN, kNaN, true, ""},
    {"Fl", 289.0, kNaN, kNaN, true, ""},
    {"Mc", 290.0, kNaN, kNaN, true, ""},
    {"Lv", 293.0, kNaN, kNaN, true, ""},
    {"Ts", 294.0, kNaN, kNaN, false, ""},
    {"Og", 294.0, kNaN, kNaN, false, ""},
}};

inline std::vector<int> parse_int_list(std::string_view text) {
  std::vector<int> out;
  std::istringstream in{std::string(text)};
  int v = 0;
  while (in >> v) out.push_back(v);
  return out;
}

inline double parse_optional_double(const std::string& s) {
  if (s.empty() || s == "nan" || s == "NaN") return kNaN;
  return std::stod(s);
}

}  // namespace detail

class ElementTable {
 public:
  ElementTable() {
    elements_.reserve(detail::kElementRows.size());
    int z = 1;
    for (const auto& r : detail::kElementRows) {
      elements_.push_back(Element{z++, r.symbol, r.mass, r.radius, r.en,
                                  r.metal, detail::parse_int_list(r.ox)});
    }
  }

  // Columns: z,symbol,mass,covalent_radius,electronegativity,metal,oxidation_states
  // (oxidation states space separated). Rows replace the embedded entry with
  // the same z; z must lie in 1..118.
  static ElementTable from_csv(const std::filesystem::path& path) {
    ElementTable table;
    std::ifstream in(path);
    if (!in) throw Error("cannot open element table " + path.string());
    std::string line;
    std::getline(in, line);  // header
    int lineno = 1;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      std::vector<std::string> cols;
      std::stringstream ss(line);
      std::string col;
      while (std::getline(ss, col, ',')) cols.push_back(col);
      if (cols.size() == 6) cols.emplace_back();
      if (cols.size() != 7)
        throw Error(path.string() + ":" + std::to_string(lineno) +
                    ": expected 7 columns");
      int z = std::stoi(cols[0]);
      if (z < 1 || z > 118)
        throw Error(path.string() + ":" + std::to_string(lineno) +
                    ": atomic number out of range");
      Element& e = table.elements_[z - 1];
      e.symbol = cols[1];
      e.mass = std::stod(cols[2]);
      e.covalent_radius = detail::parse_optional_double(cols[3]);
      e.electronegativity = detail::parse_optional_double(cols[4]);
      e.metal = cols[5] == "1" || cols[5] == "true";
      e.oxidation_states = detail::parse_int_list(cols[6]);
    }
    return table;
  }

  // Shortest decimal text that parses back to the same double.
  static std::string shortest(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
  }

  void write_csv(std::ostream& out) const {
    out << "z,symbol,mass,covalent_radius,electronegativity,metal,oxidation_states\n";
    for (const auto& e : elements_) {
      out << e.z << ',' << e.symbol << ',' << shortest(e.mass) << ',';
      if (!std::isnan(e.covalent_radius)) out << shortest(e.covalent_radius);
      out << ',';
      if (!std::isnan(e.electronegativity)) out << shortest(e.electronegativity);
      out << ',' << (e.metal ? 1 : 0) << ',';
      for (std::size_t i = 0; i < e.oxidation_states.size(); ++i)
        out << (i ? " " : "") << e.oxidation_states[i];
      out << '\n';
    }
  }

  const Element& operator[](int z) const {
    if (z < 1 || z > static_cast<int>(elements_.size()))
      throw Error("atomic number " + std::to_string(z) + " outside element table");
    return elements_[z - 1];
  }

  std::optional<int> find_symbol(std::string_view symbol) const {
    for (const auto& e : elements_)
      if (e.symbol == symbol) return e.z;
    return std::nullopt;
  }

  int z_of(std::string_view symbol) const {
    auto z = find_symbol(symbol);
    if (!z) throw Error("unknown element symbol '" + std::string(symbol) + "'");
    return *z;
  }

  std::size_t size() const { return elements_.size(); }
  const std::vector<Element>& all() const { return elements_; }

 private:
  std::vector<Element> elements_;
};

// Process-wide table: embedded data, or XTALGEN_DATA_DIR/elements.csv when set.
inline const ElementTable& elements() {
  static const ElementTable table = [] {
    if (const char* dir = std::getenv("XTALGEN_DATA_DIR")) {
      auto path = std::filesystem::path(dir) / "elements.csv";
      if (std::filesystem::exists(path)) return ElementTable::from_csv(path);
    }
    return ElementTable{};
  }();
  return table;
}

inline const std::string& symbol_of(int z) { return elements()[z].symbol; }

}  // namespace xtalgen
