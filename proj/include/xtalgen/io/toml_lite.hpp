#pragma once

// Reader for the TOML subset used by run configs and schedule files:
//   # comments, [section] / [section.sub] headers, key = value pairs where a
//   value is a "string", integer, float, true/false, or a single-line array.
// The result is a nested nlohmann::json object.

#include <cctype>
#include <sstream>
#include <string>
#include <string_view>

#include "json.hpp"
#include "xtalgen/core/error.hpp"

namespace xtalgen::toml_lite {

namespace detail {

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

class ValueParser {
 public:
  ValueParser(std::string_view text, int line) : text_(text), line_(line) {}

  nlohmann::json parse_all() {
    nlohmann::json v = parse_value();
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] != '#') fail("unexpected trailing characters");
    return v;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw Error("config line " + std::to_string(line_) + ": " + msg);
  }

  void skip_ws() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) ++pos_;
  }

  nlohmann::json parse_value() {
    skip_ws();
    if (pos_ >= text_.size()) fail("missing value");
    const char c = text_[pos_];
    if (c == '"') return parse_string();
    if (c == '[') return parse_array();
    if (text_.substr(pos_, 4) == "true") {
      pos_ += 4;
      return true;
    }
    if (text_.substr(pos_, 5) == "false") {
      pos_ += 5;
      return false;
    }
    return parse_number();
  }

  nlohmann::json parse_string() {
    ++pos_;
    std::string out;
    while (pos_ < text_.size() && text_[pos_] != '"') {
      char c = text_[pos_++];
      if (c == '\\') {
        if (pos_ >= text_.size()) fail("unterminated escape");
        char e = text_[pos_++];
        switch (e) {
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          case '"': out += '"'; break;
          case '\\': out += '\\'; break;
          default: fail(std::string("unsupported escape \\") + e);
        }
      } else {
        out += c;
      }
    }
    if (pos_ >= text_.size()) fail("unterminated string");
    ++pos_;
    return out;
  }

  nlohmann::json parse_array() {
    ++pos_;
    nlohmann::json arr = nlohmann::json::array();
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == ']') {
      ++pos_;
      return arr;
    }
    for (;;) {
      arr.push_back(parse_value());
      skip_ws();
      if (pos_ >= text_.size()) fail("unterminated array");
      if (text_[pos_] == ',') {
        ++pos_;
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == ']') {
          ++pos_;
          return arr;
        }
        continue;
      }
      if (text_[pos_] == ']') {
        ++pos_;
        return arr;
      }
      fail("expected ',' or ']' in array");
    }
  }

  nlohmann::json parse_number() {
    std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
                                   text_[pos_] == '.' || text_[pos_] == '-' ||
                                   text_[pos_] == '+' || text_[pos_] == '_'))
      ++pos_;
    std::string tok;
    for (char c : text_.substr(start, pos_ - start))
      if (c != '_') tok += c;
    if (tok.empty()) fail("expected a value");
    const bool is_float = tok.find_first_of(".eE") != std::string::npos || tok == "inf" ||
                          tok == "nan";
    try {
      std::size_t used = 0;
      if (is_float) {
        double d = std::stod(tok, &used);
        if (used != tok.size()) fail("malformed number '" + tok + "'");
        return d;
      }
      long long i = std::stoll(tok, &used);
      if (used != tok.size()) fail("malformed number '" + tok + "'");
      return i;
    } catch (const std::logic_error&) {
      fail("malformed value '" + tok + "'");
    }
  }

  std::string_view text_;
  int line_;
  std::size_t pos_ = 0;
};

inline bool valid_key(const std::string& k) {
  if (k.empty()) return false;
  for (char c : k)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) return false;
  return true;
}

}  // namespace detail

inline nlohmann::json parse(std::string_view text) {
  nlohmann::json root = nlohmann::json::object();
  nlohmann::json* table = &root;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string s = detail::trim(raw);
    if (s.empty() || s[0] == '#') continue;
    if (s[0] == '[') {
      auto close = s.find(']');
      if (close == std::string::npos) throw Error("config line " + std::to_string(line) + ": unterminated section header");
      std::string name = detail::trim(std::string_view(s).substr(1, close - 1));
      table = &root;
      std::stringstream parts(name);
      std::string part;
      while (std::getline(parts, part, '.')) {
        part = detail::trim(part);
        if (!detail::valid_key(part)) throw Error("config line " + std::to_string(line) + ": invalid section name");
        nlohmann::json& next = (*table)[part];
        if (next.is_null()) next = nlohmann::json::object();
        if (!next.is_object()) throw Error("config line " + std::to_string(line) + ": section collides with key");
        table = &next;
      }
      continue;
    }
    auto eq = s.find('=');
    if (eq == std::string::npos) throw Error("config line " + std::to_string(line) + ": expected key = value");
    std::string key = detail::trim(std::string_view(s).substr(0, eq));
    if (!detail::valid_key(key)) throw Error("config line " + std::to_string(line) + ": invalid key '" + key + "'");
    if (table->contains(key)) throw Error("config line " + std::to_string(line) + ": duplicate key '" + key + "'");
    (*table)[key] = detail::ValueParser(std::string_view(s).substr(eq + 1), line).parse_all();
  }
  return root;
}

}  // namespace xtalgen::toml_lite
