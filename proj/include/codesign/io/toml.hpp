#pragma once

// A small TOML reader covering the subset our config schema uses: comments,
// [table] and [[array-of-table]] headers with dotted names, and key = value
// pairs with strings, integers, floats, booleans, and flat arrays. Parsed
// documents come back as JSON so the rest of the code handles one format.
// Full TOML (dates, multiline strings, inline tables) is out of scope; JSON
// configs are accepted everywhere a TOML one is.

#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace codesign::io {

namespace toml_detail {

struct ParseError : std::runtime_error {
  ParseError(int line, const std::string& what)
      : std::runtime_error("toml: line " + std::to_string(line) + ": " + what) {}
};

inline std::string strip(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

// Removes a trailing comment that is not inside a string.
inline std::string strip_comment(const std::string& s) {
  bool in_str = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) in_str = !in_str;
    if (s[i] == '#' && !in_str) return s.substr(0, i);
  }
  return s;
}

inline std::vector<std::string> split_dotted(const std::string& name, int line) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : name) {
    if (c == '.') {
      if (cur.empty()) throw ParseError(line, "empty name component");
      parts.push_back(strip(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (strip(cur).empty()) throw ParseError(line, "empty name component");
  parts.push_back(strip(cur));
  return parts;
}

inline nlohmann::json parse_scalar(const std::string& raw, int line);

inline nlohmann::json parse_value(const std::string& raw, int line) {
  std::string v = strip(raw);
  if (v.empty()) throw ParseError(line, "missing value");
  if (v.front() == '[') {
    if (v.back() != ']') throw ParseError(line, "unterminated array");
    nlohmann::json arr = nlohmann::json::array();
    std::string inner = v.substr(1, v.size() - 2);
    std::string cur;
    bool in_str = false;
    int depth = 0;
    for (char c : inner) {
      if (c == '"') in_str = !in_str;
      if (c == '[' && !in_str) ++depth;
      if (c == ']' && !in_str) --depth;
      if (c == ',' && !in_str && depth == 0) {
        if (!strip(cur).empty()) arr.push_back(parse_value(cur, line));
        cur.clear();
      } else {
        cur.push_back(c);
      }
    }
    if (!strip(cur).empty()) arr.push_back(parse_value(cur, line));
    return arr;
  }
  return parse_scalar(v, line);
}

inline nlohmann::json parse_scalar(const std::string& v, int line) {
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') {
    std::string s;
    for (std::size_t i = 1; i + 1 < v.size(); ++i) {
      if (v[i] == '\\' && i + 2 < v.size()) {
        char n = v[++i];
        if (n == 'n')
          s.push_back('\n');
        else if (n == 't')
          s.push_back('\t');
        else
          s.push_back(n);
      } else {
        s.push_back(v[i]);
      }
    }
    return s;
  }
  if (v == "true") return true;
  if (v == "false") return false;
  // integer?
  {
    std::string w = v;
    if (!w.empty() && (w[0] == '+')) w = w.substr(1);
    bool is_int = !w.empty();
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (i == 0 && w[i] == '-') continue;
      if (w[i] == '_') continue;
      if (!std::isdigit(static_cast<unsigned char>(w[i]))) {
        is_int = false;
        break;
      }
    }
    if (is_int) {
      std::string digits;
      for (char c : w)
        if (c != '_') digits.push_back(c);
      return std::stoll(digits);
    }
  }
  try {
    std::size_t used = 0;
    double d = std::stod(v, &used);
    if (used == v.size()) return d;
  } catch (...) {
  }
  throw ParseError(line, "cannot parse value '" + v + "'");
}

}  // namespace toml_detail

inline nlohmann::json parse_toml(const std::string& text) {
  using namespace toml_detail;
  nlohmann::json root = nlohmann::json::object();
  nlohmann::json* table = &root;
  std::istringstream in(text);
  std::string rawline;
  int lineno = 0;
  while (std::getline(in, rawline)) {
    ++lineno;
    std::string line = strip(strip_comment(rawline));
    if (line.empty()) continue;
    if (line.front() == '[') {
      bool array_table = line.size() > 1 && line[1] == '[';
      std::size_t close = line.find(array_table ? "]]" : "]");
      if (close == std::string::npos) throw ParseError(lineno, "unterminated table header");
      std::string name = strip(line.substr(array_table ? 2 : 1, close - (array_table ? 2 : 1)));
      auto parts = split_dotted(name, lineno);
      nlohmann::json* node = &root;
      for (std::size_t i = 0; i < parts.size(); ++i) {
        bool last = (i + 1 == parts.size());
        nlohmann::json& slot = (*node)[parts[i]];
        if (last && array_table) {
          if (slot.is_null()) slot = nlohmann::json::array();
          if (!slot.is_array()) throw ParseError(lineno, "'" + parts[i] + "' is not an array");
          slot.push_back(nlohmann::json::object());
          node = &slot.back();
        } else {
          if (slot.is_null()) slot = nlohmann::json::object();
          if (slot.is_array()) {
            if (slot.empty()) throw ParseError(lineno, "empty array table '" + parts[i] + "'");
            node = &slot.back();
          } else if (slot.is_object()) {
            node = &slot;
          } else {
            throw ParseError(lineno, "'" + parts[i] + "' is not a table");
          }
        }
      }
      table = node;
      continue;
    }
    std::size_t eq = std::string::npos;
    {
      bool in_str = false;
      for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') in_str = !in_str;
        if (line[i] == '=' && !in_str) {
          eq = i;
          break;
        }
      }
    }
    if (eq == std::string::npos) throw ParseError(lineno, "expected key = value");
    std::string key = strip(line.substr(0, eq));
    if (key.size() >= 2 && key.front() == '"' && key.back() == '"')
      key = key.substr(1, key.size() - 2);
    if (key.empty()) throw ParseError(lineno, "empty key");
    (*table)[key] = parse_value(line.substr(eq + 1), lineno);
  }
  return root;
}

// Loads a config file, dispatching on extension: .toml via the subset parser,
// anything else as JSON.
inline nlohmann::json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string text = buf.str();
  if (path.size() >= 5 && path.substr(path.size() - 5) == ".toml") return parse_toml(text);
  return nlohmann::json::parse(text);
}

}  // namespace codesign::io
