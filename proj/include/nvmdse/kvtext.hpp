#pragma once

// Minimal "key = value" document format shared by bitcell, technology and
// run-config files. '#' starts a comment; blank lines are ignored; keys are
// unique within a document.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "nvmdse/error.hpp"

namespace nvmdse {

namespace detail {

inline std::string_view trim(std::string_view s) {
  constexpr std::string_view ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline std::optional<std::int64_t> parse_int(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

/// Shortest representation that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

/// Fixed-precision rendering used by report emitters.
inline std::string format_fixed(double v, int precision) {
  char buf[128];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, precision);
  return std::string(buf, ptr);
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileNotFound(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace detail

class KvDocument {
 public:
  KvDocument() = default;

  static KvDocument parse(std::string_view text) {
    KvDocument doc;
    std::size_t line_no = 0;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
      ++line_no;
      std::string_view view = line;
      if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
      view = detail::trim(view);
      if (view.empty()) continue;
      const auto eq = view.find('=');
      if (eq == std::string_view::npos)
        throw ParseError("line " + std::to_string(line_no) + ": expected 'key = value'");
      const std::string key(detail::trim(view.substr(0, eq)));
      const std::string value(detail::trim(view.substr(eq + 1)));
      if (key.empty()) throw ParseError("line " + std::to_string(line_no) + ": empty key");
      if (!doc.values_.emplace(key, value).second)
        throw ParseError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
      doc.order_.push_back(key);
    }
    return doc;
  }

  static KvDocument load(const std::string& path) { return parse(detail::read_file(path)); }

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  const std::string& str(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw MissingField(key);
    return it->second;
  }

  std::optional<std::string> get(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
  }

  double number(const std::string& key) const {
    const auto v = detail::parse_double(str(key));
    if (!v) throw InvalidValue(key, "not a number: '" + str(key) + "'");
    return *v;
  }

  double number_or(const std::string& key, double fallback) const {
    return has(key) ? number(key) : fallback;
  }

  std::int64_t integer(const std::string& key) const {
    const auto v = detail::parse_int(str(key));
    if (!v) throw InvalidValue(key, "not an integer: '" + str(key) + "'");
    return *v;
  }

  const std::vector<std::string>& keys() const { return order_; }

  void set(const std::string& key, std::string value) {
    if (values_.insert_or_assign(key, std::move(value)).second) order_.push_back(key);
  }

  void set(const std::string& key, double value) { set(key, detail::format_double(value)); }

  std::string serialize() const {
    std::string out;
    for (const auto& k : order_) out += k + " = " + values_.at(k) + "\n";
    return out;
  }

 private:
  std::map<std::string, std::string> values_;
  std::vector<std::string> order_;
};

}  // namespace nvmdse
