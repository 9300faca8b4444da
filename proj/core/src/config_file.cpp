#include "stochsweep/config_file.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

namespace stochsweep {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void fail(int line, const std::string& what) {
  throw ValidationError("config line " + std::to_string(line) + ": " + what);
}

std::string_view strip_comment(std::string_view line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

bool parse_double(std::string_view text, double& out) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text == "inf") {
    out = INFINITY;
    return true;
  }
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc() && ptr == end;
}

bool valid_key(std::string_view key) {
  if (key.empty()) return false;
  for (char c : key) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '_' || c == '-';
    if (!ok) return false;
  }
  return true;
}

KeyValueFile::Value parse_value(std::string_view raw, int line) {
  const std::string_view v = trim(raw);
  if (v.empty()) fail(line, "missing value");
  if (v.front() == '"') {
    if (v.size() < 2 || v.back() != '"') fail(line, "unterminated string");
    return std::string(v.substr(1, v.size() - 2));
  }
  if (v == "true") return true;
  if (v == "false") return false;
  if (v.front() == '[') {
    if (v.back() != ']') fail(line, "unterminated array");
    std::vector<double> items;
    std::string_view body = trim(v.substr(1, v.size() - 2));
    while (!body.empty()) {
      const auto comma = body.find(',');
      const std::string_view item = trim(body.substr(0, comma));
      double d = 0.0;
      if (!parse_double(item, d)) fail(line, "array items must be numbers");
      items.push_back(d);
      if (comma == std::string_view::npos) break;
      body = trim(body.substr(comma + 1));
      if (body.empty()) break;
    }
    return items;
  }
  double d = 0.0;
  if (!parse_double(v, d)) fail(line, "cannot parse value '" + std::string(v) + "'");
  return d;
}

}  // namespace

KeyValueFile KeyValueFile::parse(std::string_view text) {
  KeyValueFile file;
  std::string section;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const std::string_view raw =
        text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    const std::string_view line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(line_no, "malformed section header");
      const std::string_view name = trim(line.substr(1, line.size() - 2));
      if (!valid_key(name)) fail(line_no, "invalid section name");
      section = std::string(name);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) fail(line_no, "expected 'key = value'");
    const std::string_view key = trim(line.substr(0, eq));
    if (!valid_key(key)) fail(line_no, "invalid key '" + std::string(key) + "'");
    const std::string full = section.empty() ? std::string(key) : section + "." + std::string(key);
    if (file.entries_.count(full)) fail(line_no, "duplicate key '" + full + "'");
    file.entries_[full] = Entry{parse_value(line.substr(eq + 1), line_no), line_no};
  }
  return file;
}

const KeyValueFile::Entry& KeyValueFile::at(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) throw ValidationError("config: missing key '" + key + "'");
  used_.insert(key);
  return it->second;
}

double KeyValueFile::number(const std::string& key) const {
  const Entry& e = at(key);
  if (const auto* d = std::get_if<double>(&e.value)) return *d;
  fail(e.line, "key '" + key + "' must be a number");
}

bool KeyValueFile::boolean(const std::string& key) const {
  const Entry& e = at(key);
  if (const auto* b = std::get_if<bool>(&e.value)) return *b;
  fail(e.line, "key '" + key + "' must be true or false");
}

const std::string& KeyValueFile::string(const std::string& key) const {
  const Entry& e = at(key);
  if (const auto* s = std::get_if<std::string>(&e.value)) return *s;
  fail(e.line, "key '" + key + "' must be a quoted string");
}

std::vector<double> KeyValueFile::array(const std::string& key, std::size_t expected_size) const {
  const Entry& e = at(key);
  const auto* a = std::get_if<std::vector<double>>(&e.value);
  if (!a) fail(e.line, "key '" + key + "' must be an array");
  if (a->size() != expected_size) {
    fail(e.line, "key '" + key + "' must have " + std::to_string(expected_size) + " items");
  }
  return *a;
}

std::vector<std::string> KeyValueFile::unused_keys() const {
  std::vector<std::string> out;
  for (const auto& [key, entry] : entries_) {
    if (!used_.count(key)) out.push_back(key + " (line " + std::to_string(entry.line) + ")");
  }
  return out;
}

std::string format_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  std::string out(buf, ptr);
  if (out.find_first_of(".eE") == std::string::npos) out += ".0";
  return out;
}

}  // namespace stochsweep
