#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "stochsweep/model.hpp"

namespace stochsweep {

/// Reader for the flat TOML subset used by experiment files: `[section]`
/// headers, `key = value` lines, `#` comments. Values are numbers, booleans,
/// double-quoted strings, or one-line arrays of numbers.
class KeyValueFile {
public:
  using Value = std::variant<double, bool, std::string, std::vector<double>>;

  struct Entry {
    Value value;
    int line = 0;
  };

  /// Throws ValidationError with the offending line number on malformed input
  /// or duplicate keys. Keys are stored as "section.key".
  static KeyValueFile parse(std::string_view text);

  bool contains(const std::string& key) const { return entries_.count(key) != 0; }

  double number(const std::string& key) const;
  bool boolean(const std::string& key) const;
  const std::string& string(const std::string& key) const;
  std::vector<double> array(const std::string& key, std::size_t expected_size) const;

  /// Keys never read through the accessors above.
  std::vector<std::string> unused_keys() const;

  const std::map<std::string, Entry>& entries() const { return entries_; }

private:
  const Entry& at(const std::string& key) const;

  std::map<std::string, Entry> entries_;
  mutable std::set<std::string> used_;
};

/// Shortest decimal text that reads back to the same double.
std::string format_number(double v);

}  // namespace stochsweep
