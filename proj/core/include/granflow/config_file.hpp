#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace granflow {

/**
 * Flat `key = value` configuration file.
 *
 * Blank lines and `#` comments are ignored. Every key may appear once. Consumers
 * pull the keys they understand with the take_* accessors; whatever is left
 * afterwards is an unknown key and reject_unconsumed() reports it with its line.
 */
class KeyValueFile
{
public:
  struct Entry
  {
    std::string key;
    std::string value;
    int line = 0;
    bool consumed = false;
  };

  KeyValueFile() = default;

  static KeyValueFile parse(std::istream& in);
  static KeyValueFile parse(std::string_view text);
  static KeyValueFile load(const std::filesystem::path& path);

  /// Insert or replace a key (line 0: command-line override).
  void set(const std::string& key, std::string value);

  bool contains(std::string_view key) const;

  std::optional<std::string> take(std::string_view key);
  std::string take_string(std::string_view key, std::string fallback);
  std::optional<double> take_double(std::string_view key);
  double take_double(std::string_view key, double fallback);
  std::optional<long long> take_int(std::string_view key);
  long long take_int(std::string_view key, long long fallback);
  bool take_bool(std::string_view key, bool fallback);

  /// Angles must carry an explicit `deg` or `rad` suffix ("30deg", "0.52rad").
  std::optional<double> take_angle(std::string_view key);
  double take_angle(std::string_view key, double fallback_rad);

  /// Whitespace-separated list of numbers.
  std::optional<std::vector<double>> take_doubles(std::string_view key);

  /// Throws ConfigError naming the first key nobody consumed.
  void reject_unconsumed() const;

  const std::vector<Entry>& entries() const noexcept { return entries_; }

private:
  Entry* find(std::string_view key);
  const Entry* find(std::string_view key) const;

  std::vector<Entry> entries_;
};

/// Parses a number with strict full-string consumption; throws ConfigError.
double parse_double(std::string_view text, int line = 0);

/// Parses "30deg" / "0.5rad" into radians; throws ConfigError.
double parse_angle(std::string_view text, int line = 0);

} // namespace granflow
