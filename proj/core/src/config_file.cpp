#include "granflow/config_file.hpp"

#include "granflow/errors.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numbers>
#include <sstream>

namespace granflow {

namespace {

std::string_view trim(std::string_view s)
{
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

bool ends_with(std::string_view s, std::string_view suffix)
{
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

} // namespace

double parse_double(std::string_view text, int line)
{
  const auto t = trim(text);
  double value = 0.0;
  const char* begin = t.data();
  const char* end = t.data() + t.size();
  if (!t.empty() && *begin == '+') {
    ++begin;
  }
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (t.empty() || ec != std::errc{} || ptr != end) {
    throw ConfigError("expected a number, got '" + std::string(t) + "'", line);
  }
  return value;
}

double parse_angle(std::string_view text, int line)
{
  const auto t = trim(text);
  if (ends_with(t, "deg")) {
    return parse_double(t.substr(0, t.size() - 3), line) * std::numbers::pi / 180.0;
  }
  if (ends_with(t, "rad")) {
    return parse_double(t.substr(0, t.size() - 3), line);
  }
  throw ConfigError("angle '" + std::string(t) + "' needs an explicit 'deg' or 'rad' suffix", line);
}

KeyValueFile KeyValueFile::parse(std::istream& in)
{
  KeyValueFile file;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) {
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("expected 'key = value'", line_no);
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError("empty key", line_no);
    }
    if (value.empty()) {
      throw ConfigError("empty value for key '" + std::string(key) + "'", line_no);
    }
    if (const auto* prev = file.find(key)) {
      throw ConfigError("duplicate key '" + std::string(key) + "' (first set on line " +
                          std::to_string(prev->line) + ")",
                        line_no);
    }
    file.entries_.push_back({std::string(key), std::string(value), line_no, false});
  }
  return file;
}

KeyValueFile KeyValueFile::parse(std::string_view text)
{
  std::istringstream in{std::string(text)};
  return parse(in);
}

KeyValueFile KeyValueFile::load(const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config file '" + path.string() + "'");
  }
  try {
    return parse(in);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void KeyValueFile::set(const std::string& key, std::string value)
{
  if (auto* e = find(key)) {
    e->value = std::move(value);
    e->line = 0;
    e->consumed = false;
    return;
  }
  entries_.push_back({key, std::move(value), 0, false});
}

bool KeyValueFile::contains(std::string_view key) const { return find(key) != nullptr; }

KeyValueFile::Entry* KeyValueFile::find(std::string_view key)
{
  auto it = std::find_if(entries_.begin(), entries_.end(), [&](const Entry& e) { return e.key == key; });
  return it == entries_.end() ? nullptr : &*it;
}

const KeyValueFile::Entry* KeyValueFile::find(std::string_view key) const
{
  auto it = std::find_if(entries_.begin(), entries_.end(), [&](const Entry& e) { return e.key == key; });
  return it == entries_.end() ? nullptr : &*it;
}

std::optional<std::string> KeyValueFile::take(std::string_view key)
{
  auto* e = find(key);
  if (e == nullptr) {
    return std::nullopt;
  }
  e->consumed = true;
  return e->value;
}

std::string KeyValueFile::take_string(std::string_view key, std::string fallback)
{
  auto v = take(key);
  return v ? *v : std::move(fallback);
}

std::optional<double> KeyValueFile::take_double(std::string_view key)
{
  auto* e = find(key);
  if (e == nullptr) {
    return std::nullopt;
  }
  e->consumed = true;
  try {
    return parse_double(e->value, e->line);
  } catch (const ConfigError&) {
    throw ConfigError("key '" + e->key + "': expected a number, got '" + e->value + "'", e->line);
  }
}

double KeyValueFile::take_double(std::string_view key, double fallback)
{
  return take_double(key).value_or(fallback);
}

std::optional<long long> KeyValueFile::take_int(std::string_view key)
{
  auto* e = find(key);
  if (e == nullptr) {
    return std::nullopt;
  }
  e->consumed = true;
  long long value = 0;
  const auto t = trim(e->value);
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc{} || ptr != t.data() + t.size()) {
    throw ConfigError("key '" + e->key + "': expected an integer, got '" + e->value + "'", e->line);
  }
  return value;
}

long long KeyValueFile::take_int(std::string_view key, long long fallback)
{
  return take_int(key).value_or(fallback);
}

bool KeyValueFile::take_bool(std::string_view key, bool fallback)
{
  auto* e = find(key);
  if (e == nullptr) {
    return fallback;
  }
  e->consumed = true;
  if (e->value == "true" || e->value == "1" || e->value == "yes") {
    return true;
  }
  if (e->value == "false" || e->value == "0" || e->value == "no") {
    return false;
  }
  throw ConfigError("key '" + e->key + "': expected true/false, got '" + e->value + "'", e->line);
}

std::optional<double> KeyValueFile::take_angle(std::string_view key)
{
  auto* e = find(key);
  if (e == nullptr) {
    return std::nullopt;
  }
  e->consumed = true;
  try {
    return parse_angle(e->value, e->line);
  } catch (const ConfigError&) {
    throw ConfigError("key '" + e->key + "': angle '" + e->value +
                        "' needs a number with an explicit 'deg' or 'rad' suffix",
                      e->line);
  }
}

double KeyValueFile::take_angle(std::string_view key, double fallback_rad)
{
  return take_angle(key).value_or(fallback_rad);
}

std::optional<std::vector<double>> KeyValueFile::take_doubles(std::string_view key)
{
  auto* e = find(key);
  if (e == nullptr) {
    return std::nullopt;
  }
  e->consumed = true;
  std::vector<double> out;
  std::istringstream in(e->value);
  std::string token;
  while (in >> token) {
    out.push_back(parse_double(token, e->line));
  }
  return out;
}

void KeyValueFile::reject_unconsumed() const
{
  for (const auto& e : entries_) {
    if (!e.consumed) {
      throw ConfigError("unknown key '" + e.key + "'", e.line);
    }
  }
}

} // namespace granflow
