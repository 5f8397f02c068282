#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace parablab {

/// Flat key = value text with [section] headers. Keys are addressed as
/// "section.key"; keys before the first header have no prefix. '#' starts a comment.
class Config {
 public:
  static Config parse(std::istream& in, const std::string& source = "<input>");
  static Config parse_string(const std::string& text);
  static Config load(const std::string& path);

  bool has(const std::string& path) const { return values_.count(path) > 0; }
  std::optional<std::string> find(const std::string& path) const;
  /// Throws ValidationError(path) when missing.
  const std::string& get(const std::string& path) const;
  std::string get_or(const std::string& path, const std::string& fallback) const;
  double number(const std::string& path) const;
  double number_or(const std::string& path, double fallback) const;
  int integer(const std::string& path) const;
  int integer_or(const std::string& path, int fallback) const;
  bool flag_or(const std::string& path, bool fallback) const;
  /// Comma-separated numbers.
  std::vector<double> numbers(const std::string& path) const;

  void set(const std::string& path, const std::string& value);
  /// Section names in file order, without duplicates.
  const std::vector<std::string>& sections() const { return sections_; }
  /// Keys of one section in file order, without the section prefix.
  std::vector<std::string> keys(const std::string& section) const;
  /// Canonical text: sections in order, keys sorted within each.
  std::string to_string() const;

 private:
  std::map<std::string, std::string> values_;
  std::vector<std::string> order_;
  std::vector<std::string> sections_;
};

/// Parses a real number, throwing ValidationError(path) on trailing garbage.
double parse_number(const std::string& text, const std::string& path);
/// Splits on `sep` and trims each piece.
std::vector<std::string> split_trim(const std::string& text, char sep);

}  // namespace parablab
