#include "parablab/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "parablab/errors.hpp"

namespace parablab {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::vector<std::string> split_trim(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string piece;
  std::istringstream is(text);
  while (std::getline(is, piece, sep)) out.push_back(trim(piece));
  if (!text.empty() && text.back() == sep) out.push_back("");
  return out;
}

double parse_number(const std::string& text, const std::string& path) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
    throw ValidationError(path, "expected a number, got '" + text + "'");
  return v;
}

Config Config::parse(std::istream& in, const std::string& source) {
  Config c;
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = source + ":" + std::to_string(lineno);
    if (line.front() == '[') {
      if (line.back() != ']') throw ValidationError(where, "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      // "[check name]" and "[check.name]" are the same section
      std::replace(section.begin(), section.end(), ' ', '.');
      if (section.empty()) throw ValidationError(where, "empty section name");
      if (std::find(c.sections_.begin(), c.sections_.end(), section) == c.sections_.end())
        c.sections_.push_back(section);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ValidationError(where, "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ValidationError(where, "empty key");
    const std::string path = section.empty() ? key : section + "." + key;
    if (c.has(path)) throw ValidationError(path, "duplicate key at " + where);
    c.set(path, trim(line.substr(eq + 1)));
  }
  return c;
}

Config Config::parse_string(const std::string& text) {
  std::istringstream is(text);
  return parse(is);
}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(path, "cannot open config file");
  return parse(in, path);
}

std::optional<std::string> Config::find(const std::string& path) const {
  const auto it = values_.find(path);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

const std::string& Config::get(const std::string& path) const {
  const auto it = values_.find(path);
  if (it == values_.end()) throw ValidationError(path, "required field is missing");
  return it->second;
}

std::string Config::get_or(const std::string& path, const std::string& fallback) const {
  return find(path).value_or(fallback);
}

double Config::number(const std::string& path) const { return parse_number(get(path), path); }

double Config::number_or(const std::string& path, double fallback) const {
  return has(path) ? number(path) : fallback;
}

int Config::integer(const std::string& path) const {
  const double v = number(path);
  if (v != static_cast<double>(static_cast<int>(v))) throw ValidationError(path, "expected an integer");
  return static_cast<int>(v);
}

int Config::integer_or(const std::string& path, int fallback) const { return has(path) ? integer(path) : fallback; }

bool Config::flag_or(const std::string& path, bool fallback) const {
  const auto v = find(path);
  if (!v) return fallback;
  if (*v == "true" || *v == "yes" || *v == "1") return true;
  if (*v == "false" || *v == "no" || *v == "0") return false;
  throw ValidationError(path, "expected true or false, got '" + *v + "'");
}

std::vector<double> Config::numbers(const std::string& path) const {
  std::vector<double> out;
  for (const auto& p : split_trim(get(path), ',')) out.push_back(parse_number(p, path));
  return out;
}

void Config::set(const std::string& path, const std::string& value) {
  if (!values_.count(path)) order_.push_back(path);
  values_[path] = value;
}

std::vector<std::string> Config::keys(const std::string& section) const {
  std::vector<std::string> out;
  const std::string prefix = section.empty() ? "" : section + ".";
  for (const auto& p : order_) {
    if (p.compare(0, prefix.size(), prefix) != 0) continue;
    const std::string rest = p.substr(prefix.size());
    if (section.empty() && rest.find('.') != std::string::npos) continue;
    out.push_back(rest);
  }
  return out;
}

std::string Config::to_string() const {
  std::ostringstream os;
  auto emit = [&](const std::string& section) {
    auto ks = keys(section);
    std::sort(ks.begin(), ks.end());
    for (const auto& k : ks) os << k << " = " << get(section.empty() ? k : section + "." + k) << '\n';
  };
  emit("");
  for (const auto& s : sections_) {
    os << '\n' << '[' << s << "]\n";
    emit(s);
  }
  return os.str();
}

}  // namespace parablab
