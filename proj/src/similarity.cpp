#include "erld/similarity.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>
#include <vector>

namespace erld {

std::string_view to_string(Metric m) noexcept {
  switch (m) {
    case Metric::jaccard: return "jaccard";
    case Metric::overlap: return "overlap";
    case Metric::cosine: return "cosine";
    case Metric::jaro_winkler: return "jaro_winkler";
    case Metric::soundex: return "soundex";
  }
  return "jaccard";
}

std::optional<Metric> parse_metric(std::string_view name) noexcept {
  if (name == "jaccard") return Metric::jaccard;
  if (name == "overlap") return Metric::overlap;
  if (name == "cosine") return Metric::cosine;
  if (name == "jaro_winkler") return Metric::jaro_winkler;
  if (name == "soundex") return Metric::soundex;
  return std::nullopt;
}

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::vector<std::string> words(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    const std::size_t start = i;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i > start) out.emplace_back(s.substr(start, i - start));
  }
  return out;
}

double token_set_score(Metric metric, const std::string& x, const std::string& y) {
  const auto wx = words(x);
  const auto wy = words(y);
  const std::set<std::string> sx(wx.begin(), wx.end());
  const std::set<std::string> sy(wy.begin(), wy.end());
  if (sx.empty() || sy.empty()) return 0.0;
  std::size_t common = 0;
  for (const auto& w : sx) common += sy.contains(w) ? 1 : 0;
  if (metric == Metric::jaccard) {
    return static_cast<double>(common) / static_cast<double>(sx.size() + sy.size() - common);
  }
  return static_cast<double>(common) / static_cast<double>(std::min(sx.size(), sy.size()));
}

double cosine_score(const std::string& x, const std::string& y) {
  std::map<std::string, double> cx;
  std::map<std::string, double> cy;
  for (auto& w : words(x)) cx[w] += 1.0;
  for (auto& w : words(y)) cy[w] += 1.0;
  if (cx.empty() || cy.empty()) return 0.0;
  double dot = 0.0;
  double nx = 0.0;
  double ny = 0.0;
  for (const auto& [w, c] : cx) {
    nx += c * c;
    if (const auto it = cy.find(w); it != cy.end()) dot += c * it->second;
  }
  for (const auto& [w, c] : cy) ny += c * c;
  return std::min(1.0, dot / (std::sqrt(nx) * std::sqrt(ny)));
}

char soundex_digit(char c) {
  switch (c) {
    case 'b': case 'f': case 'p': case 'v': return '1';
    case 'c': case 'g': case 'j': case 'k': case 'q': case 's': case 'x': case 'z': return '2';
    case 'd': case 't': return '3';
    case 'l': return '4';
    case 'm': case 'n': return '5';
    case 'r': return '6';
    default: return '0';  // vowels, h, w, y
  }
}

}  // namespace

double jaro(std::string_view s1, std::string_view s2) {
  if (s1.empty() && s2.empty()) return 0.0;
  if (s1.empty() || s2.empty()) return 0.0;
  const std::size_t window =
      std::max<std::size_t>(std::max(s1.size(), s2.size()) / 2, 1) - 1;
  std::vector<bool> used1(s1.size(), false);
  std::vector<bool> used2(s2.size(), false);
  std::size_t matches = 0;
  for (std::size_t i = 0; i < s1.size(); ++i) {
    const std::size_t lo = i > window ? i - window : 0;
    const std::size_t hi = std::min(s2.size(), i + window + 1);
    for (std::size_t j = lo; j < hi; ++j) {
      if (used2[j] || s1[i] != s2[j]) continue;
      used1[i] = used2[j] = true;
      ++matches;
      break;
    }
  }
  if (matches == 0) return 0.0;
  std::size_t half_transpositions = 0;
  std::size_t j = 0;
  for (std::size_t i = 0; i < s1.size(); ++i) {
    if (!used1[i]) continue;
    while (!used2[j]) ++j;
    if (s1[i] != s2[j]) ++half_transpositions;
    ++j;
  }
  const double m = static_cast<double>(matches);
  const double t = static_cast<double>(half_transpositions) / 2.0;
  return (m / static_cast<double>(s1.size()) + m / static_cast<double>(s2.size()) + (m - t) / m) /
         3.0;
}

double jaro_winkler(std::string_view s1, std::string_view s2) {
  const double j = jaro(s1, s2);
  std::size_t prefix = 0;
  while (prefix < 4 && prefix < s1.size() && prefix < s2.size() && s1[prefix] == s2[prefix]) {
    ++prefix;
  }
  return j + static_cast<double>(prefix) * 0.1 * (1.0 - j);
}

std::string soundex(std::string_view s) {
  std::string letters;
  for (char c : s) {
    if (std::isalpha(static_cast<unsigned char>(c))) {
      letters.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  if (letters.empty()) return {};
  std::string code(1, static_cast<char>(std::toupper(static_cast<unsigned char>(letters[0]))));
  char last = soundex_digit(letters[0]);
  for (std::size_t i = 1; i < letters.size() && code.size() < 4; ++i) {
    const char c = letters[i];
    const char d = soundex_digit(c);
    if (d != '0' && d != last) code.push_back(d);
    // h and w do not separate equal codes; vowels do.
    if (c != 'h' && c != 'w') last = d;
  }
  code.resize(4, '0');
  return code;
}

double similarity(Metric metric, std::string_view s1, std::string_view s2) {
  const std::string x = lower(s1);
  const std::string y = lower(s2);
  if (x.empty() || y.empty()) return 0.0;
  if (x == y) return 1.0;
  switch (metric) {
    case Metric::jaccard:
    case Metric::overlap:
      return token_set_score(metric, x, y);
    case Metric::cosine:
      return cosine_score(x, y);
    case Metric::jaro_winkler:
      return jaro_winkler(x, y);
    case Metric::soundex: {
      const auto cx = soundex(x);
      return !cx.empty() && cx == soundex(y) ? 1.0 : 0.0;
    }
  }
  return 0.0;
}

}  // namespace erld
