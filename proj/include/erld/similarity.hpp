#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace erld {

/// String similarity metrics available to soft-attribute predicates and to
/// the linear scorer. Token metrics split on whitespace; all metrics are
/// case-insensitive.
enum class Metric { jaccard, overlap, cosine, jaro_winkler, soundex };

[[nodiscard]] std::string_view to_string(Metric m) noexcept;
[[nodiscard]] std::optional<Metric> parse_metric(std::string_view name) noexcept;

/// Score in [0, 1]. Identical non-empty strings score 1, two empty strings 0.
[[nodiscard]] double similarity(Metric metric, std::string_view s1, std::string_view s2);

[[nodiscard]] double jaro(std::string_view s1, std::string_view s2);
[[nodiscard]] double jaro_winkler(std::string_view s1, std::string_view s2);
/// American Soundex code of the letters in `s` ("" when there are none).
[[nodiscard]] std::string soundex(std::string_view s);

}  // namespace erld
