#include "erld/rswoosh.hpp"

#include <algorithm>

namespace erld {

std::vector<PartialEntity> rswoosh(std::vector<MatchItem> items, const MatchFn& match,
                                   std::size_t* merges) {
  std::sort(items.begin(), items.end(),
            [](const MatchItem& x, const MatchItem& y) { return x.key < y.key; });
  // Unresolved items are popped from the back, so reverse to start with the
  // smallest key.
  std::vector<MatchItem> pending(std::make_move_iterator(items.rbegin()),
                                 std::make_move_iterator(items.rend()));
  std::vector<MatchItem> resolved;
  std::size_t merge_count = 0;

  while (!pending.empty()) {
    MatchItem current = std::move(pending.back());
    pending.pop_back();

    auto partner = resolved.end();
    for (auto it = resolved.begin(); it != resolved.end(); ++it) {
      if (match(current, *it)) {
        partner = it;
        break;
      }
    }
    if (partner == resolved.end()) {
      resolved.push_back(std::move(current));
      continue;
    }
    MatchItem merged = merge_items(current, *partner);
    resolved.erase(partner);
    pending.push_back(std::move(merged));
    ++merge_count;
  }

  if (merges != nullptr) *merges = merge_count;
  std::vector<PartialEntity> out;
  out.reserve(resolved.size());
  for (auto& r : resolved) {
    out.push_back(PartialEntity{std::move(r.merged), std::move(r.members), std::move(r.origins)});
  }
  return out;
}

}  // namespace erld
