#include "rummi/rules.hpp"

#include <algorithm>
#include <vector>

namespace rummi {

namespace {

int joker_count(std::span<const TileIdentity> ids) {
  return static_cast<int>(std::count_if(ids.begin(), ids.end(), [](TileIdentity id) { return id.is_joker(); }));
}

bool run_in_order(std::span<const TileIdentity> ids, bool reversed) {
  const int len = static_cast<int>(ids.size());
  auto at = [&](int i) { return reversed ? ids[len - 1 - i] : ids[i]; };

  int start = 0;
  std::optional<Color> color;
  for (int i = 0; i < len; ++i) {
    const auto id = at(i);
    if (id.is_joker()) continue;
    if (!color) {
      color = id.color();
      start = id.number().value() - i;
    } else if (id.color() != *color || id.number().value() != start + i) {
      return false;
    }
  }
  return color && start >= 1 && start + len - 1 <= kNumberCount;
}

}  // namespace

bool is_valid_group(std::span<const TileIdentity> ids) {
  if (ids.size() < 3 || ids.size() > 4) return false;
  if (joker_count(ids) > kMaxJokers) return false;

  std::optional<Number> number;
  std::array<bool, kColorCount> seen{};
  for (const auto id : ids) {
    if (id.is_joker()) continue;
    if (number && id.number() != *number) return false;
    number = id.number();
    auto& used = seen[rank(id.color())];
    if (used) return false;
    used = true;
  }
  return true;
}

bool is_valid_run(std::span<const TileIdentity> ids) {
  if (ids.size() < kMinSetSize || ids.size() > kMaxSetSize) return false;
  if (joker_count(ids) > kMaxJokers) return false;
  return run_in_order(ids, false);
}

std::optional<SetKind> is_valid_set(std::span<const TileIdentity> ids) {
  if (is_valid_group(ids)) return SetKind::Group;
  if (ids.size() < kMinSetSize || ids.size() > kMaxSetSize) return std::nullopt;
  if (joker_count(ids) > kMaxJokers) return std::nullopt;
  if (run_in_order(ids, false)) return SetKind::RunForward;
  if (run_in_order(ids, true)) return SetKind::RunReverse;
  return std::nullopt;
}

}  // namespace rummi
