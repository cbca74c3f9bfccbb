#pragma once

#include <optional>
#include <span>

#include "rummi/core.hpp"

namespace rummi {

/// 3 or 4 tiles, at most two jokers, one shared number, distinct colors.
bool is_valid_group(std::span<const TileIdentity> ids);

/// 3 to 13 tiles of one color whose numbers ascend by one in the given order.
/// Jokers fill any position as long as the implied numbers stay within [1, 13].
bool is_valid_run(std::span<const TileIdentity> ids);

/// Precedence Group > Run(forward) > Run(reverse).
std::optional<SetKind> is_valid_set(std::span<const TileIdentity> ids);

}  // namespace rummi
