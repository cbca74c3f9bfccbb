#pragma once

#include <algorithm>
#include <array>
#include <limits>
#include <numeric>
#include <span>

#include "rummi/core.hpp"
#include "rummi/rules.hpp"

namespace rummi {

template <typename Scalar>
struct SetAssignment {
  IdentityList identities;
  SetKind kind = SetKind::Group;
  Scalar score = Scalar(0);
};

template <typename Scalar>
struct CorrectionResult {
  SetAssignment<Scalar> assignment;
  IdentityList raw_argmax;
  bool raw_valid = false;
  /// score(raw_argmax) - assignment.score; never negative.
  Scalar score_gap = Scalar(0);
};

struct CorrectorConfig {
  /// Jokers a single set may use. Must be in [0, 2].
  int max_jokers = kMaxJokers;
};

/// Sum over tiles, in tile order, of joker_conf for jokers and
/// color_conf + number_conf for regular tiles. No feasibility check.
template <typename Scalar>
Scalar score(std::span<const TileIdentity> ids, const ConfidenceMatrix<Scalar>& m) {
  if (static_cast<Eigen::Index>(ids.size()) != m.tile_count()) {
    throw Error(ErrorCode::LengthMismatch, "identity list length " + std::to_string(ids.size()) +
                                               " does not match tile count " +
                                               std::to_string(m.tile_count()));
  }
  Scalar total(0);
  for (std::size_t t = 0; t < ids.size(); ++t) total += m.term(static_cast<Eigen::Index>(t), ids[t]);
  return total;
}

/// Per-tile unconstrained best identity; ties go to the smaller canonical index.
template <typename Scalar>
IdentityList raw_argmax(const ConfidenceMatrix<Scalar>& m) {
  IdentityList out;
  out.reserve(static_cast<std::size_t>(m.tile_count()));
  for (Eigen::Index t = 0; t < m.tile_count(); ++t) {
    auto best = TileIdentity::from_index(0);
    Scalar best_term = m.term(t, best);
    for (int k = 1; k < kIdentityCount; ++k) {
      const auto id = TileIdentity::from_index(k);
      const Scalar v = m.term(t, id);
      if (v > best_term) {
        best_term = v;
        best = id;
      }
    }
    out.push_back(best);
  }
  return out;
}

namespace detail {

template <typename Scalar>
void require_matrix(const ConfidenceMatrix<Scalar>& m) {
  if (auto issue = validate_matrix(m)) {
    throw Error(ErrorCode::InvalidMatrix, "invalid confidence matrix: " + issue->message());
  }
}

/// Running best under (score desc, identity list lexicographically asc).
template <typename Scalar>
class BestTracker {
public:
  explicit BestTracker(std::size_t tiles) { best_.reserve(tiles); }

  bool found() const { return found_; }
  Scalar score() const { return score_; }
  const IdentityList& identities() const { return best_; }

  void offer(Scalar s, std::span<const TileIdentity> ids) {
    if (found_) {
      if (s < score_) return;
      if (s == score_ && !std::lexicographical_compare(ids.begin(), ids.end(), best_.begin(), best_.end())) {
        return;
      }
    }
    found_ = true;
    score_ = s;
    best_.assign(ids.begin(), ids.end());
  }

private:
  bool found_ = false;
  Scalar score_ = Scalar(0);
  IdentityList best_;
};

template <typename Scalar>
CorrectionResult<Scalar> finish(const ConfidenceMatrix<Scalar>& m, const BestTracker<Scalar>& best) {
  if (!best.found()) throw Error(ErrorCode::Infeasible, "no valid set fits this tile count");
  CorrectionResult<Scalar> result;
  result.assignment.identities = best.identities();
  // The search only offers valid lists, so the kind always exists.
  result.assignment.kind = *is_valid_set(result.assignment.identities);
  result.assignment.score = best.score();
  result.raw_argmax = raw_argmax(m);
  result.raw_valid = is_valid_set(result.raw_argmax).has_value();
  result.score_gap = score<Scalar>(result.raw_argmax, m) - result.assignment.score;
  return result;
}

// Groups: for each shared number, every injective tile -> color map with
// optional jokers. At most 13 * 5^4 leaves.
template <typename Scalar>
void search_groups(const ConfidenceMatrix<Scalar>& m, int max_jokers, BestTracker<Scalar>& best) {
  const int k = static_cast<int>(m.tile_count());
  if (k < 3 || k > 4) return;

  std::array<TileIdentity, 4> ids{TileIdentity::joker(), TileIdentity::joker(), TileIdentity::joker(),
                                  TileIdentity::joker()};
  const auto leaves = std::span<TileIdentity>(ids.data(), static_cast<std::size_t>(k));

  for (int n = 1; n <= kNumberCount; ++n) {
    const Number number(n);
    auto recurse = [&](auto&& self, int pos, unsigned used_colors, int jokers) -> void {
      if (pos == k) {
        if (jokers == k) return;
        best.offer(score<Scalar>(leaves, m), leaves);
        return;
      }
      for (const Color c : kAllColors) {
        const unsigned bit = 1u << rank(c);
        if (used_colors & bit) continue;
        ids[pos] = TileIdentity::regular(number, c);
        self(self, pos + 1, used_colors | bit, jokers);
      }
      if (jokers < max_jokers) {
        ids[pos] = TileIdentity::joker();
        self(self, pos + 1, used_colors, jokers + 1);
      }
    };
    recurse(recurse, 0, 0u, 0);
  }
}

// Runs: for each color, start and direction the regular labelling is fixed;
// only the joker positions are free. A joker can only help at a position
// where joker_conf beats the regular term, so the candidates are the subsets
// of those positions with at most max_jokers elements.
template <typename Scalar>
void search_runs(const ConfidenceMatrix<Scalar>& m, int max_jokers, BestTracker<Scalar>& best) {
  const int k = static_cast<int>(m.tile_count());
  std::array<TileIdentity, kMaxSetSize> base{};
  std::array<TileIdentity, kMaxSetSize> ids{};
  std::array<int, kMaxSetSize> gainers{};
  const auto view = std::span<TileIdentity>(ids.data(), static_cast<std::size_t>(k));

  for (const Color c : kAllColors) {
    for (int start = 1; start + k - 1 <= kNumberCount; ++start) {
      for (const bool reverse : {false, true}) {
        int gainer_count = 0;
        for (int i = 0; i < k; ++i) {
          const int offset = reverse ? k - 1 - i : i;
          base[i] = TileIdentity::regular(Number(start + offset), c);
          if (m.joker(i) > m.term(i, base[i])) gainers[gainer_count++] = i;
        }
        std::copy_n(base.begin(), k, ids.begin());
        best.offer(score<Scalar>(view, m), view);
        for (int a = 0; a < gainer_count && max_jokers >= 1; ++a) {
          ids[gainers[a]] = TileIdentity::joker();
          best.offer(score<Scalar>(view, m), view);
          for (int b = a + 1; b < gainer_count && max_jokers >= 2; ++b) {
            ids[gainers[b]] = TileIdentity::joker();
            best.offer(score<Scalar>(view, m), view);
            ids[gainers[b]] = base[gainers[b]];
          }
          ids[gainers[a]] = base[gainers[a]];
        }
      }
    }
  }
}

}  // namespace detail

/// Highest-scoring joint labelling of one clustered set (3 to 13 tiles, in
/// spatial order) that forms a valid group or run. Exact: every group and run
/// template is enumerated. Score ties go to the lexicographically smallest
/// identity list under the canonical order.
template <typename Scalar>
CorrectionResult<Scalar> correct_set(const ConfidenceMatrix<Scalar>& m, const CorrectorConfig& cfg = {}) {
  detail::require_matrix(m);
  const auto k = m.tile_count();
  if (k < kMinSetSize || k > kMaxSetSize) {
    throw Error(ErrorCode::BadSize, "set size " + std::to_string(k) + " outside [3, 13]");
  }
  if (cfg.max_jokers < 0 || cfg.max_jokers > kMaxJokers) {
    throw Error(ErrorCode::UnsatisfiableParams, "max_jokers must be in [0, 2]");
  }
  detail::BestTracker<Scalar> best(static_cast<std::size_t>(k));
  detail::search_groups(m, cfg.max_jokers, best);
  detail::search_runs(m, cfg.max_jokers, best);
  return detail::finish(m, best);
}

/// Test oracle: exhaustive search over all 53^k identity tuples (k <= 4),
/// keeping those accepted by is_valid_set. Branches whose score upper bound
/// falls strictly below the incumbent are skipped; the bound is accumulated
/// in tile order like score(), so it is exact under floating point too.
template <typename Scalar>
CorrectionResult<Scalar> brute_force_correct(const ConfidenceMatrix<Scalar>& m) {
  detail::require_matrix(m);
  const int k = static_cast<int>(m.tile_count());
  if (k > 4) throw Error(ErrorCode::TooLarge, "brute force is limited to 4 tiles");
  if (k < kMinSetSize) throw Error(ErrorCode::BadSize, "set size " + std::to_string(k) + " below 3");

  // Per tile, identities sorted by descending term so good leaves come early.
  std::vector<std::array<TileIdentity, kIdentityCount>> order(static_cast<std::size_t>(k));
  std::vector<Scalar> best_term(static_cast<std::size_t>(k));
  for (int t = 0; t < k; ++t) {
    auto& o = order[t];
    for (int i = 0; i < kIdentityCount; ++i) o[i] = TileIdentity::from_index(i);
    std::stable_sort(o.begin(), o.end(), [&](TileIdentity a, TileIdentity b) { return m.term(t, a) > m.term(t, b); });
    best_term[t] = m.term(t, o[0]);
  }

  detail::BestTracker<Scalar> best(static_cast<std::size_t>(k));
  IdentityList ids(static_cast<std::size_t>(k), TileIdentity::joker());
  auto recurse = [&](auto&& self, int pos, Scalar partial) -> void {
    if (pos == k) {
      if (is_valid_set(ids)) best.offer(score<Scalar>(ids, m), ids);
      return;
    }
    for (const auto id : order[pos]) {
      const Scalar here = partial + m.term(pos, id);
      if (best.found()) {
        Scalar bound = here;
        for (int r = pos + 1; r < k; ++r) bound += best_term[r];
        // Later identities at this position only score lower.
        if (bound < best.score()) return;
      }
      ids[pos] = id;
      self(self, pos + 1, here);
    }
  };
  recurse(recurse, 0, Scalar(0));
  return detail::finish(m, best);
}

}  // namespace rummi
