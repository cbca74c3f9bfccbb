#pragma once

#include <array>
#include <compare>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace rummi {

inline constexpr int kColorCount = 4;
inline constexpr int kNumberCount = 13;
inline constexpr int kRegularCount = kColorCount * kNumberCount;
inline constexpr int kIdentityCount = kRegularCount + 1;
inline constexpr int kMinSetSize = 3;
inline constexpr int kMaxSetSize = 13;
inline constexpr int kMaxJokers = 2;

/// Error categories shared across the library. The CLI maps these onto exit codes.
enum class ErrorCode {
  NegativeScore,
  NonFiniteScore,
  EmptyMatrix,
  LengthMismatch,
  Infeasible,
  InvalidMatrix,
  BadSize,
  TooLarge,
  IdMismatch,
  UnsatisfiableParams,
  Parse,
  CrossReference,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

/// Canonical order red < blue < black < yellow.
enum class Color : std::uint8_t { Red = 0, Blue = 1, Black = 2, Yellow = 3 };

inline constexpr std::array<Color, kColorCount> kAllColors = {Color::Red, Color::Blue, Color::Black,
                                                               Color::Yellow};

constexpr int rank(Color c) { return static_cast<int>(c); }
std::string_view to_string(Color c);
/// Accepts the canonical names and "orange" as an alias for yellow.
std::optional<Color> parse_color(std::string_view name);

/// Tile number in [1, 13].
class Number {
public:
  explicit constexpr Number(int value) : value_(static_cast<std::uint8_t>(value)) {
    if (value < 1 || value > kNumberCount) {
      throw std::out_of_range("tile number must be in [1, 13]");
    }
  }
  constexpr int value() const { return value_; }
  friend constexpr auto operator<=>(Number, Number) = default;

private:
  std::uint8_t value_;
};

/// Either a regular tile (number, color) or a joker. Ordered by canonical index,
/// which puts regular tiles by (number, color) first and the joker last.
class TileIdentity {
public:
  /// Joker.
  constexpr TileIdentity() = default;

  static constexpr TileIdentity regular(Number n, Color c) {
    return TileIdentity(static_cast<std::uint8_t>((n.value() - 1) * kColorCount + rank(c)));
  }
  static constexpr TileIdentity joker() { return TileIdentity(kRegularCount); }
  static constexpr TileIdentity from_index(int index) {
    if (index < 0 || index >= kIdentityCount) {
      throw std::out_of_range("canonical index must be in [0, 52]");
    }
    return TileIdentity(static_cast<std::uint8_t>(index));
  }

  constexpr bool is_joker() const { return index_ == kRegularCount; }
  /// Precondition: !is_joker().
  constexpr Number number() const { return Number(index_ / kColorCount + 1); }
  constexpr Color color() const { return static_cast<Color>(index_ % kColorCount); }
  constexpr int index() const { return index_; }

  friend constexpr auto operator<=>(TileIdentity, TileIdentity) = default;

private:
  explicit constexpr TileIdentity(std::uint8_t index) : index_(index) {}
  std::uint8_t index_ = kRegularCount;
};

constexpr int canonical_index(TileIdentity id) { return id.index(); }

/// "red-7", "joker".
std::string to_string(TileIdentity id);
std::optional<TileIdentity> parse_identity(std::string_view text);

using IdentityList = std::vector<TileIdentity>;

enum class SetKind : std::uint8_t { Group, RunForward, RunReverse };

constexpr bool is_run(SetKind kind) { return kind != SetKind::Group; }
/// "Group", "Run(forward)", "Run(reverse)".
std::string_view to_string(SetKind kind);

/// Per-tile scores over the 4 colors, 13 numbers and the joker class.
/// Rows are tiles. Scores are unnormalized and must be finite and non-negative.
template <typename Scalar>
struct ConfidenceMatrix {
  using ColorBlock = Eigen::Matrix<Scalar, Eigen::Dynamic, kColorCount, Eigen::RowMajor>;
  using NumberBlock = Eigen::Matrix<Scalar, Eigen::Dynamic, kNumberCount, Eigen::RowMajor>;
  using JokerColumn = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  ColorBlock color;
  NumberBlock number;
  JokerColumn joker;

  static ConfidenceMatrix Zero(Eigen::Index tiles) {
    return {ColorBlock::Zero(tiles, kColorCount), NumberBlock::Zero(tiles, kNumberCount),
            JokerColumn::Zero(tiles)};
  }

  Eigen::Index tile_count() const { return color.rows(); }

  /// Score contribution of labelling tile `t` as `id`.
  Scalar term(Eigen::Index t, TileIdentity id) const {
    if (id.is_joker()) return joker(t);
    return color(t, rank(id.color())) + number(t, id.number().value() - 1);
  }

  template <typename Other>
  ConfidenceMatrix<Other> cast() const {
    return {color.template cast<Other>(), number.template cast<Other>(),
            joker.template cast<Other>()};
  }

  friend bool operator==(const ConfidenceMatrix& a, const ConfidenceMatrix& b) {
    return a.color.rows() == b.color.rows() && a.number.rows() == b.number.rows() &&
           a.joker.rows() == b.joker.rows() && a.color == b.color && a.number == b.number &&
           a.joker == b.joker;
  }
};

using ConfidenceMatrixd = ConfidenceMatrix<double>;
using ConfidenceMatrixf = ConfidenceMatrix<float>;

enum class Channel : std::uint8_t { Color, Number, Joker };

struct MatrixIssue {
  ErrorCode code;
  Eigen::Index tile = -1;
  Channel channel = Channel::Color;
  int class_index = -1;

  std::string message() const;
};

/// Returns the first violated invariant, scanning tiles in order and channels
/// color, number, joker within a tile.
template <typename Scalar>
std::optional<MatrixIssue> validate_matrix(const ConfidenceMatrix<Scalar>& m) {
  const auto tiles = m.tile_count();
  if (tiles < 1) return MatrixIssue{ErrorCode::EmptyMatrix};
  if (m.number.rows() != tiles || m.joker.rows() != tiles) {
    return MatrixIssue{ErrorCode::LengthMismatch};
  }
  auto check = [](Scalar v, Eigen::Index t, Channel ch, int k) -> std::optional<MatrixIssue> {
    if (!std::isfinite(v)) return MatrixIssue{ErrorCode::NonFiniteScore, t, ch, k};
    if (v < Scalar(0)) return MatrixIssue{ErrorCode::NegativeScore, t, ch, k};
    return std::nullopt;
  };
  for (Eigen::Index t = 0; t < tiles; ++t) {
    for (int c = 0; c < kColorCount; ++c) {
      if (auto issue = check(m.color(t, c), t, Channel::Color, c)) return issue;
    }
    for (int n = 0; n < kNumberCount; ++n) {
      if (auto issue = check(m.number(t, n), t, Channel::Number, n)) return issue;
    }
    if (auto issue = check(m.joker(t), t, Channel::Joker, 0)) return issue;
  }
  return std::nullopt;
}

}  // namespace rummi
