#include "rummi/core.hpp"

#include <charconv>

namespace rummi {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NegativeScore: return "NegativeScore";
    case ErrorCode::NonFiniteScore: return "NonFiniteScore";
    case ErrorCode::EmptyMatrix: return "EmptyMatrix";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::InvalidMatrix: return "InvalidMatrix";
    case ErrorCode::BadSize: return "BadSize";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::IdMismatch: return "IdMismatch";
    case ErrorCode::UnsatisfiableParams: return "UnsatisfiableParams";
    case ErrorCode::Parse: return "Parse";
    case ErrorCode::CrossReference: return "CrossReference";
  }
  return "Unknown";
}

std::string_view to_string(Color c) {
  switch (c) {
    case Color::Red: return "red";
    case Color::Blue: return "blue";
    case Color::Black: return "black";
    case Color::Yellow: return "yellow";
  }
  return "?";
}

std::optional<Color> parse_color(std::string_view name) {
  if (name == "red") return Color::Red;
  if (name == "blue") return Color::Blue;
  if (name == "black") return Color::Black;
  if (name == "yellow" || name == "orange") return Color::Yellow;
  return std::nullopt;
}

std::string to_string(TileIdentity id) {
  if (id.is_joker()) return "joker";
  std::string out(to_string(id.color()));
  out += '-';
  out += std::to_string(id.number().value());
  return out;
}

std::optional<TileIdentity> parse_identity(std::string_view text) {
  if (text == "joker") return TileIdentity::joker();
  const auto dash = text.find('-');
  if (dash == std::string_view::npos) return std::nullopt;
  const auto color = parse_color(text.substr(0, dash));
  if (!color) return std::nullopt;
  const auto digits = text.substr(dash + 1);
  int value = 0;
  const auto [end, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (ec != std::errc{} || end != digits.data() + digits.size()) return std::nullopt;
  if (value < 1 || value > kNumberCount) return std::nullopt;
  return TileIdentity::regular(Number(value), *color);
}

std::string_view to_string(SetKind kind) {
  switch (kind) {
    case SetKind::Group: return "Group";
    case SetKind::RunForward: return "Run(forward)";
    case SetKind::RunReverse: return "Run(reverse)";
  }
  return "?";
}

std::string MatrixIssue::message() const {
  std::string out(to_string(code));
  if (tile < 0) return out;
  out += ": tile " + std::to_string(tile);
  switch (channel) {
    case Channel::Color:
      out += ", color ";
      out += to_string(static_cast<Color>(class_index));
      break;
    case Channel::Number:
      out += ", number " + std::to_string(class_index + 1);
      break;
    case Channel::Joker:
      out += ", joker";
      break;
  }
  return out;
}

}  // namespace rummi
