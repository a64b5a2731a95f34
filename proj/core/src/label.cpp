#include "sana/label.hpp"

namespace sana {

std::string_view to_string(Label label) {
  switch (label) {
    case Label::Positive: return "Positive";
    case Label::Negative: return "Negative";
    case Label::Neutral: return "Neutral";
  }
  return "?";
}

std::optional<Label> parse_label(std::string_view text) {
  for (Label l : kAllLabels) {
    if (to_string(l) == text) return l;
  }
  return std::nullopt;
}

}  // namespace sana
