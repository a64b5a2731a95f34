#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>

namespace sana {

/// Document-level sentiment tag. The integer values double as the fixed
/// row/column order of agreement matrices.
enum class Label { Positive = 0, Negative = 1, Neutral = 2 };

inline constexpr std::array<Label, 3> kAllLabels = {Label::Positive, Label::Negative,
                                                    Label::Neutral};

inline constexpr std::size_t index_of(Label l) { return static_cast<std::size_t>(l); }

std::string_view to_string(Label label);

/// Case-sensitive parse of "Positive" / "Negative" / "Neutral".
std::optional<Label> parse_label(std::string_view text);

inline constexpr bool is_binary(Label l) { return l != Label::Neutral; }

}  // namespace sana
