#pragma once

#include "semplace/errors.hpp"
#include "semplace/geo.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstddef>
#include <string>
#include <string_view>

namespace semplace {

/// The ten semantic place categories, in their fixed tie-breaking order.
enum class SemanticLabel : std::size_t
{
  bar_restaurant,
  outdoor_sports,
  indoor_sports,
  home,
  home_of_friend,
  transport,
  work,
  shop,
  holiday_resort,
  work_of_friend
};

inline constexpr std::size_t kLabelCount = 10;

inline constexpr std::array<SemanticLabel, kLabelCount> kAllLabels{
  SemanticLabel::bar_restaurant, SemanticLabel::outdoor_sports,
  SemanticLabel::indoor_sports,  SemanticLabel::home,
  SemanticLabel::home_of_friend, SemanticLabel::transport,
  SemanticLabel::work,           SemanticLabel::shop,
  SemanticLabel::holiday_resort, SemanticLabel::work_of_friend
};

inline constexpr std::array<std::string_view, kLabelCount> kLabelNames{
  "BAR_RESTAURANT", "OUTDOOR_SPORTS", "INDOOR_SPORTS", "HOME",
  "HOME_OF_FRIEND", "TRANSPORT",      "WORK",          "SHOP",
  "HOLIDAY_RESORT", "WORK_OF_FRIEND"
};

constexpr std::size_t index_of(SemanticLabel l) noexcept
{
  return static_cast<std::size_t>(l);
}

constexpr SemanticLabel label_at(std::size_t i) noexcept
{
  return static_cast<SemanticLabel>(i);
}

inline std::string_view label_name(SemanticLabel l) noexcept
{
  return kLabelNames[index_of(l)];
}

/// Case-insensitive match against the canonical names.
inline SemanticLabel parse_label(std::string_view text)
{
  std::string upper(text);
  std::transform(upper.begin(), upper.end(), upper.begin(), [](unsigned char c) {
    return static_cast<char>(std::toupper(c));
  });
  for (std::size_t i = 0; i < kLabelCount; ++i) {
    if (kLabelNames[i] == upper) {
      return label_at(i);
    }
  }
  throw ValidationError("unknown semantic label: '" + std::string(text) + "'");
}

struct LabeledPlace
{
  std::string place_id;
  GeoPoint location;
  SemanticLabel label;

  friend bool operator==(const LabeledPlace&, const LabeledPlace&) = default;
};

using LabelMask = std::array<bool, kLabelCount>;

} // namespace semplace
