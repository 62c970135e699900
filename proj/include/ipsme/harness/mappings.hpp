#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ipsme/participant.hpp"

namespace ipsme::harness {

/// Item names on the protocol-A side paired with their protocol-B counterparts.
const std::vector<std::pair<std::string, std::string>> &item_table();

bool is_known_mapping(std::string_view name) noexcept;

/// Builds a payload rewrite for a translator.
///   "retag":     <from_tag><rest>         -> <to_tag><rest>
///   "inventory": <from_tag>|<item>        -> <to_tag>|<item_table[item]>
/// Items missing from the table are carried over unchanged.
Mapping make_mapping(std::string_view name, const std::string &from_tag, const std::string &to_tag);

}  // namespace ipsme::harness
