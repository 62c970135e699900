#pragma once

#include <cstddef>
#include <cstdint>

#include "ipsme/harness/config.hpp"

namespace ipsme::harness {

/// N MEs in a line with MatchAll pairs. "pub" sits in the first ME, one
/// "DATA" consumer in every ME. Scenario "chain" publishes `messages` envelopes.
TopologyConfig chain_config(std::size_t mes, std::size_t messages, std::uint64_t seed = 1);

/// Like chain_config but the last ME links back to the first. Scenario "ring".
TopologyConfig ring_config(std::size_t mes, std::size_t messages, std::uint64_t seed = 1);

/// Two game worlds, "doom" and "mine". A doom player asks to teleport
/// (TPRT) and hands over inventory (INVA); translators in "mine" turn those
/// into PORTAL and INVB, the portal answers with RPLY which travels back.
/// Scenario "teleport" sends `teleports` requests and every item of
/// item_table(); scenario "teleport_fuzz" adds `fuzz` unintelligible envelopes.
TopologyConfig teleport_config(std::size_t teleports = 5, std::size_t fuzz = 1000, std::uint64_t seed = 1);

/// Random ME graph (2..max_mes MEs), random per-direction prefix filters over
/// the tags AAA..DDD, one consumer per ME accepting every tag, publishers in
/// random MEs. Scenario "random".
TopologyConfig random_config(std::uint64_t seed, std::size_t max_mes = 8, std::size_t messages = 40);

}  // namespace ipsme::harness
