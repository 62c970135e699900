#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "ipsme/harness/config.hpp"
#include "ipsme/harness/topology.hpp"

namespace ipsme::harness {

struct PropertyResult {
    std::string name;
    bool passed = true;
    /// Trace ordinals that witness a failure.
    std::vector<std::uint64_t> counterexamples;
    std::string detail;
};

struct PropertyReport {
    std::vector<PropertyResult> results;

    bool all_passed() const noexcept;
    const PropertyResult *find(const std::string &name) const noexcept;
};

/// Post-hoc checks over a finished run:
///   loop_freedom          no id relayed twice by one ME
///   trace_causality       every event names an id that was published earlier
///   effect_idempotency    no id twice in one effect log
///   self_origin_silence   nobody logs an effect for its own output
///   ttl_monotonicity      ttl never grows along reflection or translation
///   translation_fidelity  output = mapping(input), ttl one lower
///   content_opacity       logged bytes equal the published payload
///   reachability          logged iff reachable over matching filters
///   expectations          declared per-participant entry counts
///   handler_faults        no handler raised
PropertyReport check_properties(const RunResult &run, const TopologyConfig &config, const Scenario &scenario);

/// Set of participants that must log `payload` when it is published by
/// `publisher` with the given ttl: BFS over reflector edges whose filter in
/// the travel direction matches, at most `ttl` crossings.
std::vector<std::string> expected_receivers(const TopologyConfig &config, const std::string &publisher,
                                            ByteView payload, std::uint8_t ttl);

nlohmann::json to_json(const PropertyReport &report);
nlohmann::json to_json(const Metrics &metrics);

}  // namespace ipsme::harness
