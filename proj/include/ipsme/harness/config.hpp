#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "ipsme/dedup.hpp"
#include "ipsme/envelope.hpp"
#include "ipsme/reflector.hpp"

namespace ipsme::harness {

enum class Role { Publisher, Consumer, Responder };

struct ParticipantConfig {
    std::string name;
    std::string me;
    Role role = Role::Publisher;
    /// Payload tags this participant understands; each understood envelope
    /// becomes one effect-log entry.
    std::vector<std::string> accepts;
    /// Responders answer with "<reply_tag><body>", body being what follows
    /// the matched tag.
    std::string reply_tag;
};

struct TranslatorConfig {
    std::string name;
    std::string me;
    std::string from_tag;
    std::string to_tag;
    std::string mapping;
};

struct ReflectorConfig {
    std::string me_a;
    std::string me_b;
    Filter filter_ab;
    Filter filter_ba;
};

/// "{i}" in payload is replaced by the zero-based message index.
struct PublishStep {
    std::string publisher;
    std::string payload;
    std::size_t count = 1;
};

/// Random payloads that no handler in the topology understands.
struct FuzzStep {
    std::string publisher;
    std::size_t count = 0;
    std::size_t max_len = 64;
};

using Step = std::variant<PublishStep, FuzzStep>;

struct Expectation {
    std::string participant;
    std::size_t entries = 0;
};

struct Scenario {
    std::string name;
    std::vector<Step> steps;
    std::vector<Expectation> expect;
};

enum class LinkKind { Memory, Tcp };

struct TopologyConfig {
    std::vector<std::string> mes;
    std::vector<ParticipantConfig> participants;
    std::vector<TranslatorConfig> translators;
    std::vector<ReflectorConfig> reflectors;
    std::size_t dedup_capacity = default_dedup_capacity;
    std::uint8_t default_ttl = ipsme::default_ttl;
    std::uint64_t seed = 0;
    std::uint64_t event_budget = 2'000'000;
    LinkKind link = LinkKind::Memory;
    std::map<std::string, Scenario> scenarios;
};

/// Throws Error(ConfigError) naming the offending entry, e.g. "reflectors[2].me_b".
void validate(const TopologyConfig &config);

TopologyConfig parse_config(const nlohmann::json &doc);
TopologyConfig load_config(const std::filesystem::path &path);
nlohmann::json to_json(const TopologyConfig &config);

std::string_view to_string(Role role) noexcept;

}  // namespace ipsme::harness
