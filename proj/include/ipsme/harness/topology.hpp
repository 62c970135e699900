#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "ipsme/broker.hpp"
#include "ipsme/harness/config.hpp"
#include "ipsme/harness/scheduler.hpp"
#include "ipsme/participant.hpp"
#include "ipsme/reflector.hpp"
#include "ipsme/trace.hpp"

namespace ipsme::harness {

enum class Mode { Deterministic, Concurrent };

struct BuildOptions {
    Mode mode = Mode::Deterministic;
    /// Test-only fault injection switches.
    bool broker_dedup = true;
    bool reflector_dedup = true;
    std::chrono::milliseconds wall_limit{60'000};
};

struct EffectEntry {
    MessageId id;
    Bytes effect;

    friend bool operator==(const EffectEntry &, const EffectEntry &) = default;
};

using EffectLogs = std::map<std::string, std::vector<EffectEntry>>;

/// One line per entry: participant \t hex id \t effect bytes (escaped).
std::string serialize(const EffectLogs &logs);

struct PublishedRecord {
    Envelope envelope;
    std::string participant;
    std::string me;
    bool scenario_origin = false;
};

/// A translator turned `input` into `output`.
struct LineageEdge {
    std::string translator;
    Envelope input;
    Envelope output;
};

struct MeMetrics {
    std::uint64_t relayed = 0;
    std::uint64_t suppressed = 0;
    std::uint64_t delivered = 0;

    friend bool operator==(const MeMetrics &, const MeMetrics &) = default;
};

struct Metrics {
    std::map<std::string, MeMetrics> per_me;
    std::map<std::string, std::uint64_t> frames_per_endpoint;
    std::uint64_t link_frames = 0;
    std::uint64_t handler_faults = 0;
    std::uint64_t suppressed_total = 0;
    /// Largest drop from the highest published ttl to any observed ttl.
    std::uint64_t max_ttl_depth = 0;
    std::uint64_t events = 0;
};

Metrics report_metrics(const Trace &trace);

struct RunResult {
    Trace trace;
    EffectLogs effects;
    Metrics metrics;
    std::vector<PublishedRecord> published;
    std::vector<LineageEdge> lineage;
    std::uint64_t duplicate_factor = 1;
};

/// Live MEs, participants, translators and reflector pairs built from a
/// TopologyConfig. A topology runs one scenario; caches keep their state.
class Topology {
public:
    ~Topology();

    Topology(const Topology &) = delete;
    Topology &operator=(const Topology &) = delete;

    static std::unique_ptr<Topology> build(const TopologyConfig &config, BuildOptions options = {});

    const TopologyConfig &config() const noexcept { return _config; }
    Mode mode() const noexcept { return _options.mode; }

    std::shared_ptr<MessagingEnvironment> me(const std::string &id) const;
    std::shared_ptr<Participant> participant(const std::string &name) const;
    const std::vector<std::unique_ptr<ReflectorPair>> &pairs() const noexcept { return _pairs; }

    /// Executes the scenario to quiescence. Throws Error(Timeout) when the
    /// event budget or the wall limit runs out first.
    RunResult run(const Scenario &scenario, std::uint64_t duplicate_factor = 1);

private:
    Topology(TopologyConfig config, BuildOptions options);

    void add_effect(const std::string &participant, const Envelope &e);

    TopologyConfig _config;
    BuildOptions _options;
    std::unique_ptr<Scheduler> _scheduler;
    std::shared_ptr<TraceRecorder> _trace;
    std::unique_ptr<IdSource> _ids;
    std::shared_ptr<std::atomic<std::int64_t>> _frames_in_flight;

    std::map<std::string, std::shared_ptr<MessagingEnvironment>> _mes;
    std::map<std::string, std::shared_ptr<Participant>> _participants;
    std::vector<std::unique_ptr<ReflectorPair>> _pairs;

    std::mutex _log_mx;
    EffectLogs _effects;
    std::vector<PublishedRecord> _published;
    std::vector<LineageEdge> _lineage;
    bool _ran = false;
};

inline std::unique_ptr<Topology> build(const TopologyConfig &config, BuildOptions options = {}) {
    return Topology::build(config, options);
}

RunResult run_scenario(Topology &topology, const Scenario &scenario, std::uint64_t duplicate_factor = 1);

}  // namespace ipsme::harness
