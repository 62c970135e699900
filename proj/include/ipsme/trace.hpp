#pragma once

#include <atomic>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ipsme/envelope.hpp"

namespace ipsme {

enum class TraceKind {
    Published,
    Relayed,
    SuppressedDuplicate,
    Delivered,
    Handled,
    Ignored,
    Exported,
    Imported,
    DroppedTtl,
    DroppedSelfOrigin,
    DecodeError,
    Filtered,
    HandlerFault,
};

std::string_view to_string(TraceKind kind) noexcept;
std::optional<TraceKind> parse_trace_kind(std::string_view text) noexcept;

/// Actor name used for events emitted by a broker itself.
inline constexpr std::string_view broker_actor = "broker";

struct TraceEvent {
    std::uint64_t ordinal = 0;
    TraceKind kind = TraceKind::Published;
    std::string me_id;
    std::string actor;
    MessageId id;
    std::uint8_t ttl = 0;
    std::uint64_t payload_size = 0;

    friend bool operator==(const TraceEvent &, const TraceEvent &) = default;
};

using Trace = std::vector<TraceEvent>;

/// ordinal \t kind \t me_id \t actor \t hex id \t ttl \t payload size
std::string format_event(const TraceEvent &ev);
void write_trace(std::ostream &os, const Trace &trace);
Trace read_trace(std::istream &is);

/// Thread-safe append-only event sink shared by every component of a run.
/// Once more than `budget` events were recorded, exhausted() turns true so a
/// scheduler can abandon a run that does not converge.
class TraceRecorder {
public:
    explicit TraceRecorder(std::uint64_t budget = std::numeric_limits<std::uint64_t>::max());

    void record(TraceKind kind, std::string_view me_id, std::string_view actor, const Envelope &e);
    void record(TraceKind kind, std::string_view me_id, std::string_view actor, const MessageId &id,
                std::uint8_t ttl, std::uint64_t payload_size);

    bool exhausted() const noexcept { return _exhausted.load(std::memory_order_relaxed); }
    std::uint64_t count() const noexcept { return _count.load(std::memory_order_relaxed); }

    Trace snapshot() const;

private:
    std::uint64_t _budget;
    mutable std::mutex _mx;
    Trace _events;
    std::atomic<std::uint64_t> _count{0};
    std::atomic<bool> _exhausted{false};
};

}  // namespace ipsme
