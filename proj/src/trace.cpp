#include "ipsme/trace.hpp"

#include <array>
#include <istream>
#include <ostream>
#include <sstream>

#include "ipsme/error.hpp"

namespace ipsme {

namespace {

constexpr std::array<std::pair<TraceKind, std::string_view>, 13> kind_names{{
    {TraceKind::Published, "Published"},
    {TraceKind::Relayed, "Relayed"},
    {TraceKind::SuppressedDuplicate, "SuppressedDuplicate"},
    {TraceKind::Delivered, "Delivered"},
    {TraceKind::Handled, "Handled"},
    {TraceKind::Ignored, "Ignored"},
    {TraceKind::Exported, "Exported"},
    {TraceKind::Imported, "Imported"},
    {TraceKind::DroppedTtl, "DroppedTtl"},
    {TraceKind::DroppedSelfOrigin, "DroppedSelfOrigin"},
    {TraceKind::DecodeError, "DecodeError"},
    {TraceKind::Filtered, "Filtered"},
    {TraceKind::HandlerFault, "HandlerFault"},
}};

MessageId parse_hex_id(std::string_view hex) {
    if (hex.size() != MessageId::size * 2) throw Error(ErrorCode::InvalidArgument, "bad id length in trace");
    auto nibble = [](char c) -> std::uint8_t {
        if (c >= '0' && c <= '9') return static_cast<std::uint8_t>(c - '0');
        if (c >= 'a' && c <= 'f') return static_cast<std::uint8_t>(c - 'a' + 10);
        throw Error(ErrorCode::InvalidArgument, "bad hex digit in trace");
    };
    std::array<std::uint8_t, MessageId::size> raw{};
    for (std::size_t i = 0; i < raw.size(); ++i)
        raw[i] = static_cast<std::uint8_t>((nibble(hex[2 * i]) << 4) | nibble(hex[2 * i + 1]));
    return MessageId(raw);
}

}  // namespace

std::string_view to_string(TraceKind kind) noexcept {
    for (const auto &[k, name] : kind_names)
        if (k == kind) return name;
    return "Unknown";
}

std::optional<TraceKind> parse_trace_kind(std::string_view text) noexcept {
    for (const auto &[k, name] : kind_names)
        if (name == text) return k;
    return std::nullopt;
}

std::string format_event(const TraceEvent &ev) {
    std::string line = std::to_string(ev.ordinal);
    line += '\t';
    line += to_string(ev.kind);
    line += '\t';
    line += ev.me_id;
    line += '\t';
    line += ev.actor;
    line += '\t';
    line += ev.id.hex();
    line += '\t';
    line += std::to_string(ev.ttl);
    line += '\t';
    line += std::to_string(ev.payload_size);
    return line;
}

void write_trace(std::ostream &os, const Trace &trace) {
    for (const auto &ev : trace) os << format_event(ev) << '\n';
}

Trace read_trace(std::istream &is) {
    Trace out;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cols;
        std::stringstream ss(line);
        std::string col;
        while (std::getline(ss, col, '\t')) cols.push_back(col);
        if (cols.size() != 7) throw Error(ErrorCode::InvalidArgument, "trace line needs 7 columns: " + line);
        auto kind = parse_trace_kind(cols[1]);
        if (!kind) throw Error(ErrorCode::InvalidArgument, "unknown trace kind " + cols[1]);
        TraceEvent ev;
        ev.ordinal = std::stoull(cols[0]);
        ev.kind = *kind;
        ev.me_id = cols[2];
        ev.actor = cols[3];
        ev.id = parse_hex_id(cols[4]);
        ev.ttl = static_cast<std::uint8_t>(std::stoul(cols[5]));
        ev.payload_size = std::stoull(cols[6]);
        out.push_back(std::move(ev));
    }
    return out;
}

TraceRecorder::TraceRecorder(std::uint64_t budget) : _budget(budget) {}

void TraceRecorder::record(TraceKind kind, std::string_view me_id, std::string_view actor, const Envelope &e) {
    record(kind, me_id, actor, e.id, e.ttl, e.payload.size());
}

void TraceRecorder::record(TraceKind kind, std::string_view me_id, std::string_view actor, const MessageId &id,
                           std::uint8_t ttl, std::uint64_t payload_size) {
    std::lock_guard lk(_mx);
    if (_exhausted.load(std::memory_order_relaxed)) return;
    TraceEvent ev{_events.size(), kind, std::string(me_id), std::string(actor), id, ttl, payload_size};
    _events.push_back(std::move(ev));
    _count.store(_events.size(), std::memory_order_relaxed);
    if (_events.size() > _budget) _exhausted.store(true, std::memory_order_relaxed);
}

Trace TraceRecorder::snapshot() const {
    std::lock_guard lk(_mx);
    return _events;
}

}  // namespace ipsme
