#include "ipsme/reflector.hpp"

#include "ipsme/error.hpp"

namespace ipsme {

Filter Filter::prefix_any(const std::vector<std::string> &prefixes) {
    Filter f;
    f.mode = FilterMode::PrefixAny;
    for (const auto &p : prefixes) f.prefixes.push_back(to_bytes(p));
    return f;
}

bool Filter::matches(ByteView payload) const noexcept {
    if (mode == FilterMode::MatchAll) return true;
    for (const auto &p : prefixes)
        if (has_prefix(payload, p)) return true;
    return false;
}

std::string_view to_string(ExportOutcome o) noexcept {
    switch (o) {
        case ExportOutcome::Exported: return "Exported";
        case ExportOutcome::FilteredOut: return "FilteredOut";
        case ExportOutcome::TtlExhausted: return "TtlExhausted";
        case ExportOutcome::SelfOriginDropped: return "SelfOriginDropped";
        case ExportOutcome::LinkBroken: return "LinkBroken";
    }
    return "Unknown";
}

std::string_view to_string(ImportOutcome o) noexcept {
    switch (o) {
        case ImportOutcome::Republished: return "Republished";
        case ImportOutcome::DuplicateDropped: return "DuplicateDropped";
        case ImportOutcome::DecodeError: return "DecodeError";
    }
    return "Unknown";
}

ReflectorEndpoint::ReflectorEndpoint(Token, std::string name, std::shared_ptr<MessagingEnvironment> me,
                                     Filter export_filter, std::unique_ptr<ByteStream> link,
                                     std::shared_ptr<PairState> state, const ReflectorOptions &options,
                                     Dispatch dispatch)
    : _name(std::move(name)),
      _me(std::move(me)),
      _filter(std::move(export_filter)),
      _link(std::move(link)),
      _state(std::move(state)),
      _options(options),
      _dispatch(std::move(dispatch)),
      _ingress(options.dedup_capacity),
      _imported(options.dedup_capacity) {}

ReflectorEndpoint::~ReflectorEndpoint() {
    shutdown();
}

std::shared_ptr<ReflectorEndpoint> ReflectorEndpoint::create(std::string name, std::shared_ptr<MessagingEnvironment> me,
                                                             Filter export_filter, std::unique_ptr<ByteStream> link,
                                                             std::shared_ptr<PairState> state,
                                                             const ReflectorOptions &options, Dispatch dispatch) {
    return std::make_shared<ReflectorEndpoint>(Token{}, std::move(name), std::move(me), std::move(export_filter),
                                               std::move(link), std::move(state), options, std::move(dispatch));
}

void ReflectorEndpoint::start() {
    std::weak_ptr<ReflectorEndpoint> weak = weak_from_this();
    _subscription = _me->subscribe(
        [weak, dispatch = _dispatch](const Envelope &e) {
            auto self = weak.lock();
            if (!self) return false;
            if (dispatch)
                dispatch([self = std::move(self), e] { self->on_local_envelope(e); });
            else
                self->on_local_envelope(e);
            return true;
        },
        _name);
    _subscribed = true;
    _link->start(
        [weak, dispatch = _dispatch](ByteView chunk) {
            auto self = weak.lock();
            if (!self) return;
            if (dispatch)
                dispatch([self = std::move(self), bytes = Bytes(chunk.begin(), chunk.end())] {
                    self->on_link_bytes(bytes);
                });
            else
                self->on_link_bytes(chunk);
        },
        [state = _state] { state->broken = true; });
}

void ReflectorEndpoint::shutdown() {
    if (_subscribed) {
        _subscribed = false;
        try {
            _me->unsubscribe(_subscription);
        } catch (const Error &) {
        }
    }
    if (_link) _link->close();
}

void ReflectorEndpoint::trace(TraceKind kind, const Envelope &e) const {
    if (_options.trace) _options.trace->record(kind, _me->id(), _name, e);
}

void ReflectorEndpoint::mark_broken() {
    _state->broken = true;
}

ExportOutcome ReflectorEndpoint::on_local_envelope(const Envelope &e) {
    if (_options.dedup_enabled && _imported.contains(e.id)) {
        trace(TraceKind::DroppedSelfOrigin, e);
        return ExportOutcome::SelfOriginDropped;
    }
    if (!_filter.matches(e.payload)) {
        trace(TraceKind::Filtered, e);
        return ExportOutcome::FilteredOut;
    }
    if (e.ttl == 0) {
        trace(TraceKind::DroppedTtl, e);
        return ExportOutcome::TtlExhausted;
    }
    if (broken()) return ExportOutcome::LinkBroken;

    Envelope hop = e;
    hop.ttl = static_cast<std::uint8_t>(e.ttl - 1);
    if (_options.frames_in_flight) _options.frames_in_flight->fetch_add(1);
    trace(TraceKind::Exported, hop);
    if (!_link->write(encode_frame(encode(hop)))) {
        if (_options.frames_in_flight) _options.frames_in_flight->fetch_sub(1);
        mark_broken();
        return ExportOutcome::LinkBroken;
    }
    return ExportOutcome::Exported;
}

ImportOutcome ReflectorEndpoint::on_link_frame(ByteView frame) {
    Envelope e;
    try {
        e = decode(frame);
    } catch (const Error &) {
        if (_options.trace) _options.trace->record(TraceKind::DecodeError, _me->id(), _name, MessageId{}, 0, frame.size());
        if (++_consecutive_decode_errors >= max_consecutive_decode_errors) mark_broken();
        return ImportOutcome::DecodeError;
    }
    _consecutive_decode_errors = 0;

    if (_options.dedup_enabled) {
        if (_ingress.check_and_insert(e.id) == Freshness::Duplicate) {
            trace(TraceKind::SuppressedDuplicate, e);
            return ImportOutcome::DuplicateDropped;
        }
        _imported.check_and_insert(e.id);
    }
    trace(TraceKind::Imported, e);
    _me->publish(e);
    return ImportOutcome::Republished;
}

void ReflectorEndpoint::on_link_bytes(ByteView chunk) {
    std::lock_guard lk(_rx_mx);
    _decoder.feed(chunk);
    while (auto frame = _decoder.next()) {
        if (!broken()) on_link_frame(*frame);
        if (_options.frames_in_flight) _options.frames_in_flight->fetch_sub(1);
    }
}

bool ReflectorEndpoint::write_raw(ByteView bytes) {
    return _link->write(bytes);
}

ReflectorPair::ReflectorPair(std::shared_ptr<ReflectorEndpoint> a, std::shared_ptr<ReflectorEndpoint> b,
                             std::shared_ptr<PairState> state)
    : _a(std::move(a)), _b(std::move(b)), _state(std::move(state)) {}

ReflectorPair::~ReflectorPair() {
    _a->shutdown();
    _b->shutdown();
}

std::unique_ptr<ReflectorPair> connect_pair(std::shared_ptr<MessagingEnvironment> me_a,
                                            std::shared_ptr<MessagingEnvironment> me_b, Filter filter_ab,
                                            Filter filter_ba, const LinkTransport &transport,
                                            ReflectorOptions options) {
    if (!me_a || !me_b) throw Error(ErrorCode::InvalidArgument, "reflector pair needs two MEs");
    if (me_a == me_b || me_a->id() == me_b->id())
        throw Error(ErrorCode::InvalidArgument, "reflector pair must bridge two distinct MEs, got " + me_a->id());
    if (!transport) throw Error(ErrorCode::LinkFailed, "no link transport");

    StreamPair streams = transport();
    if (!streams.a || !streams.b) throw Error(ErrorCode::LinkFailed, "transport returned an incomplete stream pair");

    auto state = std::make_shared<PairState>();
    auto a = ReflectorEndpoint::create(me_a->id() + "~" + me_b->id(), me_a, std::move(filter_ab),
                                       std::move(streams.a), state, options, options.dispatch_a);
    auto b = ReflectorEndpoint::create(me_b->id() + "~" + me_a->id(), me_b, std::move(filter_ba),
                                       std::move(streams.b), state, options, options.dispatch_b);
    a->start();
    b->start();
    return std::make_unique<ReflectorPair>(std::move(a), std::move(b), std::move(state));
}

}  // namespace ipsme
