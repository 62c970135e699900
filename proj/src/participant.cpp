#include "ipsme/participant.hpp"

#include <algorithm>

#include "ipsme/error.hpp"

namespace ipsme {

bool has_prefix(ByteView payload, ByteView prefix) noexcept {
    return payload.size() >= prefix.size() && std::equal(prefix.begin(), prefix.end(), payload.begin());
}

ProtocolHandler prefix_handler(std::string tag, std::function<std::vector<Envelope>(const Envelope &)> react) {
    Bytes prefix = to_bytes(tag);
    return ProtocolHandler{
        [prefix = std::move(prefix)](ByteView payload) { return has_prefix(payload, prefix); },
        std::move(react),
    };
}

std::string_view to_string(DeliveryReport r) noexcept {
    switch (r) {
        case DeliveryReport::Handled: return "Handled";
        case DeliveryReport::Ignored: return "Ignored";
        case DeliveryReport::DuplicateDropped: return "DuplicateDropped";
        case DeliveryReport::SelfOriginDropped: return "SelfOriginDropped";
    }
    return "Unknown";
}

Participant::Participant(Token, std::string name, std::shared_ptr<MessagingEnvironment> me,
                         ParticipantOptions options)
    : _name(std::move(name)),
      _me(std::move(me)),
      _options(std::move(options)),
      _seen(_options.dedup_capacity),
      _emitted(_options.dedup_capacity) {}

Participant::~Participant() {
    try {
        _me->unsubscribe(_subscription);
    } catch (const Error &) {
        // already dropped by the broker
    }
}

std::shared_ptr<Participant> Participant::attach(std::string name, std::shared_ptr<MessagingEnvironment> me,
                                                 ParticipantOptions options) {
    if (!me) throw Error(ErrorCode::InvalidArgument, "participant " + name + " needs an ME");
    auto p = std::make_shared<Participant>(Token{}, std::move(name), std::move(me), std::move(options));
    std::weak_ptr<Participant> weak = p;
    Dispatch dispatch = p->_options.dispatch;
    p->_subscription = p->_me->subscribe(
        [weak, dispatch](const Envelope &e) {
            auto self = weak.lock();
            if (!self) return false;
            if (dispatch)
                dispatch([self = std::move(self), e] { self->deliver(e); });
            else
                self->deliver(e);
            return true;
        },
        p->_name);
    return p;
}

void Participant::add_handler(ProtocolHandler handler) {
    std::lock_guard lk(_mx);
    _handlers.push_back(std::move(handler));
}

void Participant::trace(TraceKind kind, const Envelope &e) const {
    if (_options.trace) _options.trace->record(kind, _me->id(), _name, e);
}

DeliveryReport Participant::deliver(const Envelope &e) {
    if (_seen.check_and_insert(e.id) == Freshness::Duplicate) {
        trace(TraceKind::SuppressedDuplicate, e);
        return DeliveryReport::DuplicateDropped;
    }
    if (_emitted.contains(e.id)) {
        trace(TraceKind::DroppedSelfOrigin, e);
        return DeliveryReport::SelfOriginDropped;
    }

    const ProtocolHandler *match = nullptr;
    std::vector<ProtocolHandler> handlers;
    {
        std::lock_guard lk(_mx);
        handlers = _handlers;
    }
    for (const auto &h : handlers) {
        bool recognized = false;
        try {
            recognized = h.recognizes(e.payload);
        } catch (...) {
            recognized = false;
        }
        if (recognized) {
            match = &h;
            break;
        }
    }
    if (!match) {
        trace(TraceKind::Ignored, e);
        return DeliveryReport::Ignored;
    }

    trace(TraceKind::Handled, e);
    try {
        for (const auto &out : match->react(e)) send(out);
    } catch (const std::exception &ex) {
        trace(TraceKind::HandlerFault, e);
        std::lock_guard lk(_mx);
        _faults.push_back({e.id, ex.what()});
    } catch (...) {
        trace(TraceKind::HandlerFault, e);
        std::lock_guard lk(_mx);
        _faults.push_back({e.id, "non-standard exception"});
    }
    return DeliveryReport::Handled;
}

PublishOutcome Participant::send(const Envelope &e) {
    if (e.id.is_zero()) throw Error(ErrorCode::ZeroId, _name + " tried to send an envelope without id");
    _emitted.check_and_insert(e.id);
    trace(TraceKind::Published, e);
    if (_options.on_send) _options.on_send(*this, e);
    return _me->publish(e);
}

std::vector<HandlerFault> Participant::faults() const {
    std::lock_guard lk(_mx);
    return _faults;
}

std::shared_ptr<Participant> make_translator(std::string name, std::string from_tag, Mapping mapping,
                                             std::shared_ptr<MessagingEnvironment> me, TranslatorOptions translator,
                                             ParticipantOptions options) {
    if (from_tag.empty()) throw Error(ErrorCode::InvalidArgument, "translator " + name + " needs a source tag");
    if (!translator.ids) throw Error(ErrorCode::InvalidArgument, "translator " + name + " needs an id source");
    if (!mapping) throw Error(ErrorCode::InvalidArgument, "translator " + name + " needs a mapping");

    auto trace = options.trace;
    auto p = Participant::attach(name, me, std::move(options));
    p->add_handler(prefix_handler(
        std::move(from_tag),
        [trace, name, me_id = me->id(), mapping = std::move(mapping), translator](const Envelope &in) {
            if (in.ttl == 0) {
                if (trace) trace->record(TraceKind::DroppedTtl, me_id, name, in);
                return std::vector<Envelope>{};
            }
            Envelope out = derive_transformed(in, mapping(in.payload), *translator.ids);
            if (translator.on_translate) translator.on_translate(in, out);
            return std::vector<Envelope>{std::move(out)};
        }));
    return p;
}

}  // namespace ipsme
