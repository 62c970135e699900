#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "ipsme/broker.hpp"
#include "ipsme/dedup.hpp"
#include "ipsme/envelope.hpp"
#include "ipsme/trace.hpp"

namespace ipsme {

/// Decides where a delivery runs. The default runs it inline on the
/// publishing thread; the harness supplies a per-participant strand.
using Dispatch = std::function<void(std::function<void()>)>;

struct ProtocolHandler {
    std::function<bool(ByteView)> recognizes;
    std::function<std::vector<Envelope>(const Envelope &)> react;
};

bool has_prefix(ByteView payload, ByteView prefix) noexcept;

/// Handler that claims every payload beginning with `tag`.
ProtocolHandler prefix_handler(std::string tag, std::function<std::vector<Envelope>(const Envelope &)> react);

enum class DeliveryReport { Handled, Ignored, DuplicateDropped, SelfOriginDropped };

std::string_view to_string(DeliveryReport r) noexcept;

struct HandlerFault {
    MessageId id;
    std::string what;
};

class Participant;

struct ParticipantOptions {
    std::size_t dedup_capacity = default_dedup_capacity;
    std::shared_ptr<TraceRecorder> trace;
    Dispatch dispatch;
    /// Called for every envelope this participant hands to its ME.
    std::function<void(const Participant &, const Envelope &)> on_send;
};

/// A publisher/subscriber attached to exactly one ME. Understood envelopes go
/// to the first matching handler; everything else is dropped silently.
class Participant : public std::enable_shared_from_this<Participant> {
    struct Token {};

public:
    Participant(Token, std::string name, std::shared_ptr<MessagingEnvironment> me, ParticipantOptions options);
    ~Participant();

    Participant(const Participant &) = delete;
    Participant &operator=(const Participant &) = delete;

    static std::shared_ptr<Participant> attach(std::string name, std::shared_ptr<MessagingEnvironment> me,
                                               ParticipantOptions options = {});

    const std::string &name() const noexcept { return _name; }
    MessagingEnvironment &me() const noexcept { return *_me; }

    void add_handler(ProtocolHandler handler);

    /// Never throws for a valid envelope: handler failures are recorded and
    /// reported as Handled.
    DeliveryReport deliver(const Envelope &e);

    PublishOutcome send(const Envelope &e);

    bool emitted(const MessageId &id) const { return _emitted.contains(id); }
    std::vector<HandlerFault> faults() const;

private:
    void trace(TraceKind kind, const Envelope &e) const;

    std::string _name;
    std::shared_ptr<MessagingEnvironment> _me;
    ParticipantOptions _options;
    SubscriberHandle _subscription;

    mutable std::mutex _mx;
    std::vector<ProtocolHandler> _handlers;
    std::vector<HandlerFault> _faults;

    DedupCache _seen;
    DedupCache _emitted;
};

using Mapping = std::function<Bytes(ByteView)>;

struct TranslatorOptions {
    IdSource *ids = nullptr;
    /// Observes each (input, output) pair the translator produces.
    std::function<void(const Envelope &, const Envelope &)> on_translate;
};

/// A participant that rewrites every envelope whose payload starts with
/// `from_tag` and publishes the result as a new envelope one hop further.
std::shared_ptr<Participant> make_translator(std::string name, std::string from_tag, Mapping mapping,
                                             std::shared_ptr<MessagingEnvironment> me, TranslatorOptions translator,
                                             ParticipantOptions options = {});

}  // namespace ipsme
