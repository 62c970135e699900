#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "ipsme/broker.hpp"
#include "ipsme/dedup.hpp"
#include "ipsme/link.hpp"
#include "ipsme/participant.hpp"
#include "ipsme/trace.hpp"

namespace ipsme {

enum class FilterMode { MatchAll, PrefixAny };

/// Selects which local envelopes a reflector endpoint sends across. Prefixes
/// are matched against the start of the payload only.
struct Filter {
    FilterMode mode = FilterMode::MatchAll;
    std::vector<Bytes> prefixes;

    static Filter match_all() { return {}; }
    static Filter prefix_any(const std::vector<std::string> &prefixes);

    bool matches(ByteView payload) const noexcept;
};

enum class ExportOutcome { Exported, FilteredOut, TtlExhausted, SelfOriginDropped, LinkBroken };
enum class ImportOutcome { Republished, DuplicateDropped, DecodeError };

std::string_view to_string(ExportOutcome o) noexcept;
std::string_view to_string(ImportOutcome o) noexcept;

inline constexpr int max_consecutive_decode_errors = 3;

struct ReflectorOptions {
    std::size_t dedup_capacity = default_dedup_capacity;
    /// Test-only: disables ingress dedup and import suppression.
    bool dedup_enabled = true;
    std::shared_ptr<TraceRecorder> trace;
    Dispatch dispatch_a;
    Dispatch dispatch_b;
    /// Incremented per frame written, decremented once the receiving side
    /// has processed it. Lets a harness tell when links are drained.
    std::shared_ptr<std::atomic<std::int64_t>> frames_in_flight;
};

/// Shared by both endpoints of a pair.
struct PairState {
    std::atomic<bool> broken{false};
};

/// Proxy participant in one ME. Exports filtered local envelopes to its
/// counterpart and republishes what the counterpart sends.
class ReflectorEndpoint : public std::enable_shared_from_this<ReflectorEndpoint> {
    struct Token {};

public:
    ReflectorEndpoint(Token, std::string name, std::shared_ptr<MessagingEnvironment> me, Filter export_filter,
                      std::unique_ptr<ByteStream> link, std::shared_ptr<PairState> state,
                      const ReflectorOptions &options, Dispatch dispatch);
    ~ReflectorEndpoint();

    const std::string &name() const noexcept { return _name; }
    MessagingEnvironment &me() const noexcept { return *_me; }
    const Filter &export_filter() const noexcept { return _filter; }
    bool broken() const noexcept { return _state->broken; }

    ExportOutcome on_local_envelope(const Envelope &e);
    ImportOutcome on_link_frame(ByteView frame);
    /// Feeds raw stream bytes; every complete frame goes to on_link_frame.
    void on_link_bytes(ByteView chunk);

    /// Writes raw bytes to the link, bypassing encoding. Used for fault injection.
    bool write_raw(ByteView bytes);

    static std::shared_ptr<ReflectorEndpoint> create(std::string name, std::shared_ptr<MessagingEnvironment> me,
                                                     Filter export_filter, std::unique_ptr<ByteStream> link,
                                                     std::shared_ptr<PairState> state, const ReflectorOptions &options,
                                                     Dispatch dispatch);

    /// Subscribes to the local ME and starts reading the link.
    void start();
    void shutdown();

private:
    void trace(TraceKind kind, const Envelope &e) const;
    void mark_broken();

    std::string _name;
    std::shared_ptr<MessagingEnvironment> _me;
    Filter _filter;
    std::unique_ptr<ByteStream> _link;
    std::shared_ptr<PairState> _state;
    ReflectorOptions _options;
    Dispatch _dispatch;
    SubscriberHandle _subscription{};
    bool _subscribed = false;

    DedupCache _ingress;
    DedupCache _imported;

    std::recursive_mutex _rx_mx;
    FrameDecoder _decoder;
    int _consecutive_decode_errors = 0;
};

/// Two endpoints bridging two distinct MEs in both directions.
class ReflectorPair {
public:
    ReflectorPair(std::shared_ptr<ReflectorEndpoint> a, std::shared_ptr<ReflectorEndpoint> b,
                  std::shared_ptr<PairState> state);
    ~ReflectorPair();

    ReflectorPair(const ReflectorPair &) = delete;
    ReflectorPair &operator=(const ReflectorPair &) = delete;

    ReflectorEndpoint &a() const noexcept { return *_a; }
    ReflectorEndpoint &b() const noexcept { return *_b; }
    bool broken() const noexcept { return _state->broken; }

private:
    std::shared_ptr<ReflectorEndpoint> _a;
    std::shared_ptr<ReflectorEndpoint> _b;
    std::shared_ptr<PairState> _state;
};

/// Endpoint names follow "<local me>~<remote me>".
std::unique_ptr<ReflectorPair> connect_pair(std::shared_ptr<MessagingEnvironment> me_a,
                                            std::shared_ptr<MessagingEnvironment> me_b, Filter filter_ab,
                                            Filter filter_ba, const LinkTransport &transport,
                                            ReflectorOptions options = {});

}  // namespace ipsme
