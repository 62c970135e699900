#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "ipsme/dedup.hpp"
#include "ipsme/envelope.hpp"
#include "ipsme/trace.hpp"

namespace ipsme {

/// Receives relayed envelopes. Returning false tells the broker the receiving
/// end is gone; the subscription is then dropped.
using DeliverySink = std::function<bool(const Envelope &)>;

struct SubscriberHandle {
    std::uint64_t value = 0;
    friend bool operator==(const SubscriberHandle &, const SubscriberHandle &) = default;
};

enum class PublishOutcome { Relayed, SuppressedDuplicate };

struct BrokerOptions {
    std::size_t dedup_capacity = default_dedup_capacity;
    /// Test-only: turning this off removes the loop breaker for reflector cycles.
    bool dedup_enabled = true;
    std::shared_ptr<TraceRecorder> trace;
};

struct BrokerCounters {
    std::uint64_t relayed = 0;
    std::uint64_t suppressed = 0;
    std::uint64_t delivered = 0;
};

/// A messaging environment: relays every fresh envelope to every subscriber
/// registered at publish time, including the publisher itself. Payload bytes
/// are never looked at.
class MessagingEnvironment {
public:
    explicit MessagingEnvironment(std::string me_id, BrokerOptions options = {});

    MessagingEnvironment(const MessagingEnvironment &) = delete;
    MessagingEnvironment &operator=(const MessagingEnvironment &) = delete;

    const std::string &id() const noexcept { return _me_id; }

    SubscriberHandle subscribe(DeliverySink sink, std::string label = {});
    void unsubscribe(SubscriberHandle handle);

    PublishOutcome publish(const Envelope &e);

    std::size_t subscriber_count() const;
    BrokerCounters counters() const noexcept;

private:
    struct Subscription {
        SubscriberHandle handle;
        std::string label;
        DeliverySink sink;
    };
    using Registry = std::vector<Subscription>;

    std::shared_ptr<const Registry> registry() const;
    void drop_dead(const std::vector<SubscriberHandle> &dead);

    std::string _me_id;
    BrokerOptions _options;
    DedupCache _ingress;

    mutable std::mutex _registry_mx;
    std::shared_ptr<const Registry> _registry;
    std::uint64_t _next_handle = 1;

    std::atomic<std::uint64_t> _relayed{0};
    std::atomic<std::uint64_t> _suppressed{0};
    std::atomic<std::uint64_t> _delivered{0};
};

}  // namespace ipsme
