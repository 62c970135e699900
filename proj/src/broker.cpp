#include "ipsme/broker.hpp"

#include <algorithm>

#include "ipsme/error.hpp"

namespace ipsme {

MessagingEnvironment::MessagingEnvironment(std::string me_id, BrokerOptions options)
    : _me_id(std::move(me_id)),
      _options(std::move(options)),
      _ingress(_options.dedup_capacity),
      _registry(std::make_shared<const Registry>()) {}

SubscriberHandle MessagingEnvironment::subscribe(DeliverySink sink, std::string label) {
    std::lock_guard lk(_registry_mx);
    SubscriberHandle h{_next_handle++};
    auto next = std::make_shared<Registry>(*_registry);
    next->push_back(Subscription{h, std::move(label), std::move(sink)});
    _registry = std::move(next);
    return h;
}

void MessagingEnvironment::unsubscribe(SubscriberHandle handle) {
    std::lock_guard lk(_registry_mx);
    auto next = std::make_shared<Registry>(*_registry);
    auto it = std::find_if(next->begin(), next->end(), [&](const auto &s) { return s.handle == handle; });
    if (it == next->end())
        throw Error(ErrorCode::UnknownHandle, "no subscription " + std::to_string(handle.value) + " in " + _me_id);
    next->erase(it);
    _registry = std::move(next);
}

std::shared_ptr<const MessagingEnvironment::Registry> MessagingEnvironment::registry() const {
    std::lock_guard lk(_registry_mx);
    return _registry;
}

void MessagingEnvironment::drop_dead(const std::vector<SubscriberHandle> &dead) {
    std::lock_guard lk(_registry_mx);
    auto next = std::make_shared<Registry>(*_registry);
    std::erase_if(*next, [&](const auto &s) {
        return std::find(dead.begin(), dead.end(), s.handle) != dead.end();
    });
    _registry = std::move(next);
}

PublishOutcome MessagingEnvironment::publish(const Envelope &e) {
    if (e.id.is_zero()) throw Error(ErrorCode::ZeroId, "cannot publish an envelope without id into " + _me_id);

    if (_options.dedup_enabled && _ingress.check_and_insert(e.id) == Freshness::Duplicate) {
        _suppressed.fetch_add(1, std::memory_order_relaxed);
        if (_options.trace) _options.trace->record(TraceKind::SuppressedDuplicate, _me_id, broker_actor, e);
        return PublishOutcome::SuppressedDuplicate;
    }

    _relayed.fetch_add(1, std::memory_order_relaxed);
    if (_options.trace) _options.trace->record(TraceKind::Relayed, _me_id, broker_actor, e);

    auto snapshot = registry();
    std::vector<SubscriberHandle> dead;
    for (const auto &sub : *snapshot) {
        if (!sub.sink(e)) {
            dead.push_back(sub.handle);
            continue;
        }
        _delivered.fetch_add(1, std::memory_order_relaxed);
        if (_options.trace) _options.trace->record(TraceKind::Delivered, _me_id, sub.label, e);
    }
    if (!dead.empty()) drop_dead(dead);
    return PublishOutcome::Relayed;
}

std::size_t MessagingEnvironment::subscriber_count() const {
    return registry()->size();
}

BrokerCounters MessagingEnvironment::counters() const noexcept {
    return {_relayed.load(), _suppressed.load(), _delivered.load()};
}

}  // namespace ipsme
