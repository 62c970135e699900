#pragma once

#include <cstddef>
#include <deque>
#include <mutex>
#include <unordered_set>

#include "ipsme/envelope.hpp"

namespace ipsme {

enum class Freshness { Fresh, Duplicate };

inline constexpr std::size_t default_dedup_capacity = 65536;

/// Bounded set of recently seen ids, evicting the least recently inserted.
/// check_and_insert is linearizable: concurrent submissions of one id yield
/// exactly one Fresh.
class DedupCache {
public:
    explicit DedupCache(std::size_t capacity = default_dedup_capacity);

    Freshness check_and_insert(const MessageId &id);
    bool contains(const MessageId &id) const;
    void clear();

    std::size_t size() const;
    std::size_t capacity() const noexcept { return _capacity; }

private:
    std::size_t _capacity;
    mutable std::mutex _mx;
    std::unordered_set<MessageId, MessageIdHash> _entries;
    std::deque<MessageId> _order;
};

}  // namespace ipsme
