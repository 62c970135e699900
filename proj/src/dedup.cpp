#include "ipsme/dedup.hpp"

#include "ipsme/error.hpp"

namespace ipsme {

DedupCache::DedupCache(std::size_t capacity) : _capacity(capacity) {
    if (capacity == 0) throw Error(ErrorCode::InvalidArgument, "dedup capacity must be positive");
}

Freshness DedupCache::check_and_insert(const MessageId &id) {
    if (id.is_zero()) throw Error(ErrorCode::ZeroId, "dedup lookup with zero id");
    std::lock_guard lk(_mx);
    if (_entries.contains(id)) return Freshness::Duplicate;
    if (_entries.size() == _capacity) {
        _entries.erase(_order.front());
        _order.pop_front();
    }
    _entries.insert(id);
    _order.push_back(id);
    return Freshness::Fresh;
}

bool DedupCache::contains(const MessageId &id) const {
    std::lock_guard lk(_mx);
    return _entries.contains(id);
}

void DedupCache::clear() {
    std::lock_guard lk(_mx);
    _entries.clear();
    _order.clear();
}

std::size_t DedupCache::size() const {
    std::lock_guard lk(_mx);
    return _entries.size();
}

}  // namespace ipsme
