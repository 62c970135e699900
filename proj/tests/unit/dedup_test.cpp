#include <algorithm>
#include <atomic>
#include <deque>
#include <random>
#include <thread>
#include <unordered_set>

#include "doctest.h"

#include "ipsme/dedup.hpp"
#include "ipsme/error.hpp"

using namespace ipsme;

TEST_CASE("first sighting is fresh, the second a duplicate") {
    IdSource ids(1);
    DedupCache cache;
    auto x = ids.next();
    CHECK(cache.check_and_insert(x) == Freshness::Fresh);
    CHECK(cache.check_and_insert(x) == Freshness::Duplicate);
    CHECK_THROWS_AS(cache.check_and_insert(MessageId{}), Error);
}

TEST_CASE("capacity evicts the least recently inserted id") {
    IdSource ids(2);
    DedupCache cache(2);
    auto x = ids.next(), y = ids.next(), z = ids.next();
    cache.check_and_insert(x);
    cache.check_and_insert(y);
    cache.check_and_insert(z);
    CHECK(cache.size() == 2);
    CHECK(cache.check_and_insert(x) == Freshness::Fresh);
    CHECK_THROWS_AS(DedupCache(0), Error);
}

TEST_CASE("clear empties the cache") {
    IdSource ids(3);
    DedupCache cache;
    cache.clear();
    CHECK(cache.size() == 0);
    auto x = ids.next();
    cache.check_and_insert(x);
    cache.clear();
    CHECK(cache.size() == 0);
    CHECK(cache.check_and_insert(x) == Freshness::Fresh);
}

TEST_CASE("verdicts match an unbounded set while capacity never binds") {
    IdSource ids(4);
    std::vector<MessageId> pool(1000);
    for (auto &id : pool) id = ids.next();
    std::mt19937_64 rng(4);
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);

    DedupCache cache(10000);
    std::unordered_set<MessageId, MessageIdHash> oracle;
    for (int i = 0; i < 100000; ++i) {
        const auto &id = pool[pick(rng)];
        const auto expected = oracle.insert(id).second ? Freshness::Fresh : Freshness::Duplicate;
        REQUIRE(cache.check_and_insert(id) == expected);
    }
}

TEST_CASE("bounded cache matches a FIFO model under eviction pressure") {
    IdSource ids(5);
    std::vector<MessageId> pool(40);
    for (auto &id : pool) id = ids.next();
    std::mt19937_64 rng(5);
    for (std::size_t capacity : {1u, 3u, 8u, 17u}) {
        DedupCache cache(capacity);
        std::deque<MessageId> model;
        for (int i = 0; i < 5000; ++i) {
            const auto &id = pool[rng() % pool.size()];
            Freshness expected = Freshness::Duplicate;
            if (std::find(model.begin(), model.end(), id) == model.end()) {
                expected = Freshness::Fresh;
                if (model.size() == capacity) model.pop_front();
                model.push_back(id);
            }
            REQUIRE(cache.check_and_insert(id) == expected);
            REQUIRE(cache.size() <= capacity);
        }
    }
}

TEST_CASE("concurrent submissions of one id yield one Fresh") {
    IdSource ids(6);
    DedupCache cache;
    for (int round = 0; round < 200; ++round) {
        const auto id = ids.next();
        std::atomic<int> fresh{0};
        std::atomic<bool> go{false};
        std::vector<std::thread> threads;
        for (int t = 0; t < 8; ++t)
            threads.emplace_back([&] {
                while (!go) std::this_thread::yield();
                if (cache.check_and_insert(id) == Freshness::Fresh) ++fresh;
            });
        go = true;
        for (auto &t : threads) t.join();
        REQUIRE(fresh == 1);
    }
}
