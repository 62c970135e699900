// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <deque>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <unordered_set>
#include <vector>

#include "ipsme/dedup.hpp"
#include "ipsme/envelope.hpp"
#include "ipsme/error.hpp"
#include "ipsme/harness/mappings.hpp"
#include "ipsme/harness/properties.hpp"
#include "ipsme/harness/scenarios.hpp"
#include "ipsme/harness/topology.hpp"

using namespace ipsme;
using namespace ipsme::harness;

namespace {

struct Verdict {
    bool ok = true;
    std::string detail;

    void fail(const std::string &why) {
        if (ok) detail = why;
        ok = false;
    }
};

std::string trace_text(const Trace &trace) {
    std::ostringstream os;
    write_trace(os, trace);
    return os.str();
}

RunResult run_named(const TopologyConfig &config, const std::string &scenario, std::uint64_t k = 1,
                    BuildOptions options = {}) {
    auto topology = build(config, options);
    return run_scenario(*topology, config.scenarios.at(scenario), k);
}

MessageId random_id(std::mt19937_64 &rng) {
    std::array<std::uint8_t, MessageId::size> raw{};
    do {
        for (auto &b : raw) b = static_cast<std::uint8_t>(rng());
    } while (std::all_of(raw.begin(), raw.end(), [](auto b) { return b == 0; }));
    return MessageId(raw);
}

ErrorCode decode_error(ByteView bytes) {
    try {
        decode(bytes);
    } catch (const Error &e) {
        return e.code();
    }
    return ErrorCode::InvalidArgument;  // stands for "decoded without complaint"
}

// 1. codec fuzz
Verdict codec() {
    Verdict v;
    std::mt19937_64 rng(0xC0DEC);
    std::size_t malformed = 0;
    for (int i = 0; i < 10'000; ++i) {
        Envelope e;
        e.id = random_id(rng);
        if (rng() % 2) e.reply_to = random_id(rng);
        e.ttl = static_cast<std::uint8_t>(rng());
        e.payload.resize(rng() % 600);
        for (auto &b : e.payload) b = static_cast<std::uint8_t>(rng());

        const Bytes wire_bytes = encode(e);
        if (decode(wire_bytes) != e) v.fail("round trip differs at envelope " + std::to_string(i));

        auto bad = wire_bytes;
        bad[rng() % 4] ^= static_cast<std::uint8_t>(1 + rng() % 255);
        malformed += decode_error(bad) == ErrorCode::BadMagic;

        bad = wire_bytes;
        bad[4] = static_cast<std::uint8_t>(2 + rng() % 254);
        malformed += decode_error(bad) == ErrorCode::BadVersion;

        bad.assign(wire_bytes.begin(), wire_bytes.begin() + static_cast<std::ptrdiff_t>(rng() % wire_bytes.size()));
        malformed += decode_error(bad) == ErrorCode::Truncated;

        bad = wire_bytes;
        std::fill(bad.begin() + 8, bad.begin() + 24, 0);
        malformed += decode_error(bad) == ErrorCode::ZeroId;
    }
    if (malformed != 4 * 10'000) v.fail("malformed frames detected: " + std::to_string(malformed) + "/40000");
    v.detail = v.ok ? "10^4 round trips, 4x10^4 malformed frames classified" : v.detail;
    return v;
}

// 2. dedup against an unbounded set, then 8 racing submitters per id
Verdict dedup() {
    Verdict v;
    constexpr std::size_t capacity = 4096;
    DedupCache cache(capacity);
    std::set<MessageId> oracle;
    std::mt19937_64 rng(0xDED0);
    std::vector<MessageId> pool;
    for (std::size_t i = 0; i < capacity; ++i) pool.push_back(random_id(rng));
    for (int i = 0; i < 100'000; ++i) {
        const auto &id = pool[rng() % pool.size()];
        const bool fresh_expected = oracle.insert(id).second;
        const bool fresh = cache.check_and_insert(id) == Freshness::Fresh;
        if (fresh != fresh_expected) {
            v.fail("verdict mismatch at event " + std::to_string(i));
            break;
        }
    }

    DedupCache shared(capacity);
    for (int trial = 0; trial < 500 && v.ok; ++trial) {
        const auto id = random_id(rng);
        std::atomic<int> fresh{0};
        std::atomic<bool> go{false};
        std::vector<std::thread> threads;
        for (int t = 0; t < 8; ++t)
            threads.emplace_back([&] {
                while (!go.load()) std::this_thread::yield();
                if (shared.check_and_insert(id) == Freshness::Fresh) ++fresh;
            });
        go = true;
        for (auto &t : threads) t.join();
        if (fresh != 1) v.fail("trial " + std::to_string(trial) + " saw " + std::to_string(fresh.load()) + " Fresh");
    }
    if (v.ok) v.detail = "10^5 verdicts match, 500 races with 8 threads each yield one Fresh";
    return v;
}

// 3. ring loop freedom
Verdict ring() {
    Verdict v;
    const auto config = ring_config(3, 1000);
    const auto run = run_named(config, "ring");
    for (const auto &p : config.participants) {
        if (p.role != Role::Consumer) continue;
        const auto &name = p.name;
        const auto &log = run.effects.at(name);
        std::map<MessageId, int> seen;
        for (const auto &e : log) ++seen[e.id];
        if (seen.size() != 1000) v.fail(name + " logged " + std::to_string(seen.size()) + " distinct ids");
        for (const auto &[id, n] : seen)
            if (n != 1) v.fail(name + " logged " + id.hex() + " " + std::to_string(n) + " times");
    }
    std::set<std::pair<std::string, MessageId>> relayed;
    for (const auto &ev : run.trace)
        if (ev.kind == TraceKind::Relayed && !relayed.insert({ev.me_id, ev.id}).second)
            v.fail("second Relayed of " + ev.id.hex() + " in " + ev.me_id);
    if (v.ok) v.detail = "3 consumers x 1000 ids, no repeated relay";
    return v;
}

// 4. reachability against a BFS over filtered edges
std::set<std::string> bfs(const TopologyConfig &c, const std::string &origin, ByteView payload, int ttl) {
    auto passes = [&](const Filter &f) {
        if (f.mode == FilterMode::MatchAll) return true;
        return std::any_of(f.prefixes.begin(), f.prefixes.end(), [&](const Bytes &p) {
            return payload.size() >= p.size() && std::equal(p.begin(), p.end(), payload.begin());
        });
    };
    std::map<std::string, std::vector<std::string>> adj;
    for (const auto &r : c.reflectors) {
        if (passes(r.filter_ab)) adj[r.me_a].push_back(r.me_b);
        if (passes(r.filter_ba)) adj[r.me_b].push_back(r.me_a);
    }
    std::map<std::string, int> dist{{origin, 0}};
    std::deque<std::string> queue{origin};
    while (!queue.empty()) {
        const auto me = queue.front();
        queue.pop_front();
        if (dist[me] >= ttl) continue;
        for (const auto &next : adj[me])
            if (dist.emplace(next, dist[me] + 1).second) queue.push_back(next);
    }
    std::set<std::string> out;
    for (const auto &p : c.participants)
        if (p.role == Role::Consumer && dist.contains(p.me) &&
            std::any_of(p.accepts.begin(), p.accepts.end(), [&](const std::string &tag) {
                return payload.size() >= tag.size() && std::equal(tag.begin(), tag.end(), payload.begin());
            }))
            out.insert(p.name);
    return out;
}

Verdict reachability() {
    Verdict v;
    std::size_t checked = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto config = random_config(seed, 8);
        const auto run = run_named(config, "random");
        std::map<MessageId, std::set<std::string>> got;
        for (const auto &[name, log] : run.effects)
            for (const auto &e : log) got[e.id].insert(name);
        for (const auto &rec : run.published) {
            if (!rec.scenario_origin) continue;
            const auto want = bfs(config, rec.me, rec.envelope.payload, rec.envelope.ttl);
            const auto &have = got[rec.envelope.id];
            if (want != have) v.fail("seed " + std::to_string(seed) + " id " + rec.envelope.id.hex());
            ++checked;
        }
    }
    if (v.ok) v.detail = "20 topologies, " + std::to_string(checked) + " messages match the oracle";
    return v;
}

// 5. duplicate invariance
Verdict duplicates() {
    Verdict v;
    const auto config = teleport_config();
    std::vector<std::string> logs;
    std::vector<std::uint64_t> suppressed;
    for (std::uint64_t k : {1, 2, 5}) {
        const auto run = run_named(config, "teleport", k);
        logs.push_back(serialize(run.effects));
        suppressed.push_back(run.metrics.suppressed_total);
    }
    if (logs[0] != logs[1] || logs[0] != logs[2]) v.fail("effect logs differ across k");
    if (!(suppressed[0] < suppressed[1] && suppressed[1] < suppressed[2])) v.fail("suppressed counts not increasing");
    if (v.ok)
        v.detail = "logs identical, suppressed " + std::to_string(suppressed[0]) + " < " +
                   std::to_string(suppressed[1]) + " < " + std::to_string(suppressed[2]);
    return v;
}

// 6. translation fidelity; shared with 7, which runs it on a fuzzed topology
void check_translation(const RunResult &run, const std::vector<std::string> &expected_items, std::size_t teleports,
                       Verdict &v) {
    std::vector<std::string> items;
    for (const auto &e : run.effects.at("mine_inventory")) items.push_back(to_string(e.effect));
    if (items != expected_items) v.fail("inventory payloads differ from the table");

    std::map<MessageId, MessageId> source_of;
    for (const auto &edge : run.lineage) source_of[edge.output.id] = edge.input.id;
    std::map<MessageId, const Envelope *> by_id;
    std::set<MessageId> requests;
    for (const auto &rec : run.published) {
        by_id[rec.envelope.id] = &rec.envelope;
        if (rec.scenario_origin && to_string(rec.envelope.payload).starts_with("TPRT")) requests.insert(rec.envelope.id);
    }
    std::map<MessageId, int> answered;
    for (const auto &e : run.effects.at("doom_player")) {
        const auto *reply = by_id.count(e.id) ? by_id.at(e.id) : nullptr;
        if (!reply || !source_of.contains(reply->reply_to)) {
            v.fail("reply " + e.id.hex() + " does not correlate");
            continue;
        }
        ++answered[source_of.at(reply->reply_to)];
    }
    if (requests.size() != teleports) v.fail("expected " + std::to_string(teleports) + " requests");
    for (const auto &r : requests)
        if (answered[r] != 1) v.fail("request " + r.hex() + " answered " + std::to_string(answered[r]) + " times");
    if (answered.size() != requests.size()) v.fail("replies to unknown requests");
}

std::vector<std::string> item_oracle() {
    const auto map = make_mapping("inventory", "INVA", "INVB");
    std::vector<std::string> out;
    for (const auto &[item, _] : item_table()) out.push_back(to_string(map(to_bytes("INVA|" + item))));
    return out;
}

Verdict translation() {
    Verdict v;
    const auto expected = item_oracle();
    const auto config = teleport_config(5, 0);
    const auto run = run_named(config, "teleport", 2);
    check_translation(run, expected, 5, v);
    if (v.ok) v.detail = "10/10 items, 5 requests with one reply each";
    return v;
}

// 7. fuzz traffic is ignored and does not disturb translation
Verdict fuzz() {
    Verdict v;
    const auto expected = item_oracle();
    const auto config = teleport_config(5, 1000);
    const auto run = run_named(config, "teleport_fuzz");

    std::set<std::string> participants;
    for (const auto &p : config.participants) participants.insert(p.name);
    for (const auto &t : config.translators) participants.insert(t.name);

    std::set<MessageId> fuzz_ids;
    for (const auto &rec : run.published)
        if (rec.participant == "mine_fuzzer") fuzz_ids.insert(rec.envelope.id);
    if (fuzz_ids.size() != 1000) v.fail("fuzzer published " + std::to_string(fuzz_ids.size()));

    std::map<std::pair<std::string, MessageId>, int> delivered, ignored;
    std::size_t faults = 0;
    for (const auto &ev : run.trace) {
        if (ev.kind == TraceKind::HandlerFault) ++faults;
        if (!fuzz_ids.contains(ev.id) || !participants.contains(ev.actor) || ev.actor == "mine_fuzzer") continue;
        if (ev.kind == TraceKind::Delivered) ++delivered[{ev.actor, ev.id}];
        if (ev.kind == TraceKind::Ignored) ++ignored[{ev.actor, ev.id}];
        if (ev.kind == TraceKind::Handled) v.fail(ev.actor + " handled fuzz id " + ev.id.hex());
    }
    if (faults != 0 || run.metrics.handler_faults != 0) v.fail(std::to_string(faults) + " handler faults");
    if (delivered.empty() || delivered != ignored) v.fail("fuzz deliveries not all Ignored");
    check_translation(run, expected, 5, v);
    if (v.ok) v.detail = std::to_string(delivered.size()) + " fuzz deliveries ignored, translation intact";
    return v;
}

// 8. amplification on a 32-ME chain
Verdict chain() {
    Verdict v;
    const auto config = chain_config(32, 10);
    const auto a = run_named(config, "chain");
    const auto b = run_named(config, "chain");
    for (const auto &rec : a.published) {
        std::size_t relayed = 0;
        std::set<std::string> exporters;
        std::size_t exported = 0;
        for (const auto &ev : a.trace) {
            if (ev.id != rec.envelope.id) continue;
            relayed += ev.kind == TraceKind::Relayed;
            if (ev.kind == TraceKind::Exported) {
                ++exported;
                exporters.insert(ev.actor);
            }
        }
        if (relayed != 32) v.fail("id " + rec.envelope.id.hex() + " relayed " + std::to_string(relayed));
        if (exported != 31 || exporters.size() != 31) v.fail("id " + rec.envelope.id.hex() + " framed " + std::to_string(exported));
    }
    if (a.metrics.link_frames != 31 * a.published.size()) v.fail("link frames " + std::to_string(a.metrics.link_frames));
    if (trace_text(a.trace) != trace_text(b.trace)) v.fail("traces differ between runs");
    if (v.ok) v.detail = "32 relays and 31 frames per id, traces identical (" + std::to_string(a.trace.size()) + " events)";
    return v;
}

// 9. without duplicate identification the ring never settles
Verdict no_dedup() {
    Verdict v;
    auto config = ring_config(3, 1000);
    config.event_budget = 1'000'000;
    BuildOptions options;
    options.broker_dedup = false;
    options.reflector_dedup = false;
    try {
        run_named(config, "ring", 1, options);
        v.fail("ring reached quiescence without dedup");
    } catch (const Error &e) {
        if (e.code() != ErrorCode::Timeout) v.fail(std::string("unexpected error: ") + e.what());
    }
    if (v.ok) v.detail = "Timeout after the event budget of 10^6";
    return v;
}

}  // namespace

int main() {
    struct Criterion {
        int number;
        const char *name;
        double limit_s;
        std::function<Verdict()> check;
    };
    const std::vector<Criterion> criteria{
        {1, "envelope codec fuzz", 5, codec},
        {2, "dedup oracle equivalence", 10, dedup},
        {3, "ring loop freedom", 10, ring},
        {4, "reachability completeness", 30, reachability},
        {5, "duplicate invariance", 10, duplicates},
        {6, "translation fidelity", 5, translation},
        {7, "ignore-unknown robustness", 10, fuzz},
        {8, "chain amplification bound", 20, chain},
        {9, "dedup disabled times out", 60, no_dedup},
    };

    int failures = 0;
    for (const auto &c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = c.check();
        } catch (const std::exception &e) {
            v.fail(std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (secs >= c.limit_s) v.fail("took " + std::to_string(secs) + " s, limit " + std::to_string(c.limit_s) + " s");
        std::printf("criterion %d %-28s %s  %.3f s  %s\n", c.number, c.name, v.ok ? "PASS" : "FAIL", secs,
                    v.detail.c_str());
        failures += !v.ok;
    }
    return failures == 0 ? 0 : 1;
}
