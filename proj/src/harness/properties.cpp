#include "ipsme/harness/properties.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "ipsme/harness/mappings.hpp"

namespace ipsme::harness {

namespace {

using IdMap = std::unordered_map<MessageId, std::uint64_t, MessageIdHash>;

constexpr std::size_t max_counterexamples = 16;

void fail(PropertyResult &r, std::uint64_t ordinal, const std::string &detail) {
    if (r.passed) r.detail = detail;
    r.passed = false;
    if (r.counterexamples.size() < max_counterexamples) r.counterexamples.push_back(ordinal);
}

/// Ordinal of the Handled event for (participant, id), or the trace size
/// when none is found.
std::uint64_t handled_ordinal(const Trace &trace, const std::string &participant, const MessageId &id) {
    for (const auto &ev : trace)
        if (ev.kind == TraceKind::Handled && ev.actor == participant && ev.id == id) return ev.ordinal;
    return trace.size();
}

bool accepts(const ParticipantConfig &p, ByteView payload) {
    return std::any_of(p.accepts.begin(), p.accepts.end(),
                       [&](const std::string &tag) { return has_prefix(payload, to_bytes(tag)); });
}

}  // namespace

bool PropertyReport::all_passed() const noexcept {
    return std::all_of(results.begin(), results.end(), [](const auto &r) { return r.passed; });
}

const PropertyResult *PropertyReport::find(const std::string &name) const noexcept {
    for (const auto &r : results)
        if (r.name == name) return &r;
    return nullptr;
}

std::vector<std::string> expected_receivers(const TopologyConfig &config, const std::string &publisher,
                                            ByteView payload, std::uint8_t ttl) {
    std::string origin;
    for (const auto &p : config.participants)
        if (p.name == publisher) origin = p.me;

    std::map<std::string, int> distance{{origin, 0}};
    std::deque<std::string> frontier{origin};
    while (!frontier.empty()) {
        const std::string me = frontier.front();
        frontier.pop_front();
        const int d = distance.at(me);
        if (d >= ttl) continue;
        for (const auto &r : config.reflectors) {
            std::string next;
            if (r.me_a == me && r.filter_ab.matches(payload)) next = r.me_b;
            if (r.me_b == me && r.filter_ba.matches(payload)) next = r.me_a;
            if (!next.empty() && !distance.contains(next)) {
                distance[next] = d + 1;
                frontier.push_back(next);
            }
        }
    }

    std::vector<std::string> out;
    for (const auto &p : config.participants)
        if (p.name != publisher && distance.contains(p.me) && accepts(p, payload)) out.push_back(p.name);
    std::sort(out.begin(), out.end());
    return out;
}

PropertyReport check_properties(const RunResult &run, const TopologyConfig &config, const Scenario &scenario) {
    PropertyReport report;
    const Trace &trace = run.trace;

    // id -> first Published record
    std::unordered_map<MessageId, const PublishedRecord *, MessageIdHash> published;
    for (const auto &rec : run.published) published.try_emplace(rec.envelope.id, &rec);

    {
        PropertyResult r;
        r.name = "loop_freedom";
        std::set<std::pair<std::string, MessageId>> relayed;
        for (const auto &ev : trace)
            if (ev.kind == TraceKind::Relayed && !relayed.insert({ev.me_id, ev.id}).second)
                fail(r, ev.ordinal, "id " + ev.id.hex() + " relayed twice in " + ev.me_id);
        report.results.push_back(std::move(r));
    }
    {
        PropertyResult r;
        r.name = "trace_causality";
        std::unordered_set<MessageId, MessageIdHash> seen;
        for (const auto &ev : trace) {
            if (ev.kind == TraceKind::Published) {
                seen.insert(ev.id);
            } else if (!ev.id.is_zero() && !seen.contains(ev.id)) {
                fail(r, ev.ordinal, std::string(to_string(ev.kind)) + " for unpublished id " + ev.id.hex());
            }
        }
        report.results.push_back(std::move(r));
    }
    {
        PropertyResult r;
        r.name = "effect_idempotency";
        for (const auto &[name, entries] : run.effects) {
            std::unordered_set<MessageId, MessageIdHash> ids;
            for (const auto &e : entries)
                if (!ids.insert(e.id).second)
                    fail(r, handled_ordinal(trace, name, e.id), name + " logged " + e.id.hex() + " twice");
        }
        report.results.push_back(std::move(r));
    }
    {
        PropertyResult r;
        r.name = "self_origin_silence";
        std::map<std::string, std::unordered_set<MessageId, MessageIdHash>> own;
        for (const auto &rec : run.published) own[rec.participant].insert(rec.envelope.id);
        for (const auto &[name, entries] : run.effects)
            for (const auto &e : entries)
                if (own[name].contains(e.id))
                    fail(r, handled_ordinal(trace, name, e.id), name + " reacted to its own " + e.id.hex());
        report.results.push_back(std::move(r));
    }
    {
        PropertyResult r;
        r.name = "ttl_monotonicity";
        for (const auto &ev : trace) {
            if (ev.id.is_zero() || ev.kind == TraceKind::Published) continue;
            auto it = published.find(ev.id);
            if (it != published.end() && ev.ttl > it->second->envelope.ttl)
                fail(r, ev.ordinal, "ttl of " + ev.id.hex() + " grew above its published value");
        }
        for (const auto &edge : run.lineage)
            if (edge.output.ttl >= edge.input.ttl)
                fail(r, trace.size(), "translation by " + edge.translator + " did not lower ttl");
        report.results.push_back(std::move(r));
    }
    {
        PropertyResult r;
        r.name = "translation_fidelity";
        std::map<std::string, Mapping> mappings;
        for (const auto &t : config.translators) mappings[t.name] = make_mapping(t.mapping, t.from_tag, t.to_tag);
        for (const auto &edge : run.lineage) {
            auto it = mappings.find(edge.translator);
            if (it == mappings.end()) {
                fail(r, trace.size(), "lineage from unknown translator " + edge.translator);
                continue;
            }
            if (edge.output.payload != it->second(edge.input.payload))
                fail(r, trace.size(), edge.translator + " produced a payload that differs from its mapping");
            if (edge.output.ttl + 1 != edge.input.ttl)
                fail(r, trace.size(), edge.translator + " output ttl is not input ttl - 1");
            if (edge.output.reply_to != edge.input.reply_to)
                fail(r, trace.size(), edge.translator + " dropped reply_to");
        }
        report.results.push_back(std::move(r));
    }
    {
        PropertyResult r;
        r.name = "content_opacity";
        for (const auto &[name, entries] : run.effects) {
            for (const auto &e : entries) {
                auto it = published.find(e.id);
                if (it == published.end())
                    fail(r, handled_ordinal(trace, name, e.id), name + " logged never-published " + e.id.hex());
                else if (it->second->envelope.payload != e.effect)
                    fail(r, handled_ordinal(trace, name, e.id), name + " saw altered payload for " + e.id.hex());
            }
        }
        report.results.push_back(std::move(r));
    }
    {
        PropertyResult r;
        r.name = "reachability";
        std::map<std::string, std::unordered_set<MessageId, MessageIdHash>> logged;
        for (const auto &[name, entries] : run.effects)
            for (const auto &e : entries) logged[name].insert(e.id);
        std::unordered_set<MessageId, MessageIdHash> done;
        for (const auto &rec : run.published) {
            if (!rec.scenario_origin || !done.insert(rec.envelope.id).second) continue;
            const auto expected =
                expected_receivers(config, rec.participant, rec.envelope.payload, rec.envelope.ttl);
            const std::set<std::string> want(expected.begin(), expected.end());
            for (const auto &p : config.participants) {
                if (p.name == rec.participant) continue;
                const bool got = logged[p.name].contains(rec.envelope.id);
                if (got != want.contains(p.name))
                    fail(r, handled_ordinal(trace, p.name, rec.envelope.id),
                         p.name + (got ? " logged unreachable " : " missed reachable ") + rec.envelope.id.hex());
            }
        }
        report.results.push_back(std::move(r));
    }
    {
        PropertyResult r;
        r.name = "expectations";
        for (const auto &e : scenario.expect) {
            auto it = run.effects.find(e.participant);
            const std::size_t got = it == run.effects.end() ? 0 : it->second.size();
            if (got != e.entries)
                fail(r, trace.size(), e.participant + " logged " + std::to_string(got) + " entries, expected " +
                                          std::to_string(e.entries));
        }
        report.results.push_back(std::move(r));
    }
    {
        PropertyResult r;
        r.name = "handler_faults";
        for (const auto &ev : trace)
            if (ev.kind == TraceKind::HandlerFault) fail(r, ev.ordinal, ev.actor + " handler raised");
        report.results.push_back(std::move(r));
    }
    return report;
}

nlohmann::json to_json(const PropertyReport &report) {
    nlohmann::json props = nlohmann::json::array();
    for (const auto &r : report.results)
        props.push_back(
            {{"name", r.name}, {"passed", r.passed}, {"counterexamples", r.counterexamples}, {"detail", r.detail}});
    return {{"all_passed", report.all_passed()}, {"properties", props}};
}

nlohmann::json to_json(const Metrics &m) {
    nlohmann::json per_me = nlohmann::json::object();
    for (const auto &[me, v] : m.per_me)
        per_me[me] = {{"relayed", v.relayed}, {"suppressed", v.suppressed}, {"delivered", v.delivered}};
    return {{"per_me", per_me},
            {"link_frames", m.link_frames},
            {"frames_per_endpoint", m.frames_per_endpoint},
            {"handler_faults", m.handler_faults},
            {"suppressed_total", m.suppressed_total},
            {"max_ttl_depth", m.max_ttl_depth},
            {"events", m.events}};
}

}  // namespace ipsme::harness
