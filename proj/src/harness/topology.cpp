#include "ipsme/harness/topology.hpp"

#include <algorithm>
#include <cstdio>
#include <random>
#include <set>
#include <unordered_set>

#include "ipsme/error.hpp"
#include "ipsme/harness/mappings.hpp"

namespace ipsme::harness {

namespace {

std::string expand(const std::string &pattern, std::size_t index) {
    std::string out = pattern;
    const std::string needle = "{i}";
    for (auto pos = out.find(needle); pos != std::string::npos; pos = out.find(needle, pos)) {
        out.replace(pos, needle.size(), std::to_string(index));
        pos += 1;
    }
    return out;
}

// Fuzz payloads use their own stream so they do not perturb id generation.
constexpr std::uint64_t fuzz_seed_salt = 0xF0220F0220F0220FULL;

}  // namespace

std::string serialize(const EffectLogs &logs) {
    std::string out;
    for (const auto &[name, entries] : logs) {
        for (const auto &e : entries) {
            out += name;
            out += '\t';
            out += e.id.hex();
            out += '\t';
            for (auto b : e.effect) {
                if (b >= 0x20 && b < 0x7F && b != '\\') {
                    out.push_back(static_cast<char>(b));
                } else {
                    char buf[5];
                    std::snprintf(buf, sizeof buf, "\\x%02x", b);
                    out += buf;
                }
            }
            out += '\n';
        }
    }
    return out;
}

Metrics report_metrics(const Trace &trace) {
    Metrics m;
    m.events = trace.size();
    int max_published_ttl = -1;
    int min_ttl = 256;
    for (const auto &ev : trace) {
        const bool from_broker = ev.actor == broker_actor;
        switch (ev.kind) {
            case TraceKind::Relayed:
                ++m.per_me[ev.me_id].relayed;
                break;
            case TraceKind::SuppressedDuplicate:
                ++m.suppressed_total;
                if (from_broker) ++m.per_me[ev.me_id].suppressed;
                break;
            case TraceKind::Delivered:
                ++m.per_me[ev.me_id].delivered;
                break;
            case TraceKind::Exported:
                ++m.link_frames;
                ++m.frames_per_endpoint[ev.actor];
                break;
            case TraceKind::HandlerFault:
                ++m.handler_faults;
                break;
            case TraceKind::Published:
                max_published_ttl = std::max<int>(max_published_ttl, ev.ttl);
                break;
            default:
                break;
        }
        if (!ev.id.is_zero()) min_ttl = std::min<int>(min_ttl, ev.ttl);
    }
    if (max_published_ttl >= 0 && min_ttl <= max_published_ttl)
        m.max_ttl_depth = static_cast<std::uint64_t>(max_published_ttl - min_ttl);
    return m;
}

Topology::Topology(TopologyConfig config, BuildOptions options)
    : _config(std::move(config)), _options(options) {}

Topology::~Topology() {
    if (_scheduler) _scheduler->shutdown();
    _pairs.clear();
    _participants.clear();
}

std::unique_ptr<Topology> Topology::build(const TopologyConfig &config, BuildOptions options) {
    validate(config);
    if (config.link == LinkKind::Tcp && options.mode == Mode::Deterministic)
        throw Error(ErrorCode::ConfigError, "link: tcp links need concurrent mode");

    std::unique_ptr<Topology> t(new Topology(config, options));
    if (options.mode == Mode::Deterministic)
        t->_scheduler = std::make_unique<DeterministicScheduler>();
    else
        t->_scheduler = std::make_unique<ThreadPoolScheduler>();
    t->_trace = std::make_shared<TraceRecorder>(config.event_budget);
    t->_ids = std::make_unique<IdSource>(config.seed);
    t->_frames_in_flight = std::make_shared<std::atomic<std::int64_t>>(0);

    Topology *self = t.get();
    for (const auto &id : config.mes) {
        BrokerOptions bo;
        bo.dedup_capacity = config.dedup_capacity;
        bo.dedup_enabled = options.broker_dedup;
        bo.trace = t->_trace;
        t->_mes.emplace(id, std::make_shared<MessagingEnvironment>(id, bo));
    }

    auto participant_options = [&](const std::string &name) {
        ParticipantOptions po;
        po.dedup_capacity = config.dedup_capacity;
        po.trace = t->_trace;
        po.dispatch = t->_scheduler->make_strand(name);
        po.on_send = [self](const Participant &p, const Envelope &e) {
            std::lock_guard lk(self->_log_mx);
            self->_published.push_back({e, p.name(), p.me().id(), false});
        };
        return po;
    };

    for (const auto &pc : config.participants) {
        auto p = Participant::attach(pc.name, t->_mes.at(pc.me), participant_options(pc.name));
        for (const auto &tag : pc.accepts) {
            p->add_handler(prefix_handler(tag, [self, name = pc.name, tag, role = pc.role, reply_tag = pc.reply_tag,
                                                ttl = config.default_ttl](const Envelope &e) {
                self->add_effect(name, e);
                if (role != Role::Responder) return std::vector<Envelope>{};
                Bytes body = to_bytes(reply_tag);
                body.insert(body.end(), e.payload.begin() + static_cast<std::ptrdiff_t>(tag.size()), e.payload.end());
                return std::vector<Envelope>{derive_reply(e, std::move(body), *self->_ids, ttl)};
            }));
        }
        t->_participants.emplace(pc.name, std::move(p));
    }

    for (const auto &tc : config.translators) {
        TranslatorOptions to;
        to.ids = t->_ids.get();
        to.on_translate = [self, name = tc.name](const Envelope &in, const Envelope &out) {
            std::lock_guard lk(self->_log_mx);
            self->_lineage.push_back({name, in, out});
        };
        auto p = make_translator(tc.name, tc.from_tag, make_mapping(tc.mapping, tc.from_tag, tc.to_tag),
                                 t->_mes.at(tc.me), std::move(to), participant_options(tc.name));
        t->_participants.emplace(tc.name, std::move(p));
    }

    const LinkTransport transport = config.link == LinkKind::Tcp ? LinkTransport(make_loopback_tcp)
                                                                 : LinkTransport(make_memory_pipe);
    for (const auto &rc : config.reflectors) {
        ReflectorOptions ro;
        ro.dedup_capacity = config.dedup_capacity;
        ro.dedup_enabled = options.reflector_dedup;
        ro.trace = t->_trace;
        ro.dispatch_a = t->_scheduler->make_strand(rc.me_a + "~" + rc.me_b);
        ro.dispatch_b = t->_scheduler->make_strand(rc.me_b + "~" + rc.me_a);
        ro.frames_in_flight = t->_frames_in_flight;
        t->_pairs.push_back(connect_pair(t->_mes.at(rc.me_a), t->_mes.at(rc.me_b), rc.filter_ab, rc.filter_ba,
                                         transport, std::move(ro)));
    }
    return t;
}

std::shared_ptr<MessagingEnvironment> Topology::me(const std::string &id) const {
    auto it = _mes.find(id);
    if (it == _mes.end()) throw Error(ErrorCode::InvalidArgument, "no ME '" + id + "'");
    return it->second;
}

std::shared_ptr<Participant> Topology::participant(const std::string &name) const {
    auto it = _participants.find(name);
    if (it == _participants.end()) throw Error(ErrorCode::InvalidArgument, "no participant '" + name + "'");
    return it->second;
}

void Topology::add_effect(const std::string &participant, const Envelope &e) {
    std::lock_guard lk(_log_mx);
    _effects[participant].push_back({e.id, e.payload});
}

RunResult Topology::run(const Scenario &scenario, std::uint64_t duplicate_factor) {
    if (_ran) throw Error(ErrorCode::InvalidArgument, "topology already ran a scenario; build a fresh one");
    if (duplicate_factor == 0) throw Error(ErrorCode::InvalidArgument, "duplicate factor must be at least 1");
    _ran = true;

    std::vector<Bytes> known_tags;
    for (const auto &pc : _config.participants)
        for (const auto &tag : pc.accepts) known_tags.push_back(to_bytes(tag));
    for (const auto &tc : _config.translators) known_tags.push_back(to_bytes(tc.from_tag));
    auto understood = [&](const Bytes &payload) {
        return std::any_of(known_tags.begin(), known_tags.end(),
                           [&](const Bytes &tag) { return has_prefix(payload, tag); });
    };

    std::mt19937_64 fuzz_rng(_config.seed ^ fuzz_seed_salt);
    std::vector<std::pair<std::shared_ptr<Participant>, Envelope>> plan;
    for (const auto &step : scenario.steps) {
        if (const auto *p = std::get_if<PublishStep>(&step)) {
            auto publisher = participant(p->publisher);
            for (std::size_t i = 0; i < p->count; ++i)
                plan.emplace_back(publisher, new_envelope(to_bytes(expand(p->payload, i)), *_ids, _config.default_ttl));
        } else if (const auto *f = std::get_if<FuzzStep>(&step)) {
            auto publisher = participant(f->publisher);
            std::uniform_int_distribution<std::size_t> len_dist(0, f->max_len);
            std::uniform_int_distribution<int> byte_dist(0, 255);
            for (std::size_t i = 0; i < f->count; ++i) {
                Bytes payload;
                do {
                    payload.resize(len_dist(fuzz_rng));
                    for (auto &b : payload) b = static_cast<std::uint8_t>(byte_dist(fuzz_rng));
                } while (understood(payload));
                plan.emplace_back(publisher, new_envelope(std::move(payload), *_ids, _config.default_ttl));
            }
        }
    }

    std::unordered_set<MessageId, MessageIdHash> scenario_ids;
    std::map<std::string, Dispatch> publish_strands;
    for (auto &[publisher, envelope] : plan) {
        scenario_ids.insert(envelope.id);
        auto &strand = publish_strands[publisher->name()];
        if (!strand) strand = _scheduler->make_strand(publisher->name() + "/script");
        strand([publisher, envelope, duplicate_factor] {
            for (std::uint64_t r = 0; r < duplicate_factor; ++r) publisher->send(envelope);
        });
    }

    QuiescenceProbe probe;
    probe.should_abort = [trace = _trace] { return trace->exhausted(); };
    probe.externally_idle = [frames = _frames_in_flight] { return frames->load() == 0; };
    probe.event_count = [trace = _trace] { return trace->count(); };
    if (!_scheduler->run_until_quiescent(probe, _options.wall_limit)) {
        _scheduler->shutdown();
        throw Error(ErrorCode::Timeout, "scenario '" + scenario.name + "' did not reach quiescence within " +
                                            std::to_string(_config.event_budget) + " events");
    }

    RunResult result;
    result.duplicate_factor = duplicate_factor;
    result.trace = _trace->snapshot();
    result.metrics = report_metrics(result.trace);
    std::lock_guard lk(_log_mx);
    result.effects = _effects;
    for (const auto &pc : _config.participants) result.effects.try_emplace(pc.name);
    result.lineage = _lineage;
    result.published = _published;
    for (auto &rec : result.published) rec.scenario_origin = scenario_ids.contains(rec.envelope.id);
    return result;
}

RunResult run_scenario(Topology &topology, const Scenario &scenario, std::uint64_t duplicate_factor) {
    return topology.run(scenario, duplicate_factor);
}

}  // namespace ipsme::harness
