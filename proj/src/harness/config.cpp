#include "ipsme/harness/config.hpp"

#include <fstream>
#include <set>

#include "ipsme/error.hpp"
#include "ipsme/harness/mappings.hpp"
#include "ipsme/trace.hpp"

namespace ipsme::harness {

using nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string &where, const std::string &what) {
    throw Error(ErrorCode::ConfigError, where + ": " + what);
}

std::string at(const std::string &base, std::size_t i) {
    return base + "[" + std::to_string(i) + "]";
}

const json &field(const json &obj, const std::string &key, const std::string &where) {
    if (!obj.is_object()) config_error(where, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) config_error(where + "." + key, "missing");
    return *it;
}

std::string get_string(const json &obj, const std::string &key, const std::string &where) {
    const auto &v = field(obj, key, where);
    if (!v.is_string()) config_error(where + "." + key, "expected a string");
    return v.get<std::string>();
}

std::string get_string_or(const json &obj, const std::string &key, const std::string &where, std::string fallback) {
    if (!obj.contains(key)) return fallback;
    return get_string(obj, key, where);
}

std::uint64_t get_uint_or(const json &obj, const std::string &key, const std::string &where, std::uint64_t fallback) {
    if (!obj.contains(key)) return fallback;
    const auto &v = obj.at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
        config_error(where + "." + key, "expected a non-negative integer");
    return v.get<std::uint64_t>();
}

std::vector<std::string> get_strings_or(const json &obj, const std::string &key, const std::string &where) {
    std::vector<std::string> out;
    if (!obj.contains(key)) return out;
    const auto &v = obj.at(key);
    if (!v.is_array()) config_error(where + "." + key, "expected an array of strings");
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_string()) config_error(at(where + "." + key, i), "expected a string");
        out.push_back(v[i].get<std::string>());
    }
    return out;
}

const json &get_array_or_empty(const json &obj, const std::string &key, const std::string &where) {
    static const json empty = json::array();
    if (!obj.contains(key)) return empty;
    const auto &v = obj.at(key);
    if (!v.is_array()) config_error(where + key, "expected an array");
    return v;
}

Filter parse_filter(const json &obj, const std::string &key, const std::string &where) {
    if (!obj.contains(key)) return Filter::match_all();
    const auto &v = obj.at(key);
    if (v.is_string() && v.get<std::string>() == "MatchAll") return Filter::match_all();
    if (v.is_object() && v.contains("prefix_any"))
        return Filter::prefix_any(get_strings_or(v, "prefix_any", where + "." + key));
    config_error(where + "." + key, "expected \"MatchAll\" or {\"prefix_any\": [...]}");
}

json filter_to_json(const Filter &f) {
    if (f.mode == FilterMode::MatchAll) return "MatchAll";
    json prefixes = json::array();
    for (const auto &p : f.prefixes) prefixes.push_back(ipsme::to_string(ByteView(p)));
    return json{{"prefix_any", prefixes}};
}

Role parse_role(const std::string &text, const std::string &where) {
    if (text == "publisher") return Role::Publisher;
    if (text == "consumer") return Role::Consumer;
    if (text == "responder") return Role::Responder;
    config_error(where, "unknown role '" + text + "'");
}

Scenario parse_scenario(const std::string &name, const json &doc, const std::string &where) {
    Scenario s;
    s.name = name;
    const auto &steps = get_array_or_empty(doc, "steps", where + ".");
    for (std::size_t i = 0; i < steps.size(); ++i) {
        const std::string w = at(where + ".steps", i);
        const std::string type = get_string_or(steps[i], "type", w, "publish");
        if (type == "publish") {
            PublishStep p;
            p.publisher = get_string(steps[i], "publisher", w);
            p.payload = get_string(steps[i], "payload", w);
            p.count = get_uint_or(steps[i], "count", w, 1);
            s.steps.emplace_back(std::move(p));
        } else if (type == "fuzz") {
            FuzzStep f;
            f.publisher = get_string(steps[i], "publisher", w);
            f.count = get_uint_or(steps[i], "count", w, 0);
            f.max_len = get_uint_or(steps[i], "max_len", w, 64);
            s.steps.emplace_back(std::move(f));
        } else {
            config_error(w + ".type", "unknown step type '" + type + "'");
        }
    }
    const auto &expect = get_array_or_empty(doc, "expect", where + ".");
    for (std::size_t i = 0; i < expect.size(); ++i) {
        const std::string w = at(where + ".expect", i);
        s.expect.push_back({get_string(expect[i], "participant", w), get_uint_or(expect[i], "entries", w, 0)});
    }
    return s;
}

}  // namespace

std::string_view to_string(Role role) noexcept {
    switch (role) {
        case Role::Publisher: return "publisher";
        case Role::Consumer: return "consumer";
        case Role::Responder: return "responder";
    }
    return "unknown";
}

void validate(const TopologyConfig &config) {
    if (config.mes.empty()) config_error("mes", "at least one ME is required");
    std::set<std::string> mes;
    for (std::size_t i = 0; i < config.mes.size(); ++i) {
        if (config.mes[i].empty()) config_error(at("mes", i), "empty ME id");
        if (!mes.insert(config.mes[i]).second) config_error(at("mes", i), "duplicate ME id '" + config.mes[i] + "'");
    }
    auto check_me = [&](const std::string &me, const std::string &where) {
        if (!mes.contains(me)) config_error(where, "unknown ME '" + me + "'");
    };

    std::set<std::string> names;
    auto check_name = [&](const std::string &name, const std::string &where) {
        if (name.empty()) config_error(where, "empty name");
        if (name == broker_actor) config_error(where, "'broker' is reserved");
        if (!names.insert(name).second) config_error(where, "duplicate name '" + name + "'");
    };

    for (std::size_t i = 0; i < config.participants.size(); ++i) {
        const auto &p = config.participants[i];
        const std::string w = at("participants", i);
        check_name(p.name, w + ".name");
        check_me(p.me, w + ".me");
        for (std::size_t j = 0; j < p.accepts.size(); ++j)
            if (p.accepts[j].empty()) config_error(at(w + ".accepts", j), "empty tag");
        if (p.role != Role::Publisher && p.accepts.empty())
            config_error(w + ".accepts", std::string(to_string(p.role)) + " must accept at least one tag");
        if (p.role == Role::Responder && p.reply_tag.empty()) config_error(w + ".reply_tag", "responder needs a reply tag");
    }
    for (std::size_t i = 0; i < config.translators.size(); ++i) {
        const auto &t = config.translators[i];
        const std::string w = at("translators", i);
        check_name(t.name, w + ".name");
        check_me(t.me, w + ".me");
        if (t.from_tag.empty()) config_error(w + ".from_tag", "empty tag");
        if (t.to_tag.empty()) config_error(w + ".to_tag", "empty tag");
        if (!is_known_mapping(t.mapping)) config_error(w + ".mapping", "unknown mapping '" + t.mapping + "'");
    }
    for (std::size_t i = 0; i < config.reflectors.size(); ++i) {
        const auto &r = config.reflectors[i];
        const std::string w = at("reflectors", i);
        check_me(r.me_a, w + ".me_a");
        check_me(r.me_b, w + ".me_b");
        if (r.me_a == r.me_b) config_error(w, "reflector must connect two distinct MEs");
    }
    if (config.dedup_capacity == 0) config_error("dedup_capacity", "must be positive");
    if (config.event_budget == 0) config_error("event_budget", "must be positive");

    std::set<std::string> participants;
    for (const auto &p : config.participants) participants.insert(p.name);
    for (const auto &[name, s] : config.scenarios) {
        const std::string w = "scenarios." + name;
        for (std::size_t i = 0; i < s.steps.size(); ++i) {
            const std::string &publisher =
                std::visit([](const auto &step) -> const std::string & { return step.publisher; }, s.steps[i]);
            if (!participants.contains(publisher))
                config_error(at(w + ".steps", i) + ".publisher", "unknown participant '" + publisher + "'");
        }
        for (std::size_t i = 0; i < s.expect.size(); ++i)
            if (!participants.contains(s.expect[i].participant))
                config_error(at(w + ".expect", i) + ".participant",
                             "unknown participant '" + s.expect[i].participant + "'");
    }
}

TopologyConfig parse_config(const json &doc) {
    if (!doc.is_object()) config_error("<root>", "expected an object");
    TopologyConfig c;
    c.mes = get_strings_or(doc, "mes", "");

    const auto &participants = get_array_or_empty(doc, "participants", "");
    for (std::size_t i = 0; i < participants.size(); ++i) {
        const std::string w = at("participants", i);
        ParticipantConfig p;
        p.name = get_string(participants[i], "name", w);
        p.me = get_string(participants[i], "me", w);
        p.role = parse_role(get_string_or(participants[i], "role", w, "publisher"), w + ".role");
        p.accepts = get_strings_or(participants[i], "accepts", w);
        p.reply_tag = get_string_or(participants[i], "reply_tag", w, "");
        c.participants.push_back(std::move(p));
    }
    const auto &translators = get_array_or_empty(doc, "translators", "");
    for (std::size_t i = 0; i < translators.size(); ++i) {
        const std::string w = at("translators", i);
        TranslatorConfig t;
        t.name = get_string(translators[i], "name", w);
        t.me = get_string(translators[i], "me", w);
        t.from_tag = get_string(translators[i], "from_tag", w);
        t.to_tag = get_string(translators[i], "to_tag", w);
        t.mapping = get_string_or(translators[i], "mapping", w, "retag");
        c.translators.push_back(std::move(t));
    }
    const auto &reflectors = get_array_or_empty(doc, "reflectors", "");
    for (std::size_t i = 0; i < reflectors.size(); ++i) {
        const std::string w = at("reflectors", i);
        ReflectorConfig r;
        r.me_a = get_string(reflectors[i], "me_a", w);
        r.me_b = get_string(reflectors[i], "me_b", w);
        r.filter_ab = parse_filter(reflectors[i], "filter_ab", w);
        r.filter_ba = parse_filter(reflectors[i], "filter_ba", w);
        c.reflectors.push_back(std::move(r));
    }
    c.dedup_capacity = get_uint_or(doc, "dedup_capacity", "", default_dedup_capacity);
    const auto ttl = get_uint_or(doc, "default_ttl", "", ipsme::default_ttl);
    if (ttl > 255) config_error("default_ttl", "must be in 0..255");
    c.default_ttl = static_cast<std::uint8_t>(ttl);
    c.seed = get_uint_or(doc, "seed", "", 0);
    c.event_budget = get_uint_or(doc, "event_budget", "", c.event_budget);
    const std::string link = get_string_or(doc, "link", "", "memory");
    if (link == "memory")
        c.link = LinkKind::Memory;
    else if (link == "tcp")
        c.link = LinkKind::Tcp;
    else
        config_error("link", "expected \"memory\" or \"tcp\"");

    if (doc.contains("scenarios")) {
        const auto &scenarios = doc.at("scenarios");
        if (!scenarios.is_object()) config_error("scenarios", "expected an object keyed by scenario name");
        for (const auto &[name, s] : scenarios.items())
            c.scenarios.emplace(name, parse_scenario(name, s, "scenarios." + name));
    }
    validate(c);
    return c;
}

TopologyConfig load_config(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ConfigError, path.string() + ": cannot open");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error &e) {
        throw Error(ErrorCode::ConfigError, path.string() + ": " + e.what());
    }
    return parse_config(doc);
}

json to_json(const TopologyConfig &c) {
    json doc;
    doc["mes"] = c.mes;
    doc["participants"] = json::array();
    for (const auto &p : c.participants) {
        json j{{"name", p.name}, {"me", p.me}, {"role", to_string(p.role)}, {"accepts", p.accepts}};
        if (!p.reply_tag.empty()) j["reply_tag"] = p.reply_tag;
        doc["participants"].push_back(std::move(j));
    }
    doc["translators"] = json::array();
    for (const auto &t : c.translators)
        doc["translators"].push_back(
            {{"name", t.name}, {"me", t.me}, {"from_tag", t.from_tag}, {"to_tag", t.to_tag}, {"mapping", t.mapping}});
    doc["reflectors"] = json::array();
    for (const auto &r : c.reflectors)
        doc["reflectors"].push_back({{"me_a", r.me_a},
                                     {"me_b", r.me_b},
                                     {"filter_ab", filter_to_json(r.filter_ab)},
                                     {"filter_ba", filter_to_json(r.filter_ba)}});
    doc["dedup_capacity"] = c.dedup_capacity;
    doc["default_ttl"] = c.default_ttl;
    doc["seed"] = c.seed;
    doc["event_budget"] = c.event_budget;
    doc["link"] = c.link == LinkKind::Memory ? "memory" : "tcp";
    doc["scenarios"] = json::object();
    for (const auto &[name, s] : c.scenarios) {
        json steps = json::array();
        for (const auto &step : s.steps) {
            if (const auto *p = std::get_if<PublishStep>(&step))
                steps.push_back({{"type", "publish"}, {"publisher", p->publisher}, {"payload", p->payload}, {"count", p->count}});
            else if (const auto *f = std::get_if<FuzzStep>(&step))
                steps.push_back({{"type", "fuzz"}, {"publisher", f->publisher}, {"count", f->count}, {"max_len", f->max_len}});
        }
        json expect = json::array();
        for (const auto &e : s.expect) expect.push_back({{"participant", e.participant}, {"entries", e.entries}});
        doc["scenarios"][name] = {{"steps", steps}, {"expect", expect}};
    }
    return doc;
}

}  // namespace ipsme::harness
