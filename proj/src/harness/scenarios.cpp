#include "ipsme/harness/scenarios.hpp"

#include <algorithm>
#include <random>
#include <set>

#include "ipsme/harness/mappings.hpp"

namespace ipsme::harness {

namespace {

TopologyConfig line(std::size_t mes, std::uint64_t seed) {
    TopologyConfig c;
    c.seed = seed;
    for (std::size_t i = 0; i < mes; ++i) {
        const std::string me = "me" + std::to_string(i);
        c.mes.push_back(me);
        c.participants.push_back({"c" + std::to_string(i), me, Role::Consumer, {"DATA"}, ""});
    }
    c.participants.push_back({"pub", c.mes.front(), Role::Publisher, {}, ""});
    for (std::size_t i = 0; i + 1 < mes; ++i)
        c.reflectors.push_back({c.mes[i], c.mes[i + 1], Filter::match_all(), Filter::match_all()});
    // a long line needs a hop budget at least as long as the line
    c.default_ttl = static_cast<std::uint8_t>(std::clamp<std::size_t>(mes + 1, ipsme::default_ttl, 255));
    return c;
}

Scenario data_scenario(const std::string &name, std::size_t mes, std::size_t messages) {
    Scenario s;
    s.name = name;
    s.steps.emplace_back(PublishStep{"pub", "DATA|{i}", messages});
    for (std::size_t i = 0; i < mes; ++i) s.expect.push_back({"c" + std::to_string(i), messages});
    return s;
}

}  // namespace

TopologyConfig chain_config(std::size_t mes, std::size_t messages, std::uint64_t seed) {
    TopologyConfig c = line(mes, seed);
    c.scenarios.emplace("chain", data_scenario("chain", mes, messages));
    return c;
}

TopologyConfig ring_config(std::size_t mes, std::size_t messages, std::uint64_t seed) {
    TopologyConfig c = line(mes, seed);
    if (mes > 2) c.reflectors.push_back({c.mes.back(), c.mes.front(), Filter::match_all(), Filter::match_all()});
    c.scenarios.emplace("ring", data_scenario("ring", mes, messages));
    return c;
}

TopologyConfig teleport_config(std::size_t teleports, std::size_t fuzz, std::uint64_t seed) {
    TopologyConfig c;
    c.seed = seed;
    c.mes = {"doom", "mine"};
    c.participants = {
        {"doom_player", "doom", Role::Publisher, {"RPLY"}, ""},
        {"mine_fuzzer", "mine", Role::Publisher, {}, ""},
        {"mine_portal", "mine", Role::Responder, {"PORTAL"}, "RPLY"},
        {"mine_inventory", "mine", Role::Consumer, {"INVB"}, ""},
    };
    c.translators = {
        {"tprt_to_portal", "mine", "TPRT", "PORTAL", "retag"},
        {"inva_to_invb", "mine", "INVA", "INVB", "inventory"},
    };
    c.reflectors = {{"doom", "mine", Filter::prefix_any({"TPRT", "INVA"}), Filter::prefix_any({"RPLY"})}};

    Scenario s;
    s.name = "teleport";
    s.steps.emplace_back(PublishStep{"doom_player", "TPRT|location_{i}", teleports});
    for (const auto &[item, _] : item_table()) s.steps.emplace_back(PublishStep{"doom_player", "INVA|" + item, 1});
    s.expect = {
        {"doom_player", teleports},
        {"mine_portal", teleports},
        {"mine_inventory", item_table().size()},
    };
    Scenario fuzzed = s;
    fuzzed.name = "teleport_fuzz";
    fuzzed.steps.emplace_back(FuzzStep{"mine_fuzzer", fuzz, 64});
    c.scenarios.emplace(s.name, std::move(s));
    c.scenarios.emplace(fuzzed.name, std::move(fuzzed));
    return c;
}

TopologyConfig random_config(std::uint64_t seed, std::size_t max_mes, std::size_t messages) {
    static const std::vector<std::string> tags{"AAA", "BBB", "CCC", "DDD"};
    std::mt19937_64 rng(seed);
    auto uniform = [&](std::size_t lo, std::size_t hi) {
        return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
    };
    auto random_filter = [&]() {
        if (uniform(0, 4) == 0) return Filter::match_all();
        std::vector<std::string> chosen;
        for (const auto &t : tags)
            if (uniform(0, 1)) chosen.push_back(t);
        return Filter::prefix_any(chosen);
    };

    TopologyConfig c;
    c.seed = seed;
    const std::size_t n = uniform(2, std::max<std::size_t>(2, max_mes));
    for (std::size_t i = 0; i < n; ++i) {
        const std::string me = "m" + std::to_string(i);
        c.mes.push_back(me);
        c.participants.push_back({"c" + std::to_string(i), me, Role::Consumer, tags, ""});
    }
    std::set<std::pair<std::size_t, std::size_t>> edges;
    const std::size_t edge_count = uniform(n - 1, n * (n - 1) / 2);
    while (edges.size() < edge_count) {
        std::size_t a = uniform(0, n - 1), b = uniform(0, n - 1);
        if (a == b) continue;
        if (a > b) std::swap(a, b);
        if (edges.insert({a, b}).second)
            c.reflectors.push_back({c.mes[a], c.mes[b], random_filter(), random_filter()});
    }
    const std::size_t publishers = uniform(1, std::min<std::size_t>(3, n));
    Scenario s;
    s.name = "random";
    for (std::size_t i = 0; i < publishers; ++i) {
        const std::string name = "p" + std::to_string(i);
        c.participants.push_back({name, c.mes[uniform(0, n - 1)], Role::Publisher, {}, ""});
    }
    for (std::size_t i = 0; i < messages; ++i) {
        const std::string &tag = tags[uniform(0, tags.size() - 1)];
        const std::string publisher = "p" + std::to_string(uniform(0, publishers - 1));
        s.steps.emplace_back(PublishStep{publisher, tag + "|" + std::to_string(i), 1});
    }
    c.scenarios.emplace(s.name, std::move(s));
    return c;
}

}  // namespace ipsme::harness
