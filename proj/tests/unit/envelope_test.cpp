#include <random>
#include <set>

#include "doctest.h"

#include "ipsme/envelope.hpp"
#include "ipsme/error.hpp"

using namespace ipsme;

namespace {

ErrorCode decode_error(const Bytes &frame) {
    try {
        decode(frame);
    } catch (const Error &e) {
        return e.code();
    }
    FAIL("decode accepted a malformed frame");
    return ErrorCode::InvalidArgument;
}

Envelope random_envelope(std::mt19937_64 &rng, IdSource &ids) {
    std::uniform_int_distribution<int> byte(0, 255);
    std::uniform_int_distribution<std::size_t> len(0, 300);
    Envelope e;
    e.id = ids.next();
    if (rng() & 1) e.reply_to = ids.next();
    e.ttl = static_cast<std::uint8_t>(byte(rng));
    e.payload.resize(len(rng));
    for (auto &b : e.payload) b = static_cast<std::uint8_t>(byte(rng));
    return e;
}

}  // namespace

TEST_CASE("new_envelope fills defaults") {
    IdSource ids(7);
    auto e = new_envelope({}, ids);
    CHECK_FALSE(e.id.is_zero());
    CHECK(e.reply_to.is_zero());
    CHECK(e.ttl == 16);
    CHECK(e.payload.empty());

    auto hello = new_envelope(to_bytes("HELLO"), ids);
    CHECK(hello.payload == Bytes{'H', 'E', 'L', 'L', 'O'});
}

TEST_CASE("one seed yields 10^4 distinct ids, and the same sequence twice") {
    IdSource a(42), b(42);
    std::set<MessageId> seen;
    for (int i = 0; i < 10000; ++i) {
        auto id = a.next();
        CHECK_FALSE(id.is_zero());
        REQUIRE(id == b.next());
        seen.insert(id);
    }
    CHECK(seen.size() == 10000);
}

TEST_CASE("derive_reply links one level back") {
    IdSource ids(1);
    auto request = new_envelope(to_bytes("REQ"), ids);
    request.ttl = 3;
    auto reply = derive_reply(request, to_bytes("ACK"), ids);
    CHECK(reply.reply_to == request.id);
    CHECK(reply.id != request.id);
    CHECK(reply.ttl == 16);

    auto reply2 = derive_reply(reply, to_bytes("ACK2"), ids);
    CHECK(reply2.reply_to == reply.id);
    CHECK(reply2.reply_to != request.id);

    Envelope bad;
    CHECK_THROWS_AS(derive_reply(bad, {}, ids), Error);
}

TEST_CASE("derive_transformed spends one hop and keeps reply_to") {
    IdSource ids(2);
    auto original = new_envelope(to_bytes("P|x"), ids);
    original.reply_to = ids.next();
    auto derived = derive_transformed(original, to_bytes("Q|x"), ids);
    CHECK(derived.ttl == 15);
    CHECK(derived.reply_to == original.reply_to);
    CHECK(derived.id != original.id);

    // loop until the budget runs out
    Envelope current = new_envelope(to_bytes("P"), ids);
    int derivations = 0;
    for (;;) {
        try {
            current = derive_transformed(current, current.payload, ids);
            ++derivations;
        } catch (const Error &e) {
            CHECK(e.code() == ErrorCode::TtlExhausted);
            break;
        }
    }
    CHECK(derivations == 16);
}

TEST_CASE("encode lays out the header bit-exact") {
    std::array<std::uint8_t, 16> id{}, reply{};
    for (std::uint8_t i = 0; i < 16; ++i) {
        id[i] = static_cast<std::uint8_t>(i + 1);
        reply[i] = 0xAA;
    }
    Envelope e{MessageId(id), MessageId(reply), 7, to_bytes("ab")};
    Bytes expected{0x49, 0x50, 0x53, 0x4D, 0x01, 0x01, 0x07, 0x00};
    expected.insert(expected.end(), id.begin(), id.end());
    expected.insert(expected.end(), reply.begin(), reply.end());
    expected.insert(expected.end(), {0x00, 0x00, 0x00, 0x02, 0x61, 0x62});
    CHECK(encode(e) == expected);

    SUBCASE("empty payload, no reply") {
        Envelope bare{MessageId(id), MessageId{}, 16, {}};
        auto bytes = encode(bare);
        REQUIRE(bytes.size() == 44);
        CHECK(Bytes(bytes.begin(), bytes.begin() + 4) == Bytes{0x49, 0x50, 0x53, 0x4D});
        CHECK(bytes[5] == 0x00);
        CHECK(bytes[6] == 16);
        CHECK(std::all_of(bytes.begin() + 24, bytes.begin() + 40, [](auto b) { return b == 0; }));
    }
    SUBCASE("payload length field") {
        Envelope five{MessageId(id), MessageId{}, 16, to_bytes("HELLO")};
        auto bytes = encode(five);
        REQUIRE(bytes.size() == 49);
        CHECK(Bytes(bytes.begin() + 40, bytes.begin() + 44) == Bytes{0, 0, 0, 5});
    }
}

TEST_CASE("decode rejects every malformed class") {
    IdSource ids(3);
    const Bytes good = encode(new_envelope(to_bytes("HELLO"), ids));

    CHECK(decode_error(Bytes(good.begin(), good.begin() + 43)) == ErrorCode::Truncated);

    Bytes short_body = encode(new_envelope(to_bytes("0123456789"), ids));
    short_body.resize(44 + 5);
    CHECK(decode_error(short_body) == ErrorCode::Truncated);

    Bytes zero = good;
    std::fill(zero.begin() + 8, zero.begin() + 24, 0);
    CHECK(decode_error(zero) == ErrorCode::ZeroId);

    Bytes magic = good;
    magic[3] = 'X';
    CHECK(decode_error(magic) == ErrorCode::BadMagic);

    Bytes version = good;
    version[4] = 0x02;
    CHECK(decode_error(version) == ErrorCode::BadVersion);
}

TEST_CASE("round trip holds for fuzzed envelopes") {
    std::mt19937_64 rng(99);
    IdSource ids(99);
    for (int i = 0; i < 2000; ++i) {
        const Envelope e = random_envelope(rng, ids);
        const Bytes once = encode(e);
        REQUIRE(once.size() == 44 + e.payload.size());
        CHECK(encode(e) == once);
        REQUIRE(decode(once) == e);
    }
}
