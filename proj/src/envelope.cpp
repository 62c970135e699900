#include "ipsme/envelope.hpp"

#include <algorithm>
#include <limits>

#include "ipsme/error.hpp"

namespace ipsme {

Bytes to_bytes(std::string_view text) {
    return Bytes(text.begin(), text.end());
}

std::string to_string(ByteView bytes) {
    return std::string(bytes.begin(), bytes.end());
}

bool MessageId::is_zero() const noexcept {
    return std::all_of(_raw.begin(), _raw.end(), [](std::uint8_t b) { return b == 0; });
}

std::string MessageId::hex() const {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(size * 2);
    for (auto b : _raw) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0x0F]);
    }
    return out;
}

std::size_t MessageIdHash::operator()(const MessageId &id) const noexcept {
    // ids are uniformly random, so folding the two halves is enough
    std::uint64_t lo = 0, hi = 0;
    const auto &r = id.raw();
    for (std::size_t i = 0; i < 8; ++i) {
        lo = (lo << 8) | r[i];
        hi = (hi << 8) | r[i + 8];
    }
    return static_cast<std::size_t>(lo ^ (hi * 0x9E3779B97F4A7C15ULL));
}

IdSource::IdSource(std::uint64_t seed) : _rng(seed) {}

MessageId IdSource::next() {
    std::lock_guard lk(_mx);
    for (;;) {
        std::array<std::uint8_t, MessageId::size> raw{};
        std::uint64_t a = _rng(), b = _rng();
        for (std::size_t i = 0; i < 8; ++i) {
            raw[i] = static_cast<std::uint8_t>(a >> (56 - 8 * i));
            raw[i + 8] = static_cast<std::uint8_t>(b >> (56 - 8 * i));
        }
        MessageId id(raw);
        if (!id.is_zero()) return id;
    }
}

Envelope new_envelope(Bytes payload, IdSource &ids, std::uint8_t ttl) {
    return Envelope{ids.next(), MessageId{}, ttl, std::move(payload)};
}

Envelope derive_reply(const Envelope &original, Bytes payload, IdSource &ids, std::uint8_t ttl) {
    if (original.id.is_zero()) throw Error(ErrorCode::ZeroId, "cannot reply to an envelope without id");
    return Envelope{ids.next(), original.id, ttl, std::move(payload)};
}

Envelope derive_transformed(const Envelope &original, Bytes new_payload, IdSource &ids) {
    if (original.ttl == 0)
        throw Error(ErrorCode::TtlExhausted, "envelope " + original.id.hex() + " has no hops left");
    return Envelope{ids.next(), original.reply_to, static_cast<std::uint8_t>(original.ttl - 1),
                    std::move(new_payload)};
}

namespace {

void put_u32(Bytes &out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

std::uint32_t get_u32(ByteView in) {
    return (std::uint32_t{in[0]} << 24) | (std::uint32_t{in[1]} << 16) |
           (std::uint32_t{in[2]} << 8) | std::uint32_t{in[3]};
}

MessageId get_id(ByteView in) {
    std::array<std::uint8_t, MessageId::size> raw{};
    std::copy_n(in.begin(), MessageId::size, raw.begin());
    return MessageId(raw);
}

}  // namespace

Bytes encode(const Envelope &e) {
    if (e.payload.size() > std::numeric_limits<std::uint32_t>::max())
        throw Error(ErrorCode::InvalidArgument, "payload exceeds 2^32-1 bytes");
    Bytes out;
    out.reserve(wire::header_size + e.payload.size());
    out.insert(out.end(), wire::magic.begin(), wire::magic.end());
    out.push_back(wire::version);
    out.push_back(e.has_reply_to() ? wire::flag_reply_to : 0x00);
    out.push_back(e.ttl);
    out.push_back(0x00);
    out.insert(out.end(), e.id.raw().begin(), e.id.raw().end());
    out.insert(out.end(), e.reply_to.raw().begin(), e.reply_to.raw().end());
    put_u32(out, static_cast<std::uint32_t>(e.payload.size()));
    out.insert(out.end(), e.payload.begin(), e.payload.end());
    return out;
}

Envelope decode(ByteView bytes) {
    if (bytes.size() < wire::header_size)
        throw Error(ErrorCode::Truncated, std::to_string(bytes.size()) + " bytes is shorter than the header");
    if (!std::equal(wire::magic.begin(), wire::magic.end(), bytes.begin()))
        throw Error(ErrorCode::BadMagic, "frame does not start with IPSM");
    if (bytes[4] != wire::version)
        throw Error(ErrorCode::BadVersion, "unsupported version " + std::to_string(bytes[4]));

    Envelope e;
    e.ttl = bytes[6];
    e.id = get_id(bytes.subspan(8));
    if (bytes[5] & wire::flag_reply_to) e.reply_to = get_id(bytes.subspan(24));
    const std::uint32_t len = get_u32(bytes.subspan(40));
    if (bytes.size() - wire::header_size < len)
        throw Error(ErrorCode::Truncated, "declared payload of " + std::to_string(len) + " bytes, have " +
                                              std::to_string(bytes.size() - wire::header_size));
    if (e.id.is_zero()) throw Error(ErrorCode::ZeroId, "decoded envelope has the reserved zero id");
    auto body = bytes.subspan(wire::header_size, len);
    e.payload.assign(body.begin(), body.end());
    return e;
}

}  // namespace ipsme
