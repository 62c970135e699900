#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <mutex>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ipsme {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

Bytes to_bytes(std::string_view text);
std::string to_string(ByteView bytes);

/// 128-bit message identity. The all-zero value means "absent".
class MessageId {
public:
    static constexpr std::size_t size = 16;

    constexpr MessageId() = default;
    explicit constexpr MessageId(const std::array<std::uint8_t, size> &raw) : _raw(raw) {}

    bool is_zero() const noexcept;
    const std::array<std::uint8_t, size> &raw() const noexcept { return _raw; }
    std::string hex() const;

    friend bool operator==(const MessageId &, const MessageId &) = default;
    friend auto operator<=>(const MessageId &, const MessageId &) = default;

private:
    std::array<std::uint8_t, size> _raw{};
};

struct MessageIdHash {
    std::size_t operator()(const MessageId &id) const noexcept;
};

/// Seeded generator of non-zero message ids. Thread-safe; a given seed
/// always yields the same id sequence when drawn from a single thread.
class IdSource {
public:
    explicit IdSource(std::uint64_t seed);

    MessageId next();

private:
    std::mutex _mx;
    std::mt19937_64 _rng;
};

inline constexpr std::uint8_t default_ttl = 16;

struct Envelope {
    MessageId id;
    MessageId reply_to;  // zero when absent
    std::uint8_t ttl = default_ttl;
    Bytes payload;

    bool has_reply_to() const noexcept { return !reply_to.is_zero(); }

    friend bool operator==(const Envelope &, const Envelope &) = default;
};

Envelope new_envelope(Bytes payload, IdSource &ids, std::uint8_t ttl = default_ttl);

/// A reply starts a new lineage: fresh id, full ttl, reply_to naming the request.
Envelope derive_reply(const Envelope &original, Bytes payload, IdSource &ids,
                      std::uint8_t ttl = default_ttl);

/// A transformed copy is a new message one hop further down the lineage.
/// Throws Error(TtlExhausted) when the original has no budget left.
Envelope derive_transformed(const Envelope &original, Bytes new_payload, IdSource &ids);

namespace wire {
inline constexpr std::array<std::uint8_t, 4> magic{0x49, 0x50, 0x53, 0x4D};
inline constexpr std::uint8_t version = 0x01;
inline constexpr std::uint8_t flag_reply_to = 0x01;
inline constexpr std::size_t header_size = 44;
}  // namespace wire

Bytes encode(const Envelope &e);
Envelope decode(ByteView bytes);

}  // namespace ipsme
