#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <optional>

#include "ipsme/envelope.hpp"

namespace ipsme {

/// Frames are a 4-byte big-endian length followed by exactly that many bytes.
Bytes encode_frame(ByteView body);

/// Reassembles frames from arbitrary stream chunks.
class FrameDecoder {
public:
    void feed(ByteView chunk);
    std::optional<Bytes> next();
    std::size_t buffered() const noexcept { return _buffer.size(); }

private:
    std::deque<std::uint8_t> _buffer;
};

/// One end of a reliable, ordered byte stream.
class ByteStream {
public:
    using Receiver = std::function<void(ByteView)>;
    using ClosedHandler = std::function<void()>;

    virtual ~ByteStream() = default;

    /// Returns false once the stream is unusable.
    virtual bool write(ByteView bytes) = 0;
    /// Starts delivering incoming bytes. Bytes written by the peer before
    /// start() are held and handed over first.
    virtual void start(Receiver on_bytes, ClosedHandler on_closed) = 0;
    virtual void close() = 0;
};

struct StreamPair {
    std::unique_ptr<ByteStream> a;
    std::unique_ptr<ByteStream> b;
};

/// Produces a connected pair of streams. Throws Error(LinkFailed) when the
/// connection cannot be established.
using LinkTransport = std::function<StreamPair()>;

/// In-process pipe. The peer's receiver runs on the writer's thread.
StreamPair make_memory_pipe();

/// TCP connection over 127.0.0.1; each end runs its own reader thread.
StreamPair make_loopback_tcp();

}  // namespace ipsme
