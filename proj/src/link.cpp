#include "ipsme/link.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <cstring>
#include <limits>
#include <mutex>
#include <thread>

#include "ipsme/error.hpp"

namespace ipsme {

Bytes encode_frame(ByteView body) {
    if (body.size() > std::numeric_limits<std::uint32_t>::max())
        throw Error(ErrorCode::InvalidArgument, "frame body exceeds 2^32-1 bytes");
    const auto n = static_cast<std::uint32_t>(body.size());
    Bytes out;
    out.reserve(4 + body.size());
    out.push_back(static_cast<std::uint8_t>(n >> 24));
    out.push_back(static_cast<std::uint8_t>(n >> 16));
    out.push_back(static_cast<std::uint8_t>(n >> 8));
    out.push_back(static_cast<std::uint8_t>(n));
    out.insert(out.end(), body.begin(), body.end());
    return out;
}

void FrameDecoder::feed(ByteView chunk) {
    _buffer.insert(_buffer.end(), chunk.begin(), chunk.end());
}

std::optional<Bytes> FrameDecoder::next() {
    if (_buffer.size() < 4) return std::nullopt;
    const std::uint32_t n = (std::uint32_t{_buffer[0]} << 24) | (std::uint32_t{_buffer[1]} << 16) |
                            (std::uint32_t{_buffer[2]} << 8) | std::uint32_t{_buffer[3]};
    if (_buffer.size() - 4 < n) return std::nullopt;
    Bytes body(_buffer.begin() + 4, _buffer.begin() + 4 + n);
    _buffer.erase(_buffer.begin(), _buffer.begin() + 4 + n);
    return body;
}

namespace {

struct PipeSide {
    std::mutex mx;
    ByteStream::Receiver receiver;
    ByteStream::ClosedHandler on_closed;
    std::vector<Bytes> held;
    bool started = false;
};

struct PipeState {
    std::atomic<bool> closed{false};
    PipeSide sides[2];
};

class MemoryStream final : public ByteStream {
public:
    MemoryStream(std::shared_ptr<PipeState> state, int self) : _state(std::move(state)), _self(self) {}
    ~MemoryStream() override { close(); }

    bool write(ByteView bytes) override {
        if (_state->closed) return false;
        auto &peer = _state->sides[1 - _self];
        Receiver rx;
        {
            std::lock_guard lk(peer.mx);
            if (!peer.started) {
                peer.held.emplace_back(bytes.begin(), bytes.end());
                return true;
            }
            rx = peer.receiver;
        }
        rx(bytes);
        return true;
    }

    void start(Receiver on_bytes, ClosedHandler on_closed) override {
        auto &me = _state->sides[_self];
        std::vector<Bytes> held;
        {
            std::lock_guard lk(me.mx);
            me.receiver = std::move(on_bytes);
            me.on_closed = std::move(on_closed);
            me.started = true;
            held.swap(me.held);
        }
        for (const auto &chunk : held) me.receiver(chunk);
    }

    void close() override {
        if (_state->closed.exchange(true)) return;
        for (auto &side : _state->sides) {
            ClosedHandler h;
            {
                std::lock_guard lk(side.mx);
                h = side.on_closed;
            }
            if (h) h();
        }
    }

private:
    std::shared_ptr<PipeState> _state;
    int _self;
};

class TcpStream final : public ByteStream {
public:
    explicit TcpStream(int fd) : _fd(fd) {}
    ~TcpStream() override {
        close();
        if (_reader.joinable()) {
            if (_reader.get_id() == std::this_thread::get_id())
                _reader.detach();
            else
                _reader.join();
        }
        ::close(_fd);
    }

    bool write(ByteView bytes) override {
        std::lock_guard lk(_write_mx);
        std::size_t off = 0;
        while (off < bytes.size()) {
            ssize_t n = ::send(_fd, bytes.data() + off, bytes.size() - off, MSG_NOSIGNAL);
            if (n < 0 && errno == EINTR) continue;
            if (n <= 0) return false;
            off += static_cast<std::size_t>(n);
        }
        return true;
    }

    void start(Receiver on_bytes, ClosedHandler on_closed) override {
        _reader = std::thread([this, rx = std::move(on_bytes), closed = std::move(on_closed)] {
            std::uint8_t buf[16384];
            for (;;) {
                ssize_t n = ::recv(_fd, buf, sizeof buf, 0);
                if (n < 0 && errno == EINTR) continue;
                if (n <= 0) break;
                rx(ByteView(buf, static_cast<std::size_t>(n)));
            }
            if (closed) closed();
        });
    }

    void close() override {
        if (_shut.exchange(true)) return;
        ::shutdown(_fd, SHUT_RDWR);
    }

private:
    int _fd;
    std::atomic<bool> _shut{false};
    std::mutex _write_mx;
    std::thread _reader;
};

[[noreturn]] void link_failed(const char *what) {
    throw Error(ErrorCode::LinkFailed, std::string(what) + ": " + std::strerror(errno));
}

}  // namespace

StreamPair make_memory_pipe() {
    auto state = std::make_shared<PipeState>();
    return {std::make_unique<MemoryStream>(state, 0), std::make_unique<MemoryStream>(state, 1)};
}

StreamPair make_loopback_tcp() {
    int listener = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listener < 0) link_failed("socket");
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = 0;
    socklen_t len = sizeof addr;
    if (::bind(listener, reinterpret_cast<sockaddr *>(&addr), sizeof addr) != 0 || ::listen(listener, 1) != 0 ||
        ::getsockname(listener, reinterpret_cast<sockaddr *>(&addr), &len) != 0) {
        ::close(listener);
        link_failed("listen");
    }
    int client = ::socket(AF_INET, SOCK_STREAM, 0);
    if (client < 0 || ::connect(client, reinterpret_cast<sockaddr *>(&addr), sizeof addr) != 0) {
        if (client >= 0) ::close(client);
        ::close(listener);
        link_failed("connect");
    }
    int server = ::accept(listener, nullptr, nullptr);
    ::close(listener);
    if (server < 0) {
        ::close(client);
        link_failed("accept");
    }
    int one = 1;
    ::setsockopt(client, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    ::setsockopt(server, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    return {std::make_unique<TcpStream>(client), std::make_unique<TcpStream>(server)};
}

}  // namespace ipsme
