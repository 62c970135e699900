#include <atomic>
#include <chrono>
#include <condition_variable>
#include <mutex>
#include <random>
#include <thread>

#include "doctest.h"

#include "ipsme/link.hpp"

using namespace ipsme;
using namespace std::chrono_literals;

TEST_CASE("frame is a big-endian length prefix plus body") {
    const Bytes body = to_bytes("abc");
    CHECK(encode_frame(body) == Bytes{0, 0, 0, 3, 'a', 'b', 'c'});
    CHECK(encode_frame({}) == Bytes{0, 0, 0, 0});
}

TEST_CASE("decoder reassembles frames from any chunking") {
    std::mt19937_64 rng(8);
    std::vector<Bytes> bodies;
    Bytes stream;
    for (int i = 0; i < 200; ++i) {
        Bytes body(rng() % 70);
        for (auto &b : body) b = static_cast<std::uint8_t>(rng());
        auto frame = encode_frame(body);
        stream.insert(stream.end(), frame.begin(), frame.end());
        bodies.push_back(std::move(body));
    }
    for (int trial = 0; trial < 20; ++trial) {
        FrameDecoder dec;
        std::vector<Bytes> out;
        std::size_t pos = 0;
        while (pos < stream.size()) {
            const std::size_t n = std::min<std::size_t>(stream.size() - pos, 1 + rng() % 97);
            dec.feed(ByteView(stream).subspan(pos, n));
            pos += n;
            while (auto f = dec.next()) out.push_back(std::move(*f));
        }
        CHECK(out == bodies);
        CHECK(dec.buffered() == 0);
    }
}

TEST_CASE("memory pipe holds bytes until the reader starts") {
    auto [a, b] = make_memory_pipe();
    CHECK(a->write(to_bytes("early")));
    Bytes got;
    b->start([&](ByteView chunk) { got.insert(got.end(), chunk.begin(), chunk.end()); }, nullptr);
    CHECK(a->write(to_bytes("+late")));
    CHECK(to_string(got) == "early+late");

    bool closed = false;
    a->start([](ByteView) {}, [&] { closed = true; });
    b->close();
    CHECK(closed);
    CHECK_FALSE(a->write(to_bytes("x")));
}

TEST_CASE("loopback tcp carries frames in order") {
    auto [a, b] = make_loopback_tcp();
    std::mutex mx;
    std::condition_variable cv;
    FrameDecoder dec;
    std::vector<Bytes> frames;
    std::atomic<bool> closed{false};
    b->start(
        [&](ByteView chunk) {
            std::lock_guard lk(mx);
            dec.feed(chunk);
            while (auto f = dec.next()) frames.push_back(std::move(*f));
            cv.notify_all();
        },
        [&] { closed = true; });
    for (int i = 0; i < 100; ++i) REQUIRE(a->write(encode_frame(to_bytes("frame" + std::to_string(i)))));
    {
        std::unique_lock lk(mx);
        REQUIRE(cv.wait_for(lk, 5s, [&] { return frames.size() == 100; }));
    }
    for (int i = 0; i < 100; ++i) CHECK(to_string(frames[static_cast<std::size_t>(i)]) == "frame" + std::to_string(i));

    a->close();
    for (int i = 0; i < 500 && !closed; ++i) std::this_thread::sleep_for(2ms);
    CHECK(closed);
}
