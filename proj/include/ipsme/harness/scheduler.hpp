#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "ipsme/participant.hpp"

namespace ipsme::harness {

struct QuiescenceProbe {
    std::function<bool()> should_abort;
    /// Extra work the scheduler cannot see, e.g. frames inside sockets.
    std::function<bool()> externally_idle;
    std::function<std::uint64_t()> event_count;
};

/// Runs actor work. Every strand executes its tasks one at a time, in post order.
class Scheduler {
public:
    virtual ~Scheduler() = default;

    virtual Dispatch make_strand(const std::string &name) = 0;
    /// Returns true on quiescence, false when aborted or out of wall time.
    virtual bool run_until_quiescent(const QuiescenceProbe &probe, std::chrono::milliseconds wall_limit) = 0;
    virtual void shutdown() = 0;
};

/// Single activity: one FIFO shared by all strands, drained on the caller's
/// thread. Identical inputs give identical interleavings.
class DeterministicScheduler final : public Scheduler {
public:
    Dispatch make_strand(const std::string &name) override;
    bool run_until_quiescent(const QuiescenceProbe &probe, std::chrono::milliseconds wall_limit) override;
    void shutdown() override;

private:
    std::deque<std::function<void()>> _queue;
    bool _stopped = false;
};

/// Strands multiplexed over a fixed pool of worker threads.
class ThreadPoolScheduler final : public Scheduler {
public:
    explicit ThreadPoolScheduler(unsigned workers = 0);
    ~ThreadPoolScheduler() override;

    Dispatch make_strand(const std::string &name) override;
    bool run_until_quiescent(const QuiescenceProbe &probe, std::chrono::milliseconds wall_limit) override;
    void shutdown() override;

    std::int64_t in_flight() const noexcept { return _in_flight.load(); }

private:
    struct Strand {
        std::mutex mx;
        std::deque<std::function<void()>> tasks;
        bool scheduled = false;
    };

    void post(const std::shared_ptr<Strand> &strand, std::function<void()> task);
    void worker();

    std::mutex _mx;
    std::condition_variable _cv;
    std::deque<std::shared_ptr<Strand>> _ready;
    std::vector<std::thread> _threads;
    std::atomic<std::int64_t> _in_flight{0};
    std::atomic<bool> _dropping{false};
    bool _stopping = false;
};

}  // namespace ipsme::harness
