#include "ipsme/harness/scheduler.hpp"

#include <algorithm>

namespace ipsme::harness {

Dispatch DeterministicScheduler::make_strand(const std::string &) {
    // one global FIFO already serializes everything
    return [this](std::function<void()> task) {
        if (!_stopped) _queue.push_back(std::move(task));
    };
}

bool DeterministicScheduler::run_until_quiescent(const QuiescenceProbe &probe, std::chrono::milliseconds wall_limit) {
    const auto deadline = std::chrono::steady_clock::now() + wall_limit;
    std::uint64_t steps = 0;
    while (!_queue.empty()) {
        if (probe.should_abort && probe.should_abort()) {
            _queue.clear();
            return false;
        }
        if ((++steps & 0x3FF) == 0 && std::chrono::steady_clock::now() > deadline) {
            _queue.clear();
            return false;
        }
        auto task = std::move(_queue.front());
        _queue.pop_front();
        task();
    }
    return !(probe.should_abort && probe.should_abort());
}

void DeterministicScheduler::shutdown() {
    _stopped = true;
    _queue.clear();
}

ThreadPoolScheduler::ThreadPoolScheduler(unsigned workers) {
    if (workers == 0) workers = std::max(2u, std::thread::hardware_concurrency());
    for (unsigned i = 0; i < workers; ++i) _threads.emplace_back([this] { worker(); });
}

ThreadPoolScheduler::~ThreadPoolScheduler() {
    shutdown();
}

Dispatch ThreadPoolScheduler::make_strand(const std::string &) {
    auto strand = std::make_shared<Strand>();
    return [this, strand](std::function<void()> task) { post(strand, std::move(task)); };
}

void ThreadPoolScheduler::post(const std::shared_ptr<Strand> &strand, std::function<void()> task) {
    if (_dropping) return;
    _in_flight.fetch_add(1);
    bool enqueue = false;
    {
        std::lock_guard lk(strand->mx);
        strand->tasks.push_back(std::move(task));
        if (!strand->scheduled) {
            strand->scheduled = true;
            enqueue = true;
        }
    }
    if (enqueue) {
        std::lock_guard lk(_mx);
        _ready.push_back(strand);
        _cv.notify_one();
    }
}

void ThreadPoolScheduler::worker() {
    for (;;) {
        std::shared_ptr<Strand> strand;
        {
            std::unique_lock lk(_mx);
            _cv.wait(lk, [this] { return _stopping || !_ready.empty(); });
            if (_stopping && _ready.empty()) return;
            strand = std::move(_ready.front());
            _ready.pop_front();
        }
        // bounded batch so one busy strand cannot starve the rest
        for (int batch = 0; batch < 64; ++batch) {
            std::function<void()> task;
            {
                std::lock_guard lk(strand->mx);
                if (strand->tasks.empty()) break;
                task = std::move(strand->tasks.front());
                strand->tasks.pop_front();
            }
            if (!_dropping) task();
            task = nullptr;
            _in_flight.fetch_sub(1);
        }
        bool again = false;
        {
            std::lock_guard lk(strand->mx);
            if (strand->tasks.empty())
                strand->scheduled = false;
            else
                again = true;
        }
        if (again) {
            std::lock_guard lk(_mx);
            _ready.push_back(std::move(strand));
            _cv.notify_one();
        }
    }
}

bool ThreadPoolScheduler::run_until_quiescent(const QuiescenceProbe &probe, std::chrono::milliseconds wall_limit) {
    using namespace std::chrono_literals;
    const auto deadline = std::chrono::steady_clock::now() + wall_limit;
    std::uint64_t last_events = probe.event_count ? probe.event_count() : 0;
    int stable_polls = 0;
    for (;;) {
        if (probe.should_abort && probe.should_abort()) {
            _dropping = true;
            return false;
        }
        if (std::chrono::steady_clock::now() > deadline) {
            _dropping = true;
            return false;
        }
        std::this_thread::sleep_for(1ms);
        const std::uint64_t events = probe.event_count ? probe.event_count() : 0;
        const bool idle = _in_flight.load() == 0 && (!probe.externally_idle || probe.externally_idle());
        if (idle && events == last_events) {
            if (++stable_polls >= 3) return true;
        } else {
            stable_polls = 0;
        }
        last_events = events;
    }
}

void ThreadPoolScheduler::shutdown() {
    _dropping = true;
    {
        std::lock_guard lk(_mx);
        if (_stopping) return;
        _stopping = true;
    }
    _cv.notify_all();
    for (auto &t : _threads)
        if (t.joinable()) t.join();
}

}  // namespace ipsme::harness
