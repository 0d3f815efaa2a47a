#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <queue>
#include <string>
#include <vector>

namespace mcastsim {

/// Simulated time in integer milliseconds.
using SimTime = int64_t;

/// One line of the run log: `<ticks> <node> <kind> <detail...>`.
struct LogRecord {
    SimTime time = 0;
    std::string node;
    std::string kind;
    std::string detail;

    std::string str() const;
};

/// Append-only record of everything a run did, in dispatch order.
class EventLog {
public:
    void append(SimTime time, std::string node, std::string kind, std::string detail);

    const std::vector<LogRecord>& records() const { return records_; }
    std::string str() const;

private:
    std::vector<LogRecord> records_;
};

class EventLoop;

/// Cancelable handle to a scheduled event.
class EventHandle {
public:
    EventHandle() = default;
    bool valid() const { return !rec_.expired(); }

private:
    friend class EventLoop;
    struct Rec;
    explicit EventHandle(std::weak_ptr<Rec> rec) : rec_(std::move(rec)) {}
    std::weak_ptr<Rec> rec_;
};

/// Deterministic single-threaded event queue. Events at the same tick
/// dispatch in insertion order.
class EventLoop {
public:
    SimTime now() const { return now_; }

    /// Queues `fn` to run at simulated time `at`. Throws SchedulingInPast
    /// if `at` is earlier than the current time.
    EventHandle schedule(SimTime at, std::function<void()> fn);

    void cancel(EventHandle& handle);

    /// Dispatches every event with time <= t, then advances the clock to t.
    void run_until(SimTime t);

    /// Dispatches until the queue is empty.
    void run_all();

    bool empty() const { return queue_.empty(); }
    size_t dispatched() const { return dispatched_; }

    /// Invoked after each dispatched event; used by consistency checks.
    void set_post_dispatch_hook(std::function<void()> hook) { post_dispatch_ = std::move(hook); }

    EventLog& log() { return log_; }
    const EventLog& log() const { return log_; }

private:
    friend class EventHandle;

    struct Entry;
    void dispatch_front();

    SimTime now_ = 0;
    uint64_t next_seq_ = 0;
    size_t dispatched_ = 0;
    std::function<void()> post_dispatch_;
    EventLog log_;

    struct QueueCmp {
        bool operator()(const Entry& a, const Entry& b) const;
    };
    std::vector<Entry> queue_; // heap ordered by (time, seq)
};

struct EventHandle::Rec {
    bool canceled = false;
};

struct EventLoop::Entry {
    SimTime time = 0;
    uint64_t seq = 0;
    std::function<void()> fn;
    std::shared_ptr<EventHandle::Rec> rec;
};

/// Single-deadline timer that can be re-armed; re-arming or destroying it
/// cancels the pending callback.
class RearmableTimer {
public:
    explicit RearmableTimer(EventLoop& loop) : loop_(&loop) {}
    ~RearmableTimer() { cancel(); }

    RearmableTimer(const RearmableTimer&) = delete;
    RearmableTimer& operator=(const RearmableTimer&) = delete;

    void arm(SimTime at, std::function<void()> fn) {
        cancel();
        due_ = at;
        handle_ = loop_->schedule(at, std::move(fn));
    }

    void cancel() {
        if (handle_.valid()) loop_->cancel(handle_);
        due_ = -1;
    }

    bool armed() const { return handle_.valid(); }
    SimTime due() const { return due_; }

private:
    EventLoop* loop_;
    EventHandle handle_;
    SimTime due_ = -1;
};

} // namespace mcastsim
