#include "mcastsim/event_loop.hpp"

#include "mcastsim/errors.hpp"

#include <algorithm>

namespace mcastsim {

std::string LogRecord::str() const {
    std::string out = std::to_string(time);
    out += ' ';
    out += node;
    out += ' ';
    out += kind;
    if (!detail.empty()) {
        out += ' ';
        out += detail;
    }
    return out;
}

void EventLog::append(SimTime time, std::string node, std::string kind, std::string detail) {
    records_.push_back(LogRecord{time, std::move(node), std::move(kind), std::move(detail)});
}

std::string EventLog::str() const {
    std::string out;
    for (const auto& rec : records_) {
        out += rec.str();
        out += '\n';
    }
    return out;
}

bool EventLoop::QueueCmp::operator()(const Entry& a, const Entry& b) const {
    // std::push_heap builds a max-heap; invert for earliest-first.
    if (a.time != b.time) return a.time > b.time;
    return a.seq > b.seq;
}

EventHandle EventLoop::schedule(SimTime at, std::function<void()> fn) {
    if (at < now_) {
        throw SchedulingInPast("schedule at " + std::to_string(at) + " < now " +
                               std::to_string(now_));
    }
    Entry entry;
    entry.time = at;
    entry.seq = next_seq_++;
    entry.fn = std::move(fn);
    entry.rec = std::make_shared<EventHandle::Rec>();
    EventHandle handle(entry.rec);
    queue_.push_back(std::move(entry));
    std::push_heap(queue_.begin(), queue_.end(), QueueCmp{});
    return handle;
}

void EventLoop::cancel(EventHandle& handle) {
    if (auto rec = handle.rec_.lock()) rec->canceled = true;
    handle.rec_.reset();
}

void EventLoop::dispatch_front() {
    std::pop_heap(queue_.begin(), queue_.end(), QueueCmp{});
    Entry entry = std::move(queue_.back());
    queue_.pop_back();
    now_ = entry.time;
    if (entry.rec->canceled) return;
    ++dispatched_;
    entry.fn();
    if (post_dispatch_) post_dispatch_();
}

void EventLoop::run_until(SimTime t) {
    while (!queue_.empty() && queue_.front().time <= t) dispatch_front();
    now_ = std::max(now_, t);
}

void EventLoop::run_all() {
    while (!queue_.empty()) dispatch_front();
}

} // namespace mcastsim
