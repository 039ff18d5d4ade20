#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <mutex>
#include <optional>
#include <vector>

namespace cppo {

// Bounded multi-producer FIFO of serialized experience frames. When full, the
// oldest frame is dropped (and counted) so samplers never block on a slow
// trainer. close() wakes all waiting consumers.
class ExperienceQueue {
public:
    explicit ExperienceQueue(std::size_t capacity) : capacity_(capacity) {}

    void push(std::vector<std::uint8_t> frame) {
        std::lock_guard<std::mutex> lock(m_);
        if (closed_) return;
        ++produced_;
        if (q_.size() >= capacity_) {
            q_.pop_front();
            ++dropped_;
        }
        q_.push_back(std::move(frame));
        cv_.notify_one();
    }

    // Blocks until a frame is available or the queue is closed and drained.
    std::optional<std::vector<std::uint8_t>> pop() {
        std::unique_lock<std::mutex> lock(m_);
        cv_.wait(lock, [&] { return !q_.empty() || closed_; });
        if (q_.empty()) return std::nullopt;
        auto f = std::move(q_.front());
        q_.pop_front();
        ++consumed_;
        return f;
    }

    void close() {
        std::lock_guard<std::mutex> lock(m_);
        closed_ = true;
        cv_.notify_all();
    }

    struct Counters {
        std::uint64_t produced = 0, consumed = 0, dropped = 0, in_queue = 0;
    };
    Counters counters() const {
        std::lock_guard<std::mutex> lock(m_);
        return Counters{produced_, consumed_, dropped_, q_.size()};
    }

private:
    mutable std::mutex m_;
    std::condition_variable cv_;
    std::deque<std::vector<std::uint8_t>> q_;
    std::size_t capacity_;
    bool closed_ = false;
    std::uint64_t produced_ = 0, consumed_ = 0, dropped_ = 0;
};

} // namespace cppo
