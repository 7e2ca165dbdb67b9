#pragma once

#include <algorithm>
#include <cstddef>
#include <deque>
#include <condition_variable>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace ebic {

// Minimal persistent worker pool with a locked task queue. Call sites submit
// a batch of indexed tasks and block until the batch drains; only one batch
// is in flight at a time (the evolution loop is single-threaded).
class ThreadPool {
public:
    explicit ThreadPool(unsigned n_threads) {
        if (n_threads == 0) n_threads = 1;
        workers_.reserve(n_threads);
        for (unsigned i = 0; i < n_threads; ++i)
            workers_.emplace_back([this] { worker_loop(); });
    }

    ~ThreadPool() {
        {
            std::lock_guard<std::mutex> lock(mutex_);
            shutting_down_ = true;
        }
        work_cv_.notify_all();
        for (auto& w : workers_) w.join();
    }

    ThreadPool(const ThreadPool&) = delete;
    ThreadPool& operator=(const ThreadPool&) = delete;

    unsigned size() const { return static_cast<unsigned>(workers_.size()); }

    void run_indexed(std::size_t n_tasks, const std::function<void(std::size_t)>& task) {
        if (n_tasks == 0) return;
        if (n_tasks == 1) {
            task(0);
            return;
        }
        {
            std::lock_guard<std::mutex> lock(mutex_);
            outstanding_ += n_tasks;
            for (std::size_t i = 0; i < n_tasks; ++i)
                queue_.emplace_back([&task, i] { task(i); });
        }
        work_cv_.notify_all();
        std::unique_lock<std::mutex> lock(mutex_);
        done_cv_.wait(lock, [this] { return outstanding_ == 0; });
    }

    // Process-wide pool sized to the hardware; lazily constructed.
    static ThreadPool& shared() {
        static ThreadPool pool(std::max(1u, std::thread::hardware_concurrency()));
        return pool;
    }

private:
    void worker_loop() {
        for (;;) {
            std::function<void()> job;
            {
                std::unique_lock<std::mutex> lock(mutex_);
                work_cv_.wait(lock, [this] { return shutting_down_ || !queue_.empty(); });
                if (queue_.empty()) return;  // shutting down
                job = std::move(queue_.front());
                queue_.pop_front();
            }
            job();
            {
                std::lock_guard<std::mutex> lock(mutex_);
                if (--outstanding_ == 0) done_cv_.notify_all();
            }
        }
    }

    std::vector<std::thread> workers_;
    std::mutex mutex_;
    std::condition_variable work_cv_;
    std::condition_variable done_cv_;
    std::deque<std::function<void()>> queue_;
    std::size_t outstanding_ = 0;
    bool shutting_down_ = false;
};

}  // namespace ebic
