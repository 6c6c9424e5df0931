#pragma once

#include <atomic>
#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace fractalgen {

// Fixed pool running one indexed job at a time. parallel_for blocks until
// every index has been processed and every worker has left the job, so job
// state can be reset safely for the next call. The calling thread
// participates in the work. The first exception thrown by a body wins and
// is rethrown on the caller once the job drains.
class ThreadPool {
public:
    explicit ThreadPool(unsigned workers = std::thread::hardware_concurrency()) {
        if (workers == 0) workers = 1;
        threads_.reserve(workers);
        for (unsigned i = 0; i < workers; ++i)
            threads_.emplace_back([this] { worker_loop(); });
    }

    ~ThreadPool() {
        {
            std::lock_guard<std::mutex> lock(mu_);
            stop_ = true;
        }
        job_cv_.notify_all();
        for (auto& t : threads_) t.join();
    }

    ThreadPool(const ThreadPool&) = delete;
    ThreadPool& operator=(const ThreadPool&) = delete;

    unsigned size() const { return static_cast<unsigned>(threads_.size()); }

    void parallel_for(size_t count, const std::function<void(size_t)>& body) {
        if (count == 0) return;
        {
            std::lock_guard<std::mutex> lock(mu_);
            body_ = &body;
            count_ = count;
            next_.store(0, std::memory_order_relaxed);
            done_.store(0, std::memory_order_relaxed);
            error_ = nullptr;
            ++job_id_;
        }
        job_cv_.notify_all();

        drain();

        std::unique_lock<std::mutex> lock(mu_);
        done_cv_.wait(lock, [this] {
            return done_.load(std::memory_order_acquire) == count_ && active_ == 0;
        });
        body_ = nullptr;
        if (error_) std::rethrow_exception(error_);
    }

private:
    void drain() {
        size_t i;
        while ((i = next_.fetch_add(1, std::memory_order_relaxed)) < count_) {
            try {
                (*body_)(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(mu_);
                if (!error_) error_ = std::current_exception();
            }
            if (done_.fetch_add(1, std::memory_order_acq_rel) + 1 == count_)
                done_cv_.notify_all();
        }
    }

    void worker_loop() {
        uint64_t seen = 0;
        for (;;) {
            std::unique_lock<std::mutex> lock(mu_);
            job_cv_.wait(lock, [&] { return stop_ || job_id_ != seen; });
            if (stop_) return;
            seen = job_id_;
            ++active_;
            lock.unlock();

            drain();

            lock.lock();
            --active_;
            if (active_ == 0) done_cv_.notify_all();
        }
    }

    std::vector<std::thread> threads_;
    std::mutex mu_;
    std::condition_variable job_cv_;
    std::condition_variable done_cv_;
    const std::function<void(size_t)>* body_ = nullptr;
    size_t count_ = 0;
    std::atomic<size_t> next_{0};
    std::atomic<size_t> done_{0};
    std::exception_ptr error_;
    uint64_t job_id_ = 0;
    unsigned active_ = 0;
    bool stop_ = false;
};

}  // namespace fractalgen
