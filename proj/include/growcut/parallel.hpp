#pragma once

#include <condition_variable>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace growcut {

/// 0 means "auto" (hardware concurrency); anything else is taken as-is, min 1.
int resolve_workers(int requested);

/// Fixed set of blocking worker threads. `run(n, fn)` calls fn(0..n-1) across
/// the workers plus the calling thread and returns when all calls finished.
/// Task-to-thread assignment is dynamic; callers make each task write only
/// its own outputs so results never depend on scheduling.
class WorkerPool {
public:
    explicit WorkerPool(int workers);
    ~WorkerPool();

    WorkerPool(const WorkerPool&) = delete;
    WorkerPool& operator=(const WorkerPool&) = delete;

    int size() const noexcept { return static_cast<int>(threads_.size()) + 1; }

    void run(std::size_t tasks, const std::function<void(std::size_t)>& fn);

private:
    void worker_loop();
    void drain();

    std::vector<std::thread> threads_;
    std::mutex mutex_;
    std::condition_variable wake_;
    std::condition_variable done_;
    const std::function<void(std::size_t)>* job_ = nullptr;
    std::size_t next_task_ = 0;
    std::size_t task_count_ = 0;
    std::size_t finished_ = 0;
    std::size_t generation_ = 0;
    std::exception_ptr error_;
    bool stopping_ = false;
};

} // namespace growcut
